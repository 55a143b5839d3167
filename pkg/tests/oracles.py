"""Brute-force reference implementations, written without the package's algebra code."""

from __future__ import annotations

import cmath
import itertools
import math

import numpy as np


def permutation_sign(seq) -> int:
    """Sign of the permutation sorting ``seq`` (distinct entries), by bubble sort."""
    s = list(seq)
    sign = 1
    for i in range(len(s)):
        for j in range(len(s) - 1 - i):
            if s[j] > s[j + 1]:
                s[j], s[j + 1] = s[j + 1], s[j]
                sign = -sign
    return sign


def wedge_sign(I, J) -> int:
    """theta^I theta^J = sign theta^{I u J}; 0 on overlap."""
    if set(I) & set(J):
        return 0
    return permutation_sign(list(I) + list(J))


def clifford_word_product(I, J, square):
    """Multiply xi^I xi^J in the algebra xi_i xi_j = -xi_j xi_i (i != j), xi_i^2 = square.

    Returns (coefficient, sorted members).  Pure word rewriting.
    """
    word = list(I) + list(J)
    coef = 1
    changed = True
    while changed:
        changed = False
        for p in range(len(word) - 1):
            if word[p] > word[p + 1]:
                word[p], word[p + 1] = word[p + 1], word[p]
                coef = -coef
                changed = True
                break
            if word[p] == word[p + 1]:
                del word[p:p + 2]
                coef = coef * square
                changed = True
                break
    return coef, tuple(word)


def subsets(n: int):
    for k in range(n + 1):
        yield from itertools.combinations(range(1, n + 1), k)


def mask(members) -> int:
    return sum(1 << (i - 1) for i in members)


def moyal_quadrature(f, g, x, theta, half=6.0, step=0.2):
    """(f * g)(x) = (pi theta)^-2 int dy dz f(x+y) g(x+z) exp((2i/theta)(y1 z2 - y2 z1)).

    Plain Riemann sum over a 4-d box; f and g are callables on 2-d arrays.
    """
    t = np.arange(-half, half + step / 2, step)
    Y1, Y2 = np.meshgrid(t, t, indexing="ij")
    F = f(x[0] + Y1, x[1] + Y2)
    G = g(x[0] + Y1, x[1] + Y2)
    c = 2.0 / theta
    E = np.exp(1j * c * np.outer(t, t))           # e^{i c y1 z2}
    Ec = np.conj(E)                               # e^{-i c y2 z1}
    # sum_{y1,y2,z1,z2} F[y1,y2] G[z1,z2] E[y1,z2] Ec[y2,z1]
    total = np.einsum("ab,cd,ad,bc->", F, G, E, Ec, optimize=True)
    return total * step ** 4 / (math.pi * theta) ** 2


def plane_wave_phase_regularised(k, kp, theta, eps_values=(0.06, 0.045, 0.03, 0.015, 0.01)):
    """Phase of e^{ik.x} * e^{ik'.x} at x = 0 from the oscillatory integral.

    A factor e^{-eps(|y|^2 + |z|^2)} makes the integral absolutely convergent;
    the kernel splits into the (y1, z2) and (y2, z1) planes, each summed on a
    fine grid.  The eps -> 0 value is obtained by polynomial extrapolation.
    """
    vals = []
    c = 2.0 / theta
    for eps in eps_values:
        half = math.sqrt(40.0 / eps)
        step = min(0.05, 0.25 * theta * math.sqrt(eps))
        t = np.arange(-half, half + step / 2, step)
        damp = np.exp(-eps * t ** 2)
        a1 = np.exp(1j * k[0] * t) * damp
        b2 = np.exp(1j * kp[1] * t) * damp
        a2 = np.exp(1j * k[1] * t) * damp
        b1 = np.exp(1j * kp[0] * t) * damp
        p1 = a1 @ np.exp(1j * c * np.outer(t, t)) @ b2
        p2 = a2 @ np.exp(-1j * c * np.outer(t, t)) @ b1
        vals.append(p1 * p2 * step ** 4 / (math.pi * theta) ** 2)
    e = np.asarray(eps_values)
    coef = np.polyfit(e, np.asarray(vals), len(e) - 1)
    return complex(coef[-1])


def odd_fourier_bruteforce_n1(beta, a0, f0, f1):
    """F_beta(f0 + f1 xi) for one generator, by hand.

    exp(-(i a0 beta/2) 2 xi xi0) = 1 - i a0 beta xi xi0, then int dxi keeps
    the xi coefficient: xi-part of (1 - i a0 beta xi xi0)(f0 + f1 xi) is
    f1 xi - i a0 beta f0 xi xi0, so F(f) = f1 - i a0 beta f0 xi0.
    """
    return {0: f1, 1: -1j * a0 * beta * f0}


def gaussian_torus_sup(modes, samples=2048):
    """Sup of |sum c e^{2 pi i (k x + l y)}| by brute-force sampling."""
    t = np.arange(samples) / samples
    X, Y = np.meshgrid(t, t, indexing="ij")
    val = sum(c * np.exp(2j * np.pi * (k * X + l * Y)) for (k, l), c in modes.items())
    return float(np.max(np.abs(val)))


def root_of_unity(theta) -> complex:
    return cmath.exp(2j * math.pi * theta)
