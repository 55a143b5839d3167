"""Quantum supertorus as a mode algebra.

An element is a finite sum of c * e^{2 pi i (k x + l y)} xi^I.  The even
sector uses the torus phase of ``torus_mode_product`` (so V * U = e^{2 pi i theta} U * V);
the odd sector uses the structure constants Lambda.

Two odd bases are supported.  ``basis="normalized"`` stores coefficients
against rescaled generators xi_hat with xi_hat * xi_hat = 1, whose structure
constants are pure signs; this makes the Clifford relations exact.
``basis="raw"`` stores coefficients against xi itself, with Lambda taken at
the Moyal parameter theta / (2 pi) of the underlying plane; theta = 0 gives
back the supercommutative product.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .grassmann import GrassmannElement, eps, full_mask, members_of
from .starproduct import StructureConstants, lambda_in_theta, normalized_lambda, torus_mode_product

Key = tuple[int, int, int]


@dataclass(frozen=True)
class TorusParams:
    theta: float | Fraction
    alpha: complex = 1.0
    basis: str = "normalized"

    def __post_init__(self):
        if self.basis not in ("normalized", "raw"):
            raise ValueError("basis must be 'normalized' or 'raw'")

    def odd_table(self, n: int) -> StructureConstants:
        if self.basis == "normalized":
            return normalized_lambda(n)
        return lambda_in_theta(n, float(self.theta) / (2 * math.pi), complex(self.alpha))

    def absorbed_scalar(self) -> complex:
        """s^2 with xi_hat = s xi: the inverse of xi * xi in the raw basis."""
        a = complex(self.alpha)
        q = 1j * a * float(self.theta) / (2 * math.pi) / (1 + a) ** 2
        if q == 0:
            raise ZeroDivisionError("generators cannot be normalised at theta = 0")
        return 1 / q


@dataclass(frozen=True)
class TorusElement:
    n: int
    params: TorusParams
    coeffs: Mapping[Key, complex] = field(default_factory=dict)

    def __post_init__(self):
        top = full_mask(self.n)
        clean = {}
        for (k, l, I), v in self.coeffs.items():
            if I & ~top:
                raise ValueError("subset outside 1..n")
            if v != 0:
                clean[(int(k), int(l), int(I))] = v
        object.__setattr__(self, "coeffs", clean)

    # constructors
    @classmethod
    def mode(cls, n: int, params: TorusParams, k: int, l: int, I: int = 0, c=1.0) -> "TorusElement":
        return cls(n, params, {(k, l, I): c})

    @classmethod
    def unit(cls, n: int, params: TorusParams) -> "TorusElement":
        return cls.mode(n, params, 0, 0, 0)

    def _like(self, coeffs) -> "TorusElement":
        return TorusElement(self.n, self.params, coeffs)

    def __add__(self, other: "TorusElement") -> "TorusElement":
        _check(self, other)
        out = dict(self.coeffs)
        for key, v in other.coeffs.items():
            out[key] = out.get(key, 0) + v
        return self._like(out)

    def __neg__(self):
        return self._like({k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "TorusElement":
        return self._like({k: s * v for k, v in self.coeffs.items()})

    def conj(self) -> "TorusElement":
        return self._like({(-k, -l, I): complex(v).conjugate() for (k, l, I), v in self.coeffs.items()})

    def max_abs_diff(self, other: "TorusElement") -> float:
        keys = set(self.coeffs) | set(other.coeffs)
        return max((abs(self.coeffs.get(k, 0) - other.coeffs.get(k, 0)) for k in keys), default=0.0)

    def support(self):
        return set(self.coeffs)

    def components(self) -> dict[int, dict[tuple[int, int], complex]]:
        out: dict[int, dict] = {}
        for (k, l, I), v in self.coeffs.items():
            out.setdefault(I, {})[(k, l)] = v
        return out


def _check(f: TorusElement, g: TorusElement):
    if f.n != g.n:
        raise ValueError("odd dimension mismatch")
    if f.params != g.params:
        raise ValueError("theta mismatch")


def torus_phase_exponent(mode1, mode2, theta) -> Fraction | float:
    """e, with the even product phase equal to e^{i pi e}."""
    (k1, l1), (k2, l2) = mode1, mode2
    t = theta if isinstance(theta, Fraction) else float(theta)
    return -t * (k1 * l2 - l1 * k2)


def torus_star(f: TorusElement, g: TorusElement) -> TorusElement:
    _check(f, g)
    lam = f.params.odd_table(f.n)
    theta = f.params.theta
    out: dict[Key, complex] = {}
    for (k1, l1, I), a in f.coeffs.items():
        for (k2, l2, J), b in g.coeffs.items():
            c = lam.coeff(I, J)
            if not c:
                continue
            phase, (k, l) = torus_mode_product((k1, l1), (k2, l2), theta)
            key = (k, l, I ^ J)
            out[key] = out.get(key, 0) + phase * complex(c) * a * b
    return f._like(out)


def undeformed_product(f: TorusElement, g: TorusElement) -> TorusElement:
    """Pointwise supercommutative product."""
    _check(f, g)
    out: dict[Key, complex] = {}
    for (k1, l1, I), a in f.coeffs.items():
        for (k2, l2, J), b in g.coeffs.items():
            if I & J:
                continue
            key = (k1 + k2, l1 + l2, I | J)
            out[key] = out.get(key, 0) + eps(I, J) * a * b
    return f._like(out)


def generators(n: int, params: TorusParams):
    """U = e^{2 pi i x}, V = e^{2 pi i y} and the odd generators of the chosen basis."""
    U = TorusElement.mode(n, params, 1, 0)
    V = TorusElement.mode(n, params, 0, 1)
    odd = [TorusElement.mode(n, params, 0, 0, 1 << i) for i in range(n)]
    return U, V, odd


def commutation_factor(theta) -> tuple[object, complex]:
    """Exponent e with V * U = e^{i pi e} U * V, and the measured ratio of the phases."""
    e_vu = torus_phase_exponent((0, 1), (1, 0), theta)
    e_uv = torus_phase_exponent((1, 0), (0, 1), theta)
    p_vu, _ = torus_mode_product((0, 1), (1, 0), theta)
    p_uv, _ = torus_mode_product((1, 0), (0, 1), theta)
    return e_vu - e_uv, p_vu / p_uv


# ---------------------------------------------------------------- translations

def _substitute_odd(I: int, n: int, N: int, shift: np.ndarray) -> GrassmannElement:
    """Expand (xi - zeta)^I with zeta_i = sum_j shift[i, j] chi_j, chi_j the generator n+1+j."""
    total = n + N
    out = GrassmannElement.scalar(total, 1.0 + 0j)
    for i in members_of(I):
        factor = GrassmannElement.generator(total, i, 1.0 + 0j)
        for j in range(N):
            if shift[i - 1, j]:
                factor = factor - GrassmannElement.generator(total, n + 1 + j, complex(shift[i - 1, j]))
        out = out * factor
    return out


def torus_rho(y, f: TorusElement, odd_shift=None, n_odd: int | None = None) -> TorusElement:
    """rho_z f (u) = f(u - z) for z = (y, zeta).

    y is a body-valued pair; the phase of mode (k, l) is e^{-2 pi i (k y1 + l y2)}.
    An odd shift is given as an (n_odd x N) matrix: zeta_i = sum_j M[i, j] chi_j with
    chi_j auxiliary odd generators appended after the first n_odd ones.  The
    result then lives on n_odd + N generators (an input already carrying the
    same chi's can be shifted again).
    """
    y1, y2 = y
    out: dict[Key, complex] = {}
    if odd_shift is None:
        for (k, l, I), v in f.coeffs.items():
            out[(k, l, I)] = cmath.exp(-2j * math.pi * (k * y1 + l * y2)) * v
        return f._like(out)
    shift = np.atleast_2d(np.asarray(odd_shift, dtype=complex))
    n = shift.shape[0] if n_odd is None else n_odd
    N = shift.shape[1]
    if f.n not in (n, n + N):
        raise ValueError("element does not live on the shifted generators")
    top_xi = full_mask(n)
    for (k, l, M), v in f.coeffs.items():
        ph = cmath.exp(-2j * math.pi * (k * y1 + l * y2))
        I = M & top_xi
        K = M & ~top_xi
        expanded = _substitute_odd(I, n, N, shift) * GrassmannElement.basis(n + N, K, 1.0 + 0j)
        for mask, c in expanded.items():
            out[(k, l, mask)] = out.get((k, l, mask), 0) + ph * v * c
    return TorusElement(n + N, f.params, out)


# ---------------------------------------------------------------- sup norm

def _sample(modes: Mapping[tuple[int, int], complex], xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    val = np.zeros(np.broadcast(xs, ys).shape, dtype=complex)
    for (k, l), c in modes.items():
        val = val + c * np.exp(2j * np.pi * (k * xs + l * ys))
    return val


def _newton_refine(modes, x: float, y: float) -> tuple[float, float]:
    """One Newton step on |f|^2 at (x, y)."""
    f = d1 = d2 = d11 = d12 = d22 = 0j
    for (k, l), c in modes.items():
        e = c * cmath.exp(2j * math.pi * (k * x + l * y))
        a, b = 2j * math.pi * k, 2j * math.pi * l
        f += e
        d1 += a * e
        d2 += b * e
        d11 += a * a * e
        d12 += a * b * e
        d22 += b * b * e
    fc = f.conjugate()
    g = np.array([2 * (fc * d1).real, 2 * (fc * d2).real])
    H = np.array([
        [2 * (abs(d1) ** 2 + (fc * d11).real), 2 * ((d1.conjugate() * d2).real + (fc * d12).real)],
        [2 * ((d1.conjugate() * d2).real + (fc * d12).real), 2 * (abs(d2) ** 2 + (fc * d22).real)],
    ])
    try:
        step = np.linalg.solve(H, g)
    except np.linalg.LinAlgError:
        return x, y
    return x - step[0], y - step[1]


def component_sup(modes: Mapping[tuple[int, int], complex], samples: int = 512) -> float:
    if not modes:
        return 0.0
    t = np.arange(samples) / samples
    X, Y = np.meshgrid(t, t, indexing="ij")
    vals = np.abs(_sample(modes, X, Y))
    i, j = np.unravel_index(np.argmax(vals), vals.shape)
    best = float(vals[i, j])
    xr, yr = _newton_refine(modes, float(t[i]), float(t[j]))
    refined = float(abs(_sample(modes, np.array(xr), np.array(yr))))
    return max(best, refined)


def sup_norm(f: TorusElement, samples: int = 512) -> float:
    """sum_I sup |f_I| over the torus."""
    return sum(component_sup(modes, samples) for modes in f.components().values())


# ---------------------------------------------------------------- serialisation

def to_json(f: TorusElement) -> str:
    rows = [
        {"k": k, "l": l, "subset-mask": I, "re": complex(v).real, "im": complex(v).imag}
        for (k, l, I), v in sorted(f.coeffs.items())
    ]
    return json.dumps(rows)


def from_json(text: str, n: int, params: TorusParams) -> TorusElement:
    rows = json.loads(text)
    return TorusElement(n, params, {(r["k"], r["l"], r["subset-mask"]): complex(r["re"], r["im"]) for r in rows})
