"""Finite-dimensional Hilbert superspaces and the superadjoint.

A space is a grading vector (parity of each basis vector), positive weights
defining the Hilbert product (x, y) = sum w conj(x) y, a unitary J and its
parity.  The superhermitian pairing is <x, y> = (Jx, y).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grassmann import complement, eps, full_mask, parity


@dataclass(frozen=True)
class HilbertSuper:
    grading: np.ndarray
    J: np.ndarray
    parity: int
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        g = np.asarray(self.grading, dtype=int) % 2
        object.__setattr__(self, "grading", g)
        object.__setattr__(self, "J", np.asarray(self.J, dtype=complex))
        w = np.ones(len(g)) if self.weights is None else np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if self.J.shape != (len(g), len(g)) or w.shape != g.shape:
            raise ValueError("dimension mismatch between grading, J and weights")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")

    @property
    def dim(self) -> int:
        return len(self.grading)

    def inner(self, x, y) -> complex:
        return complex(np.vdot(x, self.weights * np.asarray(y)))

    def hilbert_adjoint(self, T: np.ndarray) -> np.ndarray:
        w = self.weights
        return (np.conj(T).T * w[None, :]) / w[:, None]

    def opnorm(self, T: np.ndarray) -> float:
        s = np.sqrt(self.weights)
        return float(np.linalg.norm(s[:, None] * T / s[None, :], 2))

    def parity_operator(self) -> np.ndarray:
        return np.diag(np.where(self.grading == 1, -1.0, 1.0)).astype(complex)

    def homogeneous_part(self, x, p: int) -> np.ndarray:
        return np.where(self.grading == p, x, 0)

    def defj_residual(self) -> float:
        """Largest violation of J^2 = s, J* = s J (s = (-1)^{(p+1)|x|}), unitarity and J's degree."""
        s = np.where(((self.parity + 1) * self.grading) % 2 == 1, -1.0, 1.0)
        J = self.J
        Js = self.hilbert_adjoint(J)
        res = [
            np.max(np.abs(J @ J - np.diag(s)), initial=0.0),
            np.max(np.abs(Js - J * s[None, :]), initial=0.0),
            np.max(np.abs(Js @ J - np.eye(self.dim)), initial=0.0),
            operator_degree_defect(self, J, self.parity),
        ]
        return float(max(res))


def operator_degree_defect(H: HilbertSuper, T: np.ndarray, degree: int) -> float:
    """Largest entry of T mapping H_j outside H_{j+degree}."""
    mismatch = (H.grading[:, None] + H.grading[None, :] + degree) % 2 == 1
    return float(np.max(np.abs(T[mismatch]), initial=0.0))


def super_pairing(H: HilbertSuper, x, y) -> complex:
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != (H.dim,) or y.shape != (H.dim,):
        raise ValueError("vector dimension mismatch")
    return H.inner(H.J @ x, y)


def split_homogeneous(H: HilbertSuper, T: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """T = T0 + T1 with T_k of degree k."""
    same = (H.grading[:, None] + H.grading[None, :]) % 2 == 0
    return np.where(same, T, 0), np.where(same, 0, T)


def superadjoint(H: HilbertSuper, T: np.ndarray, degree: int | None = None) -> np.ndarray:
    """T^dagger x = (-1)^{(p+1)(|T|+|x|) + |T||x|} J T* J x on homogeneous x."""
    T = np.asarray(T, dtype=complex)
    if degree is None:
        T0, T1 = split_homogeneous(H, T)
        return superadjoint(H, T0, 0) + superadjoint(H, T1, 1)
    if operator_degree_defect(H, T, degree) > 0:
        raise ValueError("operator is not homogeneous of the declared degree")
    p = H.parity
    g = H.grading
    sign = np.where(((p + 1) * (degree + g) + degree * g) % 2 == 1, -1.0, 1.0)
    return (H.J @ H.hilbert_adjoint(T) @ H.J) * sign[None, :]


def adjoint_defect(H: HilbertSuper, T, degree: int, Tdag, rng=None, trials: int = 20) -> float:
    """max |<T^dag x, y> - (-1)^{|T||x|} <x, T y>| over random homogeneous x, y."""
    rng = np.random.default_rng(0) if rng is None else rng
    worst = 0.0
    for _ in range(trials):
        px = int(rng.integers(2))
        x = H.homogeneous_part(rng.normal(size=H.dim) + 1j * rng.normal(size=H.dim), px)
        y = rng.normal(size=H.dim) + 1j * rng.normal(size=H.dim)
        lhs = super_pairing(H, Tdag @ x, y)
        rhs = (-1) ** (degree * px) * super_pairing(H, x, T @ y)
        scale = max(1.0, abs(lhs), abs(rhs))
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst


def tensor_superspace(H1: HilbertSuper, H2: HilbertSuper) -> HilbertSuper:
    """J(x1 (x) x2) = (-1)^{(n1+|x1|)|x2|} J1 x1 (x) J2 x2, basis index i1*dim2 + i2."""
    g1, g2 = H1.grading, H2.grading
    grading = (g1[:, None] + g2[None, :]).ravel() % 2
    sign = np.where((((H1.parity + g1)[:, None] * g2[None, :]) % 2).ravel() == 1, -1.0, 1.0)
    J = np.kron(H1.J, H2.J) * sign[None, :]
    return HilbertSuper(grading, J, (H1.parity + H2.parity) % 2, np.kron(H1.weights, H2.weights))


def direct_sum(H1: HilbertSuper, H2: HilbertSuper) -> HilbertSuper:
    if H1.parity != H2.parity:
        raise ValueError("direct sum needs equal parities")
    d1, d2 = H1.dim, H2.dim
    J = np.zeros((d1 + d2, d1 + d2), dtype=complex)
    J[:d1, :d1] = H1.J
    J[d1:, d1:] = H2.J
    return HilbertSuper(np.concatenate([H1.grading, H2.grading]), J, H1.parity,
                        np.concatenate([H1.weights, H2.weights]))


def krein_decompose(H: HilbertSuper) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal (Hilbert product) bases of Ker(J - 1) and Ker(J + 1), as columns."""
    if H.parity != 1:
        raise ValueError("Krein decomposition needs parity 1")
    from scipy.linalg import orth

    s = np.sqrt(H.weights)
    Jn = s[:, None] * H.J / s[None, :]
    eye = np.eye(H.dim)
    plus = orth((eye + Jn) / 2) / s[:, None]
    minus = orth((eye - Jn) / 2) / s[:, None]
    return plus, minus


# ---------------------------------------------------------------- exterior algebra model

def exterior_space(n: int) -> HilbertSuper:
    """Lambda R^n with the Hodge operation as J (parity n mod 2)."""
    dim = 1 << n
    J = np.zeros((dim, dim), dtype=complex)
    for I in range(dim):
        C = complement(I, n)
        J[C, I] = eps(I, C)
    return HilbertSuper(np.array([parity(I) for I in range(dim)]), J, n % 2)


def left_mult(n: int, I: int) -> np.ndarray:
    """Matrix of xi^I acting by left multiplication on Lambda R^n."""
    dim = 1 << n
    M = np.zeros((dim, dim), dtype=complex)
    for J in range(dim):
        if not I & J:
            M[I | J, J] = eps(I, J)
    return M


def trivial_even_space(dim: int = 1, weights=None) -> HilbertSuper:
    return HilbertSuper(np.zeros(dim, dtype=int), np.eye(dim), 0, weights)


# ---------------------------------------------------------------- C*-superalgebra axioms

@dataclass
class AxiomViolation:
    axiom: str
    generator: int
    other: int | None
    defect: float


@dataclass
class AxiomReport:
    violations: list
    checked: int

    @property
    def ok(self) -> bool:
        return not self.violations


def cstar_super_check(H: HilbertSuper, generators, tol: float = 1e-10) -> AxiomReport:
    """Check the superinvolution axioms for (T, degree, declared dagger) triples.

    Verified: the declared dagger is the superadjoint of the representation,
    (a^dag)^dag = a, (ab)^dag = (-1)^{|a||b|} b^dag a^dag on all pairs, and
    ||a^dag|| = ||a||.  Each violation carries the offending indices and size.
    """
    bad: list[AxiomViolation] = []
    checked = 0
    for i, (T, deg, Tdag) in enumerate(generators):
        scale = max(1.0, H.opnorm(T))
        d = adjoint_defect(H, T, deg, Tdag)
        checked += 1
        if d > tol:
            bad.append(AxiomViolation("pairing", i, None, d))
        dd = float(np.max(np.abs(superadjoint(H, Tdag, deg) - T), initial=0.0)) / scale
        checked += 1
        if dd > tol:
            bad.append(AxiomViolation("involutive", i, None, dd))
        dn = abs(H.opnorm(Tdag) - H.opnorm(T)) / scale
        checked += 1
        if dn > tol:
            bad.append(AxiomViolation("isometric", i, None, dn))
        for j, (S, deg2, Sdag) in enumerate(generators):
            lhs = superadjoint(H, T @ S, (deg + deg2) % 2)
            rhs = (-1) ** (deg * deg2) * Sdag @ Tdag
            dp = float(np.max(np.abs(lhs - rhs), initial=0.0)) / max(1.0, H.opnorm(T @ S))
            checked += 1
            if dp > tol:
                bad.append(AxiomViolation("antimultiplicative", i, j, dp))
    return AxiomReport(bad, checked)
