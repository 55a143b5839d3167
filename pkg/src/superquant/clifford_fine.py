"""Factor sets on (Z_2)^k and the Clifford structure of the odd product.

Group elements are bitmasks; the group law is XOR.  A factor set is stored as
a dense (2^k x 2^k) table sigma[a, b].
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from itertools import product
from typing import Callable, Mapping

from .grassmann import size
from .scalars import imag_unit, ipow, is_exact, to_complex
from .starproduct import DeformParams, StructureConstants, clifford_scale_squared, lambda_closedform


@dataclass(frozen=True)
class FactorSet:
    k: int
    sigma: Mapping[tuple[int, int], object]

    def __call__(self, a: int, b: int):
        return self.sigma[(a, b)]

    @property
    def order(self) -> int:
        return 1 << self.k

    def is_symmetric(self, tol: float = 0.0) -> bool:
        return all(_close(self(a, b), self(b, a), tol) for a in range(self.order) for b in range(self.order))


def _close(x, y, tol: float) -> bool:
    if is_exact(x) and is_exact(y):
        return x == y
    x, y = to_complex(x), to_complex(y)
    return abs(x - y) <= tol * max(1.0, abs(x), abs(y))


def _div(x, y):
    if is_exact(x) or is_exact(y):
        return x / y
    return to_complex(x) / to_complex(y)


def is_factor_set(s: FactorSet, tol: float = 0.0):
    """(True, None) or (False, (a, b, c)) for the first triple violating the cocycle identity."""
    G = range(s.order)
    for a, b, c in product(G, G, G):
        lhs = s(a, b ^ c) * s(b, c)
        rhs = s(a, b) * s(a ^ b, c)
        if not _close(lhs, rhs, tol):
            return False, (a, b, c)
    for a in G:
        if not to_complex(s(a, 0)) or not to_complex(s(0, a)):
            return False, (a, 0, 0)
    return True, None


def _checked(s: FactorSet, tol: float = 0.0) -> FactorSet:
    ok, witness = is_factor_set(s, tol)
    if not ok:
        raise ValueError(f"cocycle identity fails on {witness}")
    return s


def constant_factor_set(k: int, value=1) -> FactorSet:
    return FactorSet(k, {(a, b): value for a in range(1 << k) for b in range(1 << k)})


def sigma_clifford(n: int, order: str = "descending") -> FactorSet:
    """Clifford multiplier: (-1) to the number of pairs (p in a, q in b) with p > q.

    ``order="ascending"`` counts pairs with p < q instead; both describe
    Cl(n, C) (the two tables differ by a coboundary).
    """
    if order not in ("descending", "ascending"):
        raise ValueError("order must be 'descending' or 'ascending'")
    table = {}
    for a in range(1 << n):
        for b in range(1 << n):
            cnt = 0
            for p in range(n):
                if not (a >> p) & 1:
                    continue
                mask = ~((1 << (p + 1)) - 1) if order == "ascending" else (1 << p) - 1
                cnt += size(b & mask)
            table[(a, b)] = -1 if cnt % 2 else 1
    return _checked(FactorSet(n, table))


def coboundary_ratio(rho: Callable[[int], object], a: int, b: int):
    return _div(rho(a ^ b), rho(a) * rho(b))


def check_equivalence(s: FactorSet, s2: FactorSet, rho: Callable[[int], object], tol: float = 1e-12):
    """s2(a, b) = s(a, b) rho(a+b) / (rho(a) rho(b)) for every pair; returns (ok, witness)."""
    if s.k != s2.k:
        return False, None
    for a in range(s.order):
        for b in range(s.order):
            if not _close(s2(a, b), s(a, b) * coboundary_ratio(rho, a, b), tol):
                return False, (a, b)
    return True, None


def search_equivalence(s: FactorSet, s2: FactorSet, tol: float = 1e-12):
    """Find rho with s2 = s * d(rho), or None.

    With tau = s2 / s the unknowns are forced up to signs: rho(0) = 1/tau(0,0),
    rho(e_p)^2 = rho(0)/tau(e_p, e_p), and rho(a + e_p) = tau(a, e_p) rho(a) rho(e_p)
    along any chain.  Every sign pattern of the generator roots is tried.
    """
    if s.k != s2.k:
        return None
    k = s.k
    tau = {key: _div(s2.sigma[key], s.sigma[key]) for key in s.sigma}
    r0 = 1 / to_complex(tau[(0, 0)])
    roots = [cmath.sqrt(r0 / to_complex(tau[(1 << p, 1 << p)])) for p in range(k)]
    for signs in product((1, -1), repeat=k):
        gen = [sg * r for sg, r in zip(signs, roots)]
        rho = {0: r0}
        for a in range(1, 1 << k):
            p = (a & -a).bit_length() - 1
            rest = a ^ (1 << p)
            rho[a] = to_complex(tau[(rest, 1 << p)]) * rho[rest] * gen[p]
        ok, _ = check_equivalence(s, s2, rho.__getitem__, tol)
        if ok:
            return rho
    return None


# ---------------------------------------------------------------- link to the star product

def factor_set_from_lambda(table: StructureConstants) -> FactorSet:
    """sigma(I, J) = Lambda(I, J) on (Z_2)^n with group law I ^ J."""
    return _checked(FactorSet(table.n, dict(table.table)), tol=1e-12)


def rho_reference(n: int, params: DeformParams, branch: int = 0) -> Callable[[int], complex]:
    """rho(I) = (ic)^{|I|/2 - n} (-1)^{n(n+1)/2}, (ic)^{1/2} principal (branch=1 flips the root)."""
    ic = to_complex(imag_unit(params.c) * params.c)
    root = cmath.sqrt(ic) * (-1 if branch else 1)
    sgn = -1 if (n * (n + 1) // 2) % 2 else 1

    def rho(I: int) -> complex:
        return root ** size(I) * ic ** (-n) * sgn

    return rho


@dataclass
class StarCliffordReport:
    n: int
    cocycle_ok: bool
    raw_equivalent: bool
    normalized_equivalent: bool
    branch: int
    witness: object = None

    @property
    def ok(self) -> bool:
        return self.cocycle_ok and self.raw_equivalent and self.normalized_equivalent


def factor_set_from_star(table: StructureConstants, params: DeformParams, branch: int = 0,
                         tol: float = 1e-12) -> StarCliffordReport:
    """Read Lambda as a factor set and test its equivalence with the Clifford multiplier.

    rho_reference relates the unnormalised coefficients c_IJ = Lambda / kappa_odd
    to sigma_Cl; for Lambda itself the same rho divided by kappa_odd is used.
    """
    n = table.n
    ok, witness = is_factor_set(FactorSet(n, dict(table.table)), tol)
    if not ok:
        raise ValueError(f"Lambda violates the cocycle identity at {witness}")
    k_odd = to_complex(params.kappa_odd(n))
    raw = FactorSet(n, {key: to_complex(v) / k_odd for key, v in table.table.items()})
    norm = FactorSet(n, {key: to_complex(v) for key, v in table.table.items()})
    cl = sigma_clifford(n)
    rho = rho_reference(n, params, branch)
    raw_ok, w1 = check_equivalence(cl, raw, rho, tol)
    norm_ok, w2 = check_equivalence(cl, norm, lambda I: rho(I) / k_odd, tol)
    return StarCliffordReport(n, ok, raw_ok, norm_ok, branch, w1 or w2)


def clifford_relations(n: int, params: DeformParams):
    """Products xi_hat_i * xi_hat_j of the rescaled generators, computed exactly.

    xi_hat = s xi with s^2 = a0 (1+alpha)^2 / (i alpha); returns a dict
    (i, j) -> (coefficient, target mask) and the list of relation failures.
    """
    lam = lambda_closedform(n, params)
    s2 = clifford_scale_squared(params)
    out = {}
    bad = []
    for i in range(n):
        for j in range(n):
            I, J = 1 << i, 1 << j
            out[(i, j)] = (s2 * lam.coeff(I, J), I ^ J)
    one = ipow(s2, 0)
    for i in range(n):
        c, t = out[(i, i)]
        if t != 0 or not _close(c, one, 1e-12):
            bad.append(("square", i, c))
        for j in range(i + 1, n):
            cij, tij = out[(i, j)]
            cji, tji = out[(j, i)]
            if tij != tji or not _close(cij, -cji, 1e-12):
                bad.append(("anticommute", (i, j), (cij, cji)))
    return out, bad
