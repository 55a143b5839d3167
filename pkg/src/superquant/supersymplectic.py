"""Even symplectic forms on R^{m|n} and the Heisenberg supergroup.

Forms are handled at the body level: the even block is antisymmetric, the
odd block symmetric.  Rational input gives exact sympy arithmetic (square
roots stay symbolic); float input uses numpy with a relative pivot tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np
import sympy as sp

from .grassmann import GrassmannElement, parity
from .scalars import exact, is_exact, one_like

PIVOT_RTOL = 1e-10


class DegenerateFormError(ValueError):
    pass


def _is_rational_entry(v) -> bool:
    return isinstance(v, (int, Fraction, sp.Rational, sp.Integer)) and not isinstance(v, bool)


def _as_matrix(block, exact_mode: bool):
    if exact_mode:
        return sp.Matrix(block).applyfunc(sp.nsimplify)
    return np.asarray(block, dtype=float)


@dataclass(frozen=True)
class GradedForm:
    m: int
    n: int
    even_block: object
    odd_block: object
    exact: bool

    @classmethod
    def from_blocks(cls, even_block, odd_block, exact: bool | None = None) -> "GradedForm":
        even_rows = [list(r) for r in even_block]
        odd_rows = [list(r) for r in odd_block]
        m, n = len(even_rows), len(odd_rows)
        if exact is None:
            exact = all(_is_rational_entry(v) for r in even_rows + odd_rows for v in r)
        E = _as_matrix(even_rows, exact) if m else (sp.zeros(0, 0) if exact else np.zeros((0, 0)))
        O = _as_matrix(odd_rows, exact) if n else (sp.zeros(0, 0) if exact else np.zeros((0, 0)))
        form = cls(m, n, E, O, exact)
        form._validate()
        return form

    def _validate(self):
        if self.m % 2:
            raise ValueError("even dimension of a symplectic form must be even")
        E, O = self.even_block, self.odd_block
        if self.exact:
            if E.shape != (self.m, self.m) or O.shape != (self.n, self.n):
                raise ValueError("block shapes do not match (m, n)")
            if E + E.T != sp.zeros(self.m, self.m):
                raise ValueError("even block must be antisymmetric")
            if O - O.T != sp.zeros(self.n, self.n):
                raise ValueError("odd block must be symmetric")
        else:
            scale = max(np.max(np.abs(E), initial=0.0), np.max(np.abs(O), initial=0.0), 1.0)
            if np.max(np.abs(E + E.T), initial=0.0) > PIVOT_RTOL * scale:
                raise ValueError("even block must be antisymmetric")
            if np.max(np.abs(O - O.T), initial=0.0) > PIVOT_RTOL * scale:
                raise ValueError("odd block must be symmetric")

    def full_matrix(self):
        if self.exact:
            return sp.diag(self.even_block, self.odd_block) if self.m + self.n else sp.zeros(0, 0)
        out = np.zeros((self.m + self.n,) * 2)
        out[: self.m, : self.m] = self.even_block
        out[self.m:, self.m:] = self.odd_block
        return out

    def pair(self, x, y):
        W = self.full_matrix()
        if self.exact:
            return (sp.Matrix(x).T * W * sp.Matrix(y))[0, 0]
        return float(np.asarray(x, float) @ W @ np.asarray(y, float))


@dataclass(frozen=True)
class CanonicalBasis:
    even_pairs: list
    odd_vectors: list
    signature: tuple[int, int]

    def matrix(self, exact_mode: bool):
        """Columns e_1..e_k, f_1..f_k, theta_1.., eta_1.."""
        cols = [e for e, _ in self.even_pairs] + [f for _, f in self.even_pairs] + list(self.odd_vectors)
        if exact_mode:
            return sp.Matrix.hstack(*cols) if cols else sp.zeros(0, 0)
        return np.column_stack(cols) if cols else np.zeros((0, 0))


def canonical_block(m: int, n_plus: int, n_minus: int, exact_mode: bool = True):
    k = m // 2
    size_ = m + n_plus + n_minus
    M = sp.zeros(size_, size_) if exact_mode else np.zeros((size_, size_))
    for i in range(k):
        M[i, k + i] = 1
        M[k + i, i] = -1
    for j in range(n_plus):
        M[m + j, m + j] = 2
    for j in range(n_minus):
        M[m + n_plus + j, m + n_plus + j] = -2
    return M


def _bilinear(W, x, y, exact_mode):
    if exact_mode:
        return sp.simplify((x.T * W * y)[0, 0])
    return float(x @ W @ y)


def _unit_vectors(dim: int, offset: int, total: int, exact_mode: bool):
    vecs = []
    for i in range(dim):
        if exact_mode:
            v = sp.zeros(total, 1)
        else:
            v = np.zeros(total)
        v[offset + i] = 1
        vecs.append(v)
    return vecs


def _pivot_ok(v, scale, exact_mode) -> bool:
    if exact_mode:
        return v != 0
    return abs(v) > PIVOT_RTOL * scale


def darboux_basis(form: GradedForm) -> CanonicalBasis:
    """Homogeneous basis with w(e_i, f_j) = delta, w(theta, theta) = 2, w(eta, eta) = -2."""
    ex = form.exact
    W = form.full_matrix()
    total = form.m + form.n
    scale = 1.0 if ex else max(float(np.max(np.abs(W), initial=0.0)), 1e-300)

    pairs = []
    rest = _unit_vectors(form.m, 0, total, ex)
    while rest:
        e = rest.pop(0)
        vals = [_bilinear(W, e, w, ex) for w in rest]
        cands = [i for i, v in enumerate(vals) if _pivot_ok(v, scale, ex)]
        if not cands:
            raise DegenerateFormError("degenerate form")
        j = cands[0] if ex else max(cands, key=lambda i: abs(vals[i]))
        f = rest.pop(j) / vals[j]
        new = []
        for w in rest:
            w2 = w - _bilinear(W, w, f, ex) * e + _bilinear(W, w, e, ex) * f
            new.append(sp.simplify(w2) if ex else w2)
        rest = new
        pairs.append((e, f))

    plus, minus = [], []
    rest = _unit_vectors(form.n, form.m, total, ex)
    while rest:
        diag = [_bilinear(W, v, v, ex) for v in rest]
        cands = [i for i, v in enumerate(diag) if _pivot_ok(v, scale, ex)]
        if cands:
            i = cands[0] if ex else max(cands, key=lambda k: abs(diag[k]))
            v = rest.pop(i)
            q = diag[i]
        else:
            hit = None
            for i in range(len(rest)):
                for j in range(i + 1, len(rest)):
                    if _pivot_ok(_bilinear(W, rest[i], rest[j], ex), scale, ex):
                        hit = (i, j)
                        break
                if hit:
                    break
            if hit is None:
                raise DegenerateFormError("degenerate form")
            i, j = hit
            v = rest[i] + rest[j]
            rest.pop(i)
            q = _bilinear(W, v, v, ex)
        rest = [w - (_bilinear(W, w, v, ex) / q) * v for w in rest]
        if ex:
            rest = [sp.simplify(w) for w in rest]
            v = sp.simplify(v * sp.sqrt(sp.Integer(2) / sp.Abs(q)))
            (plus if q > 0 else minus).append(v)
        else:
            v = v * np.sqrt(2.0 / abs(q))
            (plus if q > 0 else minus).append(v)
    return CanonicalBasis(pairs, plus + minus, (len(plus), len(minus)))


def basis_residual(form: GradedForm, basis: CanonicalBasis):
    """B^T W B minus the canonical block (exact matrix or Frobenius norm)."""
    B = basis.matrix(form.exact)
    target = canonical_block(form.m, *basis.signature, exact_mode=form.exact)
    W = form.full_matrix()
    if form.exact:
        return (B.T * W * B - target).applyfunc(sp.simplify)
    return float(np.linalg.norm(B.T @ W @ B - target))


def max_isotropic(form: GradedForm) -> list:
    """e_1..e_{m/2} and theta_k + eta_k for k < min(n_+, n_-)."""
    basis = darboux_basis(form)
    n_plus, n_minus = basis.signature
    out = [e for e, _ in basis.even_pairs]
    thetas = basis.odd_vectors[:n_plus]
    etas = basis.odd_vectors[n_plus:]
    for k in range(min(n_plus, n_minus)):
        out.append(thetas[k] + etas[k])
    return out


def symp_orthogonal(form: GradedForm, F: Sequence) -> list:
    """Basis of {x : w(x, y) = 0 for all y in F}, even vectors first."""
    ex = form.exact
    m, total = form.m, form.m + form.n
    W = form.full_matrix()
    vecs = [sp.Matrix(v) if ex else np.asarray(v, dtype=float) for v in F]
    for v in vecs:
        even_part = any(v[i] != 0 for i in range(m)) if ex else np.any(np.abs(v[:m]) > 0)
        odd_part = any(v[i] != 0 for i in range(m, total)) if ex else np.any(np.abs(v[m:]) > 0)
        if even_part and odd_part:
            raise ValueError("vectors of F must be homogeneous")
    if vecs:
        A = sp.Matrix.hstack(*vecs) if ex else np.column_stack(vecs)
        rank = A.rank() if ex else np.linalg.matrix_rank(A, tol=PIVOT_RTOL * max(np.max(np.abs(A)), 1.0))
        if rank < len(vecs):
            raise ValueError("F is linearly dependent")
    out = []
    for lo, hi in ((0, m), (m, total)):
        dim = hi - lo
        if not dim:
            continue
        rows = []
        for v in vecs:
            r = (W * v).T[:, lo:hi] if ex else (W @ v)[lo:hi]
            rows.append(r)
        if ex:
            C = sp.Matrix.vstack(*rows) if rows else sp.zeros(0, dim)
            null = C.nullspace() if rows else [sp.eye(dim)[:, i] for i in range(dim)]
            for col in null:
                full = sp.zeros(total, 1)
                full[lo:hi, 0] = col
                out.append(full)
        else:
            from scipy.linalg import null_space

            C = np.array(rows) if rows else np.zeros((0, dim))
            null = null_space(C) if rows else np.eye(dim)
            for col in null.T:
                full = np.zeros(total)
                full[lo:hi] = col
                out.append(full)
    return out


# ---------------------------------------------------------------- supernumbers

DEFAULT_SOURCES = 4


def supernumber(body, nilpotent: dict | None = None, N: int = DEFAULT_SOURCES) -> GrassmannElement:
    """body + sum_I c_I s^I over N source generators; ``nilpotent`` maps nonempty subsets to c_I."""
    coeffs = {0: exact(body) if _is_rational_entry(body) else body}
    for k, v in (nilpotent or {}).items():
        if k == 0:
            raise ValueError("nilpotent part must not contain a body term")
        coeffs[k] = exact(v) if _is_rational_entry(v) else v
    return GrassmannElement(N, coeffs)


def body(x: GrassmannElement):
    return x.body()


def is_even_number(x: GrassmannElement) -> bool:
    return all(not parity(k) for k in x)


def is_odd_number(x: GrassmannElement) -> bool:
    return all(parity(k) for k in x)


@dataclass(frozen=True)
class HeisenbergElement:
    """x + a Z with x = (even coordinates | odd coordinates)."""

    x: tuple
    xi: tuple
    a: GrassmannElement

    def __post_init__(self):
        if not all(is_even_number(v) for v in self.x):
            raise ValueError("even slot holds an odd supernumber")
        if not all(is_odd_number(v) for v in self.xi):
            raise ValueError("odd slot holds an even supernumber")
        if not is_even_number(self.a):
            raise ValueError("central coordinate must be even")

    @classmethod
    def identity(cls, m: int, n: int, N: int = DEFAULT_SOURCES) -> "HeisenbergElement":
        z = GrassmannElement(N)
        return cls((z,) * m, (z,) * n, z)

    def inverse(self) -> "HeisenbergElement":
        return HeisenbergElement(tuple(-v for v in self.x), tuple(-v for v in self.xi), -self.a)

    def __eq__(self, other):
        return (self.x, self.xi, self.a) == (other.x, other.xi, other.a)

    def __hash__(self):
        return hash((self.x, self.xi, self.a))


def super_omega(form: GradedForm, x: HeisenbergElement, y: HeisenbergElement) -> GrassmannElement:
    """w(x, y) = sum w0_ij x_i y_j + sum w1_kl xi_k eta_l in the supernumber algebra."""
    if not form.exact:
        raise ValueError("supergroup arithmetic needs an exact form")
    N = x.a.n
    one = one_like(exact(0))
    out = GrassmannElement(N)
    for i in range(form.m):
        for j in range(form.m):
            w = form.even_block[i, j]
            if w:
                out = out + (x.x[i] * y.x[j]).scale(exact(Fraction(str(w))) * one)
    for k in range(form.n):
        for l in range(form.n):
            w = form.odd_block[k, l]
            if w:
                out = out + (x.xi[k] * y.xi[l]).scale(exact(Fraction(str(w))) * one)
    return out


def heis_mul(g: HeisenbergElement, h: HeisenbergElement, form: GradedForm) -> HeisenbergElement:
    """(x + aZ)(y + bZ) = x + y + (a + b + w(x, y)/2) Z."""
    if len(g.x) != form.m or len(g.xi) != form.n or len(h.x) != form.m or len(h.xi) != form.n:
        raise ValueError("dimension mismatch")
    half = exact(Fraction(1, 2))
    return HeisenbergElement(
        tuple(u + v for u, v in zip(g.x, h.x)),
        tuple(u + v for u, v in zip(g.xi, h.xi)),
        g.a + h.a + super_omega(form, g, h).scale(half),
    )


def coadjoint(g: HeisenbergElement, zeta: tuple) -> tuple:
    """Ad*_{x+aZ} (y + bZ)^b = (y - b x + bZ)^b; zeta = ((even y..), (odd y..), b)."""
    y_even, y_odd, b = zeta
    return (
        tuple(y - b * x for y, x in zip(y_even, g.x)),
        tuple(y - b * x for y, x in zip(y_odd, g.xi)),
        b,
    )


def taylor_extend(f, variables: Sequence[sp.Symbol], x: Sequence[GrassmannElement]) -> GrassmannElement:
    """Extension of a polynomial to even supernumbers: sum_a d^a f(x0) n^a / a!."""
    if len(variables) != len(x):
        raise ValueError("one supernumber per variable")
    if not all(is_even_number(v) for v in x):
        raise ValueError("arguments must be even supernumbers")
    N = x[0].n if x else DEFAULT_SOURCES
    poly = sp.Poly(f, *variables)
    bodies = [v.body() for v in x]
    nil = [v - GrassmannElement.scalar(N, v.body()) if v.body() else v for v in x]
    exact_mode = all(is_exact(b) or b == 0 for b in bodies)
    point = {s: (_qq_to_sympy(b) if exact_mode else b) for s, b in zip(variables, bodies)}
    max_deg = poly.total_degree()
    out = GrassmannElement(N)
    for alpha in product(range(max_deg + 1), repeat=len(variables)):
        if sum(alpha) > max_deg:
            continue
        d = poly.as_expr()
        fact = 1
        for s, k in zip(variables, alpha):
            if k:
                d = sp.diff(d, s, k)
                fact *= sp.factorial(k)
        val = sp.nsimplify(d.subs(point) / fact) if exact_mode else complex(d.subs(point)) / float(fact)
        if not val:
            continue
        term = GrassmannElement.scalar(N, _from_sympy(val) if exact_mode else val)
        for v, k in zip(nil, alpha):
            for _ in range(k):
                term = term * v
        out = out + term
    return out


def _qq_to_sympy(b):
    from sympy.polys.domains import QQ_I

    return QQ_I.to_sympy(exact(b)) if b != 0 else sp.Integer(0)


def _from_sympy(v):
    re, im = sp.re(v), sp.im(v)
    return exact((Fraction(int(sp.numer(re)), int(sp.denom(re))), Fraction(int(sp.numer(im)), int(sp.denom(im)))))
