"""Exterior algebra over n odd generators.

Index subsets of {1..n} are stored as bitmasks: generator ``k`` is bit
``k-1``.  A :class:`GrassmannElement` is a sparse map mask -> coefficient with
zero coefficients pruned, so two elements are equal iff their maps are.
"""

from __future__ import annotations

from typing import Callable, Iterable, Mapping

from .scalars import conj, imag_unit, ipow, one_like, sign_pow, to_complex

Mask = int


# ---------------------------------------------------------------- subsets

def mask_of(members: Iterable[int]) -> Mask:
    m = 0
    for k in members:
        if k < 1:
            raise ValueError(f"generator index {k} out of range")
        bit = 1 << (k - 1)
        if m & bit:
            raise ValueError(f"duplicate generator {k}")
        m |= bit
    return m


def members_of(mask: Mask) -> tuple[int, ...]:
    out = []
    k = 1
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return tuple(out)


def size(mask: Mask) -> int:
    return bin(mask).count("1")


def parity(mask: Mask) -> int:
    return size(mask) & 1


def full_mask(n: int) -> Mask:
    return (1 << n) - 1


def complement(mask: Mask, n: int) -> Mask:
    return full_mask(n) & ~mask


def _as_mask(s) -> Mask:
    return s if isinstance(s, int) else mask_of(s)


def eps(I, J) -> int:
    """Sign of theta^I theta^J = eps(I, J) theta^(I u J); 0 when I and J meet.

    The sign is (-1)^(number of pairs i in I, j in J with i > j), i.e. the
    parity of the merge permutation.
    """
    I = _as_mask(I)
    J = _as_mask(J)
    if I & J:
        return 0
    inversions = 0
    j = J
    while j:
        low = j & -j
        # members of I above this member of J
        inversions += size(I & ~((low << 1) - 1))
        j ^= low
    return sign_pow(inversions)


# ---------------------------------------------------------------- elements

class GrassmannElement:
    """Finite linear combination of basis monomials theta^I."""

    __slots__ = ("n", "_c")

    def __init__(self, n: int, coeffs: Mapping[Mask, object] | None = None):
        if n < 0:
            raise ValueError("n must be non-negative")
        self.n = n
        top = full_mask(n)
        c = {}
        for k, v in (coeffs or {}).items():
            k = _as_mask(k)
            if k & ~top:
                raise ValueError(f"subset {members_of(k)} not inside 1..{n}")
            if v:
                c[k] = v
        self._c = c

    # constructors
    @classmethod
    def basis(cls, n: int, subset, coeff=1) -> "GrassmannElement":
        return cls(n, {_as_mask(subset): coeff})

    @classmethod
    def scalar(cls, n: int, value) -> "GrassmannElement":
        return cls(n, {0: value})

    @classmethod
    def generator(cls, n: int, k: int, coeff=1) -> "GrassmannElement":
        return cls(n, {1 << (k - 1): coeff})

    # access
    def coeffs(self) -> dict[Mask, object]:
        return dict(self._c)

    def items(self):
        return self._c.items()

    def __getitem__(self, subset):
        return self._c.get(_as_mask(subset), 0)

    def get(self, subset, default=0):
        return self._c.get(_as_mask(subset), default)

    def __len__(self):
        return len(self._c)

    def __iter__(self):
        return iter(self._c)

    def is_zero(self) -> bool:
        return not self._c

    def degree_parity(self) -> int | None:
        """0 or 1 for homogeneous elements, None for mixed ones (0 for zero)."""
        ps = {parity(k) for k in self._c}
        if not ps:
            return 0
        return ps.pop() if len(ps) == 1 else None

    def even_part(self) -> "GrassmannElement":
        return GrassmannElement(self.n, {k: v for k, v in self._c.items() if not parity(k)})

    def odd_part(self) -> "GrassmannElement":
        return GrassmannElement(self.n, {k: v for k, v in self._c.items() if parity(k)})

    def body(self):
        return self._c.get(0, 0)

    # arithmetic
    def _check(self, other: "GrassmannElement"):
        if not isinstance(other, GrassmannElement):
            raise TypeError("expected a GrassmannElement")
        if other.n != self.n:
            raise ValueError(f"generator count mismatch: {self.n} vs {other.n}")

    def __add__(self, other):
        if not isinstance(other, GrassmannElement):
            return self + GrassmannElement.scalar(self.n, other)
        self._check(other)
        out = dict(self._c)
        for k, v in other._c.items():
            out[k] = out[k] + v if k in out else v
        return GrassmannElement(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return GrassmannElement(self.n, {k: -v for k, v in self._c.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, s) -> "GrassmannElement":
        return GrassmannElement(self.n, {k: s * v for k, v in self._c.items()})

    def __mul__(self, other):
        if isinstance(other, GrassmannElement):
            return gr_mul(self, other)
        return GrassmannElement(self.n, {k: v * other for k, v in self._c.items()})

    def __rmul__(self, other):
        return GrassmannElement(self.n, {k: other * v for k, v in self._c.items()})

    def __pow__(self, k: int):
        out = GrassmannElement.scalar(self.n, one_like(next(iter(self._c.values()), None)))
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, GrassmannElement):
            return self.n == other.n and self._c == other._c
        return NotImplemented

    def __hash__(self):
        return hash((self.n, frozenset(self._c.items())))

    def map(self, fn: Callable) -> "GrassmannElement":
        return GrassmannElement(self.n, {k: fn(v) for k, v in self._c.items()})

    def conj(self) -> "GrassmannElement":
        """Complex conjugation of coefficients; the generators are real."""
        return self.map(conj)

    def allclose(self, other: "GrassmannElement", tol: float = 1e-12) -> bool:
        self._check(other)
        return self.max_abs_diff(other) <= tol

    def max_abs_diff(self, other: "GrassmannElement") -> float:
        keys = set(self._c) | set(other._c)
        return max((abs(to_complex(self.get(k)) - to_complex(other.get(k))) for k in keys), default=0.0)

    def embed(self, n_new: int, shift: int = 0) -> "GrassmannElement":
        """Relabel generator k as k + shift inside a larger algebra."""
        if self.n + shift > n_new:
            raise ValueError("target algebra too small")
        return GrassmannElement(n_new, {k << shift: v for k, v in self._c.items()})

    def __repr__(self):
        if not self._c:
            return f"GrassmannElement(n={self.n}, 0)"
        terms = []
        for k in sorted(self._c, key=lambda m: (size(m), members_of(m))):
            mon = "1" if k == 0 else "θ" + "".join(str(i) for i in members_of(k))
            terms.append(f"({self._c[k]})·{mon}")
        return f"GrassmannElement(n={self.n}, " + " + ".join(terms) + ")"


def gr_mul(a: GrassmannElement, b: GrassmannElement) -> GrassmannElement:
    """Product extending theta^I theta^J = eps(I, J) theta^(I u J)."""
    a._check(b)
    out: dict[Mask, object] = {}
    for I, x in a._c.items():
        for J, y in b._c.items():
            if I & J:
                continue
            s = eps(I, J)
            v = x * y if s > 0 else -(x * y)
            K = I | J
            out[K] = out[K] + v if K in out else v
    return GrassmannElement(a.n, out)


# ---------------------------------------------------------------- Hodge & pairings

def hodge(a: GrassmannElement) -> GrassmannElement:
    n = a.n
    out = {}
    for I, v in a.items():
        C = complement(I, n)
        out[C] = v if eps(I, C) > 0 else -v
    return GrassmannElement(n, out)


def super_scal(a: GrassmannElement, b: GrassmannElement):
    """Supersymmetric pairing <a, b>, antilinear in a."""
    a._check(b)
    n = a.n
    total = 0
    for I, x in a.items():
        C = complement(I, n)
        y = b._c.get(C)
        if y is None:
            continue
        t = conj(x) * y
        total = total + t if eps(I, C) > 0 else total - t
    return total


def pos_scal(a: GrassmannElement, b: GrassmannElement):
    """Positive scalar product (a, b) = sum conj(a_I) b_I."""
    a._check(b)
    total = 0
    for I, x in a.items():
        y = b._c.get(I)
        if y is not None:
            total = total + conj(x) * y
    return total


# ---------------------------------------------------------------- integration

def berezin(a: GrassmannElement):
    """Coefficient of the top monomial theta^{1..n}."""
    return a._c.get(full_mask(a.n), 0)


def berezin_bank(a: GrassmannElement, bank: Mask) -> GrassmannElement:
    """Integrate out the generators in ``bank``.

    Each term is rewritten as theta^bank * theta^rest (the bank monomial moved
    to the far left) and replaced by theta^rest.  Iterated integrals are taken
    innermost first, so  int d(A) int d(B) F  is
    ``berezin_bank(berezin_bank(F, B), A)``.
    """
    out = {}
    for M, v in a.items():
        if M & bank != bank:
            continue
        rest = M & ~bank
        s = eps(bank, rest)
        out[rest] = v if s > 0 else -v
    return GrassmannElement(a.n, out)


def exp_nilpotent(x: GrassmannElement) -> GrassmannElement:
    """exp of an element with nilpotent even part, via the terminating series.

    The body (degree-0 coefficient) must vanish.
    """
    if x.body():
        raise ValueError("exp_nilpotent needs an element without body")
    sample = next(iter(x._c.values()), None)
    one = one_like(sample)
    term = GrassmannElement.scalar(x.n, one)
    total = term
    k = 1
    while True:
        term = (term * x).scale(one / k)
        if term.is_zero():
            return total
        total = total + term
        k += 1


# ---------------------------------------------------------------- exponentials

def odd_exp(c, n: int) -> GrassmannElement:
    """exp(i c xi . xi0) on 2n generators: xi is 1..n, xi0 is n+1..2n.

    Returns sum_J (i c)^|J| (-1)^{|J|(|J|-1)/2} xi^J xi0^J.
    """
    i = imag_unit(c)
    ic = i * c
    out = {}
    for J in range(1 << n):
        d = size(J)
        v = ipow(ic, d)
        if (d * (d - 1) // 2) % 2:
            v = -v
        out[J | (J << n)] = v
    return GrassmannElement(2 * n, out)


def odd_fourier(f: GrassmannElement, beta, a0) -> GrassmannElement:
    """F_beta f (xi0) = int dxi exp(-(i a0 beta / 2) w1(xi, xi0)) f(xi), w1 = 2 xi.xi0."""
    if not a0:
        raise ValueError("a0 must be nonzero")
    n = f.n
    kernel = odd_exp(-(a0 * beta), n)
    integrand = kernel * f.embed(2 * n, 0)
    res = berezin_bank(integrand, full_mask(n))
    return GrassmannElement(n, {k >> n: v for k, v in res.items()})


def odd_fourier_matrix(n: int, beta, a0):
    """Matrix of F_beta in the monomial basis (column J = image of xi^J)."""
    cols = []
    for J in range(1 << n):
        cols.append(odd_fourier(GrassmannElement.basis(n, J, one_like(a0 * beta)), beta, a0))
    return [[cols[J].get(K) for J in range(1 << n)] for K in range(1 << n)]
