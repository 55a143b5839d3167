"""Scalar helpers shared by the exact and floating backends.

Exact scalars are sympy Gaussian rationals (``QQ_I``); floating scalars are
Python ``complex``.  Every algebra routine in the package only relies on
``+``, ``-``, ``*``, ``/`` and the helpers below, so both backends flow
through the same code.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Number

from sympy.polys.domains import QQ, QQ_I

GaussRat = type(QQ_I(0, 1))

ZERO = QQ_I(0, 0)
ONE = QQ_I(1, 0)
I_EXACT = QQ_I(0, 1)


def is_exact(c) -> bool:
    return isinstance(c, GaussRat)


def exact(x) -> GaussRat:
    """Convert ints, Fractions, Gaussian rationals or (re, im) pairs to ``QQ_I``.

    Floats are rejected unless they are integral: silently rationalising
    1/3 would make "exact" results depend on float rounding.
    """
    if isinstance(x, GaussRat):
        return x
    if isinstance(x, tuple):
        re, im = x
        return QQ_I(_qq(re), _qq(im))
    if isinstance(x, complex):
        return QQ_I(_qq(x.real), _qq(x.imag))
    return QQ_I(_qq(x), 0)


def _qq(x):
    if isinstance(x, Fraction):
        return QQ(x.numerator, x.denominator)
    if isinstance(x, int):
        return QQ(x)
    if isinstance(x, float):
        if x != int(x):
            raise ValueError(f"refusing to rationalise non-integral float {x!r}")
        return QQ(int(x))
    return QQ.convert(x)


def to_complex(c) -> complex:
    if isinstance(c, GaussRat):
        return complex(float(c.x), float(c.y))
    return complex(c)


def conj(c):
    if isinstance(c, GaussRat):
        return QQ_I(c.x, -c.y)
    if isinstance(c, Number):
        return c.conjugate()
    return c.conjugate()


def imag_unit(like=None):
    """``i`` in the backend of ``like``."""
    return I_EXACT if is_exact(like) else 1j


def one_like(like=None):
    return ONE if is_exact(like) else 1.0 + 0j


def zero_like(like=None):
    return ZERO if is_exact(like) else 0j


def ipow(base, k: int):
    """Integer power that also handles negative exponents of ``QQ_I``."""
    if k >= 0:
        out = one_like(base)
        for _ in range(k):
            out = out * base
        return out
    return one_like(base) / ipow(base, -k)


def sign_pow(k: int) -> int:
    return -1 if k % 2 else 1


def as_pair(c) -> tuple[str, str]:
    """Stable string form (used in JSON dumps) of an exact scalar."""
    if isinstance(c, GaussRat):
        return (str(c.x), str(c.y))
    z = complex(c)
    return (repr(z.real), repr(z.imag))
