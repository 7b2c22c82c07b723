"""Scalar backends for the bilinear engine.

Two backends coexist:

* exact: elements p + q*rho of the quadratic field Q(sqrt(d)) for a
  squarefree integer d (rho**2 = d), with Fraction components.  All engine
  operations on this backend are exact, so "residual equals zero" is a
  decidable statement.
* float: plain Python complex numbers, used for numerical verification,
  lattice runs and convergence studies.

The two backends are never mixed inside one expression; `backend_of` tags a
scalar and the expression layer enforces homogeneity.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

RatLike = Union[int, Fraction]


def _is_square_free(d: int) -> bool:
    if d in (0, 1):
        return False
    n = abs(d)
    f = 2
    while f * f <= n:
        if n % (f * f) == 0:
            return False
        f += 1
    return True


def rational_sqrt(x: Fraction) -> Optional[Fraction]:
    """Exact square root of a rational, or None if x is not a square."""
    if x < 0:
        return None
    if x == 0:
        return Fraction(0)
    pn = math.isqrt(x.numerator)
    pd = math.isqrt(x.denominator)
    if pn * pn == x.numerator and pd * pd == x.denominator:
        return Fraction(pn, pd)
    return None


@dataclass(frozen=True)
class QuadExt:
    """Element a + b*rho of Q(sqrt(d)), rho**2 = d.

    Pure rationals are normalized to d = 0 so that they compare equal and
    combine freely across contexts; two scalars with distinct nonzero d
    refuse to combine.
    """

    a: Fraction
    b: Fraction
    d: int

    def __post_init__(self):
        if not isinstance(self.a, Fraction):
            object.__setattr__(self, "a", Fraction(self.a))
        if not isinstance(self.b, Fraction):
            object.__setattr__(self, "b", Fraction(self.b))
        if self.b == 0:
            object.__setattr__(self, "d", 0)
        elif not _is_square_free(self.d):
            raise ValueError(f"d must be a squarefree integer != 0, 1: got {self.d}")

    # -- context handling -------------------------------------------------
    def _join(self, other: "QuadExt") -> int:
        if self.d == 0:
            return other.d
        if other.d == 0 or other.d == self.d:
            return self.d
        raise ValueError(f"mixing Q(sqrt({self.d})) with Q(sqrt({other.d}))")

    @staticmethod
    def lift(x: Union["QuadExt", RatLike], d: int = 0) -> "QuadExt":
        if isinstance(x, QuadExt):
            return x
        if isinstance(x, (int, Fraction)):
            return QuadExt(Fraction(x), Fraction(0), d)
        raise TypeError(f"cannot lift {type(x).__name__} into the exact field")

    # -- ring operations ---------------------------------------------------
    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = QuadExt.lift(other)
        if not isinstance(other, QuadExt):
            return NotImplemented
        d = self._join(other)
        return QuadExt(self.a + other.a, self.b + other.b, d)

    __radd__ = __add__

    def __neg__(self):
        return QuadExt(-self.a, -self.b, self.d)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = QuadExt.lift(other)
        if not isinstance(other, QuadExt):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = QuadExt.lift(other)
        if not isinstance(other, QuadExt):
            return NotImplemented
        d = self._join(other)
        return QuadExt(
            self.a * other.a + Fraction(d) * self.b * other.b,
            self.a * other.b + self.b * other.a,
            d,
        )

    __rmul__ = __mul__

    def inverse(self) -> "QuadExt":
        n = self.a * self.a - Fraction(self.d) * self.b * self.b
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt(d))")
        return QuadExt(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            other = QuadExt.lift(other)
        if not isinstance(other, QuadExt):
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return QuadExt.lift(other) * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        out = QuadExt(Fraction(1), Fraction(0), 0)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- structure ----------------------------------------------------------
    def conjugate(self) -> "QuadExt":
        return QuadExt(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - Fraction(self.d) * self.b * self.b

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        if isinstance(other, QuadExt):
            if self.b != 0 and other.b != 0 and self.d != other.d:
                return False
            return self.a == other.a and self.b == other.b
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b, self.d))

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def sort_key(self):
        return (self.a, self.b)

    def to_complex(self) -> complex:
        if self.b == 0:
            return complex(self.a)
        root = math.sqrt(abs(self.d))
        if self.d > 0:
            return complex(self.a + self.b * root)
        return complex(float(self.a), float(self.b) * root)

    def __repr__(self):
        if self.b == 0:
            return f"{self.a}"
        return f"({self.a}{'+' if self.b >= 0 else ''}{self.b}*sqrt({self.d}))"


ZERO = QuadExt(Fraction(0), Fraction(0), 0)
ONE = QuadExt(Fraction(1), Fraction(0), 0)


def exact(a: RatLike, b: RatLike = 0, d: int = -3) -> QuadExt:
    """Build an exact scalar a + b*sqrt(d); plain rationals keep d = 0."""
    return QuadExt(Fraction(a), Fraction(b), d if b != 0 else 0)


def rho(d: int = -3) -> QuadExt:
    """The square root generator of Q(sqrt(d))."""
    return QuadExt(Fraction(0), Fraction(1), d)


def field_sqrt(x: QuadExt) -> Optional[QuadExt]:
    """A square root of x inside Q(sqrt(d)), or None when none exists.

    For x = w1 + w2*rho a root p + q*rho requires p**2 + d*q**2 = w1 and
    2*p*q = w2, which reduces to rational square tests.
    """
    if not x:
        return ZERO
    d = x.d
    if x.b == 0:
        r = rational_sqrt(x.a)
        if r is not None:
            return QuadExt(r, Fraction(0), 0)
        # maybe x = d * square, so sqrt(x) = rho * sqrt(x/d)
        for cand_d in _candidate_ds(x):
            r = rational_sqrt(x.a / cand_d)
            if r is not None:
                return QuadExt(Fraction(0), r, cand_d)
        return None
    n = rational_sqrt(x.norm())
    if n is None:
        return None
    for r in (n, -n):
        half = (x.a + r) / 2
        p = rational_sqrt(half)
        if p is not None and p != 0:
            q = x.b / (2 * p)
            cand = QuadExt(p, q, d)
            if cand * cand == x:
                return cand
    return None


def _candidate_ds(x: QuadExt):
    # Squarefree kernel of the numerator*denominator carries the only
    # possible d for sqrt(rational) = rho * rational.
    v = x.a.numerator * x.a.denominator
    if v == 0:
        return []
    sign = -1 if v < 0 else 1
    n = abs(v)
    kernel = 1
    f = 2
    while f * f <= n:
        e = 0
        while n % f == 0:
            n //= f
            e += 1
        if e % 2:
            kernel *= f
        f += 1
    kernel *= n
    d = sign * kernel
    return [d] if _is_square_free(d) else []


# -- backend helpers --------------------------------------------------------

EXACT = "exact"
FLOAT = "float"

Scalar = Union[QuadExt, complex]


def backend_of(x) -> str:
    if isinstance(x, QuadExt):
        return EXACT
    if isinstance(x, (complex, float)):
        return FLOAT
    if isinstance(x, (int, Fraction)):
        return EXACT
    raise TypeError(f"not a scalar: {x!r}")


def coerce(x, backend: str):
    """Coerce a number into the requested backend scalar type."""
    if backend == EXACT:
        if isinstance(x, QuadExt):
            return x
        if isinstance(x, (int, Fraction)):
            return QuadExt.lift(x)
        raise TypeError(f"cannot use {x!r} on the exact backend")
    if isinstance(x, QuadExt):
        return x.to_complex()
    return complex(x)


def to_complex(x) -> complex:
    if isinstance(x, QuadExt):
        return x.to_complex()
    return complex(x)


def is_zero_scalar(x) -> bool:
    if isinstance(x, QuadExt):
        return not x
    return x == 0


def sort_key(x):
    """Total order key; exact scalars order by (rational, radical) part."""
    if isinstance(x, QuadExt):
        return (0, x.a, x.b)
    z = complex(x)
    return (1, z.real, z.imag)
