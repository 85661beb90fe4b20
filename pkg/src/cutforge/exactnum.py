"""Exact rational and quadratic-radical arithmetic.

All ceiling/floor computations on values of the form r*sqrt(d) (r rational,
d square-free) are done with integer comparisons only, so the rounded cut
coefficients and the family-membership tests are free of floating-point
error.  Rational numbers are plain ``fractions.Fraction`` (already kept in
lowest terms with positive denominator, which is exactly the invariant we
need).
"""

from __future__ import annotations

import math
from fractions import Fraction

Rational = Fraction

__all__ = [
    "Rational",
    "Radical",
    "squarefree_decompose",
    "radical_mul",
    "radical_add",
    "radical_ceil",
    "radical_floor",
    "radical_compare",
    "ceil_shifted",
    "floor_shifted",
    "parse_radical",
]


def squarefree_decompose(a: int) -> tuple[int, int]:
    """Write a = s^2 * d with d square-free; returns (s, d).

    Trial division up to sqrt(a); inputs here are small (squares of cut
    coefficients), so nothing fancier is warranted.
    """
    if a < 1:
        raise ValueError(f"squarefree_decompose requires a >= 1, got {a}")
    s, d = 1, 1
    rest = a
    p = 2
    while p * p <= rest:
        if rest % p == 0:
            e = 0
            while rest % p == 0:
                rest //= p
                e += 1
            s *= p ** (e // 2)
            if e % 2:
                d *= p
        p += 1 if p == 2 else 2
    d *= rest  # leftover prime (exponent 1)
    return s, d


class Radical:
    """An exact value r*sqrt(d) with r rational and d a square-free positive int.

    Canonical form: d is square-free, and r == 0 forces d == 1 so that zero
    has a unique representation.  Instances are immutable and hashable.
    """

    __slots__ = ("r", "d")

    def __init__(self, r, d: int = 1):
        r = Fraction(r)
        if d < 1:
            raise ValueError(f"radicand must be positive, got {d}")
        if r == 0:
            d = 1
        elif d != 1:
            s, d = squarefree_decompose(d)
            r *= s
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "d", d)

    def __setattr__(self, name, value):
        raise AttributeError("Radical is immutable")

    # -- predicates ---------------------------------------------------------

    def is_rational(self) -> bool:
        return self.d == 1

    def is_integer(self) -> bool:
        return self.d == 1 and self.r.denominator == 1

    def is_zero(self) -> bool:
        return self.r == 0

    def sign(self) -> int:
        return (self.r > 0) - (self.r < 0)

    # -- arithmetic ----------------------------------------------------------

    def __mul__(self, other) -> "Radical":
        if not isinstance(other, Radical):
            other = Radical(other)
        # gcd split keeps everything square-free without refactoring
        g = math.gcd(self.d, other.d)
        return Radical(self.r * other.r * g, (self.d // g) * (other.d // g))

    __rmul__ = __mul__

    def __neg__(self) -> "Radical":
        return Radical(-self.r, self.d)

    def __add__(self, other) -> "Radical":
        if not isinstance(other, Radical):
            other = Radical(other)
        if self.r == 0:
            return other
        if other.r == 0:
            return self
        if self.d != other.d:
            raise ValueError(
                f"cannot add radicals with different radicands sqrt({self.d}) and sqrt({other.d})"
            )
        return Radical(self.r + other.r, self.d)

    def __sub__(self, other) -> "Radical":
        if not isinstance(other, Radical):
            other = Radical(other)
        return self + (-other)

    def square(self) -> Fraction:
        return self.r * self.r * self.d

    # -- comparisons ---------------------------------------------------------

    def compare(self, other) -> int:
        """Exact sign of self - other (-1, 0, +1)."""
        if not isinstance(other, Radical):
            other = Radical(other)
        sa, sb = self.sign(), other.sign()
        if sa != sb:
            return (sa > sb) - (sa < sb)
        if sa == 0:
            return 0
        # same strict sign: compare squares (order flips for negatives)
        qa, qb = self.square(), other.square()
        c = (qa > qb) - (qa < qb)
        return c if sa > 0 else -c

    def __eq__(self, other):
        if not isinstance(other, Radical):
            other = Radical(other)
        return self.r == other.r and self.d == other.d

    def __hash__(self):
        return hash((self.r, self.d))

    def __lt__(self, other):
        return self.compare(other) < 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def __float__(self) -> float:
        return float(self.r) * math.sqrt(self.d)

    # -- rendering -----------------------------------------------------------

    def __repr__(self):
        return f"Radical({self.r!r}, {self.d})"

    def __str__(self):
        if self.d == 1:
            return _frac_str(self.r)
        if self.r == 1:
            return f"sqrt({self.d})"
        if self.r == -1:
            return f"-sqrt({self.d})"
        return f"{_frac_str(self.r)}*sqrt({self.d})"


def _frac_str(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def radical_mul(a: Radical, b: Radical) -> Radical:
    return a * b


def radical_add(a: Radical, b: Radical) -> Radical:
    return a + b


def radical_compare(a: Radical, b: Radical) -> int:
    return a.compare(b)


def radical_floor(a: Radical) -> int:
    """Exact floor of r*sqrt(d) by integer comparisons (no floating point)."""
    if a.d == 1:
        return math.floor(a.r)
    # r^2 * d = p/q ; floor(sqrt(p*q)/q) with sign handling
    sq = a.square()
    p, q = sq.numerator, sq.denominator
    root = math.isqrt(p * q) // q  # floor of |a| (non-negative branch)
    if a.r > 0:
        return root
    # negative: floor(-x) = -ceil(x); ceil(|a|) = root unless exact, but d > 1
    # square-free means |a| is irrational, so ceil(|a|) = root + 1 always.
    return -(root + 1)


def radical_ceil(a: Radical) -> int:
    if a.d == 1:
        return math.ceil(a.r)
    return -radical_floor(-a)


def floor_shifted(q: Fraction, rad: Radical) -> int:
    """Exact floor(q + rad) for rational q plus a single radical."""
    if rad.d == 1:
        return math.floor(q + rad.r)
    base = math.floor(q) + radical_floor(rad)
    # true floor lies in [base, base+1]; one exact comparison settles it
    if rad.compare(Radical(base + 1 - q)) >= 0:
        return base + 1
    return base


def ceil_shifted(q: Fraction, rad: Radical) -> int:
    return -floor_shifted(-q, -rad)


def parse_radical(text: str) -> Radical:
    """Parse 'r', 'r/s', 'sqrt(d)', 'r*sqrt(d)' or 'r/s*sqrt(d)' (sign allowed)."""
    t = text.strip().replace(" ", "")
    neg = False
    if t.startswith(("+", "-")):
        neg = t[0] == "-"
        t = t[1:]
    if "sqrt" in t:
        head, _, tail = t.partition("sqrt")
        if not (tail.startswith("(") and tail.endswith(")")):
            raise ValueError(f"malformed radical {text!r}")
        d = int(tail[1:-1])
        head = head.rstrip("*")
        r = Fraction(head) if head else Fraction(1)
    else:
        r = Fraction(t)
        d = 1
    if neg:
        r = -r
    return Radical(r, d)
