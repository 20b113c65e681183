"""Exact arithmetic in real quadratic fields Q(sqrt(d)).

Values are kept as a + b*sqrt(d) with rational a, b and a fixed positive
non-square integer d.  All continued-fraction tail manipulations (reciprocal,
integer shifts, Mobius maps) stay inside the field, so periodic tails and the
quantities derived from them are exact until a single final rounding.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath

from .errors import SudlerError


def _sign_of(A: int, B: int, d: int) -> int:
    """Exact sign of A + B*sqrt(d) for integers A, B and non-square d > 0."""
    if B == 0:
        return (A > 0) - (A < 0)
    if A == 0:
        return 1 if B > 0 else -1
    if A > 0 and B > 0:
        return 1
    if A < 0 and B < 0:
        return -1
    # Opposite signs: compare A^2 against B^2 d.
    if B > 0:  # A < 0
        return 1 if B * B * d > A * A else -1
    return 1 if A * A > B * B * d else -1  # B < 0, A > 0


class Surd:
    """Immutable element a + b*sqrt(d) of a real quadratic field."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b, d: int):
        if d <= 1 or math.isqrt(d) ** 2 == d:
            raise SudlerError(f"d={d} must be a positive non-square integer")
        object.__setattr__(self, "a", Fraction(a))
        object.__setattr__(self, "b", Fraction(b))
        object.__setattr__(self, "d", int(d))

    def __setattr__(self, *args):
        raise AttributeError("Surd is immutable")

    def __repr__(self):
        return f"Surd({self.a} + {self.b}*sqrt({self.d}))"

    # --- field arithmetic (same d only) ---

    def add_rational(self, r) -> "Surd":
        return Surd(self.a + Fraction(r), self.b, self.d)

    def scale(self, r) -> "Surd":
        r = Fraction(r)
        return Surd(self.a * r, self.b * r, self.d)

    def mul(self, other: "Surd") -> "Surd":
        if other.d != self.d:
            raise SudlerError("cannot multiply surds from different fields")
        a1, b1, a2, b2 = self.a, self.b, other.a, other.b
        return Surd(a1 * a2 + b1 * b2 * self.d, a1 * b2 + a2 * b1, self.d)

    def reciprocal(self) -> "Surd":
        norm = self.a * self.a - self.b * self.b * self.d
        if norm == 0:
            raise ZeroDivisionError("zero surd")
        return Surd(self.a / norm, -self.b / norm, self.d)

    def mobius(self, p: int, q: int, r: int, s: int) -> "Surd":
        """(p*x + r) / (q*x + s) applied to this value."""
        num = self.scale(p).add_rational(r)
        den = self.scale(q).add_rational(s)
        return num.mul(den.reciprocal())

    # --- exact order relations ---

    def sign(self) -> int:
        den = self.a.denominator * self.b.denominator
        A = self.a.numerator * self.b.denominator
        B = self.b.numerator * self.a.denominator
        s = _sign_of(A, B, self.d)
        return s if den > 0 else -s

    def cmp_rational(self, r) -> int:
        return self.add_rational(-Fraction(r)).sign()

    def floor(self) -> int:
        """Exact floor, using a rounded seed verified by integer comparisons."""
        bits = 64 + max(
            self.a.numerator.bit_length() - self.a.denominator.bit_length(),
            self.b.numerator.bit_length()
            - self.b.denominator.bit_length()
            + self.d.bit_length() // 2 + 1,
            0,
        )
        n = int(mpmath.floor(self.to_mpf(bits)))
        # The seed is off by at most one; walk to the exact answer.
        while self.cmp_rational(n) < 0:
            n -= 1
        while self.cmp_rational(n + 1) >= 0:
            n += 1
        return n

    # --- rounding ---

    def to_mpf(self, prec_bits: int) -> mpmath.mpf:
        """Round to prec_bits true bits.

        a and b*sqrt(d) can nearly cancel (Mobius images have huge opposite
        parts), so evaluate at growing precision until two passes agree.
        """
        extra = 32
        prev = None
        while True:
            with mpmath.workprec(prec_bits + extra):
                root = mpmath.sqrt(mpmath.mpf(self.d))
                val = (
                    mpmath.mpf(self.a.numerator) / self.a.denominator
                    + mpmath.mpf(self.b.numerator) / self.b.denominator * root
                )
                if prev is not None and (
                    val == prev
                    or (val != 0
                        and abs(val - prev) <= abs(val) * mpmath.mpf(2) ** (-prec_bits - 8))
                ):
                    return val
            prev = val
            extra *= 4

    def __float__(self):
        return float(self.to_mpf(64))


def periodic_tail(digits) -> Surd:
    """Value of the purely periodic continued fraction [c1; c2, ..., cm, ...].

    Solves the fixed-point equation of the period's Mobius map and returns the
    positive root.
    """
    digits = tuple(int(c) for c in digits)
    if not digits or any(c < 1 for c in digits):
        raise SudlerError("period digits must be positive integers")
    # Product of [[c,1],[1,0]] over the period.
    m00, m01, m10, m11 = 1, 0, 0, 1
    for c in digits:
        m00, m01, m10, m11 = m00 * c + m01, m00, m10 * c + m11, m10
    # x = (m00 x + m01)/(m10 x + m11)  =>  m10 x^2 + (m11 - m00) x - m01 = 0
    P, Pp, Q, Qp = m00, m01, m10, m11
    disc = (Qp - P) * (Qp - P) + 4 * Q * Pp
    x = Surd(Fraction(P - Qp, 2 * Q), Fraction(1, 2 * Q), disc)
    if x.sign() <= 0:
        raise SudlerError("periodic tail fixed point is not the positive root")
    return x


def prepend_digits(tail: Surd, digits) -> Surd:
    """Value of [c1; c2, ..., cn, tail...] given the tail's exact value."""
    x = tail
    for c in reversed(tuple(digits)):
        x = x.reciprocal().add_rational(int(c))
    return x
