"""Ostrowski numeration: encode/decode, distinguished digit vectors, epsilon profiles.

Digits are stored least-significant first: digits[k] is the coefficient of q_k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath

from .cf import ConvergentTable
from .errors import InvalidDigitsError, RangeError

#: Projection guard used throughout the prediction machinery; T is the bound
#: on log(a_k)/a_{k+1}.
def delta_T_default(T: float) -> float:
    return min(1.0 / (4.0 * math.pi * math.exp(2.0 * T)), 0.01)


@dataclass(frozen=True)
class OstrowskiDigits:
    """Digit vector b_0..b_{K-1} over a convergent table, with validity state."""

    digits: tuple
    table: ConvergentTable

    @property
    def K(self) -> int:
        return len(self.digits)

    def violations(self) -> list[str]:
        out = []
        t = self.table
        if self.K > t.K_max:
            out.append(f"length {self.K} exceeds table K_max={t.K_max}")
            return out
        for k, b in enumerate(self.digits):
            hi = t.a[1] - 1 if k == 0 else t.a[k + 1]
            if not 0 <= b <= hi:
                out.append(f"b_{k}={b} outside [0, {hi}]")
        for k in range(1, self.K):
            if self.digits[k] == t.a[k + 1] and self.digits[k - 1] != 0:
                out.append(f"b_{k}=a_{k + 1} requires b_{k - 1}=0")
        return out

    @property
    def is_valid(self) -> bool:
        return not self.violations()

    def require_valid(self):
        bad = self.violations()
        if bad:
            raise InvalidDigitsError(
                "invalid Ostrowski digits: " + "; ".join(bad),
                digits=self, violations=bad,
            )

    def to_list(self) -> list[int]:
        # JSON convention: integer array, most-significant digit last.
        return list(self.digits)


def encode(table: ConvergentTable, N: int, K: int | None = None) -> OstrowskiDigits:
    """Greedy expansion of N from the top; digits satisfy the carry rule."""
    N = int(N)
    if not 0 <= N < table.q[table.K_max]:
        raise RangeError(f"N={N} outside [0, q_K={table.q[table.K_max]})")
    if K is None:
        K = 1
        while K < table.K_max and table.q[K] <= N:
            K += 1
    elif not 1 <= K <= table.K_max:
        raise RangeError(f"K={K} outside [1, {table.K_max}]")
    elif N >= table.q[K]:
        raise RangeError(f"N={N} does not fit in {K} digits (q_{K}={table.q[K]})")
    digits = [0] * K
    rem = N
    for k in range(K - 1, -1, -1):
        digits[k], rem = divmod(rem, table.q[k])
    out = OstrowskiDigits(tuple(digits), table)
    out.require_valid()
    return out


def decode(digits: OstrowskiDigits) -> int:
    digits.require_valid()
    return sum(b * digits.table.q[k] for k, b in enumerate(digits.digits))


def n_star(table: ConvergentTable, K: int) -> OstrowskiDigits:
    """The near-maximizer digit vector b_k = floor(5 a_{k+1} / 6)."""
    if not 1 <= K <= table.K_max:
        raise RangeError(f"K={K} outside [1, {table.K_max}]")
    digits = tuple((5 * table.a[k + 1]) // 6 for k in range(K))
    out = OstrowskiDigits(digits, table)
    out.require_valid()  # floor(5a/6) < a, so always valid
    return out


def b_double_star(a_next: int, delta_T: float) -> int:
    """Regularized digit target: 0 when a_{k+1}=2, else floor((1-delta_T) a_{k+1})."""
    if a_next < 1:
        raise RangeError("a_next must be >= 1")
    if not 0.0 < delta_T < 1.0:
        raise RangeError("delta_T must lie in (0, 1)")
    if a_next == 2:
        return 0
    from fractions import Fraction

    # Read the float through its shortest repr so decimal inputs like 0.01
    # mean exactly 1/100 when the floor lands on an integer boundary.
    return int((1 - Fraction(repr(float(delta_T)))) * a_next)


@dataclass(frozen=True)
class EpsilonProfile:
    """eps[k] for every index with b_k >= 1; absent keys mean undefined."""

    eps: dict

    def __getitem__(self, k: int):
        return self.eps[k]

    def __contains__(self, k: int) -> bool:
        return k in self.eps

    def items(self):
        return self.eps.items()


def epsilon_profile(digits: OstrowskiDigits) -> EpsilonProfile:
    """Alternating tail sums eps_k = q_k sum_{l>k} (-1)^(k+l) b_l ||q_l alpha||."""
    digits.require_valid()
    t = digits.table
    K = digits.K
    with mpmath.workprec(t.cfg.working_bits + 16):
        # Suffix accumulation: s_k = sum_{l>k} (-1)^l b_l theta_l.
        eps = {}
        suffix = mpmath.mpf(0)
        for k in range(K - 1, -1, -1):
            if digits.digits[k] >= 1:
                sign = 1 if k % 2 == 0 else -1
                eps[k] = sign * t.q[k] * suffix
            suffix += ((-1) ** (k % 2)) * digits.digits[k] * t.theta[k]
    return EpsilonProfile(eps)


def project(digits: OstrowskiDigits, m: int, B: int) -> OstrowskiDigits:
    """Replace digit m with B; raises if the result breaks the digit rules."""
    digits.require_valid()
    if not 0 <= m < digits.K:
        raise RangeError(f"index m={m} outside [0, {digits.K - 1}]")
    if B < 0:
        raise RangeError("replacement digit must be non-negative")
    new = list(digits.digits)
    new[m] = int(B)
    out = OstrowskiDigits(tuple(new), digits.table)
    out.require_valid()
    return out


def enumerate_valid(table: ConvergentTable, K: int):
    """All valid digit vectors of length K, in lexicographic order from b_0."""
    if not 1 <= K <= table.K_max:
        raise RangeError(f"K={K} outside [1, {table.K_max}]")

    def rec(k, prefix):
        if k == K:
            yield OstrowskiDigits(tuple(prefix), table)
            return
        hi = table.a[1] - 1 if k == 0 else table.a[k + 1]
        for b in range(hi + 1):
            if k >= 1 and b == table.a[k + 1] and prefix[-1] != 0:
                continue
            yield from rec(k + 1, prefix + [b])

    yield from rec(0, [])
