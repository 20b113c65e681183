"""Sudler product evaluation: direct, shifted, rational, decomposed, and scans.

All products are accumulated in log space.  Within a block the factor logs are
summed by numpy's pairwise reduction; blocks are merged with compensated
summation, so a full scan over 1e7 indices keeps roughly 1e-12 accuracy on the
running log.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import mpmath
import numpy as np

from .cf import ConvergentTable
from .errors import BudgetError, RangeError, ZeroFactorError
from .numerics import kahan_sum, log_two_sin
from .ostrowski import OstrowskiDigits, epsilon_profile

DEFAULT_SCAN_BUDGET = 10 ** 7
CHUNK = 1 << 16  # fixed block size; results never depend on parallelism
KEEP_VALUES_LIMIT = 1 << 24
DEFAULT_TOP_M = 32

METHOD_DIRECT = "direct"
METHOD_DECOMPOSED = "decomposed"
METHOD_RATIONAL = "rational-closed-form"


@dataclass(frozen=True)
class LogProduct:
    """Natural log of a (shifted) Sudler product magnitude.

    A vanishing factor is a tagged state: log_value then sums only the
    nonzero factors so downstream consumers can skip zeros explicitly.
    """

    log_value: float
    n_terms: int
    method: str
    zero_factors: int = 0

    @property
    def is_zero(self) -> bool:
        return self.zero_factors > 0

    def require_nonzero(self) -> float:
        if self.is_zero:
            raise ZeroFactorError(
                f"{self.zero_factors} factor(s) vanish in a {self.n_terms}-term product"
            )
        return self.log_value


def _check_range(table: ConvergentTable, N: int):
    if not 0 <= N <= table.q[table.K_max]:
        raise RangeError(f"N={N} outside [0, q_K={table.q[table.K_max]}]")


def log_sudler(table: ConvergentTable, N: int) -> LogProduct:
    """log prod_{n=1..N} |2 sin(pi n alpha)|; the empty product is 0."""
    N = int(N)
    _check_range(table, N)
    if N == 0:
        return LogProduct(0.0, 0, METHOD_DIRECT)
    y = table.frac_doubles(N + 1)[1:]
    zeros = 0
    parts = []
    for lo in range(0, N, CHUNK):
        g, z = log_two_sin(y[lo:lo + CHUNK])
        zeros += z
        parts.append(float(np.sum(g)))
    return LogProduct(kahan_sum(parts), N, METHOD_DIRECT, zeros)


def log_sudler_shifted(table: ConvergentTable, M: int, x: float,
                       sign: int = 1) -> LogProduct:
    """log prod_{n=1..M} |2 sin(pi (n alpha + sign*x))|.

    Callers supply the full shift (the decomposition passes (-1)^k x / q_k).
    """
    M = int(M)
    _check_range(table, M)
    if M == 0:
        return LogProduct(0.0, 0, METHOD_DIRECT)
    shift = float(sign) * float(x)
    y = table.frac_doubles(M + 1)[1:] + shift
    zeros = 0
    if table.is_rational:
        # Exact-residue fractional parts plus a shift can land exactly on an
        # integer; sin would round to ~1e-16 there, so detect on the argument.
        at_int = y == np.round(y)
        zeros = int(np.count_nonzero(at_int))
        if zeros:
            y = y[~at_int]
    parts = []
    for lo in range(0, len(y), CHUNK):
        g, z = log_two_sin(y[lo:lo + CHUNK])
        zeros += z
        parts.append(float(np.sum(g)))
    return LogProduct(kahan_sum(parts), M, METHOD_DIRECT, zeros)


def log_sudler_rational(p: int, q: int, N: int, x: float = 0.0) -> LogProduct:
    """log prod_{n=1..N} |2 sin(pi (n p/q + x))| with exact residue reduction."""
    p, q, N = int(p), int(q), int(N)
    if q < 1 or math.gcd(p, q) != 1:
        raise RangeError("p/q must be a reduced fraction with q >= 1")
    if not 0 <= N < q:
        raise RangeError(f"N={N} outside [0, q={q})")
    if N == 0:
        return LogProduct(0.0, 0, METHOD_RATIONAL)
    n = np.arange(1, N + 1, dtype=np.int64)
    r = (n * (p % q)) % q
    y = r.astype(np.float64) / q + float(x)
    # A factor vanishes iff its argument is an integer; detect on the
    # argument, since sin(pi * y) does not round to exactly zero there.
    at_int = y == np.round(y)
    zeros = int(np.count_nonzero(at_int))
    if zeros:
        y = y[~at_int]
    g, _ = log_two_sin(y)
    return LogProduct(float(np.sum(g)), N, METHOD_RATIONAL, zeros)


def reflection_rhs(q: int, x: float) -> float:
    """log of the reflection target: |sin(pi q x)| / |sin(pi x)|, or q at integer x."""
    if float(x) == round(x):
        return math.log(q)
    return math.log(abs(math.sin(math.pi * q * x))) - math.log(abs(math.sin(math.pi * x)))


@dataclass(frozen=True)
class Decomposition:
    """Per-(k, b) factor logs of the Ostrowski product form, plus their total."""

    factors: tuple  # entries (k, b, factor_log)
    total: float
    n_terms: int

    def as_log_product(self) -> LogProduct:
        return LogProduct(self.total, self.n_terms, METHOD_DECOMPOSED)


def decompose(table: ConvergentTable, digits: OstrowskiDigits) -> Decomposition:
    """Evaluate P_N through shifted length-q_k blocks driven by the digit vector.

    Each inner shift argument b*delta_k + eps_k is re-checked against (-1, 1)
    at runtime; a violation indicates an upstream bug and raises.
    """
    digits.require_valid()
    eps = epsilon_profile(digits)
    factors = []
    n_terms = 0
    with mpmath.workprec(table.cfg.working_bits + 16):
        for k, b_k in enumerate(digits.digits):
            if b_k < 1:
                continue
            sign = 1 if k % 2 == 0 else -1
            for b in range(b_k):
                arg = b * table.delta[k] + eps[k]
                if not (mpmath.mpf(-1) < arg < mpmath.mpf(1)):
                    raise AssertionError(
                        f"shift argument {float(arg)} outside (-1,1) at k={k}, b={b}"
                    )
                shift = float(sign * arg / table.q[k])
                lp = log_sudler_shifted(table, table.q[k], shift)
                factors.append((k, b, lp.require_nonzero()))
                n_terms += table.q[k]
    total = kahan_sum(f for _, _, f in factors)
    return Decomposition(tuple(factors), total, n_terms)


def b_transfer(table: ConvergentTable, k: int, M: int, x: float) -> float:
    """Transfer defect between the product at alpha and at p_k/q_k.

    log(P_M(alpha, s)/P_M(p_k/q_k, s)) minus the partial sine-weighted
    cotangent sum to M, with s = (-1)^k x / q_k.
    """
    if not 1 <= k <= table.K_max:
        raise RangeError(f"k={k} outside [1, {table.K_max}]")
    if not 0 <= M < table.q[k]:
        raise RangeError(f"M={M} outside [0, q_k={table.q[k]})")
    if not -1.0 < x < 1.0:
        raise RangeError("x must lie in (-1, 1)")
    if M == 0:
        return 0.0
    sign = 1 if k % 2 == 0 else -1
    shift = sign * x / table.q[k]
    num = log_sudler_shifted(table, M, shift).require_nonzero()
    den = log_sudler_rational(table.p[k] % table.q[k], table.q[k], M, shift)
    n = np.arange(1, M + 1, dtype=np.int64)
    m = (sign * n * table.p[k]) % table.q[k]
    theta_k = float(table.theta[k])
    weights = np.sin(np.pi * n * (theta_k / table.q[k]))
    cots = 1.0 / np.tan(np.pi * (m + x) / table.q[k])
    partial = float(np.sum(weights * cots))
    return num - den.require_nonzero() - partial


@dataclass(frozen=True)
class ScanResult:
    """Outcome of a sweep over 0 <= N < q_K."""

    K: int
    q_K: int
    argmax_N: int
    max_log: float
    sums: dict  # c -> log(sum_N P_N^c)
    top: tuple  # ((N, log P_N), ...) best top_m, descending
    values: np.ndarray | None = None

    def equals_bitwise(self, other: "ScanResult") -> bool:
        if (self.K, self.q_K, self.argmax_N) != (other.K, other.q_K, other.argmax_N):
            return False
        if self.max_log != other.max_log or self.sums != other.sums:
            return False
        return self.top == other.top


def _scan_chunk(table, lo, hi, c_list, top_m):
    """Summary of one fixed block: factor-log sum, relative LSE pieces, top list."""
    y = table.frac_doubles(hi)[lo:hi]
    if lo == 0:
        g_tail, zeros = log_two_sin(y[1:])  # index 0 carries no factor (P_0 = 1)
        g = np.concatenate(([0.0], g_tail))
    else:
        g, zeros = log_two_sin(y)
    if zeros:
        raise ZeroFactorError(f"vanishing factor in block [{lo},{hi})")
    prefix = np.cumsum(g)
    arg = int(np.argmax(prefix))
    lse = []
    for c in c_list:
        v = c * prefix
        m_rel = float(np.max(v))
        s_rel = float(np.sum(np.exp(v - m_rel)))
        lse.append((m_rel, s_rel))
    if top_m >= len(prefix):
        idx = np.argsort(-prefix, kind="stable")[:top_m]
    else:
        part = np.argpartition(-prefix, top_m)[:top_m]
        idx = part[np.argsort(-prefix[part], kind="stable")]
    top = [(int(lo + i), float(prefix[i])) for i in idx]
    return {
        "sum": float(prefix[-1]),
        "argmax": lo + arg,
        "argmax_val": float(prefix[arg]),
        "lse": lse,
        "top": top,
        "prefix": prefix,
    }


def scan(table: ConvergentTable, K: int, c_list=(), parallelism: int = 1,
         top_m: int = DEFAULT_TOP_M, keep_values: bool | None = None,
         budget: int = DEFAULT_SCAN_BUDGET) -> ScanResult:
    """Stream N = 0 .. q_K - 1 and accumulate max, the c-norm sums, and top_m.

    Work is partitioned into fixed-size blocks and merged in block order, so
    the result is bit-identical for any parallelism level.
    """
    if not 1 <= K <= table.K_max:
        raise RangeError(f"K={K} outside [1, {table.K_max}]")
    q_K = int(table.q[K])
    if q_K > budget:
        raise BudgetError(f"q_K={q_K} exceeds scan budget {budget}")
    c_list = tuple(float(c) for c in c_list)
    if any(c <= 0 for c in c_list):
        raise RangeError("norm exponents must be positive")
    if keep_values is None:
        keep_values = q_K <= KEEP_VALUES_LIMIT
    table.frac_doubles(q_K)  # warm the cache once, outside the worker pool
    ranges = [(lo, min(lo + CHUNK, q_K)) for lo in range(0, q_K, CHUNK)]

    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            summaries = list(
                pool.map(lambda r: _scan_chunk(table, r[0], r[1], c_list, top_m), ranges)
            )
    else:
        summaries = [_scan_chunk(table, lo, hi, c_list, top_m) for lo, hi in ranges]

    # Merge in fixed block order with a compensated running seed.
    seed, comp = 0.0, 0.0
    best_val, best_n = -math.inf, -1
    acc = {c: (-math.inf, 0.0) for c in c_list}
    top_all = []
    values = np.empty(q_K, dtype=np.float64) if keep_values else None
    for (lo, hi), s in zip(ranges, summaries):
        val = seed + s["argmax_val"]
        if val > best_val:
            best_val, best_n = val, s["argmax"]
        for c, (m_rel, s_rel) in zip(c_list, s["lse"]):
            m_abs = m_rel + c * seed
            m_old, s_old = acc[c]
            m_new = max(m_old, m_abs)
            acc[c] = (
                m_new,
                s_old * math.exp(m_old - m_new) + s_rel * math.exp(m_abs - m_new),
            )
        top_all.extend((n, seed + v) for n, v in s["top"])
        if values is not None:
            values[lo:hi] = seed + s["prefix"]
        # Neumaier step for the seed.
        t = seed + s["sum"]
        if abs(seed) >= abs(s["sum"]):
            comp += (seed - t) + s["sum"]
        else:
            comp += (s["sum"] - t) + seed
        seed = t + comp
        comp = 0.0
    sums = {c: m + math.log(s) for c, (m, s) in acc.items()}
    top_all.sort(key=lambda t: (-t[1], t[0]))
    return ScanResult(K, q_K, best_n, best_val, sums, tuple(top_all[:top_m]), values)
