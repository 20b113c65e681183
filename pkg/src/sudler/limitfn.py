"""Limit curves of shifted block products and their closed-form main terms.

For a periodic alpha the block products P_{q_k}(alpha, (-1)^k x / q_k)
stabilize along each residue class of k mod p; the closed-form main term
needs only the limit constants C_r, D_r and one digamma evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .cf import AlphaSpec, ConvergentTable, parse_alpha
from .cotangent import digamma
from .errors import BudgetError, RangeError, SudlerError
from .products import log_sudler_shifted
from .surd import periodic_tail

DEFAULT_CURVE_BUDGET = 10 ** 7


@dataclass(frozen=True)
class LimitConstants:
    """Limits C_r of q_k ||q_k alpha|| and D_r of q_{k-1} ||q_k alpha|| along k = k0 + r (mod p)."""

    C_r: float
    D_r: float
    r: int
    p: int


def limit_constants(alpha: AlphaSpec | str, r: int, prec_bits: int = 192) -> LimitConstants:
    """Exact-surd limit constants for residue class r (1 <= r <= p)."""
    if isinstance(alpha, str):
        alpha = parse_alpha(alpha)
    if alpha.period is None:
        raise SudlerError("limit constants require a periodic alpha")
    per = alpha.period
    p = len(per)
    if not 1 <= r <= p:
        raise RangeError(f"r={r} outside [1, {p}]")
    forward = tuple(per[(r + i) % p] for i in range(p))
    backward = tuple(per[(r - 1 - i) % p] for i in range(p))
    with mpmath.workprec(prec_bits + 16):
        beta = periodic_tail(forward).to_mpf(prec_bits)
        gamma = 1 / periodic_tail(backward).to_mpf(prec_bits)
        C = 1 / (beta + gamma)
        D = gamma * C
    if not 0 < float(D) < float(C) < 1:
        raise SudlerError("limit constants failed the 0 < D < C < 1 sanity check")
    return LimitConstants(float(C), float(D), r, p)


def _three_sinc(x: np.ndarray) -> np.ndarray:
    """|sin(pi x) / (pi x (1 - x^2))| with the removable points at 0, +-1 filled in."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    near_pos = x > 0.5
    near_neg = x < -0.5
    mid = ~(near_pos | near_neg)
    out[mid] = np.abs(np.sinc(x[mid]) / (1.0 - x[mid] ** 2))
    # sin(pi x) = -sin(pi (x -+ 1)) folds the zero at +-1 into a sinc.
    out[near_pos] = np.abs(np.sinc(x[near_pos] - 1.0) / (x[near_pos] * (x[near_pos] + 1.0)))
    out[near_neg] = np.abs(np.sinc(x[near_neg] + 1.0) / (x[near_neg] * (x[near_neg] - 1.0)))
    return out


def _main_term_curve(a_exp: int, C: float, D: float, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    base = 2.0 * math.pi * _three_sinc(x)
    shifted = np.abs(x + C) * np.abs(x + 1.0 + (C - D)) * np.abs(x - 1.0 + D)
    expo = np.array(
        [C * (math.log(a_exp / (2.0 * math.pi)) - digamma(2.0 + t)) for t in x]
    )
    return base * shifted * np.exp(expo)


def g_alpha(a: int, x):
    """Closed-form main term of the limit curve for alpha = [0; (a)].

    The pole/zero pairs are evaluated in factored form, so grid points landing
    exactly on 0 or +-1 are fine.  Valid for |x| <= 2 - 2/a.
    """
    a = int(a)
    if a < 1:
        raise RangeError("a must be >= 1")
    s = math.sqrt(a * a + 4.0)
    C = 1.0 / s
    D = (s - a) / (2.0 * s)
    out = _main_term_curve(a, C, D, x)
    return out if np.ndim(x) else float(out[0])


def g_alpha_r(alpha: AlphaSpec | str, r: int, x):
    """Closed-form main term for residue class r of a periodic alpha."""
    if isinstance(alpha, str):
        alpha = parse_alpha(alpha)
    lc = limit_constants(alpha, r)
    k0 = len(alpha.preperiod)
    a_exp = alpha.partial_quotient(k0 + r)
    out = _main_term_curve(a_exp, lc.C_r, lc.D_r, x)
    return out if np.ndim(x) else float(out[0])


def empirical_limit(table: ConvergentTable, k: int, grid,
                    budget: int = DEFAULT_CURVE_BUDGET) -> np.ndarray:
    """Sampled values of P_{q_k}(alpha, (-1)^k x / q_k) over the grid."""
    if not 1 <= k <= table.K_max:
        raise RangeError(f"k={k} outside [1, {table.K_max}]")
    q_k = int(table.q[k])
    if q_k > budget:
        raise BudgetError(f"q_k={q_k} exceeds curve budget {budget}")
    sign = 1 if k % 2 == 0 else -1
    grid = np.asarray(grid, dtype=np.float64)
    out = np.empty_like(grid)
    for i, x in enumerate(grid):
        lp = log_sudler_shifted(table, q_k, sign * x / q_k)
        out[i] = 0.0 if lp.is_zero else math.exp(lp.log_value)
    return out


def crossing_abscissa(grid: np.ndarray, curve: np.ndarray, level: float = 1.0,
                      lo: float = 0.5, hi: float = 1.0) -> float:
    """Last downward crossing of `level` by the curve on [lo, hi], by linear interpolation."""
    xs = np.asarray(grid, dtype=np.float64)
    ys = np.asarray(curve, dtype=np.float64)
    sel = (xs >= lo) & (xs <= hi)
    xs, ys = xs[sel], ys[sel]
    hits = []
    for i in range(len(xs) - 1):
        if (ys[i] - level) > 0.0 >= (ys[i + 1] - level):
            t = (level - ys[i]) / (ys[i + 1] - ys[i])
            hits.append(xs[i] + t * (xs[i + 1] - xs[i]))
    if not hits:
        raise SudlerError("curve does not cross the level on the window")
    return float(hits[-1])
