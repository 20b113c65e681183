import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sudler import (
    BudgetError,
    PoleError,
    RangeError,
    build_table,
    digamma,
    v_k,
    v_k_main_term,
    v_k_star,
    vasyunin,
)

EULER_GAMMA = 0.5772156649015329


def vasyunin_paired_oracle(p, q, x=0.0, sign=1):
    """Brute-force oracle pairing n with q-n before summing."""
    total = 0.0
    for n in range(1, q // 2 + 1):
        m = q - n
        t_n = ((n * p) % q + sign * x) / q
        total += (n / q) * 1.0 / math.tan(math.pi * t_n)
        if m != n:
            t_m = ((m * p) % q + sign * x) / q
            total += (m / q) * 1.0 / math.tan(math.pi * t_m)
    return total


class TestVasyunin:
    def test_example_2_5(self):
        # four-term value, pinned by the paired oracle
        got = vasyunin(2, 5)
        assert got == pytest.approx(0.0803245663544910, abs=1e-12)
        assert got == pytest.approx(vasyunin_paired_oracle(2, 5), abs=1e-12)

    def test_q2_vanishes(self):
        assert vasyunin(1, 2) == pytest.approx(0.0, abs=1e-15)

    def test_pairing_symmetry(self):
        for p, q in ((3, 7), (10, 101), (41, 137)):
            assert vasyunin(p, q) == pytest.approx(
                vasyunin_paired_oracle(p, q), abs=1e-12
            )

    def test_pole_detection(self):
        with pytest.raises(PoleError):
            vasyunin(2, 5, x=1.0)  # n p + x = 5 at n = 2

    def test_gcd_guard(self):
        with pytest.raises(RangeError):
            vasyunin(2, 4)

    def test_x0_main_term_large_a(self):
        # pi C_k(0) / ((-1)^k q_k) approaches log(a / 2 pi) + gamma
        t = build_table("[0;(50)]", 5)
        k = 4
        c = vasyunin(t.p[k] % t.q[k], int(t.q[k]))
        got = math.pi * c / ((-1) ** k * int(t.q[k]))
        target = math.log(50 / (2 * math.pi)) + EULER_GAMMA
        assert abs(got - target) < (1.0 + 2 * math.log(50)) / 50


class TestVk:
    def test_monotone_decreasing_grid(self, tables):
        grid = np.linspace(-0.99, 0.99, 101)
        for t in tables.values():
            for k in range(1, 9):
                if t.q[k] == 1 or t.q[k] > 10 ** 6:
                    continue  # q_k = 1 has an empty sum
                vals = [v_k(t, k, float(x)).value for x in grid]
                assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_v0_bounded(self, tables):
        # |V_k(0)| <= (1 + log max a) / a_{k+1}, comfortably
        for t in tables.values():
            for k in range(2, 9):
                if t.q[k] > 10 ** 6:
                    continue
                bound = (1 + math.log(max(t.a[1:k + 1]))) / t.a[k + 1]
                assert abs(v_k(t, k, 0.0).value) <= bound

    def test_envelope_frozen(self, fixtures):
        # lemma (iii) shape with the single constant frozen at a=15
        C = fixtures["vk_envelope"]["C_cal"]
        for a in (15, 50, 200):
            t = build_table(f"[0;({a})]", 8)
            for k in range(4, 9):
                if t.q[k] > 10 ** 7:
                    continue
                delta = float(t.delta[k])
                for x in (-0.9, -0.5, 0.0, 0.5, 0.9):
                    resid = abs(
                        v_k(t, k, x).value / delta
                        - (math.log(a / (2 * math.pi)) - digamma(1.0 + x))
                    )
                    shape = (1 + 2 * math.log(a)) / ((1 - abs(x)) * a)
                    assert resid <= C * shape

    def test_main_term_x0(self):
        t = build_table("[0;(15)]", 5)
        got = v_k_main_term(t, 4, 0.0)
        expected = float(t.delta[4]) * (math.log(15 / (2 * math.pi)) + EULER_GAMMA)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_coarse_stationary_value(self):
        # V_k(x) is about log(a_k)/a_{k+1} for stationary quotients
        t = build_table("[0;(50)]", 5)
        val = v_k(t, 4, 0.2).value
        assert abs(val - math.log(50) / 50) < 2.0 / 50

    def test_domain(self, tables):
        with pytest.raises(RangeError):
            v_k(tables["[0;(5)]"], 3, 1.0)

    def test_budget(self):
        t = build_table("[0;(200)]", 4)
        with pytest.raises(BudgetError):
            v_k(t, 4, 0.0)


class TestVkStar:
    def test_excluded_terms_reconstruct_vk(self):
        t = build_table("[0;(15)]", 5)
        k, x = 4, 0.4
        full = v_k(t, k, x).value
        star = v_k_star(t, k, x).value
        q_k, sign = int(t.q[k]), (-1) ** k
        theta = float(t.theta[k])
        back = 0.0
        for n in (int(t.q[k - 1]), q_k - int(t.q[k - 1])):
            m = (sign * n * t.p[k]) % q_k
            back += math.sin(math.pi * n * theta / q_k) / math.tan(
                math.pi * (m + x) / q_k
            )
        assert full == pytest.approx(star + back, abs=1e-12)

    def test_finite_at_one_where_vk_blows_up(self):
        t = build_table("[0;(15)]", 5)
        star = v_k_star(t, 4, 1.0).value
        assert abs(star) < 1.0
        near_pole = v_k(t, 4, 0.999999).value
        assert abs(near_pole) > 10 * abs(star)

    def test_starred_envelope_frozen(self, fixtures):
        C = fixtures["vk_star_envelope"]["C_cal"]
        for a, ks in ((15, (4, 5)), (50, (4,))):
            t = build_table(f"[0;({a})]", 8)
            for k in ks:
                delta = float(t.delta[k])
                for x in (-1.5, 0.0, 1.5):
                    resid = abs(
                        v_k_star(t, k, x).value / delta
                        - (math.log(a / (2 * math.pi)) - digamma(2.0 + x))
                    )
                    shape = (1 + 2 * math.log(a)) / ((2 - abs(x)) * a)
                    assert resid <= C * shape

    def test_domain(self, tables):
        with pytest.raises(RangeError):
            v_k_star(tables["[0;(5)]"], 1, 0.0)
        with pytest.raises(RangeError):
            v_k_star(tables["[0;(5)]"], 3, 2.0)


class TestDigamma:
    def test_at_one_is_minus_gamma(self):
        assert digamma(1.0) == pytest.approx(-EULER_GAMMA, abs=1e-14)

    def test_at_two(self):
        assert digamma(2.0) == pytest.approx(1 - EULER_GAMMA, abs=1e-14)

    @given(st.floats(min_value=0.01, max_value=10.0))
    @settings(max_examples=60, deadline=None)
    def test_recurrence(self, x):
        assert digamma(1.0 + x) - digamma(x) == pytest.approx(1.0 / x, rel=1e-11)

    def test_against_mpmath(self):
        for x in (0.001, 0.1, 0.5, 1.5, 2.95, 4.0, 9.99, 25.0):
            assert digamma(x) == pytest.approx(float(mpmath.digamma(x)), rel=1e-13)

    def test_domain(self):
        with pytest.raises(RangeError):
            digamma(0.0)
