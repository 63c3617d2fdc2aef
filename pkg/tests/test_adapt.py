import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sphereclip.adapt import (
    ClippingState,
    bit_error_prob,
    estimate_block_ber,
    init_clipping,
    update_clipping,
)


@pytest.mark.parametrize(
    "mag, expected", [(0.0, 0.5), (math.log(99), 0.01), (math.log(9999), 1e-4), (9.2102, 1.0000404e-4)]
)
def test_bit_error_prob(mag, expected):
    assert bit_error_prob(mag) == pytest.approx(expected, rel=1e-7)


def test_bit_error_prob_rejects_negative():
    with pytest.raises(ValueError):
        bit_error_prob(-0.1)


@given(st.floats(0, 700), st.floats(0, 700))
def test_bit_error_prob_decreasing(a, b):
    lo, hi = sorted((a, b))
    pa, pb = bit_error_prob(lo), bit_error_prob(hi)
    assert 0 < pb <= pa <= 0.5
    if hi > lo + 1e-6:
        assert pb < pa


class TestEstimate:
    def test_worked_example(self):
        est = estimate_block_ber([0.0, 10.0, 0.0, -10.0], 2)
        assert est.p_hat == pytest.approx(0.25)
        assert (est.n_used, est.n_total) == (2, 4)

    def test_uniform_magnitude(self):
        assert estimate_block_ber(np.full(20, math.log(99)), 20).p_hat == pytest.approx(0.01)

    def test_full_sum_and_monotone_in_n(self):
        rng = np.random.default_rng(0)
        llr = rng.normal(0, 6, 200)
        full = sum(1 / (1 + math.exp(abs(x))) for x in llr) / 200
        assert estimate_block_ber(llr, 200).p_hat == pytest.approx(full, rel=1e-12)
        values = [estimate_block_ber(llr, n).p_hat for n in range(1, 201)]
        assert all(a <= b for a, b in zip(values, values[1:]))
        assert values[49] <= full

    def test_range(self):
        with pytest.raises(ValueError):
            estimate_block_ber(np.ones(5), 0)
        with pytest.raises(ValueError):
            estimate_block_ber(np.ones(5), 6)


@pytest.mark.parametrize("ter, level", [(1e-2, 4.59512), (1e-3, 6.90675), (1e-4, 9.21024)])
def test_init(ter, level):
    s = init_clipping(ter, 0.1)
    assert s.l_cl == s.l_ter == pytest.approx(level, abs=1e-5)


def test_init_rejects_bad_ter():
    for ter in (0.0, 0.5, 1.2):
        with pytest.raises(ValueError):
            init_clipping(ter, 0.1)


class TestUpdate:
    def test_clamped_at_ceiling(self):
        s = init_clipping(1e-4, 0.1)
        assert update_clipping(s, 1e-3).l_cl == s.l_ter

    def test_step_down(self):
        s = init_clipping(1e-4, 0.1)
        nxt = update_clipping(s, 1e-5)
        assert nxt.l_cl == pytest.approx(8.9799, abs=1e-4)
        assert nxt.last_estimate == 1e-5
        assert (nxt.ter, nxt.mu, nxt.l_ter, nxt.l_min) == (s.ter, s.mu, s.l_ter, s.l_min)

    def test_zero_step(self):
        s = init_clipping(1e-3, 0.0)
        for p in (1e-9, 1e-3, 0.4):
            assert update_clipping(s, p).l_cl == s.l_cl

    def test_floor(self):
        s = ClippingState(l_cl=0.1, l_ter=math.log(99), ter=1e-2, mu=1.0)
        assert update_clipping(s, 1e-8).l_cl == 0.05

    def test_fixed_point(self):
        s = ClippingState(l_cl=3.3, l_ter=math.log(99), ter=1e-2, mu=0.1)
        assert update_clipping(s, 1e-2).l_cl == 3.3

    def test_rejects_non_positive(self):
        with pytest.raises(ValueError):
            update_clipping(init_clipping(1e-2, 0.1), 0.0)

    @given(
        st.sampled_from([1e-2, 1e-3, 1e-4]),
        st.one_of(st.just(0.0), st.floats(1e-3, 2)),
        st.lists(st.floats(1e-12, 0.5), min_size=1, max_size=30),
    )
    def test_bounded_and_directional(self, ter, mu, estimates):
        s = init_clipping(ter, mu)
        for p in estimates:
            nxt = update_clipping(s, p)
            assert s.l_min <= nxt.l_cl <= s.l_ter
            if mu > 0 and p < ter * (1 - 1e-9) and s.l_cl > s.l_min:
                assert nxt.l_cl < s.l_cl
            if mu > 0 and p > ter * (1 + 1e-9) and s.l_cl < s.l_ter:
                assert nxt.l_cl > s.l_cl
            s = nxt
