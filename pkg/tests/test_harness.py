import dataclasses
import math

import numpy as np
import pytest

from sphereclip.adapt import ter_llr
from sphereclip.harness import (
    ConfigError,
    SimConfig,
    block_rng,
    initial_state,
    measure_ber,
    run_block,
    run_chain,
    run_experiment,
    steady_state,
)

# 4x4 16-QAM with a short block: 96 coded bits -> 6 channel uses
SMALL = dict(n_info=48, n_est=10)
TINY = dict(m_t=2, m_r=2, order=4, n_info=16, n_est=8)


def strip_mode(rec):
    return dataclasses.replace(rec, clip_mode="")


def test_reference_setup_accounting():
    cfg = SimConfig()
    assert (cfg.m_t, cfg.m_r, cfg.order, cfg.n_info, cfg.n_est, cfg.mu, cfg.chain_length) == (4, 4, 16, 1152, 50, 0.1, 100)
    assert cfg.uses_per_block == 144


def test_noiseless_block_is_error_free():
    cfg = SimConfig(snr_db=130.0, **SMALL)
    rec, state = run_block(cfg, initial_state(cfg), np.random.default_rng(0))
    assert rec.bit_errors == 0 and rec.ber_measured == 0.0
    assert rec.avg_visited_nodes >= cfg.m_t
    assert 0 < rec.ber_estimated <= rec.ber_estimated_full


def test_zero_step_keeps_level():
    cfg = SimConfig(snr_db=8.0, mu=0.0, chain_length=6, ter=1e-3, **SMALL)
    recs = run_chain(cfg, 0, 0)
    assert {r.l_cl for r in recs} == {ter_llr(1e-3)}


def test_adaptive_level_moves_and_stays_bounded():
    cfg = SimConfig(snr_db=30.0, mu=0.5, chain_length=8, ter=1e-2, **SMALL)
    levels = [r.l_cl for r in run_chain(cfg, 0, 0)]
    assert levels[0] == ter_llr(1e-2)
    assert levels[-1] < levels[0]
    assert all(cfg.l_min <= v <= ter_llr(1e-2) for v in levels)


def test_off_equals_fixed_infinity():
    off = run_chain(SimConfig(snr_db=10.0, clip_mode="off", chain_length=3, **SMALL), 0, 0)
    inf = run_chain(SimConfig(snr_db=10.0, clip_mode="fixed", clip_value=math.inf, chain_length=3, **SMALL), 0, 0)
    assert [strip_mode(r) for r in off] == [strip_mode(r) for r in inf]


def test_single_block_zero_step_equals_fixed_at_ceiling():
    a = run_experiment(SimConfig(snr_db=12.0, mu=0.0, chain_length=1, ter=1e-2, **SMALL))
    b = run_experiment(
        SimConfig(snr_db=12.0, mu=0.0, chain_length=1, ter=1e-2, clip_mode="fixed", clip_value=ter_llr(1e-2), **SMALL)
    )
    assert [strip_mode(r) for r in a] == [strip_mode(r) for r in b]


def test_experiment_order_and_worker_independence():
    cfg = SimConfig(snr_db=(3.0, 9.0), chains=2, chain_length=3, **TINY)
    serial = run_experiment(cfg)
    parallel = run_experiment(cfg, workers=2)
    assert serial == parallel
    keys = [(r.snr_db, r.chain, r.block_index) for r in serial]
    assert keys == sorted(keys) and len(keys) == 12


def test_block_streams_are_distinct():
    a = block_rng(0, 0, 0, 0).integers(0, 2**32, 4)
    b = block_rng(0, 0, 0, 1).integers(0, 2**32, 4)
    c = block_rng(0, 0, 1, 0).integers(0, 2**32, 4)
    assert not np.array_equal(a, b) and not np.array_equal(a, c)
    assert np.array_equal(a, block_rng(0, 0, 0, 0).integers(0, 2**32, 4))


@pytest.mark.parametrize(
    "kwargs, field",
    [
        (dict(n_info=1151), "n_info"),
        (dict(ter=0.6), "ter"),
        (dict(mu=-1.0), "mu"),
        (dict(n_est=0), "n_est"),
        (dict(clip_mode="fixed"), "clip_value"),
        (dict(clip_mode="sometimes"), "clip_mode"),
        (dict(m_r=2), "m_r"),
        (dict(order=8), "order"),
        (dict(snr_db=()), "snr_db"),
    ],
)
def test_config_errors_name_the_field(kwargs, field):
    with pytest.raises(ConfigError) as exc:
        SimConfig(**kwargs)
    assert exc.value.field == field


def test_steady_state_uses_chain_tail():
    cfg = SimConfig(snr_db=(4.0,), chains=2, chain_length=4, **TINY)
    recs = run_experiment(cfg)
    (ss,) = steady_state(recs)
    tail = [r for r in recs if r.block_index >= 2]
    assert ss.frames == 4
    assert ss.bit_errors == sum(r.bit_errors for r in tail)
    assert ss.avg_visited_nodes == pytest.approx(np.mean([r.avg_visited_nodes for r in tail]))
    assert ss.ber_measured == pytest.approx(ss.bit_errors / (4 * cfg.n_info))


def test_measure_ber_stopping_rule():
    cfg = SimConfig(snr_db=0.0, clip_mode="off", **TINY)
    rec = measure_ber(cfg, min_errors=5, max_frames=50)
    assert rec.bit_errors >= 5 and rec.frames < 50 and rec.block_index == -1
    capped = measure_ber(SimConfig(snr_db=60.0, clip_mode="off", **TINY), min_errors=5, max_frames=7)
    assert capped.frames == 7 and capped.bit_errors == 0
