"""Coded MIMO link simulation with adaptive LLR clipping.

A block carries N info bits through: RSC encoding, interleaving, Gray QAM
mapping onto ``2N / (M_T log2|S|)`` channel uses, Rayleigh fading plus AWGN,
QR rotation, soft sphere detection at the current clipping level,
deinterleaving and log-MAP decoding. The decoder LLRs then drive the BER
estimate and the clipping update for the next block.

Randomness: every (SNR point, chain, block) cell draws from its own
``SeedSequence`` child, so results do not depend on how cells are scheduled
across worker processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .adapt import (
    DEFAULT_L_MIN,
    ClippingState,
    clipping_candidate,
    estimate_block_ber,
    init_clipping,
    update_clipping,
)
from .channel import draw_channels, sigma2_for_snr, transmit
from .fec import Interleaver, bcjr_decode, deinterleave, encode, interleave, make_interleaver
from .linalg import rotate_received
from .modem import channel_uses, partition_blocks, qam
from .sphere_decoder import detect_batch

CLIP_MODES = ("adaptive", "fixed", "off")
# Floor for the estimate fed to ln(); only reachable with absurdly large LLRs.
_P_HAT_FLOOR = 1e-300


class ConfigError(ValueError):
    """Invalid simulation configuration; ``field`` names the offending setting."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings; defaults reproduce the 4x4 16-QAM reference setup.

    ``clip_mode`` is ``"adaptive"`` (controller, ``mu = 0`` keeps the level at
    ln(1/TER - 1)), ``"fixed"`` (constant ``clip_value``) or ``"off"``.
    Each SNR point runs ``chains`` independent tracking chains of
    ``chain_length`` blocks.
    """

    m_t: int = 4
    m_r: int = 4
    order: int = 16
    n_info: int = 1152
    snr_db: tuple[float, ...] = (14.0,)
    ter: float = 1e-4
    mu: float = 0.1
    n_est: int = 50
    chain_length: int = 100
    chains: int = 1
    seed: int = 0
    clip_mode: str = "adaptive"
    clip_value: float | None = None
    l_min: float = DEFAULT_L_MIN
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "snr_db", tuple(float(s) for s in np.atleast_1d(self.snr_db)))
        self.validate()

    def validate(self) -> None:
        if self.m_t < 1:
            raise ConfigError("m_t", "must be >= 1")
        if self.m_r < self.m_t:
            raise ConfigError("m_r", f"must be >= m_t ({self.m_t})")
        try:
            c = qam(self.order)
        except ValueError as exc:
            raise ConfigError("order", str(exc)) from None
        if self.n_info < 1:
            raise ConfigError("n_info", "must be >= 1")
        if (2 * self.n_info) % (self.m_t * c.bits_per_symbol):
            raise ConfigError(
                "n_info", f"2*{self.n_info} coded bits do not fill whole channel uses of {self.m_t * c.bits_per_symbol} bits"
            )
        if not self.snr_db:
            raise ConfigError("snr_db", "at least one SNR point required")
        if not all(math.isfinite(s) for s in self.snr_db):
            raise ConfigError("snr_db", "SNR values must be finite")
        if not 0.0 < self.ter < 0.5:
            raise ConfigError("ter", "must lie in (0, 0.5)")
        if self.mu < 0 or not math.isfinite(self.mu):
            raise ConfigError("mu", "must be finite and >= 0")
        if not 1 <= self.n_est <= self.n_info:
            raise ConfigError("n_est", f"must lie in [1, {self.n_info}]")
        if self.chain_length < 1:
            raise ConfigError("chain_length", "must be >= 1")
        if self.chains < 1:
            raise ConfigError("chains", "must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed", "must be >= 0")
        if self.clip_mode not in CLIP_MODES:
            raise ConfigError("clip_mode", f"must be one of {CLIP_MODES}")
        if self.clip_mode == "fixed":
            if self.clip_value is None or not self.clip_value > 0:
                raise ConfigError("clip_value", "fixed clipping needs a positive level")
        elif self.clip_value is not None:
            raise ConfigError("clip_value", f"only valid with fixed clipping, not {self.clip_mode}")
        if not 0.0 < self.l_min <= math.log(1.0 / self.ter - 1.0):
            raise ConfigError("l_min", "must lie in (0, ln(1/TER - 1)]")
        if self.workers < 1:
            raise ConfigError("workers", "must be >= 1")

    @property
    def uses_per_block(self) -> int:
        return channel_uses(2 * self.n_info, self.m_t, qam(self.order))

    @property
    def clip_label(self) -> str:
        if self.clip_mode == "fixed":
            return f"fixed={self.clip_value:.6g}"
        return self.clip_mode


@dataclass(frozen=True)
class MetricsRecord:
    """Outcome of one block (``frames == 1``) or of an aggregate of blocks.

    ``ber_estimated`` uses the ``n_est`` least reliable bits;
    ``ber_estimated_full`` uses all N. ``l_cl`` is the level the detector ran
    with, and ``clamped_high`` tells whether the following update hit the
    ln(1/TER - 1) ceiling.
    """

    snr_db: float
    ter: float
    mu: float
    n_est: int
    clip_mode: str
    chain: int
    block_index: int
    l_cl: float
    ber_measured: float
    ber_estimated: float
    avg_visited_nodes: float
    frames: int = 1
    bit_errors: int = 0
    ber_estimated_full: float = float("nan")
    clamped_high: bool = False


@lru_cache(maxsize=8)
def _interleaver(seed: int, size: int) -> Interleaver:
    return make_interleaver(size, np.random.SeedSequence(seed, spawn_key=(0,)))


def block_rng(seed: int, snr_index: int, chain: int, block: int) -> np.random.Generator:
    """Independent generator for one (SNR point, chain, block) cell."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1, snr_index, chain, block)))


def initial_state(cfg: SimConfig) -> ClippingState:
    return init_clipping(cfg.ter, cfg.mu if cfg.clip_mode == "adaptive" else 0.0, cfg.l_min)


def clip_level(cfg: SimConfig, state: ClippingState) -> float:
    if cfg.clip_mode == "off":
        return math.inf
    if cfg.clip_mode == "fixed":
        return float(cfg.clip_value)
    return state.l_cl


def run_block(
    cfg: SimConfig,
    state: ClippingState,
    rng: np.random.Generator,
    snr_db: float | None = None,
    block_index: int = 0,
    chain: int = 0,
) -> tuple[MetricsRecord, ClippingState]:
    """Simulate one code block and advance the clipping controller."""
    snr = cfg.snr_db[0] if snr_db is None else float(snr_db)
    c = qam(cfg.order)
    pi = _interleaver(cfg.seed, 2 * cfg.n_info)
    noise = sigma2_for_snr(snr, cfg.m_t)
    l_cl = clip_level(cfg, state)

    info = rng.integers(0, 2, cfg.n_info)
    tx_bits = interleave(encode(info).coded_bits, pi)
    symbols = c.points[partition_blocks(tx_bits, cfg.m_t, c)]
    h, qr = draw_channels(cfg.m_r, cfg.m_t, symbols.shape[0], rng)
    y = transmit(symbols, h, noise, rng)
    llrs, visited, _ = detect_batch(qr.r, rotate_received(qr.q, y), c, noise.sigma2, l_cl)

    app_info, _ = bcjr_decode(deinterleave(llrs.reshape(-1), pi))
    errors = int(np.count_nonzero((app_info > 0) != (info == 1)))
    p_hat = max(estimate_block_ber(app_info, cfg.n_est).p_hat, _P_HAT_FLOOR)
    p_full = estimate_block_ber(app_info, cfg.n_info).p_hat

    if cfg.clip_mode == "adaptive":
        clamped = clipping_candidate(state, p_hat) > state.l_ter
        next_state = update_clipping(state, p_hat)
    else:
        clamped = False
        next_state = replace(state, last_estimate=p_hat)

    rec = MetricsRecord(
        snr_db=snr,
        ter=cfg.ter,
        mu=cfg.mu,
        n_est=cfg.n_est,
        clip_mode=cfg.clip_label,
        chain=chain,
        block_index=block_index,
        l_cl=l_cl,
        ber_measured=errors / cfg.n_info,
        ber_estimated=p_hat,
        avg_visited_nodes=float(visited.mean()),
        frames=1,
        bit_errors=errors,
        ber_estimated_full=p_full,
        clamped_high=bool(clamped),
    )
    return rec, next_state


def run_chain(cfg: SimConfig, snr_index: int, chain: int) -> list[MetricsRecord]:
    """One tracking chain of ``chain_length`` consecutive blocks."""
    state = initial_state(cfg)
    out = []
    for m in range(cfg.chain_length):
        rng = block_rng(cfg.seed, snr_index, chain, m)
        rec, state = run_block(cfg, state, rng, cfg.snr_db[snr_index], block_index=m, chain=chain)
        out.append(rec)
    return out


def _run_cell(args):
    cfg, snr_index, chain = args
    return run_chain(cfg, snr_index, chain)


def run_experiment(cfg: SimConfig, workers: int | None = None) -> list[MetricsRecord]:
    """All chains at all SNR points, ordered by (SNR point, chain, block)."""
    cfg.validate()
    n_workers = cfg.workers if workers is None else workers
    cells = [(cfg, i, k) for i in range(len(cfg.snr_db)) for k in range(cfg.chains)]
    if n_workers <= 1 or len(cells) == 1:
        chunks = [_run_cell(cell) for cell in cells]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            chunks = list(pool.map(_run_cell, cells))
    return [rec for chunk in chunks for rec in chunk]


def measure_ber(
    cfg: SimConfig,
    snr_index: int = 0,
    min_errors: int = 100,
    max_frames: int = 1000,
    chain: int = 0,
) -> MetricsRecord:
    """Run blocks until ``min_errors`` bit errors or ``max_frames`` blocks.

    The clipping state evolves across blocks exactly as in a tracking chain.
    Returns an aggregate record with ``block_index = -1`` whose ``l_cl`` is
    the mean level used.
    """
    state = initial_state(cfg)
    errors = frames = 0
    nodes = p_hat = p_full = l_sum = 0.0
    while frames < max_frames and errors < min_errors:
        rng = block_rng(cfg.seed, snr_index, chain, frames)
        rec, state = run_block(cfg, state, rng, cfg.snr_db[snr_index], block_index=frames, chain=chain)
        errors += rec.bit_errors
        nodes += rec.avg_visited_nodes
        p_hat += rec.ber_estimated
        p_full += rec.ber_estimated_full
        l_sum += rec.l_cl
        frames += 1
    return MetricsRecord(
        snr_db=cfg.snr_db[snr_index],
        ter=cfg.ter,
        mu=cfg.mu,
        n_est=cfg.n_est,
        clip_mode=cfg.clip_label,
        chain=chain,
        block_index=-1,
        l_cl=l_sum / frames,
        ber_measured=errors / (frames * cfg.n_info),
        ber_estimated=p_hat / frames,
        avg_visited_nodes=nodes / frames,
        frames=frames,
        bit_errors=errors,
        ber_estimated_full=p_full / frames,
    )


@dataclass(frozen=True)
class SteadyState:
    """Statistics over the tail of every chain at one SNR point."""

    snr_db: float
    ber_measured: float
    ber_estimated: float
    mean_l_cl: float
    avg_visited_nodes: float
    frames: int
    bit_errors: int
    clamp_fraction: float
    blocks: list = field(default_factory=list, repr=False)


def steady_state(records: list[MetricsRecord], fraction: float = 0.5) -> list[SteadyState]:
    """Aggregate the last ``fraction`` of each chain, per SNR point."""
    by_cell: dict[tuple[float, int], list[MetricsRecord]] = {}
    for rec in records:
        by_cell.setdefault((rec.snr_db, rec.chain), []).append(rec)
    by_snr: dict[float, list[MetricsRecord]] = {}
    for (snr, _), recs in by_cell.items():
        recs = sorted(recs, key=lambda r: r.block_index)
        start = len(recs) - max(1, int(round(fraction * len(recs))))
        by_snr.setdefault(snr, []).extend(recs[start:])
    out = []
    for snr in sorted(by_snr):
        tail = by_snr[snr]
        n_frames = sum(r.frames for r in tail)
        errors = sum(r.bit_errors for r in tail)
        out.append(
            SteadyState(
                snr_db=snr,
                ber_measured=sum(r.ber_measured * r.frames for r in tail) / n_frames,
                ber_estimated=float(np.mean([r.ber_estimated for r in tail])),
                mean_l_cl=float(np.mean([r.l_cl for r in tail])),
                avg_visited_nodes=float(np.mean([r.avg_visited_nodes for r in tail])),
                frames=n_frames,
                bit_errors=errors,
                clamp_fraction=float(np.mean([r.clamped_high for r in tail])),
                blocks=tail,
            )
        )
    return out
