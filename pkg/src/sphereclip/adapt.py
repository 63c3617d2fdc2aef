"""Block BER estimation from decoder LLRs and the adaptive clipping controller."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import expit

DEFAULT_L_MIN = 0.05


def bit_error_prob(llr_magnitude):
    """Error probability of a hard decision with a-posteriori LLR magnitude |L|.

    Returns ``1 / (1 + exp(|L|))``; accepts scalars or arrays.
    """
    mag = np.asarray(llr_magnitude, dtype=np.float64)
    if np.any(mag < 0) or not np.all(np.isfinite(mag)):
        raise ValueError("LLR magnitude must be finite and non-negative")
    p = expit(-mag)
    return float(p) if p.ndim == 0 else p


@dataclass(frozen=True)
class BerEstimate:
    p_hat: float
    n_used: int
    n_total: int


def estimate_block_ber(info_llrs, n: int) -> BerEstimate:
    """Block BER from the ``n`` least reliable information bits.

    Sums the error probabilities of the n smallest |LLR| values (ties by bit
    index) and divides by the block length N. With n < N this can only
    underestimate the full-sum value.
    """
    mags = np.abs(np.asarray(info_llrs, dtype=np.float64).ravel())
    n_total = mags.size
    if not 1 <= n <= n_total:
        raise ValueError(f"n must lie in [1, {n_total}], got {n}")
    if n == n_total:
        chosen = mags
    else:
        # Stable sort gives ascending bit index among equal magnitudes.
        chosen = mags[np.argsort(mags, kind="stable")[:n]]
    p_hat = float(np.sum(bit_error_prob(chosen)) / n_total)
    return BerEstimate(p_hat=p_hat, n_used=n, n_total=n_total)


def ter_llr(ter: float) -> float:
    """LLR magnitude whose hard-decision error probability equals ``ter``."""
    if not 0.0 < ter < 0.5:
        raise ValueError(f"TER must lie in (0, 0.5), got {ter}")
    return math.log(1.0 / ter - 1.0)


@dataclass(frozen=True)
class ClippingState:
    """Controller state for one tracking chain.

    Attributes:
        l_cl: clipping level used for the next block (LLR units).
        l_ter: upper bound ln(1/TER - 1); also the initial level.
        ter: target error rate.
        mu: step size.
        l_min: lower bound on the clipping level.
        last_estimate: BER estimate of the most recent block, if any.
    """

    l_cl: float
    l_ter: float
    ter: float
    mu: float
    l_min: float = DEFAULT_L_MIN
    last_estimate: float | None = None


def init_clipping(ter: float, mu: float, l_min: float = DEFAULT_L_MIN) -> ClippingState:
    """Start a chain at ``l_cl = l_ter = ln(1/TER - 1)``."""
    l_ter = ter_llr(ter)
    if mu < 0:
        raise ValueError(f"step size must be non-negative, got {mu}")
    if not 0 < l_min <= l_ter:
        raise ValueError(f"l_min must lie in (0, {l_ter:.4f}], got {l_min}")
    return ClippingState(l_cl=l_ter, l_ter=l_ter, ter=ter, mu=mu, l_min=l_min)


def clipping_candidate(state: ClippingState, p_hat_prev: float) -> float:
    """Unclamped next clipping level."""
    if not p_hat_prev > 0:
        raise ValueError(f"BER estimate must be positive, got {p_hat_prev}")
    return state.l_cl - state.mu * (math.log(state.ter) - math.log(p_hat_prev))


def update_clipping(state: ClippingState, p_hat_prev: float) -> ClippingState:
    """Move the clipping level toward the target, driven by last block's estimate.

    The candidate ``l_cl - mu * (ln TER - ln p_hat)`` is clamped to
    ``[l_min, l_ter]``: an estimate above TER raises the level, one below
    lowers it.
    """
    candidate = clipping_candidate(state, p_hat_prev)
    l_cl = max(min(state.l_ter, candidate), state.l_min)
    return replace(state, l_cl=l_cl, last_estimate=float(p_hat_prev))
