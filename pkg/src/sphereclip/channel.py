"""Rayleigh flat-fading MIMO channel, AWGN and SNR calibration.

SNR is the average received signal power per receive antenna over the
complex noise power, with unit-energy symbols: SNR = M_T / (2 sigma_n^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import QrFactors, RankDeficientError, householder_qr

MAX_REDRAWS = 16


@dataclass(frozen=True)
class NoiseModel:
    """``sigma2`` is the per-real-dimension variance; complex variance is 2*sigma2."""

    sigma2: float
    snr_db: float

    @property
    def complex_variance(self) -> float:
        return 2.0 * self.sigma2


@dataclass(frozen=True)
class ChannelRealization:
    h: np.ndarray
    qr: QrFactors
    use_index: int = 0


def sigma2_for_snr(snr_db: float, m_t: int) -> NoiseModel:
    """Noise level giving ``snr_db`` under the M_T / (2 sigma^2) definition."""
    if m_t < 1:
        raise ValueError("m_t must be >= 1")
    snr_lin = 10.0 ** (snr_db / 10.0)
    return NoiseModel(sigma2=m_t / snr_lin / 2.0, snr_db=float(snr_db))


def complex_gaussian(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    """Circularly symmetric complex Gaussian samples with the given total variance."""
    re_im = rng.standard_normal(tuple(np.atleast_1d(shape)) + (2,))
    return np.sqrt(variance / 2.0) * (re_im[..., 0] + 1j * re_im[..., 1])


def draw_channels(m_r: int, m_t: int, n_uses: int, rng: np.random.Generator) -> tuple[np.ndarray, QrFactors]:
    """Independent channel matrices for ``n_uses`` channel uses, with QR factors.

    A rank-deficient draw is replaced by a fresh one (bounded retries).
    """
    if not m_r >= m_t >= 1:
        raise ValueError(f"need m_r >= m_t >= 1, got m_r={m_r}, m_t={m_t}")
    h = complex_gaussian(rng, (n_uses, m_r, m_t))
    for _ in range(MAX_REDRAWS):
        try:
            return h, householder_qr(h)
        except RankDeficientError:
            diag = np.abs(np.diagonal(np.linalg.qr(h)[1], axis1=-2, axis2=-1))
            bad = np.any(diag < 1e-12, axis=-1)
            h[bad] = complex_gaussian(rng, (int(bad.sum()), m_r, m_t))
    raise RankDeficientError(f"no full-rank channel after {MAX_REDRAWS} redraws")


def draw_channel(m_r: int, m_t: int, rng: np.random.Generator, use_index: int = 0) -> ChannelRealization:
    """One i.i.d. unit-variance Rayleigh channel matrix with its QR factors."""
    h, f = draw_channels(m_r, m_t, 1, rng)
    return ChannelRealization(h=h[0], qr=QrFactors(q=f.q[0], r=f.r[0]), use_index=use_index)


def transmit(s, ch: ChannelRealization | np.ndarray, noise: NoiseModel, rng: np.random.Generator) -> np.ndarray:
    """``y = h s + n`` with complex noise variance ``2 sigma2`` per entry.

    ``ch`` may be a :class:`ChannelRealization` or a bare matrix; stacks
    ``(U, M_R, M_T)`` with ``s`` of shape ``(U, M_T)`` are accepted too.
    """
    h = ch.h if isinstance(ch, ChannelRealization) else np.asarray(ch)
    s = np.asarray(s, dtype=np.complex128)
    if s.shape[-1] != h.shape[-1] or s.shape[:-1] != h.shape[:-2]:
        raise ValueError(f"symbol shape {s.shape} does not match channel shape {h.shape}")
    clean = np.einsum("...ij,...j->...i", h, s)
    return clean + complex_gaussian(rng, clean.shape, noise.complex_variance)
