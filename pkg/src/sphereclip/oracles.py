"""Brute-force references for the sphere decoder and the BCJR decoder.

These enumerate every hypothesis and share no arithmetic with the code they
check: the detector oracle evaluates all |S|^M_T metrics as one matrix
product, and the decoder oracle builds codewords from the closed-form impulse
response of (1+D^2)/(1+D+D^2) rather than by running the encoder.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.special import logsumexp

from .sphere_decoder import DetectionProblem

MAX_DETECTION_HYPOTHESES = 1 << 16
MAX_ORACLE_INFO_BITS = 12


class OracleSizeError(ValueError):
    """Instance too large for exhaustive enumeration."""


def all_symbol_vectors(order: int, m_t: int) -> np.ndarray:
    """Every index vector in ``range(order)**m_t``, shape ``(order**m_t, m_t)``."""
    return np.array(list(itertools.product(range(order), repeat=m_t)), dtype=np.int64).reshape(-1, m_t)


def exhaustive_metrics(p: DetectionProblem) -> tuple[np.ndarray, np.ndarray]:
    """All hypotheses and their metrics ``||y' - R s||^2``."""
    c = p.constellation
    r = np.asarray(p.r, dtype=np.complex128)
    m_t = r.shape[0]
    if c.order**m_t > MAX_DETECTION_HYPOTHESES:
        raise OracleSizeError(f"{c.order}^{m_t} hypotheses exceed {MAX_DETECTION_HYPOTHESES}")
    idx = all_symbol_vectors(c.order, m_t)
    s = c.points[idx]
    resid = np.asarray(p.y_rot, dtype=np.complex128).ravel()[None, :] - s @ r.T
    return idx, np.sum(resid.real**2 + resid.imag**2, axis=1)


def exhaustive_maxlog_llrs(p: DetectionProblem) -> np.ndarray:
    """Max-log LLRs by full enumeration (clipping level ignored)."""
    c = p.constellation
    idx, metric = exhaustive_metrics(p)
    m_t = idx.shape[1]
    bits = c.labels[idx].reshape(idx.shape[0], m_t * c.bits_per_symbol).astype(bool)
    big = np.where(bits, metric[:, None], np.inf).min(axis=0)
    small = np.where(~bits, metric[:, None], np.inf).min(axis=0)
    return (small - big) / (2.0 * p.sigma2)


def exhaustive_ml_metric(p: DetectionProblem) -> float:
    return float(exhaustive_metrics(p)[1].min())


def rsc_parity_impulse_response(length: int) -> np.ndarray:
    """First ``length`` taps of (1+D^2)/(1+D+D^2) over GF(2).

    1/(1+D+D^2) = (1+D)/(1+D^3) is the period-3 sequence 1,1,0,1,1,0,...
    """
    g = (np.arange(length) % 3 != 2).astype(np.int64)
    h = g.copy()
    h[2:] ^= g[:-2]
    return h


def all_codewords(k: int) -> tuple[np.ndarray, np.ndarray]:
    """All ``2**k`` info words and their interlaced codewords (0/1)."""
    info = ((np.arange(1 << k)[:, None] >> np.arange(k)) & 1).astype(np.int64)
    h = rsc_parity_impulse_response(k)
    # Lower-triangular Toeplitz: parity[n] = sum_j info[j] h[n-j] mod 2
    gen = np.zeros((k, k), dtype=np.int64)
    for j in range(k):
        gen[j, j:] = h[: k - j]
    parity = (info @ gen) & 1
    coded = np.empty((1 << k, 2 * k), dtype=np.int64)
    coded[:, 0::2] = info
    coded[:, 1::2] = parity
    return info, coded


def exhaustive_map_decode(a_priori, k: int | None = None) -> np.ndarray:
    """Exact info-bit a-posteriori LLRs by log-domain summation over all codewords."""
    llr = np.asarray(a_priori, dtype=np.float64).ravel()
    if k is None:
        k = llr.size // 2
    if llr.size != 2 * k:
        raise ValueError(f"expected {2 * k} a-priori LLRs, got {llr.size}")
    if k > MAX_ORACLE_INFO_BITS:
        raise OracleSizeError(f"K={k} exceeds {MAX_ORACLE_INFO_BITS}")
    info, coded = all_codewords(k)
    score = 0.5 * ((2 * coded - 1) @ llr)
    out = np.empty(k)
    for j in range(k):
        one = info[:, j] == 1
        out[j] = logsumexp(score[one]) - logsumexp(score[~one])
    return out
