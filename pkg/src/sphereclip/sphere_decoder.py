"""Soft-output depth-first sphere decoder (single tree search) with LLR clipping.

One Schnorr-Euchner traversal finds the max-log ML hypothesis and, for every
bit, the best counter-hypothesis metric. A finite clipping level C bounds each
counter metric by ``lambda_ml + 2 sigma^2 C`` while the search runs, so the
pruning radius shrinks with C and the returned LLRs equal the unclipped
max-log LLRs clamped to [-C, C].

Node accounting: expanding a node evaluates the partial Euclidean distance of
all |S| children (they are needed for the ordering), and each of those
evaluations counts as one visited node. The root is not counted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .modem import Constellation


@dataclass(frozen=True)
class DetectionProblem:
    """One channel use after QR rotation.

    Attributes:
        r: M_T x M_T upper-triangular factor with positive real diagonal.
        y_rot: rotated received vector ``q^H y`` (length M_T).
        constellation: symbol alphabet with bit labels.
        sigma2: per-real-dimension noise variance (complex variance 2*sigma2).
        clip: LLR clipping level; ``math.inf`` disables clipping.
    """

    r: np.ndarray
    y_rot: np.ndarray
    constellation: Constellation
    sigma2: float
    clip: float = math.inf


@dataclass(frozen=True)
class SoftDetectionResult:
    llrs: np.ndarray
    visited_nodes: int
    ml_metric: float


@njit(cache=True)
def _sts(r, y, points, labels, clip_metric, llr_out, inv_scale):
    m = r.shape[0]
    n_sym = points.size
    n_bits = labels.shape[1]
    nb_total = m * n_bits

    lam_ml = np.inf
    x_ml = np.zeros(m, dtype=np.int64)
    lam_bar = np.full(nb_total, np.inf)

    sym = np.zeros(m, dtype=np.int64)
    order = np.zeros((m, n_sym), dtype=np.int64)
    cped = np.zeros((m, n_sym))
    pos = np.zeros(m, dtype=np.int64)
    visited = 0

    level = m - 1
    parent = 0.0
    # Expand the root.
    b = y[level]
    for c in range(n_sym):
        e = b - r[level, level] * points[c]
        cped[level, c] = parent + e.real * e.real + e.imag * e.imag
    visited += n_sym
    for c in range(n_sym):
        order[level, c] = c
    for i in range(1, n_sym):
        key = order[level, i]
        kv = cped[level, key]
        j = i - 1
        while j >= 0 and cped[level, order[level, j]] > kv:
            order[level, j + 1] = order[level, j]
            j -= 1
        order[level, j + 1] = key
    pos[level] = 0

    while True:
        if pos[level] >= n_sym:
            if level == m - 1:
                break
            level += 1
            continue
        c = order[level, pos[level]]
        pos[level] += 1
        d = cped[level, c]

        # Largest radius any leaf below could still use.
        gmax = lam_ml
        for k in range(nb_total):
            if lam_bar[k] > gmax:
                gmax = lam_bar[k]
        if d > gmax:
            # Children are sorted, so every remaining sibling is pruned too.
            pos[level] = n_sym
            continue

        sym[level] = c
        thr = lam_ml
        for j in range(level):
            for bb in range(n_bits):
                v = lam_bar[j * n_bits + bb]
                if v > thr:
                    thr = v
        for j in range(level, m):
            sj = sym[j]
            mj = x_ml[j]
            for bb in range(n_bits):
                if labels[sj, bb] != labels[mj, bb]:
                    v = lam_bar[j * n_bits + bb]
                    if v > thr:
                        thr = v
        if d > thr:
            continue

        if level == 0:
            if d < lam_ml:
                for j in range(m):
                    for bb in range(n_bits):
                        if labels[sym[j], bb] != labels[x_ml[j], bb]:
                            lam_bar[j * n_bits + bb] = lam_ml
                lam_ml = d
                for j in range(m):
                    x_ml[j] = sym[j]
            else:
                for j in range(m):
                    for bb in range(n_bits):
                        if labels[sym[j], bb] != labels[x_ml[j], bb]:
                            k = j * n_bits + bb
                            if d < lam_bar[k]:
                                lam_bar[k] = d
            bound = lam_ml + clip_metric
            for k in range(nb_total):
                if lam_bar[k] > bound:
                    lam_bar[k] = bound
            continue

        # Descend: expand the child at level - 1.
        level -= 1
        b = y[level]
        for j in range(level + 1, m):
            b -= r[level, j] * points[sym[j]]
        for cc in range(n_sym):
            e = b - r[level, level] * points[cc]
            cped[level, cc] = d + e.real * e.real + e.imag * e.imag
        visited += n_sym
        for cc in range(n_sym):
            order[level, cc] = cc
        for i in range(1, n_sym):
            key = order[level, i]
            kv = cped[level, key]
            j = i - 1
            while j >= 0 and cped[level, order[level, j]] > kv:
                order[level, j + 1] = order[level, j]
                j -= 1
            order[level, j + 1] = key
        pos[level] = 0

    for j in range(m):
        for bb in range(n_bits):
            k = j * n_bits + bb
            mag = (lam_bar[k] - lam_ml) * inv_scale
            if labels[x_ml[j], bb] == 1:
                llr_out[k] = mag
            else:
                llr_out[k] = -mag
    return visited, lam_ml


@njit(cache=True)
def _sts_batch(r, y, points, labels, clip_metric, inv_scale, llrs, visited, ml):
    for u in range(r.shape[0]):
        v, lm = _sts(r[u], y[u], points, labels, clip_metric, llrs[u], inv_scale)
        visited[u] = v
        ml[u] = lm


def _clip_metric(sigma2: float, clip: float) -> float:
    if not clip > 0:
        raise ValueError(f"clipping level must be positive, got {clip}")
    if sigma2 <= 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    return 2.0 * sigma2 * clip if math.isfinite(clip) else math.inf


def detect_batch(
    r: np.ndarray, y_rot: np.ndarray, c: Constellation, sigma2: float, clip: float = math.inf
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Run :func:`detect` over a stack of channel uses.

    Args:
        r: ``(U, M_T, M_T)`` triangular factors.
        y_rot: ``(U, M_T)`` rotated received vectors.

    Returns:
        ``(llrs, visited, ml_metric)`` with shapes ``(U, M_T*bps)``, ``(U,)``, ``(U,)``.
        Bit ``t*bps + b`` is bit b of antenna t.
    """
    r = np.ascontiguousarray(r, dtype=np.complex128)
    y_rot = np.ascontiguousarray(y_rot, dtype=np.complex128)
    n_uses, m_t = y_rot.shape
    if r.shape != (n_uses, m_t, m_t):
        raise ValueError(f"r shape {r.shape} does not match y_rot shape {y_rot.shape}")
    cm = _clip_metric(sigma2, clip)
    llrs = np.empty((n_uses, m_t * c.bits_per_symbol))
    visited = np.empty(n_uses, dtype=np.int64)
    ml = np.empty(n_uses)
    _sts_batch(r, y_rot, c.points, c.labels, cm, 1.0 / (2.0 * sigma2), llrs, visited, ml)
    if math.isfinite(clip):
        # Guard against one-ulp overshoot from (lambda_ml + 2 sigma^2 C - lambda_ml)/(2 sigma^2).
        np.clip(llrs, -clip, clip, out=llrs)
    return llrs, visited, ml


def detect(p: DetectionProblem) -> SoftDetectionResult:
    """Max-log a-posteriori LLRs of every bit of one channel use."""
    r = np.asarray(p.r, dtype=np.complex128)
    y = np.asarray(p.y_rot, dtype=np.complex128).ravel()
    if r.ndim != 2 or r.shape != (y.size, y.size):
        raise ValueError(f"r must be {y.size}x{y.size}, got {r.shape}")
    llrs, visited, ml = detect_batch(r[None], y[None], p.constellation, p.sigma2, p.clip)
    return SoftDetectionResult(llrs=llrs[0], visited_nodes=int(visited[0]), ml_metric=float(ml[0]))
