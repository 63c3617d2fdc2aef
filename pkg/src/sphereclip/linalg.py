"""Householder QR with a positive-real diagonal, for complex channel matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-12


class RankDeficientError(ValueError):
    """Raised when a channel matrix has (numerically) dependent columns."""


@dataclass(frozen=True)
class QrFactors:
    """Thin QR factors ``h = q @ r``.

    ``q`` is M_R x M_T with orthonormal columns, ``r`` is M_T x M_T upper
    triangular with a real, strictly positive diagonal. Both may carry
    leading batch axes.
    """

    q: np.ndarray
    r: np.ndarray


def householder_qr(h: np.ndarray) -> QrFactors:
    """Thin Householder QR over the last two axes of ``h``.

    Works on a single matrix or a stack ``(..., m, n)``. After the
    reflections, row i of ``r`` and column i of ``q`` are rotated by the
    same unit phase so that ``r[i, i]`` is real and positive.

    Raises:
        ValueError: if ``h`` has fewer rows than columns or non-finite entries.
        RankDeficientError: if any diagonal pivot falls below ``PIVOT_TOL``.
    """
    a = np.array(h, dtype=np.complex128)
    if a.ndim < 2:
        raise ValueError("expected a matrix or a stack of matrices")
    m, n = a.shape[-2:]
    if m < n or n < 1:
        raise ValueError(f"need rows >= cols >= 1, got {m}x{n}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")

    batch = a.shape[:-2]
    r = a.copy()
    # Reflectors are accumulated into a full m x m Q, then truncated.
    q = np.broadcast_to(np.eye(m, dtype=np.complex128), batch + (m, m)).copy()

    for k in range(n):
        x = r[..., k:, k]
        norm_x = np.linalg.norm(x, axis=-1)
        x0 = x[..., 0]
        mag0 = np.abs(x0)
        phase = np.where(mag0 > 0, x0 / np.where(mag0 > 0, mag0, 1.0), 1.0)
        v = x.copy()
        v[..., 0] = x0 + phase * norm_x
        vnorm2 = np.sum(np.abs(v) ** 2, axis=-1)
        # Zero column below and on the diagonal: nothing to reflect.
        safe = vnorm2 > 0
        scale = np.where(safe, 2.0 / np.where(safe, vnorm2, 1.0), 0.0)

        # r[k:, k:] -= scale * v (v^H r[k:, k:])
        w = np.einsum("...i,...ij->...j", v.conj(), r[..., k:, k:])
        r[..., k:, k:] -= scale[..., None, None] * v[..., :, None] * w[..., None, :]
        # q[:, k:] -= scale * (q[:, k:] v) v^H
        z = np.einsum("...ij,...j->...i", q[..., :, k:], v)
        q[..., :, k:] -= scale[..., None, None] * z[..., :, None] * v.conj()[..., None, :]
        r[..., k + 1 :, k] = 0.0

    q = q[..., :, :n]
    r = r[..., :n, :]

    diag = np.diagonal(r, axis1=-2, axis2=-1)
    mag = np.abs(diag)
    if np.any(mag < PIVOT_TOL):
        raise RankDeficientError(f"pivot magnitude {mag.min():.3e} below {PIVOT_TOL}")
    unit = diag / mag
    r = r * unit.conj()[..., :, None]
    q = q * unit[..., None, :]
    # Force exact structure: real diagonal, exact zeros below it.
    idx = np.arange(n)
    r[..., idx, idx] = mag
    r = np.triu(r)
    return QrFactors(q=q, r=r)


def qr_decompose(h: np.ndarray) -> QrFactors:
    """QR factors of a single M_R x M_T matrix (see :func:`householder_qr`)."""
    h = np.asarray(h)
    if h.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {h.shape}")
    return householder_qr(h)


def rotate_received(q: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Return ``q^H y``.

    ``y`` may be a vector of length M_R or an M_R x 1 column; the result has
    the matching shape with M_T rows. Stacks of ``q``/``y`` broadcast over
    leading axes when ``y`` is given as ``(..., M_R)``.
    """
    q = np.asarray(q)
    y = np.asarray(y, dtype=np.complex128)
    m_r = q.shape[-2]
    if y.ndim == 2 and q.ndim == 2:
        if y.shape != (m_r, 1):
            raise ValueError(f"y must be {m_r}x1, got {y.shape}")
        return q.conj().T @ y
    if y.shape[-1] != m_r:
        raise ValueError(f"y has {y.shape[-1]} entries, q has {m_r} rows")
    return np.einsum("...ij,...i->...j", q.conj(), y)
