"""Rate-1/2 RSC (5/7)_8 code, random interleaver and log-MAP BCJR decoder.

LLR convention throughout: L = ln P(bit=1)/P(bit=0), so a positive value
decides logical 1 (bipolar +1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

N_STATES = 4
# Decoder-internal input saturation; keeps exp() well inside float range.
LLR_SATURATION = 60.0
_NEG = -1e300


def rsc_step(state: int, u: int) -> tuple[int, int]:
    """One trellis transition of the (5/7)_8 encoder.

    ``state`` packs the two register cells as ``(a[k-1] << 1) | a[k-2]``.
    Feedback 1+D+D^2 gives ``a = u ^ a[k-1] ^ a[k-2]``, feedforward 1+D^2
    gives parity ``a ^ a[k-2]``. Returns ``(next_state, parity)``.
    """
    a1, a2 = state >> 1, state & 1
    a = u ^ a1 ^ a2
    return (a << 1) | a1, a ^ a2


def _trellis_tables() -> tuple[np.ndarray, np.ndarray]:
    nxt = np.zeros((N_STATES, 2), dtype=np.int64)
    par = np.zeros((N_STATES, 2), dtype=np.int64)
    for s in range(N_STATES):
        for u in (0, 1):
            nxt[s, u], par[s, u] = rsc_step(s, u)
    return nxt, par


NEXT_STATE, PARITY = _trellis_tables()


@dataclass(frozen=True)
class CodeBlock:
    info_bits: np.ndarray
    coded_bits: np.ndarray

    @property
    def n_info(self) -> int:
        return self.info_bits.size


def encode(info) -> CodeBlock:
    """Encode logical info bits; output interlaces systematic and parity bits.

    The encoder starts in the zero state and is not terminated.
    """
    u = np.asarray(info, dtype=np.int64).ravel()
    if u.size == 0:
        raise ValueError("info block is empty")
    if np.any((u != 0) & (u != 1)):
        raise ValueError("info bits must be 0/1")
    coded = np.empty(2 * u.size, dtype=np.int8)
    state = 0
    for k, bit in enumerate(u.tolist()):
        state_next = NEXT_STATE[state, bit]
        coded[2 * k] = bit
        coded[2 * k + 1] = PARITY[state, bit]
        state = state_next
    return CodeBlock(info_bits=u.astype(np.int8), coded_bits=coded)


@dataclass(frozen=True)
class Interleaver:
    """Bijection on coded-bit positions: output[i] = input[permutation[i]]."""

    permutation: np.ndarray
    seed: int | None = None

    @property
    def size(self) -> int:
        return self.permutation.size


def make_interleaver(size: int, seed: int | np.random.SeedSequence) -> Interleaver:
    """Seeded pseudo-random interleaver over ``size`` positions."""
    perm = np.random.default_rng(seed).permutation(size)
    perm.setflags(write=False)
    return Interleaver(permutation=perm, seed=seed if isinstance(seed, int) else None)


def interleave(x, pi: Interleaver) -> np.ndarray:
    x = np.asarray(x)
    if x.shape[-1] != pi.size:
        raise ValueError(f"length {x.shape[-1]} does not match interleaver size {pi.size}")
    return x[..., pi.permutation]


def deinterleave(x, pi: Interleaver) -> np.ndarray:
    x = np.asarray(x)
    if x.shape[-1] != pi.size:
        raise ValueError(f"length {x.shape[-1]} does not match interleaver size {pi.size}")
    out = np.empty_like(x)
    out[..., pi.permutation] = x
    return out


@njit(cache=True, inline="always")
def _jacln(a, b):
    if a < b:
        a, b = b, a
    if b <= _NEG:
        return a
    return a + np.log1p(np.exp(b - a))


@njit(cache=True)
def _bcjr_kernel(llr, nxt, par):
    n = llr.size // 2
    alpha = np.full((n + 1, 4), _NEG)
    beta = np.full((n + 1, 4), _NEG)
    alpha[0, 0] = 0.0
    beta[n, :] = 0.0
    gamma = np.empty((n, 4, 2))
    for k in range(n):
        ls = llr[2 * k]
        lp = llr[2 * k + 1]
        for s in range(4):
            for u in range(2):
                gamma[k, s, u] = 0.5 * ((2 * u - 1) * ls + (2 * par[s, u] - 1) * lp)

    for k in range(n):
        for s in range(4):
            a = alpha[k, s]
            if a <= _NEG:
                continue
            for u in range(2):
                t = nxt[s, u]
                alpha[k + 1, t] = _jacln(alpha[k + 1, t], a + gamma[k, s, u])
        m = alpha[k + 1, 0]
        for s in range(1, 4):
            if alpha[k + 1, s] > m:
                m = alpha[k + 1, s]
        for s in range(4):
            alpha[k + 1, s] -= m

    for k in range(n - 1, -1, -1):
        for s in range(4):
            acc = _NEG
            for u in range(2):
                acc = _jacln(acc, gamma[k, s, u] + beta[k + 1, nxt[s, u]])
            beta[k, s] = acc
        m = beta[k, 0]
        for s in range(1, 4):
            if beta[k, s] > m:
                m = beta[k, s]
        for s in range(4):
            beta[k, s] -= m

    app_info = np.empty(n)
    app_coded = np.empty(2 * n)
    for k in range(n):
        u1 = _NEG
        u0 = _NEG
        p1 = _NEG
        p0 = _NEG
        for s in range(4):
            a = alpha[k, s]
            if a <= _NEG:
                continue
            for u in range(2):
                v = a + gamma[k, s, u] + beta[k + 1, nxt[s, u]]
                if u == 1:
                    u1 = _jacln(u1, v)
                else:
                    u0 = _jacln(u0, v)
                if par[s, u] == 1:
                    p1 = _jacln(p1, v)
                else:
                    p0 = _jacln(p0, v)
        app_info[k] = u1 - u0
        app_coded[2 * k] = u1 - u0
        app_coded[2 * k + 1] = p1 - p0
    return app_info, app_coded


def bcjr_decode(a_priori) -> tuple[np.ndarray, np.ndarray]:
    """Log-MAP BCJR over the unterminated (5/7)_8 trellis.

    Args:
        a_priori: 2N coded-bit LLRs (systematic/parity interlaced).

    Returns:
        ``(app_info, app_coded)``: a-posteriori LLRs of the N info bits and of
        all 2N coded bits. Hard decisions are ``app_info > 0``.
    """
    llr = np.asarray(a_priori, dtype=np.float64).ravel()
    if llr.size == 0 or llr.size % 2:
        raise ValueError(f"expected an even, non-zero number of LLRs, got {llr.size}")
    if not np.all(np.isfinite(llr)):
        raise ValueError("a-priori LLRs must be finite")
    llr = np.clip(llr, -LLR_SATURATION, LLR_SATURATION)
    return _bcjr_kernel(llr, NEXT_STATE, PARITY)
