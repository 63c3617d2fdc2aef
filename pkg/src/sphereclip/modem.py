"""Gray-labelled square QAM and bit-block to symbol-vector mapping.

Bits are bipolar at the interface (logical 0 -> -1, logical 1 -> +1).
Constellation point ``i`` carries the bit pattern given by the binary
expansion of ``i``, most significant bit first, so "ascending constellation
index" and "ascending bit pattern" are the same ordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

SUPPORTED_ORDERS = (2, 4, 16, 64)


def gray_levels(bits_per_axis: int) -> np.ndarray:
    """Unnormalized PAM amplitude for every per-axis label.

    Entry ``label`` holds the amplitude of the level whose reflected Gray
    code equals ``label``; for two bits this is 00->-3, 01->-1, 11->+1, 10->+3.
    """
    n_levels = 1 << bits_per_axis
    pos = np.arange(n_levels)
    labels = pos ^ (pos >> 1)
    amp = np.empty(n_levels)
    amp[labels] = 2 * pos - (n_levels - 1)
    return amp


@dataclass(frozen=True, eq=False)
class Constellation:
    """Unit-energy Gray-mapped constellation.

    Attributes:
        order: number of points |S|.
        bits_per_symbol: log2 |S|.
        points: complex points indexed by bit pattern.
        labels: ``(order, bits_per_symbol)`` array of logical bits (0/1).
        energy_norm: divisor applied to the integer grid for unit average energy.
    """

    order: int
    bits_per_symbol: int
    points: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)
    energy_norm: float

    @property
    def bipolar_labels(self) -> np.ndarray:
        return 2 * self.labels.astype(np.int8) - 1


@lru_cache(maxsize=None)
def qam(order: int) -> Constellation:
    """Build (and cache) the constellation of the given order.

    ``order`` 2 gives BPSK on the real axis; 4, 16 and 64 give square QAM with
    independent Gray labels per axis, in-phase bits first.
    """
    if order not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported constellation order {order}; use one of {SUPPORTED_ORDERS}")
    bps = int(order).bit_length() - 1
    idx = np.arange(order)
    labels = ((idx[:, None] >> np.arange(bps - 1, -1, -1)) & 1).astype(np.int8)
    if order == 2:
        grid = gray_levels(1)[idx].astype(np.complex128)
    else:
        half = bps // 2
        levels = gray_levels(half)
        i_label = idx >> half
        q_label = idx & ((1 << half) - 1)
        grid = levels[i_label] + 1j * levels[q_label]
    norm = float(np.sqrt(np.mean(np.abs(grid) ** 2)))
    points = grid / norm
    points.setflags(write=False)
    labels.setflags(write=False)
    return Constellation(order=order, bits_per_symbol=bps, points=points, labels=labels, energy_norm=norm)


def _to_logical(block) -> np.ndarray:
    b = np.asarray(block)
    if not np.all((b == 1) | (b == -1)):
        raise ValueError("bit blocks must contain bipolar values -1/+1")
    return (b > 0).astype(np.int64)


def pattern_index(logical_bits: np.ndarray) -> np.ndarray:
    """Constellation index for logical bit patterns along the last axis."""
    bits = np.asarray(logical_bits, dtype=np.int64)
    k = bits.shape[-1]
    return bits @ (1 << np.arange(k - 1, -1, -1))


def map_bits(block, c: Constellation) -> complex:
    """Map one bipolar bit block to its constellation point."""
    bits = _to_logical(block)
    if bits.shape != (c.bits_per_symbol,):
        raise ValueError(f"block must hold {c.bits_per_symbol} bits, got shape {bits.shape}")
    return complex(c.points[pattern_index(bits)])


def demap_index(symbol_index: int, c: Constellation) -> np.ndarray:
    """Bipolar bit block of constellation point ``symbol_index``."""
    if not 0 <= symbol_index < c.order:
        raise IndexError(f"symbol index {symbol_index} out of range for order {c.order}")
    return c.bipolar_labels[symbol_index].copy()


def assemble_vector(blocks, c: Constellation, m_t: int | None = None) -> np.ndarray:
    """Symbol vector ``s_u``; element t is the mapped block of antenna t."""
    blocks = np.asarray(blocks)
    if blocks.ndim != 2 or blocks.shape[1] != c.bits_per_symbol:
        raise ValueError(f"expected (M_T, {c.bits_per_symbol}) blocks, got shape {blocks.shape}")
    if m_t is not None and blocks.shape[0] != m_t:
        raise ValueError(f"expected {m_t} blocks (one per antenna), got {blocks.shape[0]}")
    return c.points[pattern_index(_to_logical(blocks))]


def channel_uses(n_coded: int, m_t: int, c: Constellation) -> int:
    """Number of channel uses needed for ``n_coded`` bits; must divide evenly."""
    per_use = m_t * c.bits_per_symbol
    if n_coded % per_use:
        raise ValueError(f"{n_coded} coded bits do not fill whole channel uses of {per_use} bits")
    return n_coded // per_use


def partition_blocks(coded_bits: np.ndarray, m_t: int, c: Constellation) -> np.ndarray:
    """Symbol indices ``(U, M_T)`` for a stream of logical coded bits.

    The k-th bit (1-based) lands in block ceil(k / log2|S|); blocks fill each
    channel use antenna by antenna.
    """
    bits = np.asarray(coded_bits, dtype=np.int64)
    u = channel_uses(bits.size, m_t, c)
    return pattern_index(bits.reshape(u, m_t, c.bits_per_symbol))
