"""Soft-output MIMO sphere decoding with adaptively clipped LLRs."""

from .adapt import (
    BerEstimate,
    ClippingState,
    bit_error_prob,
    estimate_block_ber,
    init_clipping,
    ter_llr,
    update_clipping,
)
from .channel import ChannelRealization, NoiseModel, draw_channel, sigma2_for_snr, transmit
from .fec import CodeBlock, Interleaver, bcjr_decode, deinterleave, encode, interleave, make_interleaver
from .harness import MetricsRecord, SimConfig, measure_ber, run_block, run_experiment, steady_state
from .linalg import QrFactors, RankDeficientError, qr_decompose, rotate_received
from .modem import Constellation, assemble_vector, demap_index, map_bits, qam
from .sphere_decoder import DetectionProblem, SoftDetectionResult, detect, detect_batch

__version__ = "0.1.0"
