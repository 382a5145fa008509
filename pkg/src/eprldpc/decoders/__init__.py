"""Decoders for non-binary codes and their binary and extended representations."""

from .base import CONVERGED, INCONSISTENT, MAX_ITER, DecodeResult, HybridSchedule, resolve_frame
from .bec import BECDecoder, base_to_extended_erasures, decode_bec_hybrid
from .bp import HybridDecoder, check_sum_work, decode_binary_bp, decode_hybrid_sepr
from .hard import HardDecoder, decode_hard_epr
from .qspa import decode_qspa, symbol_priors

__all__ = [
    "CONVERGED", "INCONSISTENT", "MAX_ITER", "DecodeResult", "HybridSchedule", "resolve_frame",
    "BECDecoder", "base_to_extended_erasures", "decode_bec_hybrid",
    "HybridDecoder", "check_sum_work", "decode_binary_bp", "decode_hybrid_sepr",
    "HardDecoder", "decode_hard_epr", "decode_qspa", "symbol_priors",
]
