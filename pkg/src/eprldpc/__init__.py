"""Extended binary representations of non-binary LDPC codes.

Field arithmetic, binary images, extended (EPR) parity-check matrices,
their construction, channel models, decoders and a simulation harness.
"""

from ._kernels import BACKEND
from .bitmatrix import BitMatrix, BlockStructure, precedes, rank_f2
from .channel import ChannelModel, CodeSpec, encode, transmit
from .construction import ConstructionConfig, optimize_code, peg_mother
from .decoders import (
    HybridSchedule,
    decode_bec_hybrid,
    decode_binary_bp,
    decode_hard_epr,
    decode_hybrid_sepr,
    decode_qspa,
)
from .gf import GF2m, field
from .graph import TannerGraph, girth
from .io import read_code, write_code
from .representation import (
    BinaryImage,
    EPRMatrix,
    GeneratorSet,
    NonBinaryMatrix,
    binary_image,
    build_omega,
    extend_codeword,
    f_omega,
)
from .sim import ExperimentPlan, estimate_threshold, run_sweep

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BitMatrix", "BlockStructure", "precedes", "rank_f2",
    "ChannelModel", "CodeSpec", "encode", "transmit",
    "ConstructionConfig", "optimize_code", "peg_mother",
    "HybridSchedule", "decode_bec_hybrid", "decode_binary_bp", "decode_hard_epr", "decode_hybrid_sepr",
    "decode_qspa", "GF2m", "field", "TannerGraph", "girth", "read_code", "write_code",
    "BinaryImage", "EPRMatrix", "GeneratorSet", "NonBinaryMatrix", "binary_image", "build_omega",
    "extend_codeword", "f_omega", "ExperimentPlan", "estimate_threshold", "run_sweep",
]
