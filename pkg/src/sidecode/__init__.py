"""Linear source coding over GF(p) with decoder side information.

Encoders are sparse full-rank matrices; decoding is studied through five
rules (block MAP, typical set, symbol-wise MAP, deterministic and
stochastic successive cancellation), a sum-product implementation for
sparse encoders, and a polar source code. The sim module re-derives every
optimality bound relating these decoders by exhaustive enumeration at
small block lengths and Monte Carlo beyond.
"""

from .gf import FieldElement, FieldSpec
from .linalg import (
    ExtendedCodeSystem,
    SingularMatrixError,
    SparseMatrix,
    build_complement,
    invert,
    make_system,
    permute_columns_full_rank_tail,
    q_map,
    rank,
    sample_sparse_full_rank,
)
from .source import (
    BlockSample,
    JointSourceLaw,
    binary_entropy,
    noiseless_law,
    random_law,
    symmetric_channel_law,
    uniform_independent_law,
)
from .decoders import (
    ConditionalModel,
    DecodeResult,
    EnumerationBudgetError,
    block_error_probability,
    decode_map,
    decode_sc,
    decode_smap,
    decode_ssc,
    decode_typical,
    sc_conditional,
)

__all__ = [
    "FieldElement",
    "FieldSpec",
    "ExtendedCodeSystem",
    "SingularMatrixError",
    "SparseMatrix",
    "build_complement",
    "invert",
    "make_system",
    "permute_columns_full_rank_tail",
    "q_map",
    "rank",
    "sample_sparse_full_rank",
    "BlockSample",
    "JointSourceLaw",
    "binary_entropy",
    "noiseless_law",
    "random_law",
    "symmetric_channel_law",
    "uniform_independent_law",
    "ConditionalModel",
    "DecodeResult",
    "EnumerationBudgetError",
    "block_error_probability",
    "decode_map",
    "decode_sc",
    "decode_smap",
    "decode_ssc",
    "decode_typical",
    "sc_conditional",
]

__version__ = "0.1.0"
