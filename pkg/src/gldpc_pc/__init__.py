"""GLDPC codes with polar component codes.

Construction, encoding, iterative message-passing decoding with soft-output
list component decoders, and a deterministic AWGN block-error-rate
simulation harness.
"""

__version__ = "0.1.0"

from .gf2 import BitMatrix, generator_from_pcm, load_alist, rank, save_alist, to_systematic
from .polar import (
    PolarCode,
    SclOutcome,
    construct_frozen_set,
    crc_attach,
    crc_select,
    load_polar_code,
    polar_encode,
    polar_pcm,
    save_polar_code,
    sc_decode,
    scl_decode,
)
from .siso import SisoResult, exact_app_siso, pyndiah_siso, so_scl_siso, spc_siso
from .gldpc import (
    GldpcCode,
    assemble_pcm,
    build_am,
    build_gldpc,
    derive_dimensions,
    gldpc_encode,
    load_artifact,
    sample_permutations,
    save_artifact,
)
from .mpa import MpaDecoder, mpa_decode, parity_check
from .channel import (
    SimConfig,
    SimResult,
    complexity_gldpc,
    complexity_ldpc,
    run_bler,
    transmit,
    write_csv,
)
