"""Coherent fiber-optic link simulation and staircase-coded pragmatic
coded modulation."""

from .params import FiberParams, PropagationPlan, STANDARD_FIBER, PLANCK
from .field import OpticalField, load_field, save_field
from .ssfm import (
    NumericalBlowupError,
    inject_ase,
    linear_step,
    nonlinear_step,
    ssfm_propagate,
)
from .constellation import (
    RingConstellation,
    SymbolFrame,
    draw_symbols,
    set_average_power,
)
from .wdmtx import modulate
from .rxdsp import (
    RxConfig,
    back_rotate,
    backpropagate,
    estimate_xpm_phase,
    evm_db,
    extract_channel,
    linear_equalize,
    sample_symbols,
)
from .stats import (
    RingGaussianModel,
    SnrSpec,
    binary_entropy,
    bit_level_info,
    conditional_density,
    fit_model,
    mutual_information,
    pragmatic_rate,
    snr_db,
)
from .bch import BchCode, build_code, g709_component
from .staircase import (
    StaircaseDecoder,
    StaircaseEncoder,
    StaircaseParams,
    decode_stream,
    error_floor_estimate,
    minimal_stall_pattern,
    net_coding_gain,
    simulate_bsc,
)
from .shaping import (
    BlockInterleaver,
    ShapedConstellation,
    ShapingCodeSpec,
    bicm_demap_hard,
    bicm_map,
    build_constellation,
    recover_shaping_bits,
    shape,
)

__version__ = "0.1.0"
