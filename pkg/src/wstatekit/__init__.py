"""Simulation, imaging, phase retrieval, and entanglement certification
for path-encoded single-photon W states."""

from .state import (
    CircuitSpec,
    ModeState,
    SplitterSpec,
    fidelity,
    ideal_w,
    load_state,
    propagate,
    save_state,
)
from .optics import (
    DEFAULT_GRID,
    DEFAULT_SPACING,
    DEFAULT_WAIST,
    Field,
    ImageGrid,
    LensSpec,
    NoiseModel,
    SpotLayout,
    add_detection_noise,
    analytic_pattern,
    dft2_array,
    dft2_unitary,
    intensity,
    lens_map,
    render_field,
    render_pair,
)
from .pgm import read_pgm, write_pgm
from .retrieval import (
    AmplitudeStats,
    GSConfig,
    GSResult,
    ModeEstimate,
    amplitude_stats,
    best_match,
    canonicalize,
    extract_modes,
    gerchberg_saxton,
    phase_rms,
    sqrt_image,
    twin_estimate,
    wrap_phase,
)
from .metrics import SsimParams, estimate_p, fringe_visibility, ncc_overlap, ssim
from .witness import (
    DenseState,
    ProductAnsatz,
    WitnessCertificate,
    WitnessParams,
    dense_expectation,
    find_witness,
    min_product_expectation,
    noise_density,
    product_expectation,
    product_state_vector,
    rho_expectation,
    target_vector,
    witness_matrix,
)

__version__ = "0.1.0"
