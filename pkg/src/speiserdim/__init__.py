"""Numerical toolkit for Julia set dimension of a lattice-built family of
finite-singular-value meromorphic maps: elliptic evaluation, orbit
classification and rendering, dimension bounds, and continuity envelopes."""

from .sphere import ExtendedComplex, INFINITY, T_INF, as_extended, chordal_distance
from .elliptic import (
    PI,
    POLE_CUTOFF,
    LatticeSpec,
    direct_sum_radius,
    eisenstein_g4,
    reduce_to_fundamental,
    square_lattice,
    wp,
    wp_direct_sum,
    wp_prime,
)
from .families import (
    MapFamily,
    PoleData,
    PoleRangeError,
    coeff_magnitude,
    enumerate_poles,
    eval_G,
    eval_H,
    eval_deriv,
    eval_deriv_array,
    eval_family,
    eval_family_array,
    eval_flambda,
    eval_fmax,
    eval_hm,
    local_exponent,
    nearest_pole,
    poles_to_csv,
    second_derivative_floor,
)
from .dynamics import (
    CODE_JULIA,
    CODE_UNDETERMINED,
    FixedPointData,
    GridSpec,
    LinearizationDomainError,
    NoAttractingFixedPointError,
    RasterResult,
    classify_point,
    find_attracting_fixed_point,
    koenigs_check,
    koenigs_value,
    render,
)
from .dimension import (
    ContractionViolationError,
    DegenerateMultiplierError,
    DegenerateSystemError,
    DimensionEstimate,
    IFSBranch,
    IFSBranchSet,
    InsufficientPolesError,
    UndefinedDimensionError,
    auto_base_index,
    box_counting,
    continuity_envelope,
    default_box_scales,
    estimate_branch_contractions,
    formula_lower,
    formula_upper,
    multiplier_sign_mismatch,
    qc_dilatation,
    series_exponent,
    series_sum,
    series_terms,
    solve_bowen,
    synthetic_lattice_branches,
)
from .config import ConfigError, ExperimentConfig, load_config, parse_config, serialize_config

__version__ = "0.1.0"

__all__ = [
    "CODE_JULIA",
    "CODE_UNDETERMINED",
    "ConfigError",
    "ContractionViolationError",
    "DegenerateMultiplierError",
    "DegenerateSystemError",
    "DimensionEstimate",
    "ExperimentConfig",
    "ExtendedComplex",
    "FixedPointData",
    "GridSpec",
    "IFSBranch",
    "IFSBranchSet",
    "INFINITY",
    "InsufficientPolesError",
    "LatticeSpec",
    "LinearizationDomainError",
    "MapFamily",
    "NoAttractingFixedPointError",
    "PoleData",
    "PoleRangeError",
    "RasterResult",
    "T_INF",
    "UndefinedDimensionError",
    "as_extended",
    "auto_base_index",
    "box_counting",
    "chordal_distance",
    "classify_point",
    "coeff_magnitude",
    "continuity_envelope",
    "PI",
    "POLE_CUTOFF",
    "default_box_scales",
    "direct_sum_radius",
    "eisenstein_g4",
    "enumerate_poles",
    "estimate_branch_contractions",
    "eval_G",
    "eval_H",
    "eval_deriv",
    "eval_deriv_array",
    "eval_family",
    "eval_family_array",
    "eval_flambda",
    "eval_fmax",
    "eval_hm",
    "find_attracting_fixed_point",
    "formula_lower",
    "formula_upper",
    "koenigs_check",
    "koenigs_value",
    "load_config",
    "local_exponent",
    "multiplier_sign_mismatch",
    "nearest_pole",
    "parse_config",
    "poles_to_csv",
    "second_derivative_floor",
    "qc_dilatation",
    "reduce_to_fundamental",
    "render",
    "serialize_config",
    "series_exponent",
    "series_sum",
    "series_terms",
    "solve_bowen",
    "square_lattice",
    "synthetic_lattice_branches",
    "wp",
    "wp_direct_sum",
    "wp_prime",
]
