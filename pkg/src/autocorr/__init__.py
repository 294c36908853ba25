"""Exact evaluation, extremality checks and ascent search for
shifted-product autocorrelation inequalities on step functions."""

from .errors import (
    AutocorrError,
    DegenerateDError,
    DimensionMismatchError,
    InsufficientMassError,
    InvalidFunctionError,
    NonpositiveHeightError,
    NotGuaranteedFiniteError,
    SameCellError,
    ShapeMismatchError,
    TooLargeError,
    ZeroColumnError,
    ZeroFunctionError,
)
from .extremality import (
    ExtremalityReport,
    check_conditions,
    check_shape_specialization,
    max_t_S,
    min_t_S,
    sum_product_S,
)
from .functional import (
    FunctionalReport,
    Method,
    ShiftPoint,
    averaging_upper_bound,
    correlation_curve,
    max_over_shifts,
    min_over_shifts,
    ratio,
    shifted_product_integral,
)
from .grid_fn import (
    GridFunction,
    ShapeClass,
    add_bump,
    eval_lebesgue,
    l1_norm,
    move_mass,
    shape_class,
    support_hull,
)
from .matrix_spec import (
    ShiftMatrix,
    bl_constant,
    bl_ratio_bound,
    bs_preset,
    build_B,
    finiteness_check,
    identity_preset,
)
from .optimizer import AscentParams, brute_force_oracle, perturb_ascent, random_restart_search

__version__ = "0.1.0"
