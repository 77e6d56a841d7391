"""Desk-scale toolkit for fractional integral operators on truncated grids.

Implements the operator and its commutators, weight classes with observed
doubling / Muckenhoupt characteristics, Luxemburg norms, Morrey / amalgam /
mean-oscillation norms, two-weight condition scans, and a verification
harness that reports best-observed constants for the weak-type inequalities.
"""

from .errors import ConfigError, NumericalError
from .grid import (
    Cube,
    CubeFamily,
    GridFunction,
    GridSpec,
    integrate,
    make_cube_family,
    overlap_volume,
    sliding_box_integral,
)
from .operators import (
    RieszKernel,
    annulus_tail_bound,
    build_kernel,
    commutator,
    kernel_cube_bound_check,
    normalizing_constant,
    riesz_potential,
)
from .orlicz import (
    YoungFunction,
    exp_m1,
    generalized_holder_check,
    john_nirenberg_check,
    log_bump,
    luxemburg_norm,
    power,
    young_eval,
)
from .conditions import (
    ConditionReport,
    orlicz_bump_condition,
    power_bump_condition,
    sawyer_condition,
)
from .spaces import (
    ExponentSet,
    NormResult,
    amalgam_norm,
    bmo_ls_norm,
    bmo_norm,
    default_ell_grid,
    distribution,
    lp_norm,
    morrey_norm,
    weak_amalgam_norm,
    weak_lp_norm,
    weak_morrey_norm,
)
from .verify import (
    FunctionFamily,
    VerificationReport,
    bmo_lemma_check,
    geometric_series_check,
    has_monotone_growth,
    make_symbol,
    verify_amalgam,
    verify_endpoint,
    verify_morrey,
    verify_weak_type_lebesgue,
)
from .weights import (
    Weight,
    WeightCharacteristics,
    ainfty_fit,
    ap_constant,
    characteristics,
    constant_weight,
    doubling_constant,
    holder_step,
    power_product_weight,
    power_weight,
    reverse_doubling_constant,
    table_weight,
)

__version__ = "0.1.0"
