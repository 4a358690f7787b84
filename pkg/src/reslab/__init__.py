"""reslab: resonances and exponentially small eigenvalues of semiclassical
Schrodinger operators built from a drift landscape F.

The operator is H = -eps^2 Laplacian + |F'|^2/4 - (eps/2) Laplacian(F),
the Witten-conjugated form of the drift generator -eps Laplacian + F'.d/dx.
The package locates wells and barrier depths of F, assembles exponentially
fitted interior discretizations and exterior complex-scaled ones, hunts
resonances by complex shift-invert, and scans the scaled symbol for the
lower bounds that back the whole construction.
"""

from .errors import (
    ClusterUnresolved,
    ConeViolation,
    DegenerateDepths,
    EmptyGrid,
    FitFailed,
    GridTooCoarse,
    HypothesesNotVerified,
    InsideCore,
    InsufficientPoints,
    InvalidPotential,
    IoError,
    NoConvergence,
    NoMinimum,
    NonPositiveEigenvalue,
    OutOfDomain,
    OutsideAnalyticityCone,
    ParseError,
    QuadratureFailure,
    RegionEmpty,
    ReslabError,
    ResonanceNotFound,
    SingularShift,
    TieAtGlobalMin,
    TooLarge,
    TruncationTooTight,
)
from .operators import (
    DiscretizedOperator,
    Grid1D,
    ScalingContour,
    assemble_exterior_dirichlet_scaled,
    assemble_full_scaled,
    assemble_interior,
    contour_map,
    write_operator_mm,
)
from .pipeline import (
    ExperimentConfig,
    GridPlan,
    RunRecord,
    TOOL_VERSION,
    emit_report,
    extrapolate_lambda,
    fit_depth,
    load_config,
    parse_config,
    plan_grid,
    run_sweep,
)
from .potential import (
    ComplexRadius,
    HypothesisReport,
    PotentialSpec,
    PotentialValues,
    build_potential,
    eval_V_rotated,
    eval_potential,
    fit_tail_samples,
    scaling_radius,
    verify_hypotheses,
)
from .solvers import (
    ResonanceResult,
    SpectrumResult,
    cutoff_profile,
    decay_check,
    find_resonances,
    lowest_eigs,
    quasimode_residual,
    shift_invert_complex,
    sturm_count_below,
)
from .symbols import (
    SymbolPoint,
    SymbolScanReport,
    lower_bound_scan,
    non_trapping_scan,
    symbol_D2,
    symbol_h1,
    symbol_scan_report,
    taylor_remainder_scan,
)
from .wells import (
    AgmonField,
    WellStructure,
    agmon_distance,
    agmon_field,
    barrier_cost,
    barrier_cost_bruteforce,
    barrier_cost_grid,
    find_minima,
    well_structure,
)

__version__ = TOOL_VERSION

__all__ = [name for name in dir() if not name.startswith("_")]
