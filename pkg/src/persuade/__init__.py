"""Public signaling solvers for binary-action receivers without externalities.

Exact LP solving over all signals, a fixed-parameter solver through
hyperplane-arrangement labels, a bi-criteria grid solver for submodular
objectives, a worst-case noise oracle, a cutting-plane solver for the
coarse-correlated-equilibrium relaxation, and revenue signaling in
second-price auctions.
"""

__version__ = "0.1.0"

from .arrangement import (
    Cell,
    Hyperplane,
    cell_has_interior,
    check_nondegeneracy,
    enumerate_cells,
    solve_fpt,
)
from .auction import (
    AuctionInstance,
    AuctionType,
    Outcome,
    brute_force_auction,
    comparison_hyperplanes,
    enumerate_outcomes,
    solve_auction,
)
from .bicriteria import (
    KUniformGrid,
    GridProfile,
    build_grid,
    classify_and_complete,
    decompose_prior,
    solve_bicriteria,
)
from .cce import (
    EquivalenceReport,
    ReductionSpec,
    build_reduction_instance,
    crossvalidate_equivalence,
    solve_cce_cutting,
    solve_wm_primal_bruteforce,
    wm_dual_alpha_nonpositive,
)
from .errors import (
    CapExceededError,
    DegenerateInstanceError,
    PersuadeError,
    SolverError,
    UnsupportedObjectiveError,
    ValidationError,
)
from .exact import solve_cce_exact, solve_persuasive_exact
from .lp import Constraint, LinearProgram, LpSolution, solve_lp, solve_with_cuts
from .model import (
    PersuasionInstance,
    PersuasivenessReport,
    Posterior,
    PublicScheme,
    ValidationResult,
    ZERO_PROBABILITY,
    posterior_of_signal,
    validate_instance,
    verify_scheme,
)
from .profiles import ActionProfile, all_profiles
from .setfuncs import (
    Additive,
    Anonymous,
    ChainDistribution,
    Coverage,
    CutFunction,
    ExplicitTable,
    SetFunction,
    StructureFlags,
    alpha_subroutine,
    check_structure,
    evaluate,
    lovasz_chain_value,
    maximize_minus_linear,
)
from .stability import (
    StabilityReport,
    StabilityTrial,
    chain_optimality_check,
    verify_stability_bounds,
    worst_noise_value,
)
