"""Transition-layer steady states of mass-conserving reaction-diffusion systems.

The pipeline, bottom to top:

1. :mod:`~mcrd_layers.reaction` — bistable reaction terms, equilibrium
   branches and the balanced value v*;
2. :mod:`~mcrd_layers.wave` — the heteroclinic front profile and speed;
3. :mod:`~mcrd_layers.expansion` — arbitrary-order matched-asymptotic
   coefficients under the prescribed-mass constraint;
4. :mod:`~mcrd_layers.profile` — glued approximations on the unit ball and
   residuals of the nonlocal scalar equation;
5. :mod:`~mcrd_layers.solve` — Newton iteration for the exact steady state;
6. :mod:`~mcrd_layers.spectrum` — the critical eigenvalue of the linearized
   nonlocal operator and its sharp-interface limit constants.
"""

from .errors import (
    ConfigInvalid,
    DegenerateBalance,
    DegenerateJump,
    DomainTooSmall,
    GridTooCoarse,
    IndependenceViolation,
    IoFailure,
    IterationStall,
    MassOutOfRange,
    McrdError,
    MultipleRoots,
    NoBistability,
    NoConvergence,
    NoMassBalance,
    NoRootInWindow,
    OrderUnavailable,
    SignPatternViolation,
    SingularJacobian,
    SolvabilityViolation,
    StageOrderViolation,
)
from .expansion import EpsJet, ExpansionData, L0Context, build_expansion, l0_solve
from .geometry import RadialGrid, ball_volume, cutoff_theta, interface_radius
from .profile import (
    ApproximateSolution,
    assemble,
    layer_width,
    nonlocal_mean,
    residual,
    residual_sweep,
    s_expansion_defect,
)
from .reaction import (
    BistableReaction,
    EquilibriumStructure,
    balance_integral,
    balance_prime,
    equilibrium_roots,
    find_vstar,
)
from .solve import (
    DiscreteOperator,
    SolveResult,
    accuracy_report,
    apply_F,
    build_operator,
    jacobian_solve,
    newton_solve,
)
from .spectrum import (
    SpectralReport,
    adjoint_check,
    eigenfunction_decay_diagnostic,
    gamma_fixed_point,
    limit_constants,
    local_principal_eigenpair,
    richardson_ratio,
    secular_root,
    spectral_sweep,
)
from .wave import WaveProfile, check_speed_identity, solve_profile, wave_mass

__version__ = "0.1.0"
