"""Structure-preserving solvers for a stochastic wave/Schrodinger pair.

The package integrates the coupled system

    i d(phi) + (phi_xx + phi u) dt = C1 dW,
    d(u_t)  - (u_xx - u + |phi|^2) dt = C2 dW~,

with homogeneous Dirichlet boundaries and additive space-time noise, using
fully discrete schemes that reproduce the exact averaged evolution laws of
the discrete charge and energy and, for the Runge-Kutta families, preserve
the underlying symplectic and multi-symplectic structure path by path.
"""
from .diagnostics import (
    MultiSymTangent,
    TangentPair,
    charge,
    charge_law_reference,
    charge_slope,
    coupling_term,
    energy,
    energy_law_reference,
    msfd_wedge,
    multisymplectic_residual,
    propagate_tangents,
    symplectic_form,
)
from .errors import ArtifactError, NumericalError, SkgsError, UsageError
from .grid_state import (
    FieldState,
    Grid1D,
    InitialData,
    InitialKind,
    NoiseCouplingMode,
    PhysicsParams,
    Scheme,
    SchemeConfig,
    default_noise_profile,
    eval_initial,
    make_grid,
)
from .integrators import (
    ButcherTableau,
    FemWorkspace,
    MsfdWorkspace,
    MultiSymState,
    PairWorkspace,
    SrkWorkspace,
    closure_residual,
    fixed_point_dt_threshold,
    make_multisym_state,
    make_parametric_tableau,
    multisym_to_field_state,
    step_cefd,
    step_fem,
    step_midpoint,
    step_msfd,
    step_msfd_with_context,
    step_srk,
    step_srk_with_context,
)
from .montecarlo import (
    ConvergenceResult,
    ConvergenceSpec,
    EnsembleSpec,
    EvolutionRecord,
    run_convergence,
    run_ensemble,
)
from .noise import BrownianPath, NoiseIncrement, aggregate, sample_path
from .spatial_ops import (
    OperatorKind,
    SpatialOperator,
    apply_operator,
    build_central_diff,
    build_fem,
    build_sine_spectral,
    project_l2,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "SkgsError",
    "UsageError",
    "NumericalError",
    "ArtifactError",
    "Grid1D",
    "make_grid",
    "FieldState",
    "PhysicsParams",
    "Scheme",
    "SchemeConfig",
    "NoiseCouplingMode",
    "InitialData",
    "InitialKind",
    "eval_initial",
    "default_noise_profile",
    "OperatorKind",
    "SpatialOperator",
    "build_central_diff",
    "build_sine_spectral",
    "build_fem",
    "apply_operator",
    "project_l2",
    "BrownianPath",
    "NoiseIncrement",
    "sample_path",
    "aggregate",
    "ButcherTableau",
    "make_parametric_tableau",
    "PairWorkspace",
    "FemWorkspace",
    "SrkWorkspace",
    "MsfdWorkspace",
    "MultiSymState",
    "make_multisym_state",
    "multisym_to_field_state",
    "closure_residual",
    "fixed_point_dt_threshold",
    "step_cefd",
    "step_midpoint",
    "step_fem",
    "step_srk",
    "step_srk_with_context",
    "step_msfd",
    "step_msfd_with_context",
    "charge",
    "energy",
    "coupling_term",
    "charge_slope",
    "charge_law_reference",
    "energy_law_reference",
    "TangentPair",
    "MultiSymTangent",
    "symplectic_form",
    "msfd_wedge",
    "multisymplectic_residual",
    "propagate_tangents",
    "EnsembleSpec",
    "ConvergenceSpec",
    "EvolutionRecord",
    "ConvergenceResult",
    "run_ensemble",
    "run_convergence",
]
