"""Fully discrete time steppers for the stochastic wave/Schrodinger pair."""
from .fem_scheme import FemWorkspace, step_fem
from .kick_substep import PairWorkspace, step_cefd, step_midpoint
from .msfd import (
    MsfdStepContext,
    MsfdWorkspace,
    MultiSymState,
    closure_residual,
    make_multisym_state,
    multisym_to_field_state,
    step_msfd,
    step_msfd_with_context,
)
from .srk import SrkStepContext, SrkWorkspace, step_srk, step_srk_with_context
from .stage_core import StageWorkspace, fixed_point_dt_threshold
from .tableau import ButcherTableau, make_parametric_tableau

__all__ = [
    "ButcherTableau",
    "make_parametric_tableau",
    "PairWorkspace",
    "FemWorkspace",
    "StageWorkspace",
    "SrkWorkspace",
    "MsfdWorkspace",
    "SrkStepContext",
    "MsfdStepContext",
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
]
