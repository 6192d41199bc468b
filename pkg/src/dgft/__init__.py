"""Discontinuous Galerkin with shock front tracking and TVD Runge-Kutta time
stepping for 1D scalar conservation laws with one shock."""

from .config import RunConfig, StepPolicy, build_problem
from .errors import (
    CFLWarning,
    ConfigurationError,
    DegenerateShockError,
    DGFTError,
    DomainError,
    FatalStepError,
    OutflowReached,
    StateBlowupError,
)
from .flux import FluxModel, max_wave_speed, upwind_flux
from .harness import convergence_study, run_anti_smoothing_scenario, run_preset_sec6
from .polykernel import ModalPoly, gauss_rule, project_function, reexpand
from .semidiscrete import Inflow, SemiDiscreteScheme
from .shockmesh import ShockMesh, ShockState, apply_transition
from .smoothness import (
    AntiSmoothingDetector,
    detect_anti_smoothing,
    jump_orders,
    spatial_indicator,
    temporal_indicator,
)
from .timestepper import RunRecord, advance, choose_timestep, run, tvdrk3_step

__all__ = [
    "RunConfig", "StepPolicy", "build_problem",
    "CFLWarning", "ConfigurationError", "DegenerateShockError", "DGFTError", "DomainError",
    "FatalStepError", "OutflowReached", "StateBlowupError",
    "FluxModel", "max_wave_speed", "upwind_flux",
    "convergence_study", "run_anti_smoothing_scenario", "run_preset_sec6",
    "ModalPoly", "gauss_rule", "project_function", "reexpand",
    "Inflow", "SemiDiscreteScheme",
    "ShockMesh", "ShockState", "apply_transition",
    "AntiSmoothingDetector", "detect_anti_smoothing", "jump_orders", "spatial_indicator", "temporal_indicator",
    "RunRecord", "advance", "choose_timestep", "run", "tvdrk3_step",
]
