"""Barrier-function adaptive continuous higher-order sliding-mode control
of perturbed integrator chains: homogeneous feedback pairs, two adaptive
controllers, a fixed-step simulator, and scenario/CSV tooling.
"""

from .adapt_case1 import (BARRIER, SEARCHING, Case1State, GrowthGain,
                          MuSchedule, adaptive_gain, alpha_tilde, barrier_gain,
                          control_case1, validate_schedules)
from .adapt_host import HostState, control_host, gains_host
from .errors import (BarrierBlowupError, BfsmcError, BlowupError, DomainError,
                     InfeasibleWeightsError, InvalidPairError, NumericError,
                     RejectedPairError, ScenarioError, TuningFailureError)
from .feedback import (FeedbackPair, PairConstants, ValidationReport,
                       build_hong_pair, default_gains, estimate_c_u,
                       estimate_rho_bounds, tune_gains, validate_pair)
from .hom_core import (HomogeneityParams, dilate, euler_vector, make_params,
                       signed_power)
from .plant import Case1Class, Case2Class, Disturbance, builtin_disturbance, rhs
from .scenario_io import main, parse_scenario, read_trajectory, write_csv
from .sim import (AnalysisReport, Event, Scenario, Trajectory, analyze, run,
                  run_batch, step_rk4)

__version__ = "0.1.0"

__all__ = [
    "AnalysisReport", "BARRIER", "BarrierBlowupError", "BfsmcError",
    "BlowupError", "Case1Class", "Case1State", "Case2Class", "Disturbance",
    "DomainError", "Event", "FeedbackPair", "GrowthGain", "HomogeneityParams",
    "HostState", "InfeasibleWeightsError", "InvalidPairError", "MuSchedule",
    "NumericError", "PairConstants", "RejectedPairError", "SEARCHING",
    "Scenario", "ScenarioError", "Trajectory", "TuningFailureError",
    "ValidationReport", "adaptive_gain", "alpha_tilde", "analyze",
    "barrier_gain", "build_hong_pair", "builtin_disturbance", "control_case1",
    "control_host", "default_gains", "dilate", "estimate_c_u",
    "estimate_rho_bounds", "euler_vector", "gains_host", "main", "make_params",
    "parse_scenario", "read_trajectory", "rhs", "run", "run_batch",
    "signed_power", "step_rk4", "tune_gains", "validate_pair",
    "validate_schedules", "write_csv",
]
