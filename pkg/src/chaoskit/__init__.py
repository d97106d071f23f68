"""Simulation and chaos detection for damped second-order oscillators with
time-decaying regularization.

The package integrates three related forms of x'' = a(t, x, x'), evaluates
candidate Lyapunov functions along trajectories, estimates the largest
Lyapunov exponent two independent ways, scans linearized spectra for
stability crossings, and sweeps parameter space for the transition to chaos.
"""

from .errors import (
    ChaoskitError,
    DegenerateSeparation,
    DivergedTrajectory,
    Indeterminate,
    InvalidAxis,
    NoBracket,
    NonFinite,
    SectionMismatch,
    SingularTime,
    ValidationError,
)
from .model import (
    FORM_A1,
    FORM_A2,
    FORM_B,
    FORMS,
    EpsilonSchedule,
    Nonlinearity,
    Params,
    State,
    SystemSpec,
    accel,
    accel_array,
    tangent_accel,
    validate,
    with_param,
)
from .integrate import (
    COMPLETED,
    DIVERGED,
    STEP_FAILURE,
    EventRecord,
    IntegratorConfig,
    Stroboscopic,
    Trajectory,
    VelocityZeroCrossing,
    integrate,
    integrate_with_events,
)
from .analysis import (
    EigenReport,
    EnergyTrace,
    LyapunovEstimate,
    energy_trace,
    hopf_scan,
    linearized_eigen,
    lyapunov_two_trajectory,
    lyapunov_variational,
)
from .chaoscan import (
    NOISE_FLOOR,
    Axis,
    BifurcationDiagram,
    CriticalSet,
    LambdaMap,
    PoincareSection,
    bifurcation_sweep,
    cluster_count,
    critical_bisect,
    lambda_map,
    poincare,
)

__version__ = "0.1.0"

__all__ = [
    "ChaoskitError",
    "DegenerateSeparation",
    "DivergedTrajectory",
    "Indeterminate",
    "InvalidAxis",
    "NoBracket",
    "NonFinite",
    "SectionMismatch",
    "SingularTime",
    "ValidationError",
    "FORM_A1",
    "FORM_A2",
    "FORM_B",
    "FORMS",
    "EpsilonSchedule",
    "Nonlinearity",
    "Params",
    "State",
    "SystemSpec",
    "accel",
    "accel_array",
    "tangent_accel",
    "validate",
    "with_param",
    "COMPLETED",
    "DIVERGED",
    "STEP_FAILURE",
    "EventRecord",
    "IntegratorConfig",
    "Stroboscopic",
    "Trajectory",
    "VelocityZeroCrossing",
    "integrate",
    "integrate_with_events",
    "EigenReport",
    "EnergyTrace",
    "LyapunovEstimate",
    "energy_trace",
    "hopf_scan",
    "linearized_eigen",
    "lyapunov_two_trajectory",
    "lyapunov_variational",
    "NOISE_FLOOR",
    "Axis",
    "BifurcationDiagram",
    "CriticalSet",
    "LambdaMap",
    "PoincareSection",
    "bifurcation_sweep",
    "cluster_count",
    "critical_bisect",
    "lambda_map",
    "poincare",
    "__version__",
]
