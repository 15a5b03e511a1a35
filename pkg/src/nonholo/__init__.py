"""Dynamics of non-holonomic systems with ideal constraints.

Two equivalent first-order formulations are provided: the field Z on the
constraint manifold in parametric coordinates ``(q, z)`` and the field D on
``(q, qdot)`` with explicit reactive forces.
"""
from .constraint import (
    ImplicitConstraint,
    ParametricConstraint,
    RankReport,
    check_regular_implicit,
    check_regular_parametric,
    compatibility_residuals,
    parametrize_linear,
)
from .errors import (
    DimensionMismatch,
    DriftExceeded,
    EvaluationFailure,
    InitialStateError,
    InvalidParameter,
    NonholoError,
    NotLinear,
    RankDeficient,
    SingularMatrix,
    SingularStateEncountered,
)
from .implicit import (
    DFieldValue,
    ReactionReport,
    constraint_gram,
    d_field,
    multipliers,
    projector,
    reactive_force,
)
from .integrate import (
    IntegrationConfig,
    Trajectory,
    drift_report,
    lift,
    rk4_step,
    simulate,
    simulate_implicit,
    simulate_parametric,
)
from .model import (
    SystemSpec,
    VelState,
    christoffel_lower,
    christoffel_upper,
    free_force_term,
    kinetic_energy,
)
from .parametric import ParamState, ZFieldValue, fiber_metric, z_covariant, z_field
from .systems import BuiltinSystem

__version__ = "0.1.0"
