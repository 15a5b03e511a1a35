"""Fixed-step RK4 integration of the Z and D fields with per-sample diagnostics."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from . import linalg
from .constraint import (
    c_at,
    c_dqdot_at,
    check_regular_implicit,
    check_regular_parametric,
    psi_at,
)
from .errors import (
    DriftExceeded,
    InitialStateError,
    InvalidParameter,
    RankDeficient,
    SingularMatrix,
    SingularStateEncountered,
)
from .implicit import d_vector_field, reactive_force
from .model import VelState, as_config, kinetic_energy, metric_at
from .parametric import ParamState, fiber_metric, z_vector_field

ON_MANIFOLD_TOL = 1e-9
PROJECTION_ITERS = 8


@dataclass(frozen=True)
class IntegrationConfig:
    step: float
    t_end: float
    record_every: int = 10
    drift_abort_threshold: float = 1e-6
    project: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.step) and self.step > 0):
            raise InvalidParameter(f"step must be positive, got {self.step!r}")
        if not (np.isfinite(self.t_end) and self.t_end > 0):
            raise InvalidParameter(f"t_end must be positive, got {self.t_end!r}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise InvalidParameter(f"record_every must be a positive integer, got {self.record_every!r}")
        if not self.drift_abort_threshold > 0:
            raise InvalidParameter("drift_abort_threshold must be positive")

    def steps(self):
        """Number of steps and the actual step size that lands exactly on t_end."""
        count = max(1, math.ceil(self.t_end / self.step - 1e-9))
        return count, self.t_end / count


@dataclass
class Trajectory:
    """Recorded samples of an integration.

    ``states[k]`` is ``(q, aux)`` flattened, where aux is z for the parametric
    method and qdot for the implicit one. ``rpower`` is NaN for the parametric
    method.
    """

    times: np.ndarray
    states: np.ndarray
    n: int
    method: str
    aux_names: Tuple[str, ...]
    cres: np.ndarray
    kinetic: np.ndarray
    rpower: np.ndarray

    @property
    def q(self):
        return self.states[:, : self.n]

    @property
    def aux(self):
        return self.states[:, self.n:]

    @property
    def final(self):
        return self.states[-1]

    def header(self):
        cols = ["t"] + [f"q{i + 1}" for i in range(self.n)] + list(self.aux_names)
        return cols + ["Cres", "K", "Rpower"]

    def to_csv(self, path=None):
        """Write (or return, if ``path`` is None) the trajectory as CSV with 17 significant digits."""
        buf = io.StringIO()
        buf.write(",".join(self.header()) + "\n")
        for k in range(self.times.size):
            vals = [self.times[k], *self.states[k], self.cres[k], self.kinetic[k]]
            row = [f"{v:.17g}" for v in vals]
            row.append("" if np.isnan(self.rpower[k]) else f"{self.rpower[k]:.17g}")
            buf.write(",".join(row) + "\n")
        text = buf.getvalue()
        if path is None:
            return text
        with open(path, "w", encoding="ascii", newline="") as fh:
            fh.write(text)
        return None

    def to_dict(self):
        return {
            "method": self.method,
            "columns": self.header(),
            "t": self.times.tolist(),
            "states": self.states.tolist(),
            "Cres": self.cres.tolist(),
            "K": self.kinetic.tolist(),
            "Rpower": [None if np.isnan(v) else float(v) for v in self.rpower],
        }


def rk4_step(field, y, h):
    """One classic fourth-order Runge-Kutta step."""
    y = np.asarray(y, dtype=float)
    k1 = field(y)
    k2 = field(y + 0.5 * h * k1)
    k3 = field(y + 0.5 * h * k2)
    k4 = field(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def simulate(
    field: Callable,
    y0,
    cfg: IntegrationConfig,
    monitor: Optional[Callable] = None,
    project: Optional[Callable] = None,
    n: Optional[int] = None,
    method: str = "generic",
    aux_names: Tuple[str, ...] = (),
):
    """Integrate ``dy/dt = field(y)`` from ``t = 0`` to ``cfg.t_end``.

    ``monitor(y)`` returns ``(constraint residual, K, reactive power)``; it is
    called after every step so the drift abort is never skipped by the
    recording stride. ``project(y)``, when given and ``cfg.project`` is set, is
    applied after each step.
    """
    y = np.array(y0, dtype=float).reshape(-1)
    n = y.size if n is None else n
    count, h = cfg.steps()

    def diag(yy):
        return monitor(yy) if monitor is not None else (0.0, float("nan"), float("nan"))

    times, states, rows = [0.0], [y.copy()], [diag(y)]
    for k in range(1, count + 1):
        t = k * h
        try:
            y = rk4_step(field, y, h)
            if cfg.project and project is not None:
                y = project(y)
            d = diag(y)
        except (SingularMatrix, RankDeficient) as exc:
            raise SingularStateEncountered(f"singular state near t={t:.6g}: {exc}", time=t) from exc
        if not np.all(np.isfinite(y)):
            raise SingularStateEncountered(f"non-finite state at t={t:.6g}", time=t)
        if d[0] > cfg.drift_abort_threshold:
            raise DriftExceeded(
                f"constraint residual {d[0]:.3e} exceeds {cfg.drift_abort_threshold:.1e} at t={t:.6g}",
                time=t,
                residual=d[0],
            )
        if k % cfg.record_every == 0 or k == count:
            times.append(t)
            states.append(y.copy())
            rows.append(d)
    diags = np.array(rows, dtype=float).reshape(-1, 3)
    return Trajectory(
        times=np.array(times),
        states=np.array(states),
        n=n,
        method=method,
        aux_names=tuple(aux_names),
        cres=diags[:, 0],
        kinetic=diags[:, 1],
        rpower=diags[:, 2],
    )


def lift(pc, s):
    """``(q, z) -> (q, psi(q, z))``."""
    q = as_config(s.q, pc.n)
    return VelState(q, psi_at(pc, q, s.z))


def _residual(ic, s):
    return float(np.max(np.abs(c_at(ic, s.q, s.qdot))))


def project_velocity(sys, ic, s, tol=1e-14):
    """Minimal g-norm Newton correction of qdot onto ``C(q, .) = 0`` at fixed q."""
    q = as_config(s.q, sys.n)
    v = as_config(s.qdot, sys.n).copy()
    g = metric_at(sys, q)
    for _ in range(PROJECTION_ITERS):
        res = c_at(ic, q, v)
        if np.max(np.abs(res)) <= tol:
            break
        cm = c_dqdot_at(ic, q, v)
        cup = linalg.solve(g, cm.T, "metric")
        v = v - cup @ linalg.solve(cm @ cup, res, "constraint Gram matrix")
    return VelState(q, v)


def simulate_parametric(sys, pc, s0, cfg, ic=None):
    """Integrate the Z field from ``(q0, z0)``.

    With an implicit twin ``ic`` the constraint residual of the lifted state is
    recorded; otherwise Cres is zero.
    """
    s0 = ParamState(as_config(s0.q, sys.n), as_config(s0.z, pc.m))
    try:
        report = check_regular_parametric(pc, s0.q, s0.z)
        if not report.regular:
            raise InitialStateError(
                f"initial state is irregular: rank psi_z = {report.numerical_rank} < {pc.m}"
            )
        fiber_metric(sys, pc, s0)
    except (SingularMatrix, RankDeficient) as exc:
        raise InitialStateError(f"initial state is singular: {exc}") from exc

    n = sys.n

    def monitor(y):
        vs = lift(pc, ParamState.from_vector(y, n))
        cres = _residual(ic, vs) if ic is not None else 0.0
        return cres, kinetic_energy(sys, vs), float("nan")

    names = tuple(f"z{a + 1}" for a in range(pc.m))
    return simulate(z_vector_field(sys, pc), s0.vector(), cfg, monitor, None, n, "parametric", names)


def simulate_implicit(sys, ic, s0, cfg):
    """Integrate the D field from a regular state on C."""
    s0 = VelState(as_config(s0.q, sys.n), as_config(s0.qdot, sys.n))
    report = check_regular_implicit(ic, s0)
    if not report.regular:
        raise InitialStateError(
            f"initial state is irregular: rank C_qdot = {report.numerical_rank} < {ic.r}"
        )
    res0 = _residual(ic, s0)
    if res0 > ON_MANIFOLD_TOL:
        raise InitialStateError(f"initial state is off the constraint: max |C| = {res0:.3e}")
    n = sys.n

    def monitor(y):
        vs = VelState.from_vector(y, n)
        return _residual(ic, vs), kinetic_energy(sys, vs), reactive_force(sys, ic, vs).power

    def project(y):
        return project_velocity(sys, ic, VelState.from_vector(y, n)).vector()

    names = tuple(f"qdot{i + 1}" for i in range(n))
    return simulate(d_vector_field(sys, ic), s0.vector(), cfg, monitor, project, n, "implicit", names)


def drift_report(traj, ic, pc=None):
    """Max and final ``|C^a|`` over the recorded states.

    Parametric trajectories need ``pc`` to lift ``(q, z)`` to velocities.
    """
    vals = []
    for y in traj.states:
        if traj.method == "parametric":
            if pc is None:
                raise InvalidParameter("a parametric trajectory needs its ParametricConstraint")
            vs = lift(pc, ParamState.from_vector(y, traj.n))
        else:
            vs = VelState.from_vector(y, traj.n)
        vals.append(_residual(ic, vs))
    return max(vals), vals[-1]


def velocities(traj, pc=None):
    """Velocity samples of a trajectory (lifting parametric states through ``pc``)."""
    if traj.method != "parametric":
        return traj.aux.copy()
    if pc is None:
        raise InvalidParameter("a parametric trajectory needs its ParametricConstraint")
    return np.array([psi_at(pc, y[: traj.n], y[traj.n:]) for y in traj.states])
