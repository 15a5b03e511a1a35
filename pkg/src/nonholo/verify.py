"""Numerical checks of the structural identities: ideality, zero reactive power,
Gauss stationarity, projector algebra and agreement of the two methods.

Pointwise checks are evaluated over random regular states drawn by
:func:`nonholo.systems.sample_states`; trajectory checks integrate from the
system's default state.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ._faults import FAULT_TARGETS, inject
from .constraint import compatibility_residuals, psi_at, psi_dq_at, psi_dz_at
from .errors import DriftExceeded, NonholoError
from .implicit import (
    _pieces,
    newton_balance_residual,
    projector,
    reactive_force,
    tangency_residual,
)
from .integrate import (
    IntegrationConfig,
    drift_report,
    lift,
    simulate_implicit,
    simulate_parametric,
    velocities,
)
from .model import (
    VelState,
    christoffel_lower,
    forces_at,
    free_force_term,
    inverse_metric,
    metric_at,
    quadratic_term,
)
from .parametric import z_field
from . import systems as _systems

__all__ = [
    "FAULT_TARGETS",
    "VerificationReport",
    "cross_compare",
    "energy_balance",
    "gauss_function",
    "gauss_minimality",
    "gauss_residual",
    "ideality_residual",
    "inject_fault",
    "run_suite",
]

inject_fault = inject

TOLERANCES = {
    "ideality": 1e-9,
    "power": 1e-9,
    "gauss": 1e-8,
    "gauss_minimality": 0.0,
    "tangency": 1e-9,
    "newton_balance": 1e-9,
    "projector_algebra": 1e-10,
    "compatibility": 1e-9,
    "cross_compare": 1e-6,
    "drift": 1e-8,
    "energy_balance": 1e-5,
}


@dataclass(frozen=True)
class VerificationReport:
    check: str
    max_residual: float
    tolerance: float
    passed: bool
    sample_count: int

    def to_dict(self):
        return {
            "check": self.check,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "samples": self.sample_count,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=False)


def make_report(check, residuals, tolerance):
    vals = np.asarray(residuals, dtype=float).reshape(-1)
    worst = float(np.max(vals)) if vals.size else 0.0
    if np.isnan(worst):
        worst = float("inf")
    return VerificationReport(check, worst, tolerance, bool(worst <= tolerance), int(vals.size))


# -- pointwise identities -------------------------------------------------------


def ideality_residual(sys, pc, ic, s):
    """``R_i psi^i_alpha`` at the lifted state; zero for an ideal constraint."""
    vs = lift(pc, s)
    return reactive_force(sys, ic, vs).r_covariant @ psi_dz_at(pc, s.q, s.z)


def _acceleration_pieces(sys, pc, s):
    q = np.asarray(s.q, dtype=float)
    psi = psi_at(pc, q, s.z)
    pz = psi_dz_at(pc, q, s.z)
    g = metric_at(sys, q)
    return q, psi, pz, g


def gauss_residual(sys, pc, s):
    """``G_ab zdot^b + psi^i_a (Gamma_hki psi^h psi^k + g_ij psi^j_k psi^k - A_i)``.

    ``zdot`` comes from :func:`z_field`; everything else is re-evaluated
    directly so a fault in the field's own fibre metric shows up here.
    """
    q, psi, pz, g = _acceleration_pieces(sys, pc, s)
    zdot = z_field(sys, pc, s).dz
    gmat = pz.T @ g @ pz
    quad = quadratic_term(christoffel_lower(sys, q), psi) if np.any(psi) else np.zeros(sys.n)
    transport = g @ (psi_dq_at(pc, q, s.z) @ psi)
    return gmat @ zdot + pz.T @ (quad + transport - forces_at(sys, q, psi))


def gauss_function(sys, pc, s, zdot):
    """Gauss function in Lipschitz form, ``1/2 g(qddot - qddot_free, qddot - qddot_free)``.

    ``qddot = psi^i_j psi^j + psi^i_a zdot^a`` is the acceleration compatible
    with the constraint and ``qddot_free = g^{ij} L_j`` the free one.
    """
    q, psi, pz, g = _acceleration_pieces(sys, pc, s)
    acc = psi_dq_at(pc, q, s.z) @ psi + pz @ np.asarray(zdot, dtype=float)
    free = np.linalg.solve(g, free_force_term(sys, VelState(q, psi)))
    dev = acc - free
    return 0.5 * float(dev @ g @ dev)


def gauss_minimality(sys, pc, s, rng, count=8, delta=1e-2):
    """Smallest ``G(zdot + d) - G(zdot)`` over ``count`` random ``d`` with ``|d| = delta``.

    Non-negative when the actual ``zdot`` minimises the Gauss function.
    """
    zdot = z_field(sys, pc, s).dz
    base = gauss_function(sys, pc, s, zdot)
    gaps = []
    for _ in range(count):
        d = rng.standard_normal(zdot.size)
        d *= delta / np.linalg.norm(d)
        gaps.append(gauss_function(sys, pc, s, zdot + d) - base)
    return min(gaps)


def projector_algebra_residual(sys, ic, s):
    """Worst of ``|P^2 - P|``, ``|tr P - r|`` and ``|(g^-1 - pi) C^T|`` with ``P = pi g``."""
    g = metric_at(sys, s.q)
    pi = projector(sys, ic, s)
    p = pi @ g
    ginv = inverse_metric(sys, s.q)
    scale = max(1.0, float(np.max(np.abs(ginv))))
    cdot = _pieces(sys, ic, s).cdot
    return max(
        float(np.max(np.abs(p @ p - p))),
        abs(float(np.trace(p)) - ic.r),
        float(np.max(np.abs((ginv - pi) @ cdot.T))) / scale,
    )


# -- trajectory checks -----------------------------------------------------------


def cross_compare(sys, pc, ic, s0, cfg):
    """Max over recorded samples of ``|q_Z - q_D|`` starting from ``s0`` and its lift."""
    check = "cross_compare"
    try:
        tz = simulate_parametric(sys, pc, s0, cfg, ic)
        td = simulate_implicit(sys, ic, lift(pc, s0), cfg)
    except DriftExceeded:
        return VerificationReport(check, float("inf"), TOLERANCES[check], False, 0)
    dev = np.max(np.abs(tz.q - td.q), axis=1)
    return make_report(check, dev, TOLERANCES[check])


def _derivative(values, times):
    """Fourth-order central differences at interior samples of a uniform grid."""
    dt = np.diff(times)
    uniform = np.isclose(dt, dt[0], rtol=1e-9, atol=0.0)
    last = values.size if np.all(uniform) else int(np.argmin(uniform)) + 1
    v = values[:last]
    h = dt[0]
    idx = np.arange(2, last - 2)
    dv = (v[idx - 2] - 8 * v[idx - 1] + 8 * v[idx + 1] - v[idx + 2]) / (12 * h)
    return idx, dv


def energy_balance(traj, sys, pc=None, tolerance=None):
    """Max of ``|dK/dt - A_i qdot^i|`` over interior samples.

    ``dK/dt`` is a central difference of the recorded kinetic energy, so the
    recording stride should be small (``record_every=1`` at the usual steps).
    """
    tol = TOLERANCES["energy_balance"] if tolerance is None else tolerance
    if traj.times.size < 5:
        return VerificationReport("energy_balance", float("inf"), tol, False, 0)
    vel = velocities(traj, pc)
    idx, dk = _derivative(traj.kinetic, traj.times)
    power = np.array([forces_at(sys, traj.q[k], vel[k]) @ vel[k] for k in idx])
    return make_report("energy_balance", np.abs(dk - power), tol)


# -- suite -------------------------------------------------------------------------


def _pointwise(builtin, states, rng):
    sys, pc, ic = builtin.spec, builtin.parametric, builtin.implicit
    out = {k: [] for k in ("ideality", "power", "gauss", "gauss_minimality", "tangency",
                           "newton_balance", "projector_algebra", "compatibility")}
    for s in states:
        vs = lift(pc, s)
        out["ideality"].append(np.max(np.abs(ideality_residual(sys, pc, ic, s))))
        out["power"].append(abs(reactive_force(sys, ic, vs).power))
        out["gauss"].append(np.linalg.norm(gauss_residual(sys, pc, s)))
        out["gauss_minimality"].append(-gauss_minimality(sys, pc, s, rng))
        out["tangency"].append(np.max(np.abs(tangency_residual(sys, ic, vs))))
        out["newton_balance"].append(np.max(np.abs(newton_balance_residual(sys, ic, vs))))
        out["projector_algebra"].append(projector_algebra_residual(sys, ic, vs))
        out["compatibility"].append(max(np.max(np.abs(r)) for r in compatibility_residuals(pc, ic, s.q, s.z)))
    return out


def run_suite(builtin, seed=0, samples=100, trajectories=True, step=1e-3, t_end=1.0):
    """Run every check on a builtin system; returns a list of reports.

    Check names are prefixed with the system name, e.g. ``"skate:gauss"``.
    """
    rng = np.random.default_rng(seed)
    states = _systems.sample_states(builtin, rng, samples)
    reports = []
    for check, vals in _pointwise(builtin, states, rng).items():
        reports.append(make_report(f"{builtin.name}:{check}", vals, TOLERANCES[check]))
    if trajectories:
        sys, pc, ic = builtin.spec, builtin.parametric, builtin.implicit
        cfg = IntegrationConfig(step=step, t_end=t_end, record_every=1)
        rep = cross_compare(sys, pc, ic, builtin.default_state, cfg)
        reports.append(VerificationReport(f"{builtin.name}:cross_compare", *_tail(rep)))
        try:
            traj = simulate_implicit(sys, ic, lift(pc, builtin.default_state), cfg)
        except NonholoError:
            reports.append(VerificationReport(f"{builtin.name}:drift", float("inf"), TOLERANCES["drift"], False, 0))
            reports.append(
                VerificationReport(f"{builtin.name}:energy_balance", float("inf"), TOLERANCES["energy_balance"], False, 0)
            )
        else:
            reports.append(make_report(f"{builtin.name}:drift", [drift_report(traj, ic)[0]], TOLERANCES["drift"]))
            power = np.abs(traj.rpower)
            reports.append(make_report(f"{builtin.name}:trajectory_power", power, TOLERANCES["power"]))
            rep = energy_balance(traj, sys)
            reports.append(VerificationReport(f"{builtin.name}:energy_balance", *_tail(rep)))
    return reports


def _tail(rep):
    return rep.max_residual, rep.tolerance, rep.passed, rep.sample_count
