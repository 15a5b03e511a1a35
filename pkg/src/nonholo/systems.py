"""Builtin example systems with closed-form reference expressions.

Each factory returns a :class:`BuiltinSystem` bundling the mechanical system,
both constraint representations, default forces and a ``fixtures`` mapping of
hand-derived closed forms. Fixture callables take ``(state, A)`` where
``state`` is a :class:`ParamState` for the parametric-side quantities
(``fiber_metric``, ``z_covariant``, ``z_field``) or a :class:`VelState` for
the implicit-side ones (``constraint_gram``, ``projector``, ``multipliers``,
``reactive_force``, ``d_field``), and ``A`` is the covariant force vector at
that state.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Tuple

import numpy as np

from .constraint import (
    ImplicitConstraint,
    ParametricConstraint,
    check_regular_implicit,
    check_regular_parametric,
    psi_at,
)
from .errors import InvalidParameter, NonholoError
from .linalg import rcond
from .model import SystemSpec, VelState
from .parametric import ParamState, fiber_metric

DEFAULT_GRAVITY = 9.81


@dataclass(frozen=True)
class BuiltinSystem:
    name: str
    spec: SystemSpec
    parametric: ParametricConstraint
    implicit: ImplicitConstraint
    default_state: ParamState
    params: Dict[str, float]
    coordinates: Tuple[str, ...]
    parameters: Tuple[str, ...]
    q_scale: np.ndarray
    fixtures: Dict[str, Callable] = field(default_factory=dict)
    description: str = ""

    @property
    def n(self):
        return self.spec.n

    @property
    def m(self):
        return self.parametric.m

    @property
    def r(self):
        return self.implicit.r

    def lift(self, s):
        return VelState(s.q, psi_at(self.parametric, s.q, s.z))


def _positive(**kwargs):
    for key, val in kwargs.items():
        if not np.isfinite(val) or val <= 0:
            raise InvalidParameter(f"parameter {key} must be positive, got {val!r}")


def _constant_forces(n, forces, default):
    if forces is None:
        vec = np.asarray(default, dtype=float)
    elif callable(forces):
        return forces
    else:
        vec = np.asarray(forces, dtype=float).reshape(-1)
    if vec.shape != (n,):
        raise InvalidParameter(f"force vector must have length {n}")
    vec = vec.copy()
    vec.setflags(write=False)
    return lambda q, qdot: vec


def _constant_metric(diag):
    g = np.diag(np.asarray(diag, dtype=float))
    zero = np.zeros((len(diag),) * 3)
    return (lambda q: g), (lambda q: zero)


# -- skate ---------------------------------------------------------------------


def make_skate(m=1.0, I=1.0, forces=None):
    """Rod sliding on a plane with its velocity kept parallel to the rod.

    Coordinates ``(x, y, theta)``; parameters ``z = (speed along the rod, theta rate)``.
    """
    _positive(m=m, I=I)
    metric, dmetric = _constant_metric([m, m, I])
    spec = SystemSpec(3, metric, _constant_forces(3, forces, np.zeros(3)), dmetric, "skate")

    def psi(q, z):
        c, s = np.cos(q[2]), np.sin(q[2])
        return np.array([z[0] * c, z[0] * s, z[1]])

    def psi_dz(q, z):
        c, s = np.cos(q[2]), np.sin(q[2])
        return np.array([[c, 0.0], [s, 0.0], [0.0, 1.0]])

    def psi_dq(q, z):
        c, s = np.cos(q[2]), np.sin(q[2])
        out = np.zeros((3, 3))
        out[0, 2] = -z[0] * s
        out[1, 2] = z[0] * c
        return out

    pc = ParametricConstraint(3, 2, psi, psi_dz, psi_dq, linear_in_z=True, name="skate")

    def c(q, v):
        return np.array([v[0] * np.sin(q[2]) - v[1] * np.cos(q[2])])

    def c_dqdot(q, v):
        return np.array([[np.sin(q[2]), -np.cos(q[2]), 0.0]])

    def c_dq(q, v):
        return np.array([[0.0, 0.0, v[0] * np.cos(q[2]) + v[1] * np.sin(q[2])]])

    ic = ImplicitConstraint(3, 1, c, c_dqdot, c_dq, linear_in_qdot=True, name="skate")

    def fx_fiber_metric(s, A):
        return np.diag([m, I])

    def fx_z_covariant(s, A):
        c_, s_ = np.cos(s.q[2]), np.sin(s.q[2])
        return np.array([A[0] * c_ + A[1] * s_, A[2]])

    def fx_z_field(s, A):
        c_, s_ = np.cos(s.q[2]), np.sin(s.q[2])
        z1, z2 = s.z
        return np.array([z1 * c_, z1 * s_, z2, (A[0] * c_ + A[1] * s_) / m, A[2] / I])

    def fx_constraint_gram(s, A):
        return np.array([[1.0 / m]])

    def fx_projector(s, A):
        c_, s_ = np.cos(s.q[2]), np.sin(s.q[2])
        return np.array([[s_ * s_, -s_ * c_, 0.0], [-s_ * c_, c_ * c_, 0.0], [0.0, 0.0, 0.0]]) / m

    def _rolling_term(s):
        c_, s_ = np.cos(s.q[2]), np.sin(s.q[2])
        return s.qdot[2] * (s.qdot[0] * c_ + s.qdot[1] * s_)

    def fx_multipliers(s, A):
        c_, s_ = np.cos(s.q[2]), np.sin(s.q[2])
        return np.array([-(A[0] * s_ - A[1] * c_) - m * _rolling_term(s)])

    def fx_reactive_force(s, A):
        c_, s_ = np.cos(s.q[2]), np.sin(s.q[2])
        cstar = np.array([s_, -c_, 0.0])
        return -fx_projector(s, A) @ A - _rolling_term(s) * cstar

    def fx_d_field(s, A):
        c_, s_ = np.cos(s.q[2]), np.sin(s.q[2])
        w = _rolling_term(s)
        along = A[0] * c_ + A[1] * s_
        return np.array([c_ / m * along - w * s_, s_ / m * along + w * c_, A[2] / I])

    def circle(q0, z, t):
        """Closed-form zero-force motion: constant z, circular path of radius z1/z2."""
        x0, y0, th0 = q0
        z1, z2 = z
        th = th0 + z2 * t
        if z2 == 0:
            return np.array([x0 + z1 * np.cos(th0) * t, y0 + z1 * np.sin(th0) * t, th])
        rad = z1 / z2
        return np.array([x0 + rad * (np.sin(th) - np.sin(th0)), y0 - rad * (np.cos(th) - np.cos(th0)), th])

    fixtures = dict(
        fiber_metric=fx_fiber_metric,
        z_covariant=fx_z_covariant,
        z_field=fx_z_field,
        constraint_gram=fx_constraint_gram,
        projector=fx_projector,
        multipliers=fx_multipliers,
        reactive_force=fx_reactive_force,
        d_field=fx_d_field,
        circle=circle,
    )
    return BuiltinSystem(
        name="skate",
        spec=spec,
        parametric=pc,
        implicit=ic,
        default_state=ParamState([0.0, 0.0, 0.0], [1.0, 1.0]),
        params=dict(m=m, I=I),
        coordinates=("x", "y", "theta"),
        parameters=("z1 (speed along rod)", "z2 (theta rate)"),
        q_scale=np.array([1.0, 1.0, np.pi]),
        fixtures=fixtures,
        description="rod sliding without friction, velocity parallel to the rod",
    )


# -- vertical rolling disc -----------------------------------------------------


def make_vertical_disc(m=1.0, A=1.0, B=1.0, R=1.0, torque=1.0, forces=None):
    """Vertical disc rolling without sliding; coordinates ``(x, y, theta, psi)``.

    ``A`` and ``B`` are the axial and diametral moments of inertia. By default a
    constant torque ``torque`` drives the rolling angle theta.
    """
    _positive(m=m, A=A, B=B, R=R)
    metric, dmetric = _constant_metric([m, m, A, B])
    spec = SystemSpec(
        4, metric, _constant_forces(4, forces, [0.0, 0.0, torque, 0.0]), dmetric, "vertical-disc"
    )
    mra = m * R * R + A

    def psi(q, z):
        c, s = np.cos(q[3]), np.sin(q[3])
        return np.array([R * c * z[0], R * s * z[0], z[0], z[1]])

    def psi_dz(q, z):
        c, s = np.cos(q[3]), np.sin(q[3])
        return np.array([[R * c, 0.0], [R * s, 0.0], [1.0, 0.0], [0.0, 1.0]])

    def psi_dq(q, z):
        c, s = np.cos(q[3]), np.sin(q[3])
        out = np.zeros((4, 4))
        out[0, 3] = -R * s * z[0]
        out[1, 3] = R * c * z[0]
        return out

    pc = ParametricConstraint(4, 2, psi, psi_dz, psi_dq, linear_in_z=True, name="vertical-disc")

    def c(q, v):
        cp, sp = np.cos(q[3]), np.sin(q[3])
        return np.array([v[0] - R * cp * v[2], v[1] - R * sp * v[2]])

    def c_dqdot(q, v):
        cp, sp = np.cos(q[3]), np.sin(q[3])
        return np.array([[1.0, 0.0, -R * cp, 0.0], [0.0, 1.0, -R * sp, 0.0]])

    def c_dq(q, v):
        cp, sp = np.cos(q[3]), np.sin(q[3])
        return np.array([[0.0, 0.0, 0.0, R * sp * v[2]], [0.0, 0.0, 0.0, -R * cp * v[2]]])

    ic = ImplicitConstraint(4, 2, c, c_dqdot, c_dq, linear_in_qdot=True, name="vertical-disc")

    def drive(q, A_):
        return A_[0] * R * np.cos(q[3]) + A_[1] * R * np.sin(q[3]) + A_[2]

    def fx_fiber_metric(s, A_):
        return np.diag([mra, B])

    def fx_z_covariant(s, A_):
        return np.array([drive(s.q, A_), A_[3]])

    def fx_z_field(s, A_):
        cp, sp = np.cos(s.q[3]), np.sin(s.q[3])
        z1, z2 = s.z
        return np.array([R * cp * z1, R * sp * z1, z1, z2, drive(s.q, A_) / mra, A_[3] / B])

    def fx_constraint_gram(s, A_):
        cp, sp = np.cos(s.q[3]), np.sin(s.q[3])
        k = R * R / A
        return np.array([[1 / m + k * cp * cp, k * sp * cp], [k * sp * cp, 1 / m + k * sp * sp]])

    def fx_gram_det(s, A_):
        return 1 / m**2 + R * R / (m * A)

    def fx_projector(s, A_):
        cp, sp = np.cos(s.q[3]), np.sin(s.q[3])
        k = R * R / A
        ginv = m * m * A / mra
        mat = np.array(
            [
                [(1 / m + k * sp * sp) / m**2, -R * R / (m * m * A) * sp * cp, -R / (m * m * A) * cp, 0.0],
                [-R * R / (m * m * A) * sp * cp, (1 / m + k * cp * cp) / m**2, -R / (m * m * A) * sp, 0.0],
                [-R / (m * m * A) * cp, -R / (m * m * A) * sp, R * R / (m * A * A), 0.0],
                [0.0, 0.0, 0.0, 0.0],
            ]
        )
        return ginv * mat

    def fx_transport(s):
        # X^i = qdot^j d_j C^a C_a^i
        cp, sp = np.cos(s.q[3]), np.sin(s.q[3])
        return R * s.qdot[2] * s.qdot[3] * np.array([sp, -cp, 0.0, 0.0])

    def fx_reactive_force(s, A_):
        return -fx_projector(s, A_) @ A_ - fx_transport(s)

    def fx_d_field(s, A_):
        cp, sp = np.cos(s.q[3]), np.sin(s.q[3])
        th_d, ps_d = s.qdot[2], s.qdot[3]
        dr = drive(s.q, A_)
        return np.array(
            [
                R * cp / mra * dr - R * th_d * ps_d * sp,
                R * sp / mra * dr + R * th_d * ps_d * cp,
                dr / mra,
                A_[3] / B,
            ]
        )

    def scale_positions(q):
        """(x, y, theta, psi) -> (X, Y, Theta, psi)."""
        return np.array([mra / R * q[0], mra / R * q[1], mra * q[2], q[3]])

    def scaled_d_rhs(y, A_):
        # rescaled D system, y = (X, Y, Theta, psi, Xdot, Ydot, Thetadot, psidot)
        cp, sp = np.cos(y[3]), np.sin(y[3])
        dr = A_[0] * R * cp + A_[1] * R * sp + A_[2]
        return np.array(
            [y[4], y[5], y[6], y[7], cp * dr - y[6] * y[7] * sp, sp * dr + y[6] * y[7] * cp, dr, A_[3] / B]
        )

    def scaled_z_rhs(y, A_):
        # rescaled Z system, y = (X, Y, Theta, psi, Z1, z2)
        cp, sp = np.cos(y[3]), np.sin(y[3])
        return np.array(
            [cp * y[4], sp * y[4], y[4], y[5], A_[0] * R * cp + A_[1] * R * sp + A_[2], A_[3] / B]
        )

    fixtures = dict(
        fiber_metric=fx_fiber_metric,
        z_covariant=fx_z_covariant,
        z_field=fx_z_field,
        constraint_gram=fx_constraint_gram,
        constraint_gram_det=fx_gram_det,
        projector=fx_projector,
        reactive_force=fx_reactive_force,
        transport=fx_transport,
        d_field=fx_d_field,
        scale_positions=scale_positions,
        scaled_d_rhs=scaled_d_rhs,
        scaled_z_rhs=scaled_z_rhs,
    )
    return BuiltinSystem(
        name="vertical-disc",
        spec=spec,
        parametric=pc,
        implicit=ic,
        default_state=ParamState([0.0, 0.0, 0.0, 0.3], [1.0, 0.5]),
        params=dict(m=m, A=A, B=B, R=R, torque=torque),
        coordinates=("x", "y", "theta", "psi"),
        parameters=("z1 (theta rate)", "z2 (psi rate)"),
        q_scale=np.array([R, R, np.pi, np.pi]),
        fixtures=fixtures,
        description="vertical disc rolling without sliding; constant torque on theta",
    )


# -- two co-axial discs --------------------------------------------------------


def make_coaxial_discs(m=1.0, A=1.0, B=1.0, R=1.0, a=1.0, torque1=1.0, torque2=0.5, forces=None):
    """Two identical discs on a common axis at fixed separation ``a``.

    Reduced coordinates ``(x, y, theta1, theta2, psi)``; parameters
    ``z = (theta1 rate, theta2 rate)``. Constant torques drive theta1 and theta2.
    """
    _positive(m=m, A=A, B=B, R=R, a=a)
    spec_forces = _constant_forces(5, forces, [0.0, 0.0, torque1, torque2, 0.0])

    def metric(q):
        c, s = np.cos(q[4]), np.sin(q[4])
        g = np.diag([2 * m, 2 * m, A, A, m * a * a + 2 * B])
        g[0, 4] = g[4, 0] = m * a * c
        g[1, 4] = g[4, 1] = m * a * s
        return g

    def dmetric(q):
        c, s = np.cos(q[4]), np.sin(q[4])
        dg = np.zeros((5, 5, 5))
        dg[0, 4, 4] = dg[4, 0, 4] = -m * a * s
        dg[1, 4, 4] = dg[4, 1, 4] = m * a * c
        return dg

    spec = SystemSpec(5, metric, spec_forces, dmetric, "coaxial-discs")

    def psi(q, z):
        c, s = np.cos(q[4]), np.sin(q[4])
        return np.array([R * c * z[0], R * s * z[0], z[0], z[1], R / a * (z[1] - z[0])])

    def psi_dz(q, z):
        c, s = np.cos(q[4]), np.sin(q[4])
        return np.array([[R * c, 0.0], [R * s, 0.0], [1.0, 0.0], [0.0, 1.0], [-R / a, R / a]])

    def psi_dq(q, z):
        c, s = np.cos(q[4]), np.sin(q[4])
        out = np.zeros((5, 5))
        out[0, 4] = -R * s * z[0]
        out[1, 4] = R * c * z[0]
        return out

    pc = ParametricConstraint(5, 2, psi, psi_dz, psi_dq, linear_in_z=True, name="coaxial-discs")

    # independent subset of the rolling conditions once the separation is frozen
    def c(q, v):
        cp, sp = np.cos(q[4]), np.sin(q[4])
        return np.array([v[0] - R * cp * v[2], v[1] - R * sp * v[2], a * v[4] - R * (v[3] - v[2])])

    def c_dqdot(q, v):
        cp, sp = np.cos(q[4]), np.sin(q[4])
        return np.array(
            [[1.0, 0.0, -R * cp, 0.0, 0.0], [0.0, 1.0, -R * sp, 0.0, 0.0], [0.0, 0.0, R, -R, a]]
        )

    def c_dq(q, v):
        cp, sp = np.cos(q[4]), np.sin(q[4])
        out = np.zeros((3, 5))
        out[0, 4] = R * sp * v[2]
        out[1, 4] = -R * cp * v[2]
        return out

    ic = ImplicitConstraint(5, 3, c, c_dqdot, c_dq, linear_in_qdot=True, name="coaxial-discs")

    k = R * R / (a * a)

    # published closed form; it is not g(psi_a, psi_b) for this metric, see fiber_metric_derived
    def fx_fiber_metric_printed(s, A_):
        g12 = m * a * R - A * k
        return np.array([[2 * m * R * R + A * (1 + k), g12], [g12, A * k + m * a * a + 2 * B]])

    def fx_fiber_metric(s, A_):
        diag = m * R * R + A + 2 * B * k
        return np.array([[diag, -2 * B * k], [-2 * B * k, diag]])

    def fx_fiber_det(s, A_):
        d = m * R * R + A
        return d * d + 4 * B * k * d

    def fx_metric(q):
        return metric(q)

    def fx_free_force(s, A_):
        cp, sp = np.cos(s.q[4]), np.sin(s.q[4])
        w2 = s.qdot[4] ** 2
        return np.array([A_[0] + m * a * sp * w2, A_[1] - m * a * cp * w2, A_[2], A_[3], A_[4]])

    def fx_z_covariant(s, A_):
        # closed form as published, where the psi force was labelled A3 and the wheel forces A4, A5
        cp, sp = np.cos(s.q[4]), np.sin(s.q[4])
        a_psi, a_th1, a_th2 = A_[4], A_[2], A_[3]
        return np.array([R * (A_[0] * cp + A_[1] * sp - a_psi / a) + a_th1, R / a * a_psi + a_th2])

    fixtures = dict(
        fiber_metric=fx_fiber_metric_printed,
        fiber_metric_derived=fx_fiber_metric,
        fiber_metric_det=fx_fiber_det,
        metric=fx_metric,
        free_force_term=fx_free_force,
        z_covariant=fx_z_covariant,
    )
    return BuiltinSystem(
        name="coaxial-discs",
        spec=spec,
        parametric=pc,
        implicit=ic,
        default_state=ParamState([0.0, 0.0, 0.0, 0.0, 0.2], [1.0, 0.7]),
        params=dict(m=m, A=A, B=B, R=R, a=a, torque1=torque1, torque2=torque2),
        coordinates=("x", "y", "theta1", "theta2", "psi"),
        parameters=("z1 (theta1 rate)", "z2 (theta2 rate)"),
        q_scale=np.array([R, R, np.pi, np.pi, np.pi]),
        fixtures=fixtures,
        description="two rolling discs on a common axis, separation a held fixed",
    )


def coaxial_unreduced_constraint(R=1.0):
    """The four rolling conditions on the full coordinates ``(x, y, theta1, theta2, psi, a)``."""
    _positive(R=R)

    def c(q, v):
        cp, sp = np.cos(q[4]), np.sin(q[4])
        a = q[5]
        return np.array(
            [
                v[0] - R * cp * v[2],
                v[1] - R * sp * v[2],
                v[0] + a * cp * v[4] + sp * v[5] - R * cp * v[3],
                v[1] + a * sp * v[4] - cp * v[5] - R * sp * v[3],
            ]
        )

    def c_dqdot(q, v):
        cp, sp = np.cos(q[4]), np.sin(q[4])
        a = q[5]
        return np.array(
            [
                [1.0, 0.0, -R * cp, 0.0, 0.0, 0.0],
                [0.0, 1.0, -R * sp, 0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0, -R * cp, a * cp, sp],
                [0.0, 1.0, 0.0, -R * sp, a * sp, -cp],
            ]
        )

    return ImplicitConstraint(6, 4, c, c_dqdot, None, linear_in_qdot=True, name="coaxial-discs-6d")


# -- two points with parallel velocities ---------------------------------------


def make_parallel_points(m1=1.0, m2=1.0, incline_g=DEFAULT_GRAVITY, forces=None):
    """Two points in the plane whose velocities stay parallel.

    Coordinates ``(x1, y1, x2, y2)``; parameters ``z = (rho, sigma, theta)`` with
    ``|v1| = |rho|``, ``|v2| = |sigma|`` and theta the common direction. The
    default forces are gravity along +x on an incline, ``A = (m1 g, 0, m2 g, 0)``.
    """
    _positive(m1=m1, m2=m2)
    if not np.isfinite(incline_g) or incline_g < 0:
        raise InvalidParameter(f"incline_g must be >= 0, got {incline_g!r}")
    g = incline_g
    metric, dmetric = _constant_metric([m1, m1, m2, m2])
    spec = SystemSpec(
        4, metric, _constant_forces(4, forces, [m1 * g, 0.0, m2 * g, 0.0]), dmetric, "parallel-points"
    )

    def psi(q, z):
        rho, sig, th = z
        c, s = np.cos(th), np.sin(th)
        return np.array([rho * c, rho * s, sig * c, sig * s])

    def psi_dz(q, z):
        rho, sig, th = z
        c, s = np.cos(th), np.sin(th)
        return np.array([[c, 0.0, -rho * s], [s, 0.0, rho * c], [0.0, c, -sig * s], [0.0, s, sig * c]])

    def psi_dq(q, z):
        return np.zeros((4, 4))

    pc = ParametricConstraint(4, 3, psi, psi_dz, psi_dq, linear_in_z=False, name="parallel-points")

    def c(q, v):
        return np.array([v[0] * v[3] - v[2] * v[1]])

    def c_dqdot(q, v):
        return np.array([[v[3], -v[2], -v[1], v[0]]])

    def c_dq(q, v):
        return np.zeros((1, 4))

    ic = ImplicitConstraint(4, 1, c, c_dqdot, c_dq, linear_in_qdot=False, name="parallel-points")

    def fx_fiber_metric(s, A_):
        rho, sig, _ = s.z
        return np.diag([m1, m2, m1 * rho * rho + m2 * sig * sig])

    def fx_z_covariant(s, A_):
        rho, sig, th = s.z
        c_, s_ = np.cos(th), np.sin(th)
        return np.array(
            [
                A_[0] * c_ + A_[1] * s_,
                A_[2] * c_ + A_[3] * s_,
                rho * (A_[1] * c_ - A_[0] * s_) + sig * (A_[3] * c_ - A_[2] * s_),
            ]
        )

    def fx_z_field(s, A_):
        rho, sig, th = s.z
        c_, s_ = np.cos(th), np.sin(th)
        zc = fx_z_covariant(s, A_)
        return np.array(
            [rho * c_, rho * s_, sig * c_, sig * s_, zc[0] / m1, zc[1] / m2, zc[2] / (m1 * rho**2 + m2 * sig**2)]
        )

    def fx_incline_z_rhs(s):
        # vertical components under A = (m1 g, 0, m2 g, 0)
        rho, sig, th = s.z
        return np.array(
            [g * np.cos(th), g * np.cos(th), -g * np.sin(th) * (m1 * rho + m2 * sig) / (m1 * rho**2 + m2 * sig**2)]
        )

    def fx_equal_mass_z_rhs(s):
        # equal masses
        rho, sig, th = s.z
        return np.array([g * np.cos(th), g * np.cos(th), -g * np.sin(th) * (rho + sig) / (rho**2 + sig**2)])

    def two_k(v):
        return m1 * (v[0] ** 2 + v[1] ** 2) + m2 * (v[2] ** 2 + v[3] ** 2)

    def fx_constraint_gram(s, A_):
        return np.array([[two_k(s.qdot) / (m1 * m2)]])

    def fx_projector(s, A_):
        x1, y1, x2, y2 = s.qdot
        mat = np.array(
            [
                [y2 * y2 / m1**2, -x2 * y2 / m1**2, -y1 * y2 / (m1 * m2), x1 * y2 / (m1 * m2)],
                [-x2 * y2 / m1**2, x2 * x2 / m1**2, x2 * y1 / (m1 * m2), -x1 * x2 / (m1 * m2)],
                [-y1 * y2 / (m1 * m2), y1 * x2 / (m1 * m2), y1 * y1 / m2**2, -x1 * y1 / m2**2],
                [x1 * y2 / (m1 * m2), -x1 * x2 / (m1 * m2), -x1 * y1 / m2**2, x1 * x1 / m2**2],
            ]
        )
        return m1 * m2 / two_k(s.qdot) * mat

    def fx_reactive_force(s, A_):
        return -fx_projector(s, A_) @ A_

    def fx_d_field(s, A_):
        x1, y1, x2, y2 = s.qdot
        tk = two_k(s.qdot)
        return (
            np.array(
                [
                    A_[0] * (m1 * (x1**2 + y1**2) + m2 * x2**2) / m1
                    + A_[1] * m2 * x2 * y2 / m1
                    + A_[2] * y1 * y2
                    - A_[3] * x1 * y2,
                    A_[0] * m2 * x2 * y2 / m1
                    + A_[1] * (m1 * (x1**2 + y1**2) + m2 * y2**2) / m1
                    - A_[2] * x2 * y1
                    + A_[3] * x1 * x2,
                    A_[0] * y1 * y2
                    - A_[1] * x2 * y1
                    + A_[2] * (m2 * (x2**2 + y2**2) + m1 * x1**2) / m2
                    + A_[3] * m1 * x1 * y1 / m2,
                    -A_[0] * x1 * y2
                    + A_[1] * x1 * x2
                    + A_[2] * m1 * x1 * y1 / m2
                    + A_[3] * (m2 * (x2**2 + y2**2) + m1 * y1**2) / m2,
                ]
            )
            / tk
        )

    def fx_incline_d(s):
        x1, y1, x2, y2 = s.qdot
        den = two_k(s.qdot)
        return g * np.array(
            [
                (m1 * (x1**2 + y1**2) + m2 * (x2**2 + y1 * y2)) / den,
                m2 * x2 * (y2 - y1) / den,
                (m2 * (x2**2 + y2**2) + m1 * (x1**2 + y1 * y2)) / den,
                m1 * x1 * (y1 - y2) / den,
            ]
        )

    def fx_equal_mass_d(s):
        x1, y1, x2, y2 = s.qdot
        den = x1**2 + y1**2 + x2**2 + y2**2
        return g * np.array(
            [
                (x1**2 + y1**2 + x2**2 + y1 * y2) / den,
                x2 * (y2 - y1) / den,
                (x2**2 + y2**2 + x1**2 + y1 * y2) / den,
                x1 * (y1 - y2) / den,
            ]
        )

    fixtures = dict(
        fiber_metric=fx_fiber_metric,
        z_covariant=fx_z_covariant,
        z_field=fx_z_field,
        incline_z_rhs=fx_incline_z_rhs,
        equal_mass_z_rhs=fx_equal_mass_z_rhs,
        constraint_gram=fx_constraint_gram,
        projector=fx_projector,
        reactive_force=fx_reactive_force,
        d_field=fx_d_field,
        incline_d=fx_incline_d,
        equal_mass_d=fx_equal_mass_d,
    )
    return BuiltinSystem(
        name="parallel-points",
        spec=spec,
        parametric=pc,
        implicit=ic,
        default_state=ParamState([0.0, 0.0, 1.0, 0.0], [1.0, 0.5, 0.3]),
        params=dict(m1=m1, m2=m2, incline_g=incline_g),
        coordinates=("x1", "y1", "x2", "y2"),
        parameters=("rho", "sigma", "theta"),
        q_scale=np.ones(4),
        fixtures=fixtures,
        description="two points with parallel velocities on an inclined plane (quadratic constraint)",
    )


# -- registry ------------------------------------------------------------------

FACTORIES = {
    "skate": make_skate,
    "vertical-disc": make_vertical_disc,
    "coaxial-discs": make_coaxial_discs,
    "parallel-points": make_parallel_points,
}


def names():
    return list(FACTORIES)


def get(name, **params):
    try:
        factory = FACTORIES[name]
    except KeyError:
        raise KeyError(f"unknown system {name!r}; choose from {', '.join(FACTORIES)}") from None
    return factory(**params)


def sample_states(system, rng, count, z_range=2.0, min_rcond=1e-6):
    """Draw ``count`` regular parametric states.

    Coordinates are uniform in ``[-1, 1]`` times ``system.q_scale`` and
    parameters uniform in ``[-z_range, z_range]``. Draws where either
    representation is irregular or the fibre metric is badly conditioned are
    rejected.
    """
    out = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > 100 * count:
            raise RuntimeError(f"could not sample {count} regular states for {system.name}")
        q = rng.uniform(-1.0, 1.0, system.n) * system.q_scale
        z = rng.uniform(-z_range, z_range, system.m)
        s = ParamState(q, z)
        try:
            if not check_regular_parametric(system.parametric, q, z).regular:
                continue
            if not check_regular_implicit(system.implicit, system.lift(s)).regular:
                continue
            if rcond(fiber_metric(system.spec, system.parametric, s)[0]) < min_rcond:
                continue
        except NonholoError:
            continue
        out.append(s)
    return out
