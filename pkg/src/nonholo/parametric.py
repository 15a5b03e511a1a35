"""First method: the vector field Z on the constraint manifold in (q, z) coordinates."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _faults, linalg
from .constraint import psi_at, psi_dq_at, psi_dz_at
from .model import VelState, as_config, fd_jacobian, free_force_term, metric_at

EQUILIBRIUM_TOL = 1e-9


@dataclass(frozen=True)
class ParamState:
    """A point ``(q, z)`` of the constraint manifold in parametric coordinates."""

    q: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", np.array(self.q, dtype=float).reshape(-1))
        object.__setattr__(self, "z", np.array(self.z, dtype=float).reshape(-1))

    def vector(self):
        return np.concatenate([self.q, self.z])

    @classmethod
    def from_vector(cls, y, n):
        y = np.asarray(y, dtype=float)
        return cls(y[:n], y[n:])


@dataclass(frozen=True)
class ZFieldValue:
    dq: np.ndarray
    dz: np.ndarray

    def vector(self):
        return np.concatenate([self.dq, self.dz])


def _gram(g, pz):
    gmat = pz.T @ g @ pz
    return _faults.apply("fiber_metric", 0.5 * (gmat + gmat.T))


def fiber_metric(sys, pc, s):
    """``G_ab = g_ij psi^i_a psi^j_b`` and its inverse.

    Raises SingularMatrix at irregular states, where ``psi^i_a`` loses rank.
    """
    q = as_config(s.q, sys.n)
    gmat = _gram(metric_at(sys, q), psi_dz_at(pc, q, s.z))
    return gmat, linalg.spd_solve(gmat, np.eye(pc.m), "fiber metric")


def z_covariant(sys, pc, s):
    """Covariant vertical force ``Z_a = psi^i_a (L_i(q, psi) - g_ij psi^j_k psi^k)``.

    The second term is the acceleration carried by the q-dependence of the
    parametrization; it vanishes whenever ``psi`` is independent of q or
    that acceleration is g-orthogonal to the fibre directions.
    """
    q = as_config(s.q, sys.n)
    psi = psi_at(pc, q, s.z)
    pz = psi_dz_at(pc, q, s.z)
    lvec = free_force_term(sys, VelState(q, psi))
    transport = psi_dq_at(pc, q, s.z) @ psi
    if np.any(transport):
        lvec = lvec - metric_at(sys, q) @ transport
    return pz.T @ lvec


def z_field(sys, pc, s):
    """Evaluate ``(dq/dt, dz/dt) = (psi(q, z), G^{ab} Z_b)``."""
    q = as_config(s.q, sys.n)
    psi = psi_at(pc, q, s.z)
    gmat = _gram(metric_at(sys, q), psi_dz_at(pc, q, s.z))
    dz = linalg.spd_solve(gmat, z_covariant(sys, pc, s), "fiber metric")
    return ZFieldValue(psi, np.atleast_1d(dz))


def z_vector_field(sys, pc):
    """Flat-vector form of :func:`z_field` for the integrators."""
    n = sys.n

    def field(y):
        return z_field(sys, pc, ParamState.from_vector(y, n)).vector()

    return field


def first_integral_residual(sys, pc, F, s, grad=None):
    """Derivative of ``F(q, z)`` along Z at ``s``; zero iff F is conserved there.

    ``grad(q, z)`` may return ``(dF/dq, dF/dz)``; otherwise both are taken by
    central differences.
    """
    q = as_config(s.q, sys.n)
    z = as_config(s.z, pc.m)
    if grad is not None:
        dfq, dfz = (np.asarray(v, dtype=float) for v in grad(q, z))
    else:
        full = fd_jacobian(lambda y: np.atleast_1d(F(y[: sys.n], y[sys.n:])), np.concatenate([q, z]))
        dfq, dfz = full[0, : sys.n], full[0, sys.n:]
    val = z_field(sys, pc, ParamState(q, z))
    return float(val.dq @ dfq + val.dz @ dfz)


def singular_residual(sys, pc, s):
    """Norms of ``psi(q, z)`` and of the vertical force; both ~0 at an equilibrium of Z."""
    q = as_config(s.q, sys.n)
    return (
        float(np.linalg.norm(psi_at(pc, q, s.z))),
        float(np.linalg.norm(z_covariant(sys, pc, s))),
    )


def is_equilibrium(sys, pc, s, tol=EQUILIBRIUM_TOL):
    a, b = singular_residual(sys, pc, s)
    return a < tol and b < tol
