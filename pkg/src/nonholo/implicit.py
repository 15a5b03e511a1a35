"""Second method: the vector field D on (q, qdot), Lagrange multipliers and reactive forces."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _faults, linalg
from .constraint import c_dq_at, c_dqdot_at
from .model import VelState, as_config, free_force_term, metric_at


@dataclass(frozen=True)
class DFieldValue:
    dq: np.ndarray
    dqdot: np.ndarray

    def vector(self):
        return np.concatenate([self.dq, self.dqdot])


@dataclass(frozen=True)
class ReactionReport:
    """Lagrange multipliers and the reactive force in both index positions."""

    lam: np.ndarray
    r_contravariant: np.ndarray
    r_covariant: np.ndarray
    power: float


@dataclass(frozen=True)
class _Pieces:
    g: np.ndarray
    cdot: np.ndarray  # C^a_i, r x n
    dc: np.ndarray  # d_i C^a, r x n
    cup: np.ndarray  # C^{ai} = g^{ij} C^a_j, stored n x r
    gab: np.ndarray  # G^{ab}
    lvec: np.ndarray  # L_i


def _pieces(sys, ic, s):
    q = as_config(s.q, sys.n)
    qdot = as_config(s.qdot, sys.n)
    g = metric_at(sys, q)
    cdot = c_dqdot_at(ic, q, qdot)
    cup = linalg.solve(g, cdot.T, "metric")
    gab = cdot @ cup
    gab = 0.5 * (gab + gab.T)
    return _Pieces(g, cdot, c_dq_at(ic, q, qdot), cup, gab, free_force_term(sys, VelState(q, qdot)))


def constraint_gram(sys, ic, s):
    """``G^{ab} = g^{ij} C^a_i C^b_j`` and its inverse ``G_ab``."""
    p = _pieces(sys, ic, s)
    return p.gab, linalg.spd_solve(p.gab, np.eye(ic.r), "constraint Gram matrix")


def _lambda_rhs(p, qdot):
    # Lambda^a = C^a_i (Gamma^i_hk qdot^h qdot^k - A^i) - qdot^i d_i C^a
    return -(p.cup.T @ p.lvec) - p.dc @ qdot


def _multipliers(p, qdot):
    lam = linalg.spd_solve(p.gab, _lambda_rhs(p, qdot), "constraint Gram matrix")
    return _faults.apply("multipliers", np.atleast_1d(lam))


def multipliers(sys, ic, s):
    """Lagrange multipliers ``lambda_a`` solving ``G^{ab} lambda_b = Lambda^a``."""
    return _multipliers(_pieces(sys, ic, s), as_config(s.qdot, sys.n))


def reactive_force(sys, ic, s):
    qdot = as_config(s.qdot, sys.n)
    p = _pieces(sys, ic, s)
    lam = _multipliers(p, qdot)
    r_cov = p.cdot.T @ lam
    return ReactionReport(lam, p.cup @ lam, r_cov, float(r_cov @ qdot))


def _lowered_gradients(p):
    # C_a^i = G_ab C^{bi}, returned r x n
    return linalg.spd_solve(p.gab, p.cup.T, "constraint Gram matrix")


def _projector(p):
    pi = p.cup @ _lowered_gradients(p)
    return _faults.apply("projector", 0.5 * (pi + pi.T))


def projector(sys, ic, s):
    """Contravariant projector ``pi^{ij} = G_ab C^{ai} C^{bj}`` onto the constraint gradients."""
    return _projector(_pieces(sys, ic, s))


def d_field(sys, ic, s):
    """``D^i = (g^{ij} - pi^{ij}) L_j - qdot^j d_j C^a C_a^i``.

    Evaluated as written at any regular state; no projection onto C is applied.
    """
    qdot = as_config(s.qdot, sys.n)
    p = _pieces(sys, ic, s)
    ginv = linalg.inverse(p.g, "metric")
    dqdot = (ginv - _projector(p)) @ p.lvec - _lowered_gradients(p).T @ (p.dc @ qdot)
    return DFieldValue(qdot.copy(), dqdot)


def d_vector_field(sys, ic):
    n = sys.n

    def field(y):
        return d_field(sys, ic, VelState.from_vector(y, n)).vector()

    return field


def tangency_residual(sys, ic, s):
    """``qdot^i d_i C^a + D^i C^a_i``; vanishes on C when D is tangent to it."""
    qdot = as_config(s.qdot, sys.n)
    p = _pieces(sys, ic, s)
    return p.dc @ qdot + p.cdot @ d_field(sys, ic, s).dqdot


def newton_balance_residual(sys, ic, s):
    """``D^i - (g^{ij} L_j + R^i)``: the field against free acceleration plus reaction."""
    q = as_config(s.q, sys.n)
    p = _pieces(sys, ic, s)
    free_acc = linalg.solve(metric_at(sys, q), p.lvec, "metric")
    return d_field(sys, ic, s).dqdot - free_acc - reactive_force(sys, ic, s).r_contravariant
