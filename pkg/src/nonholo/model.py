"""Mechanical system definition and the metric-geometry kernel.

Index conventions follow the usual tensor layout:

* ``metric_derivative(q)[i, j, k]`` is the derivative of ``g_ij`` along ``q^k``.
* ``christoffel_lower(sys, q)[i, j, k]`` is ``Gamma_ijk``, symmetric in ``(i, j)``,
  with the lowered index last.
* ``christoffel_upper(sys, q)[i, h, k]`` is ``Gamma^i_hk``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import linalg
from .errors import DimensionMismatch, EvaluationFailure, InvalidParameter

FD_SCALE = np.finfo(float).eps ** (1.0 / 3.0)

Evaluator = Callable[..., np.ndarray]


@dataclass(frozen=True)
class SystemSpec:
    """A holonomic mechanical system: kinetic-energy metric plus active forces.

    ``metric(q)`` returns the symmetric positive-definite matrix ``g_ij``;
    ``forces(q, qdot)`` returns the covariant Lagrangian active forces ``A_i``.
    ``metric_derivative`` is optional; without it derivatives of the metric
    are taken by central finite differences.
    """

    n: int
    metric: Evaluator
    forces: Evaluator
    metric_derivative: Optional[Evaluator] = None
    name: str = ""

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InvalidParameter(f"n must be a positive integer, got {self.n!r}")


@dataclass(frozen=True)
class VelState:
    """A kinematical state ``(q, qdot)`` in the tangent bundle."""

    q: np.ndarray
    qdot: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float).reshape(-1)
        qdot = np.array(self.qdot, dtype=float).reshape(-1)
        if q.shape != qdot.shape:
            raise DimensionMismatch(f"q has length {q.size} but qdot has length {qdot.size}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "qdot", qdot)

    def vector(self):
        return np.concatenate([self.q, self.qdot])

    @classmethod
    def from_vector(cls, y, n):
        y = np.asarray(y, dtype=float)
        return cls(y[:n], y[n:])


def as_config(q, n=None):
    q = np.array(q, dtype=float).reshape(-1)
    if n is not None and q.size != n:
        raise DimensionMismatch(f"expected a configuration of length {n}, got {q.size}")
    return q


def _evaluate(f, *args):
    try:
        out = np.asarray(f(*args), dtype=float)
    except (ArithmeticError, ValueError, TypeError) as exc:
        raise EvaluationFailure(f"evaluator failed at {args!r}: {exc}") from exc
    if not np.all(np.isfinite(out)):
        raise EvaluationFailure(f"evaluator returned non-finite values at {args!r}")
    return out


def fd_jacobian(f, x, scale=FD_SCALE):
    """Central-difference Jacobian of ``f`` at ``x``.

    The step for component k is ``scale * max(1, |x_k|)``. ``f`` may return an
    array of any shape; the result has shape ``f(x).shape + (len(x),)``.
    """
    x = np.array(x, dtype=float).reshape(-1)
    f0 = _evaluate(f, x)
    jac = np.empty(f0.shape + (x.size,))
    for k in range(x.size):
        h = scale * max(1.0, abs(x[k]))
        xp = x.copy()
        xm = x.copy()
        xp[k] += h
        xm[k] -= h
        jac[..., k] = (_evaluate(f, xp) - _evaluate(f, xm)) / (2.0 * h)
    return jac


def metric_at(sys, q):
    q = as_config(q, sys.n)
    g = _evaluate(sys.metric, q)
    if g.shape != (sys.n, sys.n):
        raise DimensionMismatch(f"metric returned shape {g.shape}, expected {(sys.n, sys.n)}")
    return g


def forces_at(sys, q, qdot):
    a = _evaluate(sys.forces, as_config(q, sys.n), as_config(qdot, sys.n))
    if a.shape != (sys.n,):
        raise DimensionMismatch(f"forces returned shape {a.shape}, expected {(sys.n,)}")
    return a


def metric_derivative_at(sys, q):
    """``dg[i, j, k] = d g_ij / d q^k``, analytic when available."""
    q = as_config(q, sys.n)
    if sys.metric_derivative is not None:
        dg = _evaluate(sys.metric_derivative, q)
        if dg.shape != (sys.n,) * 3:
            raise DimensionMismatch(f"metric_derivative returned shape {dg.shape}")
        return dg
    return fd_jacobian(lambda x: metric_at(sys, x), q)


def inverse_metric(sys, q):
    return linalg.inverse(metric_at(sys, q), "metric")


def check_metric(sys, q, rtol=1e-12):
    """Raise InvalidParameter unless the metric at ``q`` is symmetric positive-definite."""
    g = metric_at(sys, q)
    asym = np.max(np.abs(g - g.T))
    if asym > rtol * max(1.0, np.max(np.abs(g))):
        raise InvalidParameter(f"metric is not symmetric at q={q} (max asymmetry {asym:.3e})")
    if not linalg.is_positive_definite(g):
        raise InvalidParameter(f"metric is not positive-definite at q={q}")
    return g


def metric_derivative_error(sys, q):
    """Relative discrepancy between the analytic and finite-difference metric derivative."""
    if sys.metric_derivative is None:
        return 0.0
    q = as_config(q, sys.n)
    analytic = _evaluate(sys.metric_derivative, q)
    numeric = fd_jacobian(lambda x: metric_at(sys, x), q)
    scale = max(1.0, np.max(np.abs(numeric)))
    return float(np.max(np.abs(analytic - numeric)) / scale)


def christoffel_lower(sys, q):
    """Christoffel symbols of the first kind, ``Gamma_ijk``."""
    dg = metric_derivative_at(sys, q)
    # d_i g_jk -> dg[j, k, i]
    d = np.transpose(dg, (2, 0, 1))
    # Gamma_ijk = 1/2 (d_i g_jk + d_j g_ki - d_k g_ij)
    return 0.5 * (d + np.transpose(d, (2, 0, 1)) - np.transpose(d, (1, 2, 0)))


def christoffel_upper(sys, q):
    """Christoffel symbols of the second kind, ``Gamma^i_hk``."""
    gam = christoffel_lower(sys, q)
    g = metric_at(sys, q)
    n = sys.n
    flat = gam.reshape(n * n, n).T  # [l, (h,k)]
    return linalg.solve(g, flat, "metric").reshape(n, n, n)


def quadratic_term(gamma_lower, v, w=None):
    """``Gamma_hki v^h w^k`` with the free index last."""
    w = v if w is None else w
    return np.einsum("hki,h,k->i", gamma_lower, v, w)


def kinetic_energy(sys, s):
    g = metric_at(sys, s.q)
    return 0.5 * float(s.qdot @ g @ s.qdot)


def free_force_term(sys, s):
    """``L_i = A_i(q, qdot) - Gamma_hki qdot^h qdot^k``."""
    a = forces_at(sys, s.q, s.qdot)
    if not np.any(s.qdot):
        return a
    return a - quadratic_term(christoffel_lower(sys, s.q), s.qdot)
