"""Kinematical constraints in parametric (qdot = psi(q, z)) and implicit (C(q, qdot) = 0) form."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import linalg as sla

from . import linalg
from .errors import DimensionMismatch, InvalidParameter, NotLinear, RankDeficient, SingularMatrix
from .model import _evaluate, as_config, fd_jacobian

RANK_RTOL = 1e-10


@dataclass(frozen=True)
class ParametricConstraint:
    """Constraint submanifold given by ``qdot^i = psi^i(q, z)`` with ``m < n`` parameters.

    ``psi_dz(q, z)`` is the n x m matrix ``d psi^i / d z^alpha`` and
    ``psi_dq(q, z)`` the n x n matrix ``d psi^i / d q^j``; both fall back to
    finite differences when omitted.
    """

    n: int
    m: int
    psi: Callable
    psi_dz: Optional[Callable] = None
    psi_dq: Optional[Callable] = None
    linear_in_z: bool = False
    free_indices: Optional[Tuple[int, ...]] = None
    name: str = ""

    def __post_init__(self):
        if not 0 < self.m < self.n:
            raise InvalidParameter(f"need 0 < m < n, got m={self.m}, n={self.n}")


@dataclass(frozen=True)
class ImplicitConstraint:
    """Constraint submanifold given by ``r = n - m`` equations ``C^a(q, qdot) = 0``.

    ``c_dqdot`` returns the r x n matrix ``C^a_i = dC^a / dqdot^i`` and
    ``c_dq`` the r x n matrix ``d_i C^a``; finite differences otherwise.
    """

    n: int
    r: int
    c: Callable
    c_dqdot: Optional[Callable] = None
    c_dq: Optional[Callable] = None
    linear_in_qdot: bool = False
    name: str = ""

    def __post_init__(self):
        if not 0 < self.r < self.n:
            raise InvalidParameter(f"need 0 < r < n, got r={self.r}, n={self.n}")


@dataclass(frozen=True)
class RankReport:
    matrix_shape: Tuple[int, int]
    numerical_rank: int
    smallest_retained_singular_value: float
    required_rank: int
    regular: bool


# -- evaluation helpers -------------------------------------------------------


def psi_at(pc, q, z):
    out = _evaluate(pc.psi, as_config(q, pc.n), as_config(z, pc.m))
    if out.shape != (pc.n,):
        raise DimensionMismatch(f"psi returned shape {out.shape}, expected {(pc.n,)}")
    return out


def psi_dz_at(pc, q, z):
    q = as_config(q, pc.n)
    z = as_config(z, pc.m)
    if pc.psi_dz is not None:
        out = _evaluate(pc.psi_dz, q, z)
    else:
        out = fd_jacobian(lambda zz: psi_at(pc, q, zz), z)
    if out.shape != (pc.n, pc.m):
        raise DimensionMismatch(f"psi_dz returned shape {out.shape}, expected {(pc.n, pc.m)}")
    return out


def psi_dq_at(pc, q, z):
    q = as_config(q, pc.n)
    z = as_config(z, pc.m)
    if pc.psi_dq is not None:
        out = _evaluate(pc.psi_dq, q, z)
    else:
        out = fd_jacobian(lambda qq: psi_at(pc, qq, z), q)
    if out.shape != (pc.n, pc.n):
        raise DimensionMismatch(f"psi_dq returned shape {out.shape}, expected {(pc.n, pc.n)}")
    return out


def c_at(ic, q, qdot):
    out = np.atleast_1d(_evaluate(ic.c, as_config(q, ic.n), as_config(qdot, ic.n)))
    if out.shape != (ic.r,):
        raise DimensionMismatch(f"C returned shape {out.shape}, expected {(ic.r,)}")
    return out


def c_dqdot_at(ic, q, qdot):
    q = as_config(q, ic.n)
    qdot = as_config(qdot, ic.n)
    if ic.c_dqdot is not None:
        out = _evaluate(ic.c_dqdot, q, qdot)
    else:
        out = fd_jacobian(lambda v: c_at(ic, q, v), qdot)
    out = np.atleast_2d(out)
    if out.shape != (ic.r, ic.n):
        raise DimensionMismatch(f"C_dqdot returned shape {out.shape}, expected {(ic.r, ic.n)}")
    return out


def c_dq_at(ic, q, qdot):
    q = as_config(q, ic.n)
    qdot = as_config(qdot, ic.n)
    if ic.c_dq is not None:
        out = _evaluate(ic.c_dq, q, qdot)
    else:
        out = fd_jacobian(lambda x: c_at(ic, x, qdot), q)
    out = np.atleast_2d(out)
    if out.shape != (ic.r, ic.n):
        raise DimensionMismatch(f"C_dq returned shape {out.shape}, expected {(ic.r, ic.n)}")
    return out


def jacobian_errors(constraint, q, aux):
    """Max relative gap between analytic Jacobians and finite differences (0 if none supplied)."""
    q = np.asarray(q, dtype=float)
    aux = np.asarray(aux, dtype=float)
    errs = [0.0]

    def rel(a, b):
        return float(np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(b))))

    if isinstance(constraint, ParametricConstraint):
        f = lambda qq, zz: psi_at(constraint, qq, zz)
        pairs = [(constraint.psi_dz, 1), (constraint.psi_dq, 0)]
    else:
        f = lambda qq, vv: c_at(constraint, qq, vv)
        pairs = [(constraint.c_dqdot, 1), (constraint.c_dq, 0)]
    for analytic, wrt in pairs:
        if analytic is None:
            continue
        if wrt == 1:
            numeric = fd_jacobian(lambda x: f(q, x), aux)
        else:
            numeric = fd_jacobian(lambda x: f(x, aux), q)
        errs.append(rel(np.atleast_2d(_evaluate(analytic, q, aux)), np.atleast_2d(numeric)))
    return max(errs)


# -- regularity ---------------------------------------------------------------


def rank_report(mat, required):
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    s = np.linalg.svd(mat, compute_uv=False)
    smax = s[0] if s.size else 0.0
    tol = smax * max(mat.shape) * RANK_RTOL
    kept = s[s > tol] if smax > 0 else s[:0]
    rank = int(kept.size)
    smallest = float(kept[-1]) if rank else 0.0
    return RankReport(mat.shape, rank, smallest, required, rank == required)


def check_regular_parametric(pc, q, z):
    """Rank of ``[psi^i_alpha]``; regular when it equals m."""
    return rank_report(psi_dz_at(pc, q, z), pc.m)


def check_regular_implicit(ic, s):
    """Rank of ``[C^a_i]``; regular when it equals r."""
    return rank_report(c_dqdot_at(ic, s.q, s.qdot), ic.r)


def compatibility_residuals(pc, ic, q, z):
    """Residuals of the identities linking the two representations.

    Returns ``C(q, psi)``, ``C^a_i psi^i_alpha`` and ``d_i C^a + C^a_j psi^j_i``.
    """
    if pc.n != ic.n or pc.m + ic.r != pc.n:
        raise DimensionMismatch(
            f"incompatible representations: n={pc.n}/{ic.n}, m+r={pc.m}+{ic.r}"
        )
    q = as_config(q, pc.n)
    qdot = psi_at(pc, q, z)
    cq = c_dqdot_at(ic, q, qdot)
    return (
        c_at(ic, q, qdot),
        cq @ psi_dz_at(pc, q, z),
        c_dq_at(ic, q, qdot) + cq @ psi_dq_at(pc, q, z),
    )


# -- parametrization of linear constraints --------------------------------------


def parametrize_linear(ic, q_probe, free=None):
    """Parametrize a linear (or affine) implicit constraint by m of the velocities.

    The velocities solved for are picked by column-pivoted QR of ``C^a_i`` at
    ``q_probe`` unless ``free`` names the m velocity indices to use as
    parameters. The choice is frozen: if the solved-for block becomes singular
    at another configuration, evaluating the returned ``psi`` raises
    RankDeficient.
    """
    if not ic.linear_in_qdot:
        raise NotLinear(f"constraint {ic.name or ''!s} is not flagged linear in the velocities")
    n, r = ic.n, ic.r
    m = n - r
    q_probe = as_config(q_probe, n)
    zero = np.zeros(n)
    cmat = c_dqdot_at(ic, q_probe, zero)
    report = rank_report(cmat, r)
    if not report.regular:
        raise RankDeficient(f"C^a_i has rank {report.numerical_rank} < {r} at the probe")

    if free is None:
        _, _, piv = sla.qr(cmat, pivoting=True, mode="economic")
        dep = np.sort(piv[:r])
        free_idx = np.array(sorted(set(range(n)) - set(dep.tolist())), dtype=int)
    else:
        free_idx = np.array(sorted(int(i) for i in free), dtype=int)
        if free_idx.size != m or len(set(free_idx.tolist())) != m:
            raise DimensionMismatch(f"need {m} distinct free velocity indices, got {free!r}")
        dep = np.array(sorted(set(range(n)) - set(free_idx.tolist())), dtype=int)
        if not rank_report(cmat[:, dep], r).regular:
            raise RankDeficient(f"velocities {dep.tolist()} cannot be solved for at the probe")

    homogeneous = bool(np.allclose(c_at(ic, q_probe, zero), 0.0, atol=1e-14))

    def dependent_block(q):
        cm = c_dqdot_at(ic, q, zero)
        return cm, cm[:, dep]

    def psi(q, z):
        cm, cdep = dependent_block(q)
        rhs = -c_at(ic, q, zero) - cm[:, free_idx] @ z
        try:
            vdep = linalg.solve(cdep, rhs, "dependent velocity block")
        except SingularMatrix as exc:
            raise RankDeficient(str(exc)) from exc
        out = np.empty(n)
        out[free_idx] = z
        out[dep] = vdep
        return out

    def psi_dz(q, z):
        cm, cdep = dependent_block(q)
        try:
            sol = linalg.solve(cdep, -cm[:, free_idx], "dependent velocity block")
        except SingularMatrix as exc:
            raise RankDeficient(str(exc)) from exc
        out = np.zeros((n, m))
        out[free_idx, np.arange(m)] = 1.0
        out[dep, :] = sol
        return out

    # differentiate C(q, psi(q, z)) = 0 along q; parameter rows do not depend on q
    def psi_dq(q, z):
        _, cdep = dependent_block(q)
        out = np.zeros((n, n))
        out[dep, :] = linalg.solve(cdep, -c_dq_at(ic, q, psi(q, z)), "dependent velocity block")
        return out

    return ParametricConstraint(
        n=n,
        m=m,
        psi=psi,
        psi_dz=psi_dz,
        psi_dq=psi_dq if ic.c_dq is not None else None,
        linear_in_z=homogeneous,
        free_indices=tuple(int(i) for i in free_idx),
        name=f"{ic.name}-parametrized" if ic.name else "parametrized",
    )
