"""Small dense solves with explicit conditioning checks."""
import numpy as np
from scipy import linalg

from .errors import SingularMatrix

RCOND_MIN = 1e-12


def rcond(a):
    """Reciprocal 2-norm condition number (0 for singular or non-finite input)."""
    a = np.atleast_2d(a)
    if not np.all(np.isfinite(a)):
        return 0.0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0.0:
        return 0.0
    return float(s[-1] / s[0])


def _check(a, what):
    rc = rcond(a)
    if rc < RCOND_MIN:
        raise SingularMatrix(f"{what} is singular or ill-conditioned (rcond={rc:.3e})")


def solve(a, b, what="matrix"):
    """Solve ``a x = b`` by LU with partial pivoting."""
    _check(a, what)
    return linalg.solve(a, b)


def spd_solve(a, b, what="matrix"):
    """Solve a symmetric positive-definite system by Cholesky.

    Falls back to pivoted LU when the Cholesky factorization fails; either
    way a reciprocal condition below ``RCOND_MIN`` raises SingularMatrix.
    """
    _check(a, what)
    try:
        c = linalg.cho_factor(a, check_finite=False)
    except linalg.LinAlgError:
        return linalg.solve(a, b)
    return linalg.cho_solve(c, b, check_finite=False)


def inverse(a, what="matrix"):
    return solve(a, np.eye(a.shape[0]), what)


def is_positive_definite(a):
    try:
        linalg.cholesky(a, lower=True)
    except linalg.LinAlgError:
        return False
    return True
