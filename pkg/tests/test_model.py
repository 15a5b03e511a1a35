import numpy as np
import pytest
import sympy as sp
from numpy.testing import assert_allclose

from nonholo.errors import DimensionMismatch, EvaluationFailure, InvalidParameter
from nonholo.model import (
    SystemSpec,
    VelState,
    check_metric,
    christoffel_lower,
    christoffel_upper,
    fd_jacobian,
    free_force_term,
    kinetic_energy,
    metric_derivative_at,
    metric_derivative_error,
)


def _symbolic_system(g_expr, syms):
    """Numeric SystemSpec plus a sympy oracle for Gamma_ijk of the same metric."""
    n = len(syms)
    g_fn = sp.lambdify([syms], g_expr, "numpy")
    dg_expr = [[[sp.diff(g_expr[i, j], syms[k]) for k in range(n)] for j in range(n)] for i in range(n)]
    dg_fn = sp.lambdify([syms], dg_expr, "numpy")
    gam = [
        [
            [
                sp.Rational(1, 2)
                * (sp.diff(g_expr[j, k], syms[i]) + sp.diff(g_expr[k, i], syms[j]) - sp.diff(g_expr[i, j], syms[k]))
                for k in range(n)
            ]
            for j in range(n)
        ]
        for i in range(n)
    ]
    gam_fn = sp.lambdify([syms], gam, "numpy")
    spec = SystemSpec(n, lambda q: np.array(g_fn(q), dtype=float), lambda q, v: np.zeros(n),
                      lambda q: np.array(dg_fn(q), dtype=float))
    return spec, lambda q: np.array(gam_fn(q), dtype=float)


def _coaxial_metric():
    x, y, t1, t2, psi = syms = sp.symbols("x y t1 t2 psi")
    m, a, B, A = 1.3, 0.7, 0.4, 0.9
    g = sp.Matrix(
        [
            [2 * m, 0, 0, 0, m * a * sp.cos(psi)],
            [0, 2 * m, 0, 0, m * a * sp.sin(psi)],
            [0, 0, A, 0, 0],
            [0, 0, 0, A, 0],
            [m * a * sp.cos(psi), m * a * sp.sin(psi), 0, 0, m * a**2 + 2 * B],
        ]
    )
    return g, list(syms)


def _arm_metric():
    # two-link planar arm, configuration-dependent in q2
    q1, q2 = syms = sp.symbols("q1 q2")
    c = sp.cos(q2)
    g = sp.Matrix([[3 + 2 * c, 1 + c], [1 + c, 1]])
    return g, list(syms)


def _warped_metric():
    u, v, w = syms = sp.symbols("u v w")
    g = sp.Matrix([[1 + u**2, u * v, 0], [u * v, 2 + sp.sin(w), v], [0, v, 3 + v**2]])
    return g, list(syms)


@pytest.mark.parametrize("make", [_coaxial_metric, _arm_metric, _warped_metric])
def test_christoffel_matches_symbolic_oracle(make, rng):
    g, syms = make()
    spec, oracle = _symbolic_system(g, syms)
    for _ in range(10):
        q = rng.uniform(-1, 1, len(syms))
        assert_allclose(christoffel_lower(spec, q), oracle(q), atol=1e-13)
        # symmetry in the first two indices
        gam = christoffel_lower(spec, q)
        assert_allclose(gam, np.transpose(gam, (1, 0, 2)), atol=1e-15)


def test_christoffel_fd_fallback_matches_analytic(rng):
    g, syms = _warped_metric()
    spec, oracle = _symbolic_system(g, syms)
    no_deriv = SystemSpec(spec.n, spec.metric, spec.forces)
    q = rng.uniform(-1, 1, 3)
    assert_allclose(christoffel_lower(no_deriv, q), oracle(q), atol=1e-8)
    assert metric_derivative_error(spec, q) < 1e-8


def test_christoffel_upper_raises_index(rng):
    g, syms = _arm_metric()
    spec, oracle = _symbolic_system(g, syms)
    q = rng.uniform(-1, 1, 2)
    up = christoffel_upper(spec, q)
    gq = spec.metric(q)
    assert_allclose(np.einsum("il,lhk->hki", gq, up), oracle(q), atol=1e-13)


def test_flat_metric_has_no_christoffel_symbols():
    spec = SystemSpec(3, lambda q: np.eye(3), lambda q, v: np.zeros(3))
    assert_allclose(christoffel_lower(spec, np.array([0.3, -1.0, 2.0])), 0.0, atol=1e-12)


def test_free_force_term_is_forces_at_rest():
    g, syms = _arm_metric()
    spec, _ = _symbolic_system(g, syms)
    spec = SystemSpec(2, spec.metric, lambda q, v: np.array([1.5, -0.5]), spec.metric_derivative)
    assert_allclose(free_force_term(spec, VelState([0.2, 0.4], [0.0, 0.0])), [1.5, -0.5])


def test_free_force_term_subtracts_quadratic_term(rng):
    g, syms = _arm_metric()
    spec, oracle = _symbolic_system(g, syms)
    q, v = rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2)
    expected = -np.einsum("hki,h,k->i", oracle(q), v, v)
    assert_allclose(free_force_term(spec, VelState(q, v)), expected, atol=1e-13)


def test_kinetic_energy():
    spec = SystemSpec(2, lambda q: np.diag([2.0, 4.0]), lambda q, v: np.zeros(2))
    assert kinetic_energy(spec, VelState([0, 0], [1.0, 0.5])) == pytest.approx(1.5)


def test_fd_jacobian_of_tensor_output():
    f = lambda x: np.outer(x, x)
    x = np.array([1.0, 2.0])
    jac = fd_jacobian(f, x)
    assert jac.shape == (2, 2, 2)
    assert_allclose(jac[:, :, 0], [[2.0, 2.0], [2.0, 0.0]], atol=1e-8)


def test_check_metric_rejects_bad_metrics():
    asym = SystemSpec(2, lambda q: np.array([[1.0, 0.5], [0.0, 1.0]]), lambda q, v: np.zeros(2))
    with pytest.raises(InvalidParameter):
        check_metric(asym, np.zeros(2))
    indefinite = SystemSpec(2, lambda q: np.diag([1.0, -1.0]), lambda q, v: np.zeros(2))
    with pytest.raises(InvalidParameter):
        check_metric(indefinite, np.zeros(2))
    good = SystemSpec(2, lambda q: np.diag([1.0, 2.0]), lambda q, v: np.zeros(2))
    assert_allclose(check_metric(good, np.zeros(2)), np.diag([1.0, 2.0]))


def test_evaluation_failures_are_wrapped():
    nan_metric = SystemSpec(2, lambda q: np.full((2, 2), np.nan), lambda q, v: np.zeros(2))
    with pytest.raises(EvaluationFailure):
        christoffel_lower(nan_metric, np.zeros(2))

    def broken(q):
        raise ZeroDivisionError("boom")

    with pytest.raises(EvaluationFailure):
        metric_derivative_at(SystemSpec(2, broken, lambda q, v: np.zeros(2)), np.zeros(2))


def test_dimension_checks():
    spec = SystemSpec(2, lambda q: np.eye(3), lambda q, v: np.zeros(2))
    with pytest.raises(DimensionMismatch):
        kinetic_energy(spec, VelState([0, 0], [1, 1]))
    with pytest.raises(DimensionMismatch):
        VelState([0, 0], [1, 1, 1])
    with pytest.raises(InvalidParameter):
        SystemSpec(0, lambda q: np.eye(1), lambda q, v: np.zeros(1))


def test_velstate_vector_round_trip():
    s = VelState([1, 2], [3, 4])
    back = VelState.from_vector(s.vector(), 2)
    assert_allclose(back.q, [1, 2])
    assert_allclose(back.qdot, [3, 4])
