import numpy as np
import pytest
from numpy.testing import assert_allclose

from nonholo import systems
from nonholo.constraint import (
    ImplicitConstraint,
    ParametricConstraint,
    c_at,
    check_regular_implicit,
    check_regular_parametric,
    compatibility_residuals,
    jacobian_errors,
    parametrize_linear,
    psi_at,
    psi_dq_at,
    psi_dz_at,
    rank_report,
)
from nonholo.errors import DimensionMismatch, InvalidParameter, NotLinear, RankDeficient
from nonholo.model import VelState


def test_rank_report():
    rep = rank_report(np.array([[1.0, 0.0], [0.0, 1e-14]]), 2)
    assert rep.numerical_rank == 1 and not rep.regular
    rep = rank_report(np.eye(3)[:2], 2)
    assert rep.regular and rep.smallest_retained_singular_value == pytest.approx(1.0)


def test_parallel_points_irregular_at_rest():
    b = systems.make_parallel_points()
    rep = check_regular_implicit(b.implicit, VelState(np.zeros(4), np.zeros(4)))
    assert not rep.regular and rep.numerical_rank == 0
    rep = check_regular_parametric(b.parametric, np.zeros(4), [0.0, 0.0, 0.4])
    assert not rep.regular and rep.numerical_rank == 2


def test_compatibility_identities_hold(builtin, rng):
    for s in [builtin.default_state] + systems.sample_states(builtin, rng, 25):
        for res in compatibility_residuals(builtin.parametric, builtin.implicit, s.q, s.z):
            assert np.max(np.abs(res)) < 1e-12


def test_compatibility_rejects_mismatched_pair():
    skate = systems.make_skate()
    disc = systems.make_vertical_disc()
    with pytest.raises(DimensionMismatch):
        compatibility_residuals(skate.parametric, disc.implicit, np.zeros(3), np.ones(2))


def test_analytic_jacobians_agree_with_finite_differences(builtin, rng):
    for s in systems.sample_states(builtin, rng, 10):
        assert jacobian_errors(builtin.parametric, s.q, s.z) < 1e-7
        assert jacobian_errors(builtin.implicit, s.q, psi_at(builtin.parametric, s.q, s.z)) < 1e-7


def test_shape_errors():
    pc = ParametricConstraint(3, 2, lambda q, z: np.zeros(2))
    with pytest.raises(DimensionMismatch):
        psi_at(pc, np.zeros(3), np.zeros(2))
    with pytest.raises(InvalidParameter):
        ParametricConstraint(2, 2, lambda q, z: z)
    with pytest.raises(InvalidParameter):
        ImplicitConstraint(2, 0, lambda q, v: v)


def test_parametrize_skate_constraint():
    ic = systems.make_skate().implicit
    pc = parametrize_linear(ic, np.array([0.0, 0.0, 0.3]))
    assert pc.m == 2 and pc.linear_in_z
    q = np.array([0.5, -0.2, 0.3])
    z = np.array([0.7, -1.1])
    assert_allclose(c_at(ic, q, psi_at(pc, q, z)), 0.0, atol=1e-14)
    for res in compatibility_residuals(pc, ic, q, z):
        assert np.max(np.abs(res)) < 1e-12
    assert jacobian_errors(pc, q, z) < 1e-7


def test_parametrize_full_coaxial_constraint_freezes_separation():
    R = 0.8
    ic = systems.coaxial_unreduced_constraint(R=R)
    q = np.array([0.1, 0.2, 0.3, 0.4, 0.5, 1.3])
    pc = parametrize_linear(ic, q, free=(2, 3))
    assert pc.free_indices == (2, 3)
    z = np.array([0.9, -0.4])
    v = psi_at(pc, q, z)
    assert v[5] == pytest.approx(0.0, abs=1e-14)  # adot = 0
    assert v[4] == pytest.approx(R / q[5] * (z[1] - z[0]))
    assert_allclose(v[:2], R * z[0] * np.array([np.cos(q[4]), np.sin(q[4])]))


def test_parametrize_rejects_nonlinear_and_deficient():
    with pytest.raises(NotLinear):
        parametrize_linear(systems.make_parallel_points().implicit, np.zeros(4))
    degenerate = ImplicitConstraint(
        3, 1, lambda q, v: np.array([q[0] * v[0]]), lambda q, v: np.array([[q[0], 0.0, 0.0]]), linear_in_qdot=True
    )
    with pytest.raises(RankDeficient):
        parametrize_linear(degenerate, np.zeros(3))
    pc = parametrize_linear(degenerate, np.ones(3))
    # the frozen choice of solved-for velocity fails where its coefficient vanishes
    with pytest.raises(RankDeficient):
        psi_at(pc, np.zeros(3), np.ones(2))


def test_parametrize_rejects_bad_free_choice():
    ic = systems.make_skate().implicit
    with pytest.raises(DimensionMismatch):
        parametrize_linear(ic, np.zeros(3), free=(0,))
    # at theta = 0 the constraint does not involve xdot, so xdot cannot be solved for
    with pytest.raises(RankDeficient):
        parametrize_linear(ic, np.zeros(3), free=(1, 2))


def test_affine_constraint_parametrization():
    # xdot + ydot = 1 (affine)
    ic = ImplicitConstraint(2, 1, lambda q, v: np.array([v[0] + v[1] - 1.0]), linear_in_qdot=True)
    pc = parametrize_linear(ic, np.zeros(2))
    assert not pc.linear_in_z
    v = psi_at(pc, np.zeros(2), [0.25])
    assert v.sum() == pytest.approx(1.0)
    assert psi_dz_at(pc, np.zeros(2), [0.25]).shape == (2, 1)
    assert psi_dq_at(pc, np.zeros(2), [0.25]).shape == (2, 2)
