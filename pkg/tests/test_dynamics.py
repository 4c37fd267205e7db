"""Continuous models, discretization, and observability tools."""

import numpy as np
import pytest

from lcvx.dynamics import (
    DiscreteDynamics,
    LtiSystem,
    observability_matrix,
    observability_rank,
    pbh_observable,
    rank_tolerance,
    skew,
    station_dynamics,
    unobservable_subspace,
    zoh_discretize,
)

from .conftest import double_integrator_1d


def test_skew_matches_cross_product():
    rng = np.random.default_rng(0)
    for _ in range(20):
        v, w = rng.standard_normal(3), rng.standard_normal(3)
        assert np.allclose(skew(v) @ w, np.cross(v, w), atol=1e-14)


def test_station_dynamics_block_structure():
    omega = np.array([0.0, 0.0, np.pi / 30.0])
    sys = station_dynamics(omega)
    S = skew(omega)
    assert sys.n == 6 and sys.m == 3
    assert np.array_equal(sys.A[:3, :3], np.zeros((3, 3)))
    assert np.array_equal(sys.A[:3, 3:], np.eye(3))
    assert np.allclose(sys.A[3:, :3], -S @ S, atol=1e-15)
    assert np.allclose(sys.A[3:, 3:], -2.0 * S, atol=1e-15)
    assert np.array_equal(sys.B[:3], np.zeros((3, 3)))
    assert np.array_equal(sys.B[3:], np.eye(3))


def test_lti_validation():
    with pytest.raises(ValueError):
        LtiSystem(A=np.ones((2, 3)), B=np.ones((2, 1)))
    with pytest.raises(ValueError):
        LtiSystem(A=np.zeros((2, 2)), B=np.ones((3, 1)))
    with pytest.raises(ValueError):
        LtiSystem(A=np.full((2, 2), np.nan), B=np.ones((2, 1)))


def test_zoh_double_integrator_analytic():
    # Ad = [[1, dt], [0, 1]], Bd = [[dt^2/2], [dt]] for the double integrator.
    sys = double_integrator_1d()
    dt = 0.37
    disc = zoh_discretize(sys, dt)
    assert isinstance(disc, DiscreteDynamics)
    assert np.allclose(disc.Ad, [[1.0, dt], [0.0, 1.0]], atol=1e-14)
    assert np.allclose(disc.Bd, [[dt * dt / 2.0], [dt]], atol=1e-14)
    assert np.allclose(disc.wd, 0.0, atol=1e-15)


def test_zoh_constant_disturbance():
    # With w = (0, g) the hold integrates to (g dt^2/2, g dt).
    g = -1.62
    sys = LtiSystem(
        A=np.array([[0.0, 1.0], [0.0, 0.0]]),
        B=np.array([[0.0], [1.0]]),
        w=np.array([0.0, g]),
    )
    dt = 0.25
    disc = zoh_discretize(sys, dt)
    assert np.allclose(disc.wd, [g * dt * dt / 2.0, g * dt], atol=1e-14)


def test_zoh_semigroup_property():
    # Stepping dt twice equals stepping 2 dt once, to 1e-10.
    rng = np.random.default_rng(7)
    for _ in range(10):
        n, m = 4, 2
        sys = LtiSystem(
            A=rng.standard_normal((n, n)) * 0.5,
            B=rng.standard_normal((n, m)),
            w=rng.standard_normal(n) * 0.1,
        )
        dt = 0.3
        d1 = zoh_discretize(sys, dt)
        d2 = zoh_discretize(sys, 2.0 * dt)
        assert np.allclose(d1.Ad @ d1.Ad, d2.Ad, atol=1e-10)
        # A held input passes through both sub-steps.
        assert np.allclose(d1.Ad @ d1.Bd + d1.Bd, d2.Bd, atol=1e-10)
        assert np.allclose(d1.Ad @ d1.wd + d1.wd, d2.wd, atol=1e-10)


def test_zoh_station_matches_taylor_oracle():
    """Station dynamics at one turn per minute, step 0.45 s, against a 30-term
    Taylor sum of the matrix exponential. With norm(A dt) below one half the
    truncation error is far inside the 1e-10 tolerance."""
    sys = station_dynamics(np.array([0.0, 0.0, np.pi / 30.0]))
    dt = 0.45
    disc = zoh_discretize(sys, dt)
    n = sys.n
    term = np.eye(n)
    expm = np.eye(n)
    for k in range(1, 30):
        term = term @ (sys.A * dt) / k
        expm = expm + term
    assert np.allclose(disc.Ad, expm, atol=1e-10)
    # Input integral by the same series: sum of A^(k-1) dt^k / k! applied to B.
    acc = np.eye(n) * dt
    integral = np.eye(n) * dt
    for k in range(2, 30):
        acc = acc @ (sys.A * dt) / k
        integral = integral + acc
    assert np.allclose(disc.Bd, integral @ sys.B, atol=1e-10)


def test_zoh_rejects_bad_steps():
    sys = double_integrator_1d()
    with pytest.raises(ValueError):
        zoh_discretize(sys, 0.0)
    with pytest.raises(ValueError):
        zoh_discretize(sys, -1.0)


def test_observability_of_double_integrator():
    sys = double_integrator_1d()
    # Velocity measurements observe the adjoint pair; position does not
    # enter B, so the pair (A', B') here is observable.
    rank = observability_rank(-sys.A.T, sys.B.T)
    assert rank == 2
    assert pbh_observable(-sys.A.T, sys.B.T)


def test_unobservable_subspace_is_invariant():
    # H F^k V = 0 for every power when V spans the unobservable subspace.
    F = np.diag([1.0, 2.0, 3.0])
    H = np.array([[1.0, 0.0, 0.0]])
    V = unobservable_subspace(F, H)
    assert V.shape == (3, 2)
    for k in range(3):
        assert np.max(np.abs(H @ np.linalg.matrix_power(F, k) @ V)) <= 1e-9
    # Orthonormal columns.
    assert np.allclose(V.T @ V, np.eye(2), atol=1e-12)


def test_observability_matrix_shape():
    F = np.zeros((3, 3))
    H = np.ones((2, 3))
    O = observability_matrix(F, H)
    assert O.shape == (6, 3)


def test_rank_tolerance_scales():
    M = np.eye(4)
    tol = rank_tolerance(M, 1.0)
    assert tol == 4 * np.finfo(float).eps
    assert rank_tolerance(M, 100.0) == 100.0 * tol


def test_pbh_matches_kalman_on_structured_cases():
    # Jordan block with a repeated eigenvalue: observing the chain top sees
    # everything, observing the chain bottom misses the top state.
    F = np.array([[2.0, 1.0], [0.0, 2.0]])
    assert pbh_observable(F, np.array([[1.0, 0.0]]))
    assert not pbh_observable(F, np.array([[0.0, 1.0]]))
    assert observability_rank(F, np.array([[0.0, 1.0]])) == 1
    H_blind = np.array([[0.0, 0.0]])
    assert observability_rank(F, H_blind) == 0
    assert not pbh_observable(F, H_blind)
