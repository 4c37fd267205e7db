"""Discrete transcription: exact matrix layout, packing, residual maps."""

import numpy as np
import pytest

import lcvx
from lcvx.transcription import transcribe

from .conftest import (
    double_integrator_1d,
    opposing_rays_1d,
    rest_to_rest_1d,
    small_impulse_spec,
)


def brake_spec():
    """One +1 ray, drive (1, -1) to the origin: small enough to assemble by hand."""
    term = lcvx.TerminalSpec.fixed_state([0.0, 0.0], lcvx.MinimumTimeCost())
    return lcvx.ProblemSpec(
        sys=double_integrator_1d(),
        cones=(lcvx.PointingCone.from_ray([1.0]),),
        rho1=0.5,
        rho2=2.0,
        K=1,
        x0=np.array([1.0, -1.0]),
        terminal=term,
    )


def test_variable_count_formula():
    spec = rest_to_rest_1d()
    for N in (2, 5, 17):
        tr = transcribe(spec, 6.0, N)
        n, m, M = 2, 1, 1
        assert tr.prog.num_vars == n * (N + 1) + N * M * (m + 2)


def test_quadratic_cost_adds_one_epigraph_variable():
    cost = lcvx.QuadraticTerminalCost(target=np.array([5.0, 0.0]))
    term = lcvx.TerminalSpec.free(2, cost)
    spec = lcvx.ProblemSpec(
        sys=double_integrator_1d(),
        cones=opposing_rays_1d(),
        rho1=0.3,
        rho2=1.0,
        K=1,
        x0=np.zeros(2),
        terminal=term,
    )
    tr = transcribe(spec, 4.0, 3)
    n, m, M, N = 2, 1, 2, 3
    assert tr.prog.num_vars == n * (N + 1) + N * M * (m + 2) + 1
    assert tr.epi_index == tr.prog.num_vars - 1


def test_four_node_instance_matches_hand_assembly():
    """Row-for-row oracle: every matrix entry of a tiny instance, by hand.

    n = 2, m = 1, one +1 ray input, rho = (0.5, 2), K = 1, x0 = (1, -1),
    both terminal states pinned to zero, t_f = 2, N = 4. The state scales are
    all one, the input scale is rho2 = 2.
    """
    spec = brake_spec()
    N, dt = 4, 0.5
    tr = transcribe(spec, 2.0, N)
    nz = 22
    assert tr.prog.num_vars == nz

    # Variable indices.
    def xcol(k, j):
        return 2 * k + j

    def ucol(k):
        return 10 + k

    def scol(k):
        return 14 + k

    def gcol(k):
        return 18 + k

    Ad = np.array([[1.0, dt], [0.0, 1.0]])
    Bd_s = np.array([dt * dt / 2.0, dt]) * 2.0

    Aeq = np.zeros((12, nz))
    beq = np.zeros(12)
    Aeq[0, xcol(0, 0)] = 1.0
    Aeq[1, xcol(0, 1)] = 1.0
    beq[0], beq[1] = 1.0, -1.0
    for k in range(N):
        r = 2 + 2 * k
        for j in range(2):
            Aeq[r + j, xcol(k + 1, j)] = 1.0
            Aeq[r + j, ucol(k)] = -Bd_s[j]
            for jj in range(2):
                Aeq[r + j, xcol(k, jj)] -= Ad[j, jj]
    Aeq[10, xcol(4, 0)] = 1.0
    Aeq[11, xcol(4, 1)] = 1.0

    assert tr.prog.Aeq.shape == (12, nz)
    assert np.allclose(tr.prog.Aeq.toarray(), Aeq, atol=1e-13)
    assert np.allclose(tr.prog.beq, beq, atol=1e-15)

    G = np.zeros((32, nz))
    h = np.zeros(32)
    for k in range(N):
        G[k, gcol(k)] = 0.25
        G[k, scol(k)] = -1.0
        G[4 + k, scol(k)] = 1.0
        G[4 + k, gcol(k)] = -1.0
        G[8 + k, gcol(k)] = -1.0
        G[12 + k, gcol(k)] = 1.0
        h[12 + k] = 1.0
        G[16 + k, gcol(k)] = 1.0
        h[16 + k] = 1.0
        G[20 + k, ucol(k)] = -1.0
        G[24 + 2 * k, scol(k)] = -1.0
        G[25 + 2 * k, ucol(k)] = -1.0

    assert tr.prog.G.shape == (32, nz)
    assert np.allclose(tr.prog.G.toarray(), G, atol=1e-13)
    assert np.allclose(tr.prog.h, h, atol=1e-15)
    assert tr.prog.cones == (("nonneg", 24),) + (("soc", 2),) * 4

    c = np.zeros(nz)
    for k in range(N):
        c[scol(k)] = 0.25
    assert np.allclose(tr.prog.c, c, atol=1e-15)


def test_distinct_magnitude_bounds_required():
    with pytest.raises(ValueError):
        lcvx.ProblemSpec(
            sys=double_integrator_1d(),
            cones=(lcvx.PointingCone.from_ray([1.0]),),
            rho1=1.0,
            rho2=1.0,
            K=1,
            x0=np.zeros(2),
            terminal=lcvx.TerminalSpec.free(2, lcvx.MinimumTimeCost()),
        )


def test_transcribe_argument_validation():
    spec = rest_to_rest_1d()
    with pytest.raises(ValueError):
        transcribe(spec, 0.0, 10)
    with pytest.raises(ValueError):
        transcribe(spec, -2.0, 10)
    with pytest.raises(ValueError):
        transcribe(spec, 5.0, 1)


def test_pack_extract_round_trip():
    spec = small_impulse_spec()
    tr = transcribe(spec, 4.0, 8)
    rng = np.random.default_rng(11)
    X = rng.standard_normal((9, 2))
    U = rng.standard_normal((8, 2, 1))
    S = rng.random((8, 2))
    Gm = rng.random((8, 2))
    z = tr.pack(X, U, S, Gm)
    X2, U2, S2, Gm2 = tr.extract(z)
    assert np.allclose(X2, X, atol=1e-14)
    assert np.allclose(U2, U, atol=1e-14)
    assert np.allclose(S2, S, atol=1e-14)
    assert np.allclose(Gm2, Gm, atol=1e-14)


def test_solved_point_round_trip_residuals():
    # Extracting the solver's point and re-checking the discrete constraints
    # in natural units stays within ten times the feasibility tolerance.
    spec = rest_to_rest_1d()
    sol = lcvx.solve_fixed_tf(spec, 7.0, 20)
    assert sol.status == "optimal"
    res = sol.transcription.constraint_residuals(sol.X, sol.U, sol.sigma, sol.gamma)
    assert res["max"] <= 10.0 * 1e-8


def test_admissible_binary_trajectory_maps_feasible():
    """A hand-rolled trajectory of the original problem, simulated forward with
    binary activations and admissible magnitudes, packs into a point that
    satisfies every transcription constraint."""
    spec = small_impulse_spec()
    N, t_f = 8, 4.0
    tr = transcribe(spec, t_f, N)
    d = tr.disc
    # One node on the +ray at the lower magnitude bound, then coast.
    U = np.zeros((N, 2, 1))
    Gm = np.zeros((N, 2))
    S = np.zeros((N, 2))
    U[2, 0, 0] = 0.3
    Gm[2, 0] = 1.0
    S[2, 0] = 0.3
    X = np.zeros((N + 1, 2))
    X[0] = spec.x0
    for k in range(N):
        X[k + 1] = d.Ad @ X[k] + d.Bd @ U[k].sum(axis=0) + d.wd
    res = tr.constraint_residuals(X, U, S, Gm)
    for family, value in res.items():
        if family == "terminal":
            continue
        assert value <= 1e-12, family
    # The velocity pin lands exactly on the simulated value here.
    assert res["terminal"] <= 1e-12


def test_variable_names_cover_all_columns():
    spec = rest_to_rest_1d()
    tr = transcribe(spec, 6.0, 3)
    assert len(tr.prog.var_names) == tr.prog.num_vars
    assert tr.prog.var_names[tr.gamma_index(0, 0)] == "gamma[0][0]"


def test_infeasible_terminal_row_rejected():
    # A terminal row with no state coefficients must be consistent.
    H_x = np.zeros((1, 2))
    h_t = np.zeros(1)
    h0 = np.array([1.0])
    cost = lcvx.MinimumTimeCost()
    term = lcvx.TerminalSpec(H_x=H_x, h_t=h_t, h0=h0, cost=cost)
    spec = lcvx.ProblemSpec(
        sys=double_integrator_1d(),
        cones=(lcvx.PointingCone.from_ray([1.0]),),
        rho1=0.3,
        rho2=1.0,
        K=1,
        x0=np.zeros(2),
        terminal=term,
    )
    with pytest.raises(ValueError):
        transcribe(spec, 2.0, 4)
