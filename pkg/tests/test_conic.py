"""Standard-form conic solver wrapper: statuses, residuals, duality, dumps."""

import numpy as np
import pytest
from scipy import sparse

import lcvx.conic as conic
from lcvx.conic import ConicProgram, SolverOptions, residuals, solve


def lp_bound_program():
    # min x subject to x >= 3, written as -x + s = -3, s >= 0.
    return ConicProgram(
        c=np.array([1.0]),
        Aeq=sparse.csc_matrix((0, 1)),
        beq=np.zeros(0),
        G=sparse.csc_matrix(np.array([[-1.0]])),
        h=np.array([-3.0]),
        cones=(("nonneg", 1),),
    )


def soc_norm_program():
    # Variables (t, u1, u2); u pinned to (3, 4); minimize t with ||u|| <= t.
    Aeq = sparse.csc_matrix(np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]))
    G = sparse.csc_matrix(-np.eye(3))
    return ConicProgram(
        c=np.array([1.0, 0.0, 0.0]),
        Aeq=Aeq,
        beq=np.array([3.0, 4.0]),
        G=G,
        h=np.zeros(3),
        cones=(("soc", 3),),
    )


def test_lp_solves_to_bound():
    sol = solve(lp_bound_program())
    assert sol.status == conic.OPTIMAL
    assert sol.z[0] == pytest.approx(3.0, abs=1e-7)
    assert sol.obj == pytest.approx(3.0, abs=1e-7)


def test_soc_norm_value():
    sol = solve(soc_norm_program())
    assert sol.status == conic.OPTIMAL
    assert sol.obj == pytest.approx(5.0, abs=1e-6)


def test_weak_duality_on_optimal_solves():
    for prog in (lp_bound_program(), soc_norm_program()):
        sol = solve(prog)
        assert sol.status == conic.OPTIMAL
        # Minimization: the dual objective never exceeds the primal.
        assert sol.dual_obj <= sol.obj + 1e-6
        assert abs(sol.gap) <= 1e-6


def test_residuals_meet_requested_tolerances():
    opts = SolverOptions(tol_feas=1e-8, tol_gap=1e-8)
    sol = solve(soc_norm_program(), opts)
    assert sol.status == conic.OPTIMAL
    assert sol.primal_res <= opts.tol_feas
    assert sol.dual_res <= opts.tol_feas
    assert sol.gap <= opts.tol_gap
    # Recomputing from the returned point agrees with the recorded values.
    primal, dual, gap, obj, dual_obj = residuals(soc_norm_program(), sol.z, sol.nu, sol.mu)
    assert primal == pytest.approx(sol.primal_res, abs=1e-12)
    assert dual == pytest.approx(sol.dual_res, abs=1e-12)


def test_primal_infeasible_detected():
    # x >= 1 and x <= 0 cannot both hold.
    prog = ConicProgram(
        c=np.array([1.0]),
        Aeq=sparse.csc_matrix((0, 1)),
        beq=np.zeros(0),
        G=sparse.csc_matrix(np.array([[-1.0], [1.0]])),
        h=np.array([-1.0, 0.0]),
        cones=(("nonneg", 2),),
    )
    sol = solve(prog)
    assert sol.status == conic.PRIMAL_INFEASIBLE
    # Certificate iterates stay attached for diagnostics.
    assert sol.nu is not None


def test_unbounded_detected():
    # min x with only x <= 0: unbounded below.
    prog = ConicProgram(
        c=np.array([1.0]),
        Aeq=sparse.csc_matrix((0, 1)),
        beq=np.zeros(0),
        G=sparse.csc_matrix(np.array([[1.0]])),
        h=np.array([0.0]),
        cones=(("nonneg", 1),),
    )
    sol = solve(prog)
    assert sol.status == conic.DUAL_INFEASIBLE


def test_program_validation():
    with pytest.raises(ValueError):
        ConicProgram(
            c=np.array([1.0]),
            Aeq=sparse.csc_matrix((0, 1)),
            beq=np.zeros(0),
            G=sparse.csc_matrix(np.array([[1.0]])),
            h=np.array([0.0]),
            cones=(("nonneg", 2),),
        )
    with pytest.raises(ValueError):
        ConicProgram(
            c=np.array([np.inf]),
            Aeq=sparse.csc_matrix((0, 1)),
            beq=np.zeros(0),
            G=sparse.csc_matrix(np.array([[1.0]])),
            h=np.array([0.0]),
            cones=(("nonneg", 1),),
        )
    with pytest.raises(ValueError):
        ConicProgram(
            c=np.array([1.0]),
            Aeq=sparse.csc_matrix((0, 1)),
            beq=np.zeros(0),
            G=sparse.csc_matrix(np.array([[1.0]])),
            h=np.array([0.0]),
            cones=(("mystery", 1),),
        )


def test_solver_options_validation():
    with pytest.raises(ValueError):
        SolverOptions(tol_feas=0.0)
    with pytest.raises(ValueError):
        SolverOptions(max_iters=0)


def test_threads_default_from_environment(monkeypatch):
    monkeypatch.setenv("LCVX_THREADS", "3")
    assert SolverOptions().threads == 3
    monkeypatch.delenv("LCVX_THREADS")
    assert SolverOptions().threads == 1


def test_dump_program_round_trips_values(tmp_path):
    prog = soc_norm_program()
    path = tmp_path / "prog.txt"
    conic.dump_program(prog, str(path))
    text = path.read_text()
    assert "cones" in text
    # 17 significant digit formatting keeps exact values in the dump.
    assert "3" in text and "4" in text


def test_var_names_length_checked():
    with pytest.raises(ValueError):
        ConicProgram(
            c=np.array([1.0, 2.0]),
            Aeq=sparse.csc_matrix((0, 2)),
            beq=np.zeros(0),
            G=sparse.csc_matrix(np.eye(2)),
            h=np.zeros(2),
            cones=(("nonneg", 2),),
            var_names=("only_one",),
        )
