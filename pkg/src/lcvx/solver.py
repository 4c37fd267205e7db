"""Fixed-time and minimum-time solves, adjoint extraction, and lossless-ness verification."""

from __future__ import annotations

import json
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import conic
from .conic import ConicSolution, SolverOptions
from .geometry import gains as cone_gains
from .problem import ProblemSpec
from .transcription import Transcription, _perp_basis, transcribe

__all__ = [
    "Solution",
    "AdjointTrace",
    "VerificationReport",
    "solve_fixed_tf",
    "min_time",
    "golden_time_search",
    "extract_primer",
    "verify_lossless",
    "write_trajectory_csv",
    "summary_dict",
    "write_summary_json",
]

FLOAT_FMT = "%.17g"


@dataclass(frozen=True)
class Solution:
    """Outcome of one solve: trajectory arrays in natural units plus diagnostics.

    status is "optimal", "infeasible", "unbounded", or "failed"; the trajectory
    fields are None unless optimal. cost is in the cost kind's own units
    (t_f for minimum time, q'x + c t_f for affine, the squared weighted error
    for quadratic); internal_obj is the transcription's convex objective value,
    comparable across solves of the same instance.
    """

    status: str
    t_f: float
    N: int
    X: np.ndarray = None
    U: np.ndarray = None
    sigma: np.ndarray = None
    gamma: np.ndarray = None
    cost: float = None
    internal_obj: float = None
    residuals: dict = field(default_factory=dict)
    solver_info: dict = field(default_factory=dict)
    search: dict = None
    transcription: Transcription = field(default=None, repr=False)
    conic_solution: ConicSolution = field(default=None, repr=False)

    @property
    def dt(self) -> float:
        return self.t_f / self.N

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_f, self.N + 1)

    def input_norms(self) -> np.ndarray:
        return np.linalg.norm(self.U, axis=2)


@dataclass(frozen=True)
class AdjointTrace:
    """Adjoint samples, primer vector, and per-input gains along the trajectory.

    Normalized so the peak primer norm is 1 (the optimality structure is
    scale-invariant); `scale` records the peak that was divided out.
    """

    lam: np.ndarray
    y: np.ndarray
    gains: np.ndarray
    scale: float


@dataclass(frozen=True)
class VerificationReport:
    """A-posteriori check that a relaxed solution is feasible for the original
    problem: semi-continuous input norms, near-binary activations, the
    activation budget, and pointing membership, with switch-adjacent nodes
    tagged as discretization artifacts and excluded from the conformance rate."""

    conforming: np.ndarray
    artifacts: np.ndarray
    conformance: float
    max_binary_deviation: float
    cardinality_ok: bool
    pointing_ok: bool
    gain_agreement: float
    violations: list
    tolerances: dict

    def to_dict(self) -> dict:
        return {
            "conformance": self.conformance,
            "max_binary_deviation": self.max_binary_deviation,
            "cardinality_ok": self.cardinality_ok,
            "pointing_ok": self.pointing_ok,
            "gain_agreement": self.gain_agreement,
            "num_artifact_flags": int(np.sum(self.artifacts)),
            "num_violations": len(self.violations),
            "violations": self.violations[:50],
            "tolerances": self.tolerances,
        }


def solve_fixed_tf(
    spec: ProblemSpec,
    t_f: float,
    N: int,
    options: SolverOptions = None,
    min_time_tie_break: bool = True,
) -> Solution:
    """Transcribe and solve the relaxed problem at a fixed final time.

    Returns a Solution whose status reports optimality or a certified
    infeasibility verdict; numerical breakdowns are propagated as status
    "failed" with the backend diagnostics attached, never silently.
    """
    if options is None:
        options = SolverOptions()
    tr = transcribe(spec, t_f, N, min_time_tie_break=min_time_tie_break)
    csol = conic.solve(tr.prog, options)
    status = {
        conic.OPTIMAL: "optimal",
        conic.PRIMAL_INFEASIBLE: "infeasible",
        conic.DUAL_INFEASIBLE: "unbounded",
        conic.NUMERICAL_FAILURE: "failed",
    }[csol.status]
    info = {
        "iterations": csol.iterations,
        "solve_time": csol.solve_time,
        "backend_status": csol.backend_status,
    }
    res = {"primal": csol.primal_res, "dual": csol.dual_res, "gap": csol.gap}
    if status != "optimal":
        return Solution(
            status=status,
            t_f=float(t_f),
            N=int(N),
            residuals=res,
            solver_info=info,
            transcription=tr,
            conic_solution=csol,
        )
    X, U, S, Gm = tr.extract(csol.z)
    cost = _cost_value(spec, t_f, X)
    return Solution(
        status="optimal",
        t_f=float(t_f),
        N=int(N),
        X=X,
        U=U,
        sigma=S,
        gamma=Gm,
        cost=cost,
        internal_obj=csol.obj,
        residuals=res,
        solver_info=info,
        transcription=tr,
        conic_solution=csol,
    )


def _cost_value(spec: ProblemSpec, t_f: float, X: np.ndarray) -> float:
    cost = spec.cost
    if cost.kind == "min_time":
        return float(t_f)
    if cost.kind == "affine":
        return float(cost.q @ X[-1] + cost.time_weight * t_f)
    return cost.value(X[-1])


def min_time(
    spec: ProblemSpec,
    N: int,
    bracket,
    tol_t: float = 1e-2,
    options: SolverOptions = None,
) -> Solution:
    """Bisection on fixed-time feasibility for a minimum-time problem.

    Maintains an infeasible-below / feasible-above bracket until its width is
    at most tol_t and returns the solution at the smallest feasible time
    found. Every probe is recorded in the returned solution's `search` field;
    a feasibility pattern that is not monotone in time is recorded there as a
    warning rather than trusted silently.

    Parameters
    ----------
    spec : ProblemSpec
        Must carry the minimum-time cost.
    N : int
        Grid size, held fixed while t_f varies (the step is t_f / N).
    bracket : (float, float)
        (t_lo, t_hi); t_hi must be feasible, else a ValueError asks for a
        wider bracket. A feasible t_lo is returned immediately.
    tol_t : float
        Final bracket width, in seconds.
    """
    if spec.cost.kind != "min_time":
        raise ValueError("min_time requires the minimum-time cost")
    t_lo, t_hi = float(bracket[0]), float(bracket[1])
    if not (0.0 < t_lo < t_hi):
        raise ValueError("bracket must satisfy 0 < t_lo < t_hi")
    if tol_t <= 0:
        raise ValueError("tol_t must be positive")
    probes = []
    t_start = time.perf_counter()

    def probe(t):
        sol = solve_fixed_tf(spec, t, N, options)
        probes.append({"t_f": t, "status": sol.status})
        return sol

    best = probe(t_hi)
    if best.status != "optimal":
        raise ValueError(
            f"solve at the bracket top t_f={t_hi} returned {best.status}; "
            "widen the bracket or check the problem data"
        )
    lo_sol = probe(t_lo)
    warnings_list = []
    if lo_sol.status == "optimal":
        best, t_hi = lo_sol, t_lo
    else:
        if lo_sol.status == "failed":
            warnings_list.append(f"solve at t_f={t_lo} failed; treating it as infeasible")
        while t_hi - t_lo > tol_t:
            mid = 0.5 * (t_lo + t_hi)
            sol = probe(mid)
            if sol.status == "optimal":
                best, t_hi = sol, mid
            else:
                if sol.status == "failed":
                    warnings_list.append(
                        f"solve at t_f={mid} failed; treating it as infeasible"
                    )
                t_lo = mid
    feas = [p["t_f"] for p in probes if p["status"] == "optimal"]
    infeas = [p["t_f"] for p in probes if p["status"] != "optimal"]
    if feas and infeas and min(feas) < max(infeas):
        warnings_list.append("feasibility is not monotone over the probed times")
        warnings.warn("min_time: feasibility is not monotone over the probed times")
    search = {
        "method": "bisection",
        "probes": probes,
        "bracket": [float(bracket[0]), float(bracket[1])],
        "tol_t": tol_t,
        "wall_time": time.perf_counter() - t_start,
        "warnings": warnings_list,
    }
    return _with_search(best, search)


def golden_time_search(
    spec: ProblemSpec,
    N: int,
    bracket,
    tol_t: float = 1e-2,
    options: SolverOptions = None,
) -> Solution:
    """Golden-section search over t_f for costs that mix time with terminal terms.

    Minimizes the solved cost as a function of t_f, treating infeasible times
    as +inf; assumes the profile is unimodal on the bracket.
    """
    t_lo, t_hi = float(bracket[0]), float(bracket[1])
    if not (0.0 < t_lo < t_hi):
        raise ValueError("bracket must satisfy 0 < t_lo < t_hi")
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    probes = []
    t_start = time.perf_counter()
    cache = {}

    def value(t):
        if t not in cache:
            sol = solve_fixed_tf(spec, t, N, options)
            probes.append({"t_f": t, "status": sol.status})
            cache[t] = sol
        sol = cache[t]
        return (sol.cost if sol.status == "optimal" else np.inf), sol

    a, b = t_lo, t_hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, sol_c = value(c)
    fd, sol_d = value(d)
    while b - a > tol_t:
        if fc <= fd:
            b, d, fd, sol_d = d, c, fc, sol_c
            c = b - invphi * (b - a)
            fc, sol_c = value(c)
        else:
            a, c, fc, sol_c = c, d, fd, sol_d
            d = a + invphi * (b - a)
            fd, sol_d = value(d)
    best = sol_c if fc <= fd else sol_d
    if best.status != "optimal":
        raise ValueError("no feasible time found in the bracket; widen it")
    search = {
        "method": "golden",
        "probes": probes,
        "bracket": [t_lo, t_hi],
        "tol_t": tol_t,
        "wall_time": time.perf_counter() - t_start,
        "warnings": [],
    }
    return _with_search(best, search)


def _with_search(sol: Solution, search: dict) -> Solution:
    return Solution(
        status=sol.status,
        t_f=sol.t_f,
        N=sol.N,
        X=sol.X,
        U=sol.U,
        sigma=sol.sigma,
        gamma=sol.gamma,
        cost=sol.cost,
        internal_obj=sol.internal_obj,
        residuals=sol.residuals,
        solver_info=sol.solver_info,
        search=search,
        transcription=sol.transcription,
        conic_solution=sol.conic_solution,
    )


def extract_primer(spec: ProblemSpec, tr: Transcription, csol: ConicSolution) -> AdjointTrace:
    """Reconstruct the adjoint and input gains from the dynamics-row duals.

    The equality dual of the node-k dynamics rows, unscaled by the state
    scaling, samples the adjoint over the k-th control interval; the primer is
    its image through B' and the gains are its projections onto the input
    cones. Returns None when duals are unavailable (e.g. a non-optimal solve).
    """
    if csol is None or csol.status != conic.OPTIMAL or csol.nu.size == 0:
        return None
    N = tr.N
    lam = np.empty((N, tr.n))
    for k in range(N):
        nu_k = csol.nu[tr.eq_rows["dynamics"][k]]
        lam[k] = nu_k / tr.x_scale
    y = lam @ spec.sys.B
    scale = float(np.max(np.linalg.norm(y, axis=1)))
    if scale > 0.0:
        y = y / scale
        lam = lam / scale
    g = np.empty((N, spec.M))
    for k in range(N):
        g[k] = cone_gains(spec.cones, y[k])
    return AdjointTrace(lam=lam, y=y, gains=g, scale=scale)


def verify_lossless(
    sol: Solution,
    spec: ProblemSpec,
    tol_off: float = None,
    tol_bin: float = 1e-5,
    tol_u: float = None,
    trace: AdjointTrace = None,
) -> VerificationReport:
    """Check a solved trajectory against the original problem's input structure.

    Per node and input: OFF when the input norm is at most tol_off;
    ON-conforming when gamma is within tol_bin of 1 and the norm lies in
    [gamma rho1 - tol_u, gamma rho2 + tol_u]; anything else is a violation.
    Nodes whose neighbors straddle an on/off switch are discretization
    artifacts: flagged, excluded from the conformance fraction, counted
    separately. Cardinality and pointing are checked at every node. When an
    adjoint trace is supplied, the fraction of non-artifact nodes whose active
    set coincides with the top gains is reported as gain_agreement.
    """
    if sol.status != "optimal":
        raise ValueError("verification needs an optimal solution")
    rho1, rho2, K = spec.rho1, spec.rho2, spec.K
    if tol_off is None:
        tol_off = 1e-6 * rho2
    if tol_u is None:
        tol_u = 1e-6 * rho2 + 1e-4 * rho1
    N, M = sol.N, spec.M
    norms = sol.input_norms()
    gamma = sol.gamma

    raw_on = norms > tol_off
    artifacts = np.zeros((N, M), dtype=bool)
    if N >= 3:
        artifacts[1:-1] = raw_on[2:] != raw_on[:-2]

    off_ok = norms <= tol_off
    on_ok = (
        (np.abs(gamma - 1.0) <= tol_bin)
        & (norms >= gamma * rho1 - tol_u)
        & (norms <= gamma * rho2 + tol_u)
    )
    conforming = off_ok | on_ok

    violations = []
    for k, i in zip(*np.nonzero(~conforming & ~artifacts)):
        violations.append(
            {
                "node": int(k),
                "input": int(i),
                "norm": float(norms[k, i]),
                "gamma": float(gamma[k, i]),
            }
        )

    considered = ~artifacts
    conformance = float(np.mean(conforming[considered])) if considered.any() else 1.0
    binary_dev = float(np.max(np.minimum(np.abs(gamma), np.abs(gamma - 1.0)), initial=0.0))
    cardinality_ok = bool(np.all(gamma.sum(axis=1) <= K + tol_bin))

    pointing_ok = True
    for i, cone in enumerate(spec.cones):
        if cone.is_ray and spec.sys.m > 1:
            P = _perp_basis(cone.ray)
            for k in range(N):
                if np.max(np.abs(P @ sol.U[k, i])) > tol_off or -(cone.ray @ sol.U[k, i]) > tol_off:
                    pointing_ok = False
        elif cone.C.shape[0] > 0:
            for k in range(N):
                if np.max(cone.C @ sol.U[k, i]) > tol_off:
                    pointing_ok = False

    gain_agreement = None
    if trace is not None:
        node_artifact = artifacts.any(axis=1)
        agree = 0
        total = 0
        tol_rank = 1e-6 * max(float(np.max(trace.gains, initial=0.0)), 1e-30)
        for k in range(N):
            if node_artifact[k]:
                continue
            total += 1
            active = gamma[k] >= 0.5
            if not active.any():
                agree += 1
                continue
            lo = float(np.min(trace.gains[k][active]))
            hi = float(np.max(trace.gains[k][~active])) if (~active).any() else -np.inf
            if lo >= hi - tol_rank:
                agree += 1
        gain_agreement = agree / total if total else 1.0

    return VerificationReport(
        conforming=conforming,
        artifacts=artifacts,
        conformance=conformance,
        max_binary_deviation=binary_dev,
        cardinality_ok=cardinality_ok,
        pointing_ok=pointing_ok,
        gain_agreement=gain_agreement,
        violations=violations,
        tolerances={"tol_off": tol_off, "tol_bin": tol_bin, "tol_u": tol_u},
    )


def write_trajectory_csv(sol: Solution, path: str, trace: AdjointTrace = None) -> None:
    """Write one row per node: t, states, then per input its components, norm,
    sigma, gamma, and (when a trace is given) gain. The final row carries only
    t and the terminal state; input columns are empty there. Floats use 17
    significant digits so identical runs produce identical bytes."""
    if sol.status != "optimal":
        raise ValueError("cannot export a non-optimal solution")
    n = sol.X.shape[1]
    N, M, m = sol.U.shape
    header = ["t"] + [f"x{j}" for j in range(n)]
    for i in range(M):
        header += [f"u{i}_{j}" for j in range(m)]
        header += [f"unorm{i}", f"sigma{i}", f"gamma{i}"]
        if trace is not None:
            header.append(f"gain{i}")
    lines = [",".join(header)]
    times = sol.times
    norms = sol.input_norms()
    for k in range(N + 1):
        cells = [FLOAT_FMT % times[k]] + [FLOAT_FMT % v for v in sol.X[k]]
        if k < N:
            for i in range(M):
                cells += [FLOAT_FMT % v for v in sol.U[k, i]]
                cells += [
                    FLOAT_FMT % norms[k, i],
                    FLOAT_FMT % sol.sigma[k, i],
                    FLOAT_FMT % sol.gamma[k, i],
                ]
                if trace is not None:
                    cells.append(FLOAT_FMT % trace.gains[k, i])
        else:
            per_input = m + 3 + (1 if trace is not None else 0)
            cells += [""] * (M * per_input)
        lines.append(",".join(cells))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def summary_dict(
    sol: Solution,
    spec: ProblemSpec,
    report: VerificationReport = None,
    trace: AdjointTrace = None,
) -> dict:
    """JSON-ready summary of a solve: time, cost, statuses, verification aggregates."""
    out = {
        "status": sol.status,
        "t_f": sol.t_f,
        "dt": sol.dt if sol.status == "optimal" else None,
        "N": sol.N,
        "cost": sol.cost,
        "residuals": sol.residuals,
        "solver": sol.solver_info,
        "num_inputs": spec.M,
        "K": spec.K,
    }
    if sol.search is not None:
        out["search"] = sol.search
    if report is not None:
        out["verification"] = report.to_dict()
    if trace is not None:
        out["primer_scale"] = trace.scale
    return out


def write_summary_json(path: str, summary: dict) -> None:
    with open(path, "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
