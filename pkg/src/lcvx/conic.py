"""Standard-form conic programs and a verified interface to the interior-point backend.

Standard form:

    minimize    c' z
    subject to  Aeq z = beq
                G z + s = h,   s in K

where K is an ordered product of zero cones, nonnegative orthants, and
second-order cones. The dual convention is fixed so downstream adjoint
extraction is unambiguous: duals (nu, mu) enter the Lagrangian as

    L = c'z + nu'(Aeq z - beq) + mu'(G z - h)

so stationarity reads c + Aeq' nu + G' mu = 0 and the dual objective is
-(beq' nu + h' mu). Every solve recomputes residuals from the returned
primal/dual pair; a solve is reported optimal only if those residuals meet
the requested tolerances.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import clarabel
import numpy as np
from scipy import sparse

__all__ = [
    "ConicProgram",
    "ConicSolution",
    "SolverOptions",
    "solve",
    "dump_program",
]

OPTIMAL = "optimal"
PRIMAL_INFEASIBLE = "primal_infeasible"
DUAL_INFEASIBLE = "dual_infeasible"
NUMERICAL_FAILURE = "numerical_failure"

_CONE_KINDS = ("zero", "nonneg", "soc")


def default_threads() -> int:
    """Thread cap from the LCVX_THREADS environment variable (default 1)."""
    raw = os.environ.get("LCVX_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(1, value)


@dataclass(frozen=True)
class SolverOptions:
    tol_feas: float = 1e-8
    tol_gap: float = 1e-8
    max_iters: int = 200
    verbose: bool = False
    threads: int = None

    def __post_init__(self):
        if self.tol_feas <= 0 or self.tol_gap <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.threads is None:
            object.__setattr__(self, "threads", default_threads())


@dataclass(frozen=True)
class ConicProgram:
    """Immutable conic program in the module's standard form.

    Parameters
    ----------
    c : ndarray, shape (nz,)
        Objective vector.
    Aeq, beq : sparse matrix (neq x nz), ndarray (neq,)
        Equality block. May have zero rows.
    G, h : sparse matrix (nc x nz), ndarray (nc,)
        Cone block; rows are consumed by `cones` in order.
    cones : tuple of (kind, size)
        kind in {"zero", "nonneg", "soc"}; sizes sum to the rows of G.
    var_names : tuple of str, optional
        Diagnostic labels, one per variable.
    """

    c: np.ndarray
    Aeq: sparse.csc_matrix
    beq: np.ndarray
    G: sparse.csc_matrix
    h: np.ndarray
    cones: tuple
    var_names: tuple = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        beq = np.asarray(self.beq, dtype=float).reshape(-1)
        h = np.asarray(self.h, dtype=float).reshape(-1)
        Aeq = sparse.csc_matrix(self.Aeq)
        G = sparse.csc_matrix(self.G)
        nz = c.shape[0]
        if Aeq.shape != (beq.shape[0], nz):
            raise ValueError(
                f"equality block mismatch: Aeq {Aeq.shape}, beq {beq.shape}, nz {nz}"
            )
        if G.shape != (h.shape[0], nz):
            raise ValueError(f"cone block mismatch: G {G.shape}, h {h.shape}, nz {nz}")
        cones = tuple((str(kind), int(size)) for kind, size in self.cones)
        for kind, size in cones:
            if kind not in _CONE_KINDS:
                raise ValueError(f"unknown cone kind {kind!r}")
            if size < 1:
                raise ValueError("cone sizes must be positive")
        if sum(size for _, size in cones) != h.shape[0]:
            raise ValueError("cone sizes must sum to the rows of G")
        for name, arr in (("c", c), ("beq", beq), ("h", h)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite")
        if not np.all(np.isfinite(Aeq.data)) or not np.all(np.isfinite(G.data)):
            raise ValueError("matrix data must be finite")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "Aeq", Aeq)
        object.__setattr__(self, "beq", beq)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "cones", cones)
        if self.var_names is not None:
            names = tuple(str(s) for s in self.var_names)
            if len(names) != nz:
                raise ValueError("var_names length must equal the variable count")
            object.__setattr__(self, "var_names", names)

    @property
    def num_vars(self) -> int:
        return self.c.shape[0]


@dataclass(frozen=True)
class ConicSolution:
    """Solve outcome with recomputed residual metrics.

    status is one of optimal / primal_infeasible / dual_infeasible /
    numerical_failure. Primal and dual vectors are present for optimal
    solves; on infeasible outcomes z and duals hold the solver's
    certificate iterates for diagnostics.
    """

    status: str
    z: np.ndarray
    s: np.ndarray
    nu: np.ndarray
    mu: np.ndarray
    obj: float
    dual_obj: float
    primal_res: float
    dual_res: float
    gap: float
    iterations: int
    solve_time: float
    backend_status: str


def _cone_residual(s: np.ndarray, cones) -> float:
    """Distance-like violation of s from the cone product (inf-norm flavor)."""
    worst = 0.0
    at = 0
    for kind, size in cones:
        block = s[at : at + size]
        if kind == "zero":
            worst = max(worst, float(np.max(np.abs(block), initial=0.0)))
        elif kind == "nonneg":
            worst = max(worst, float(np.max(-block, initial=0.0)))
        else:
            worst = max(worst, max(float(np.linalg.norm(block[1:]) - block[0]), 0.0))
        at += size
    return worst


def residuals(prog: ConicProgram, z, nu, mu):
    """Recomputed (primal, dual, gap) residuals for a candidate primal/dual pair."""
    z = np.asarray(z, dtype=float)
    nu = np.asarray(nu, dtype=float)
    mu = np.asarray(mu, dtype=float)
    rhs_scale = 1.0 + max(
        float(np.max(np.abs(prog.beq), initial=0.0)),
        float(np.max(np.abs(prog.h), initial=0.0)),
    )
    eq_res = float(np.max(np.abs(prog.Aeq @ z - prog.beq), initial=0.0))
    s = prog.h - prog.G @ z
    primal = max(eq_res, _cone_residual(s, prog.cones)) / rhs_scale
    stat = prog.c + prog.Aeq.T @ nu + prog.G.T @ mu
    dual = float(np.max(np.abs(stat), initial=0.0)) / (
        1.0 + float(np.max(np.abs(prog.c), initial=0.0))
    )
    dual = max(dual, _dual_cone_violation(mu, prog.cones) / rhs_scale)
    obj = float(prog.c @ z)
    dual_obj = -(float(prog.beq @ nu) + float(prog.h @ mu))
    gap = abs(obj - dual_obj) / (1.0 + max(abs(obj), abs(dual_obj)))
    return primal, dual, gap, obj, dual_obj


def _dual_cone_violation(mu: np.ndarray, cones) -> float:
    """Violation of mu from the dual cone product (zero-cone duals are free)."""
    worst = 0.0
    at = 0
    for kind, size in cones:
        block = mu[at : at + size]
        if kind == "nonneg":
            worst = max(worst, float(np.max(-block, initial=0.0)))
        elif kind == "soc":
            worst = max(worst, max(float(np.linalg.norm(block[1:]) - block[0]), 0.0))
        at += size
    return worst


def _clarabel_cones(prog: ConicProgram):
    out = []
    if prog.beq.shape[0] > 0:
        out.append(clarabel.ZeroConeT(prog.beq.shape[0]))
    for kind, size in prog.cones:
        if kind == "zero":
            out.append(clarabel.ZeroConeT(size))
        elif kind == "nonneg":
            out.append(clarabel.NonnegativeConeT(size))
        else:
            out.append(clarabel.SecondOrderConeT(size))
    return out


def solve(prog: ConicProgram, opts: SolverOptions = None) -> ConicSolution:
    """Solve a conic program and verify the reported answer.

    The backend runs at tolerances ten times tighter than requested; the
    returned status is optimal only when residuals recomputed here from the
    primal/dual pair meet the requested tol_feas / tol_gap. A backend
    breakdown therefore can never silently produce a wrong answer.
    """
    if opts is None:
        opts = SolverOptions()
    nz = prog.num_vars
    neq = prog.beq.shape[0]
    A = sparse.vstack([prog.Aeq, prog.G], format="csc")
    b = np.concatenate([prog.beq, prog.h])
    P = sparse.csc_matrix((nz, nz))

    settings = clarabel.DefaultSettings()
    settings.verbose = opts.verbose
    settings.max_iter = opts.max_iters
    # Run tighter than requested so the independent residual check has margin.
    settings.tol_feas = opts.tol_feas * 0.1
    settings.tol_gap_abs = opts.tol_gap * 0.1
    settings.tol_gap_rel = opts.tol_gap * 0.1
    if hasattr(settings, "max_threads"):
        settings.max_threads = opts.threads

    solver = clarabel.DefaultSolver(P, prog.c, A, b, _clarabel_cones(prog), settings)
    raw = solver.solve()
    backend_status = str(raw.status)

    z = np.asarray(raw.x, dtype=float)
    dual = np.asarray(raw.z, dtype=float)
    slack = np.asarray(raw.s, dtype=float)
    nu = dual[:neq]
    mu = dual[neq:]
    s = slack[neq:]

    status_name = backend_status.split(".")[-1]
    if status_name in ("PrimalInfeasible", "AlmostPrimalInfeasible"):
        status = PRIMAL_INFEASIBLE
    elif status_name in ("DualInfeasible", "AlmostDualInfeasible"):
        status = DUAL_INFEASIBLE
    elif status_name in ("Solved", "AlmostSolved"):
        status = OPTIMAL
    else:
        status = NUMERICAL_FAILURE

    if status == OPTIMAL:
        primal_res, dual_res, gap, obj, dual_obj = residuals(prog, z, nu, mu)
        if primal_res > opts.tol_feas or dual_res > opts.tol_feas or gap > opts.tol_gap:
            status = NUMERICAL_FAILURE
    else:
        # Residuals of the certificate iterate, for diagnostics only.
        primal_res, dual_res, gap, obj, dual_obj = residuals(prog, z, nu, mu)

    return ConicSolution(
        status=status,
        z=z,
        s=s,
        nu=nu,
        mu=mu,
        obj=obj,
        dual_obj=dual_obj,
        primal_res=primal_res,
        dual_res=dual_res,
        gap=gap,
        iterations=int(raw.iterations),
        solve_time=float(raw.solve_time),
        backend_status=status_name,
    )


def dump_program(prog: ConicProgram, path: str) -> None:
    """Write the program to a plain-text sparse triplet file.

    Format: a header with dimensions and the cone list, then one entry per
    line. Vector sections list "index value"; matrix sections list
    "row col value". All floats use 17 significant digits.
    """
    fmt = "%.17g"
    lines = []
    lines.append("conic-program-dump v1")
    lines.append(f"vars {prog.num_vars}")
    lines.append(f"eq_rows {prog.beq.shape[0]}")
    lines.append(f"cone_rows {prog.h.shape[0]}")
    lines.append("cones " + " ".join(f"{kind}:{size}" for kind, size in prog.cones))
    lines.append("section c")
    for i, v in enumerate(prog.c):
        if v != 0.0:
            lines.append(f"{i} {fmt % v}")
    for name, M in (("Aeq", prog.Aeq), ("G", prog.G)):
        coo = M.tocoo()
        order = np.lexsort((coo.col, coo.row))
        lines.append(f"section {name}")
        for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            lines.append(f"{r} {c} {fmt % v}")
    for name, vec in (("beq", prog.beq), ("h", prog.h)):
        lines.append(f"section {name}")
        for i, v in enumerate(vec):
            if v != 0.0:
                lines.append(f"{i} {fmt % v}")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")
