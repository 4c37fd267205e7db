"""Branch-and-bound solver for the discrete problem with binary activations.

Exists as a global-optimality oracle and runtime comparator for the convex
relaxation, not as a competitive mixed-integer engine: best-first search,
no cutting planes, no presolve.
"""

from __future__ import annotations

import dataclasses
import heapq
import itertools
import time
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from . import conic
from .conic import SolverOptions
from .problem import ProblemSpec
from .solver import Solution, _cost_value
from .transcription import Transcription, transcribe

__all__ = ["BnbNode", "solve_micp_bnb", "enumerate_binary_patterns"]

INT_TOL = 1e-6


@dataclass(frozen=True)
class BnbNode:
    """One search node: which activation variables are pinned, to what, the
    relaxation bound from solving this node's relaxation, and the per-node
    activation budget the pins must respect."""

    pins: tuple
    bound: float
    depth: int
    budget: int
    gamma: np.ndarray = dataclasses.field(repr=False, default=None)

    def __post_init__(self):
        ones = {}
        for (k, i), v in self.pins:
            ones[k] = ones.get(k, 0) + (1 if v == 1 else 0)
        if ones and max(ones.values()) > self.budget:
            raise ValueError("pins exceed the per-node activation budget")


def _pinned_program(tr: Transcription, pins) -> "conic.ConicProgram":
    base = tr.prog
    if not pins:
        return base
    nz = base.c.size
    cols = np.array([tr.gamma_index(k, i) for (k, i), _ in pins])
    rhs = np.array([float(v) for _, v in pins])
    rows = sparse.csc_matrix(
        (np.ones(len(pins)), (np.arange(len(pins)), cols)), shape=(len(pins), nz)
    )
    return dataclasses.replace(
        base,
        Aeq=sparse.vstack([base.Aeq, rows], format="csc"),
        beq=np.concatenate([base.beq, rhs]),
    )


def _round_pattern(gamma: np.ndarray, K: int):
    """Round activations >= 1/2 up, keeping at most K per node (largest first)."""
    N, M = gamma.shape
    pattern = np.zeros((N, M), dtype=int)
    for k in range(N):
        on = [i for i in np.argsort(-gamma[k], kind="stable") if gamma[k, i] >= 0.5]
        for i in on[:K]:
            pattern[k, i] = 1
    return pattern


def _full_pins(pattern: np.ndarray):
    N, M = pattern.shape
    return tuple(((k, i), int(pattern[k, i])) for k in range(N) for i in range(M))


def solve_micp_bnb(
    spec: ProblemSpec,
    t_f: float,
    N: int,
    gap_tol: float = 1e-6,
    node_limit: int = 100_000,
    options: SolverOptions = None,
) -> Solution:
    """Solve the discrete problem with binary activations by branch and bound.

    Best-first over the activation variables: each node solves the convex
    relaxation with its pinned entries fixed, branches on the most fractional
    activation, and seeds incumbents by rounding. Terminates when the best
    bound is within gap_tol (relative) of the incumbent or when node_limit
    relaxations have been solved; the returned solution's `search` field
    reports which, along with nodes explored, the final gap, and wall time.
    Certified incumbents carry exactly binary activations.
    """
    if options is None:
        options = SolverOptions()
    if node_limit < 1:
        raise ValueError("node_limit must be at least 1")
    t_start = time.perf_counter()
    tr = transcribe(spec, t_f, N, min_time_tie_break=True)
    K = spec.K

    nodes_solved = 0
    heuristic_solves = 0
    failures = 0
    ub = np.inf
    incumbent = None
    tried_patterns = set()
    popped_bounds = []

    def relax(pins):
        nonlocal nodes_solved, failures
        nodes_solved += 1
        csol = conic.solve(_pinned_program(tr, pins), options)
        if csol.status == conic.NUMERICAL_FAILURE:
            failures += 1
        return csol

    def accept(csol, pattern):
        """Install a fully pinned optimal solve as the incumbent if it improves."""
        nonlocal ub, incumbent
        if csol.status != conic.OPTIMAL or csol.obj >= ub:
            return
        X, U, S, _ = tr.extract(csol.z)
        ub = csol.obj
        incumbent = Solution(
            status="optimal",
            t_f=float(t_f),
            N=int(N),
            X=X,
            U=U,
            sigma=S,
            gamma=pattern.astype(float),
            cost=_cost_value(spec, t_f, X),
            internal_obj=csol.obj,
            residuals={"primal": csol.primal_res, "dual": csol.dual_res, "gap": csol.gap},
            solver_info={
                "iterations": csol.iterations,
                "solve_time": csol.solve_time,
                "backend_status": csol.backend_status,
            },
            transcription=tr,
            conic_solution=csol,
        )

    def try_round(gamma):
        nonlocal heuristic_solves
        pattern = _round_pattern(gamma, K)
        key = pattern.tobytes()
        if key in tried_patterns:
            return
        tried_patterns.add(key)
        heuristic_solves += 1
        accept(conic.solve(_pinned_program(tr, _full_pins(pattern)), options), pattern)

    def stats(status_word, lb):
        gap = 0.0 if not np.isfinite(ub) else max(0.0, ub - lb) / max(1.0, abs(ub))
        return {
            "method": "branch-and-bound",
            "status": status_word,
            "nodes": nodes_solved,
            "heuristic_solves": heuristic_solves,
            "failures": failures,
            "gap": gap,
            "best_bound": lb if np.isfinite(lb) else None,
            "incumbent_obj": ub if np.isfinite(ub) else None,
            "certified": status_word == "certified",
            "gap_tol": gap_tol,
            "node_limit": node_limit,
            "popped_bounds": popped_bounds,
            "wall_time": time.perf_counter() - t_start,
        }

    root = relax(())
    if root.status == conic.PRIMAL_INFEASIBLE:
        return Solution(
            status="infeasible", t_f=float(t_f), N=int(N),
            search=stats("certified", np.inf), transcription=tr, conic_solution=root,
        )
    if root.status != conic.OPTIMAL:
        return Solution(
            status="failed", t_f=float(t_f), N=int(N),
            search=stats("numerical-failure", -np.inf), transcription=tr, conic_solution=root,
        )
    X, U, S, Gm = tr.extract(root.z)
    frac = np.minimum(Gm, 1.0 - Gm)
    if float(frac.max(initial=0.0)) <= INT_TOL:
        sol = Solution(
            status="optimal", t_f=float(t_f), N=int(N),
            X=X, U=U, sigma=S, gamma=np.round(Gm),
            cost=_cost_value(spec, t_f, X), internal_obj=root.obj,
            residuals={"primal": root.primal_res, "dual": root.dual_res, "gap": root.gap},
            solver_info={
                "iterations": root.iterations,
                "solve_time": root.solve_time,
                "backend_status": root.backend_status,
            },
            search=stats("certified", root.obj),
            transcription=tr, conic_solution=root,
        )
        return sol

    try_round(Gm)
    seq = itertools.count()
    heap = [
        (root.obj, 0, next(seq), BnbNode(pins=(), bound=root.obj, depth=0, budget=K, gamma=Gm))
    ]
    limit_hit = False

    while heap:
        lb = heap[0][0]
        if np.isfinite(ub) and ub - lb <= gap_tol * max(1.0, abs(ub)):
            break
        if nodes_solved >= node_limit:
            limit_hit = True
            break
        bound, _, _, node = heapq.heappop(heap)
        popped_bounds.append(bound)
        if np.isfinite(ub) and bound >= ub - gap_tol * max(1.0, abs(ub)):
            continue
        pinned = dict(node.pins)
        frac = np.minimum(node.gamma, 1.0 - node.gamma)
        for (k, i) in pinned:
            frac[k, i] = -1.0
        k, i = np.unravel_index(int(np.argmax(frac)), frac.shape)
        ones_at_k = sum(1 for (kk, _), v in pinned.items() if kk == k and v == 1)
        for v in (1, 0):
            if v == 1 and ones_at_k >= K:
                continue
            child_pins = tuple(sorted(pinned.items())) + (((int(k), int(i)), v),)
            if nodes_solved >= node_limit:
                limit_hit = True
                break
            csol = relax(child_pins)
            if csol.status != conic.OPTIMAL:
                continue
            _, _, _, g = tr.extract(csol.z)
            child_frac = np.minimum(g, 1.0 - g)
            for (kk, ii) in dict(child_pins):
                child_frac[kk, ii] = -1.0
            if float(child_frac.max(initial=0.0)) <= INT_TOL:
                pattern = np.round(np.clip(g, 0.0, 1.0)).astype(int)
                key = pattern.tobytes()
                if key not in tried_patterns:
                    tried_patterns.add(key)
                    heuristic_solves += 1
                    accept(
                        conic.solve(_pinned_program(tr, _full_pins(pattern)), options),
                        pattern,
                    )
                continue
            try_round(g)
            if np.isfinite(ub) and csol.obj >= ub - gap_tol * max(1.0, abs(ub)):
                continue
            heapq.heappush(
                heap,
                (
                    csol.obj,
                    -(node.depth + 1),
                    next(seq),
                    BnbNode(
                        pins=child_pins,
                        bound=csol.obj,
                        depth=node.depth + 1,
                        budget=K,
                        gamma=g,
                    ),
                ),
            )
        if limit_hit:
            break

    lb = heap[0][0] if heap else ub
    if limit_hit:
        word = "node-limit"
    elif failures:
        word = "numerical-failure"
    else:
        word = "certified"
    final = stats(word, min(lb, ub))
    if incumbent is None:
        if word == "certified":
            return Solution(
                status="infeasible", t_f=float(t_f), N=int(N),
                search=final, transcription=tr,
            )
        return Solution(
            status="failed", t_f=float(t_f), N=int(N), search=final, transcription=tr,
        )
    return _attach_search(incumbent, final)


def _attach_search(sol: Solution, search: dict) -> Solution:
    return dataclasses.replace(sol, search=search)


def enumerate_binary_patterns(
    spec: ProblemSpec,
    t_f: float,
    N: int,
    options: SolverOptions = None,
):
    """Exhaustively solve every admissible binary activation pattern.

    Iterates all per-node activation subsets of size at most K, solves each
    fully pinned convex program, and returns (best objective, best pattern,
    number of patterns solved). Intended as a small-instance oracle; the
    pattern count grows like (number of admissible subsets)^N.
    """
    if options is None:
        options = SolverOptions()
    tr = transcribe(spec, t_f, N, min_time_tie_break=True)
    M, K = spec.M, spec.K
    subsets = []
    for r in range(K + 1):
        subsets.extend(itertools.combinations(range(M), r))
    best_obj = np.inf
    best_pattern = None
    count = 0
    for combo in itertools.product(subsets, repeat=N):
        pattern = np.zeros((N, M), dtype=int)
        for k, s in enumerate(combo):
            for i in s:
                pattern[k, i] = 1
        count += 1
        csol = conic.solve(_pinned_program(tr, _full_pins(pattern)), options)
        if csol.status == conic.OPTIMAL and csol.obj < best_obj:
            best_obj = csol.obj
            best_pattern = pattern
    return best_obj, best_pattern, count
