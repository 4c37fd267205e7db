"""A-priori checks of the four sufficient conditions for the relaxation to be exact.

The four checks cover: (1) observability of the adjoint system through the
input map, (2) nondegeneracy of each input's projection gain, (3) pairwise
separation of the gains so the top-K selection is unambiguous, and
(4) transversality of the terminal cost against the boundary manifold.
A verdict of "holds" is backed by recomputable evidence; anything that cannot
be decided numerically is reported inconclusive, never holds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import LtiSystem, observability_rank, unobservable_subspace
from .geometry import gains
from .problem import ProblemSpec, TerminalSpec

__all__ = [
    "ConditionReport",
    "ConditionsSummary",
    "check_adjoint_observability",
    "check_gain_nondegeneracy",
    "check_gain_separation",
    "check_transversality",
    "check_all",
]

HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "inconclusive"

# Strict inequalities are decided with this relative margin; near-zero margins
# are reported inconclusive rather than holds.
STRICT_TOL = 1e-7
# All candidate primer directions must align to a single line within this.
COLLINEARITY_TOL = 1e-8


@dataclass(frozen=True)
class ConditionReport:
    name: str
    status: str
    case: str = None
    message: str = ""
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "case": self.case,
            "message": self.message,
            "details": _jsonable(self.details),
        }


@dataclass(frozen=True)
class ConditionsSummary:
    observability: ConditionReport
    nondegeneracy: ConditionReport
    separation: ConditionReport
    transversality: ConditionReport

    @property
    def reports(self) -> dict:
        return {
            "observability": self.observability,
            "nondegeneracy": self.nondegeneracy,
            "separation": self.separation,
            "transversality": self.transversality,
        }

    @property
    def all_hold(self) -> bool:
        return all(r.status == HOLDS for r in self.reports.values())

    @property
    def any_fails(self) -> bool:
        return any(r.status == FAILS for r in self.reports.values())

    def to_dict(self) -> dict:
        out = {key: rep.to_dict() for key, rep in self.reports.items()}
        out["all_hold"] = self.all_hold
        out["any_fails"] = self.any_fails
        return out


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def check_adjoint_observability(sys: LtiSystem) -> ConditionReport:
    """Check that the adjoint pair (-A', B') is observable.

    When it is, the primer vector B' lambda(t) of a nontrivial adjoint
    trajectory cannot vanish on any interval.
    """
    rank = observability_rank(-sys.A.T, sys.B.T)
    status = HOLDS if rank == sys.n else FAILS
    return ConditionReport(
        name="adjoint observability",
        status=status,
        message=f"observability rank {rank} of {sys.n}",
        details={"rank": rank, "n": sys.n},
    )


def _witness_line(sys: LtiSystem, V: np.ndarray):
    """Single direction spanning the primer's reachable set on a subspace V.

    Stacks B'(-A')^k V for k = 0..n-1. Returns (z, None) when the columns lie
    on one line within COLLINEARITY_TOL, else (None, reason).
    """
    n = sys.n
    F = -sys.A.T
    blocks = []
    Fk = np.eye(n)
    for _ in range(n):
        blocks.append(sys.B.T @ Fk @ V)
        Fk = F @ Fk
    W = np.hstack(blocks)
    norm = np.linalg.norm(W)
    if norm <= 1e-14:
        return None, "projected primer vanishes identically on the unobservable subspace"
    U, s, _ = np.linalg.svd(W)
    if s.size > 1 and s[1] > COLLINEARITY_TOL * s[0]:
        return None, "projected primer directions do not lie on a single line"
    return U[:, 0], None


def check_gain_nondegeneracy(sys: LtiSystem, cones, K: int) -> ConditionReport:
    """Check that no input's gain can vanish over an interval while it matters.

    For each ray input i, either (a) the pair {-A', (B n_i)'} is observable,
    so the gain cannot vanish persistently at all; or (b) on the line the
    primer is confined to when it does vanish, at least K other inputs keep a
    positive gain for each orientation of the line. Non-ray cones are
    reported inconclusive: the reduction to these algebraic tests is known
    only for ray cones.
    """
    cones = list(cones)
    M = len(cones)
    entries = []
    statuses = []
    for i, cone in enumerate(cones):
        if not cone.is_ray:
            entries.append({"input": i, "status": INCONCLUSIVE, "reason": "cone is not a ray"})
            statuses.append(INCONCLUSIVE)
            continue
        H = (sys.B @ cone.ray).reshape(1, -1)
        rank = observability_rank(-sys.A.T, H)
        if rank == sys.n:
            entries.append({"input": i, "status": HOLDS, "case": "a", "rank": rank})
            statuses.append(HOLDS)
            continue
        V = unobservable_subspace(-sys.A.T, H)
        z, reason = _witness_line(sys, V)
        if z is None:
            entries.append({"input": i, "status": INCONCLUSIVE, "case": "b", "reason": reason})
            statuses.append(INCONCLUSIVE)
            continue
        entry = {"input": i, "case": "b", "witness": z}
        counts = []
        for sign in (1.0, -1.0):
            g = gains(cones, sign * z)
            tol = STRICT_TOL * max(1.0, float(np.max(g)))
            counts.append(int(np.sum([g[k] > tol for k in range(M) if k != i])))
        entry["positive_gains"] = {"+z": counts[0], "-z": counts[1]}
        if min(counts) >= K:
            entry["status"] = HOLDS
            statuses.append(HOLDS)
        else:
            entry["status"] = INCONCLUSIVE
            entry["reason"] = f"fewer than K={K} other positive gains along the witness line"
            statuses.append(INCONCLUSIVE)
        entries.append(entry)
    if all(s == HOLDS for s in statuses):
        status, case = HOLDS, _combined_case(entries)
        message = "every input resolves via case (a) or (b)"
    else:
        status, case = INCONCLUSIVE, None
        bad = [e["input"] for e in entries if e.get("status") != HOLDS]
        message = f"inputs {bad} could not be resolved"
    return ConditionReport(
        name="gain nondegeneracy",
        status=status,
        case=case,
        message=message,
        details={"inputs": entries},
    )


def _combined_case(entries) -> str:
    cases = {e.get("case") for e in entries if e.get("case")}
    if cases == {"a"}:
        return "a"
    if cases == {"b"}:
        return "b"
    return "mixed"


def check_gain_separation(sys: LtiSystem, cones, K: int) -> ConditionReport:
    """Check that no two inputs' gains can tie persistently in a harmful way.

    For each pair (i, j), either (a) the difference pair {-A', (B(n_i-n_j))'}
    is observable, so the gains cannot agree on an interval; or (b) on the
    witness line, for each orientation, the two gains differ outright, or at
    least K other inputs beat them, or at least M-K other inputs sit strictly
    below them, so the tie cannot straddle the activation cutoff. Identical
    directions fail: their gains agree everywhere and nothing can order them.
    """
    cones = list(cones)
    M = len(cones)
    entries = []
    statuses = []
    for i in range(M):
        for j in range(i + 1, M):
            ci, cj = cones[i], cones[j]
            if not (ci.is_ray and cj.is_ray):
                entries.append(
                    {"pair": (i, j), "status": INCONCLUSIVE, "reason": "cone is not a ray"}
                )
                statuses.append(INCONCLUSIVE)
                continue
            d = ci.ray - cj.ray
            if np.linalg.norm(d) <= COLLINEARITY_TOL:
                entries.append(
                    {"pair": (i, j), "status": FAILS, "reason": "identical cone directions"}
                )
                statuses.append(FAILS)
                continue
            H = (sys.B @ d).reshape(1, -1)
            rank = observability_rank(-sys.A.T, H)
            if rank == sys.n:
                entries.append({"pair": (i, j), "status": HOLDS, "case": "a", "rank": rank})
                statuses.append(HOLDS)
                continue
            V = unobservable_subspace(-sys.A.T, H)
            z, reason = _witness_line(sys, V)
            if z is None:
                entries.append(
                    {"pair": (i, j), "status": INCONCLUSIVE, "case": "b", "reason": reason}
                )
                statuses.append(INCONCLUSIVE)
                continue
            entry = {"pair": (i, j), "case": "b", "witness": z}
            sides = []
            for sign in (1.0, -1.0):
                g = gains(cones, sign * z)
                tol = STRICT_TOL * max(1.0, float(np.max(g)))
                gi, gj = g[i], g[j]
                others = [k for k in range(M) if k not in (i, j)]
                above = int(np.sum([g[k] > max(gi, gj) + tol for k in others]))
                below = int(np.sum([g[k] < min(gi, gj) - tol for k in others]))
                resolved = abs(gi - gj) > tol or above >= K or below >= M - K
                sides.append(
                    {
                        "sign": sign,
                        "gain_i": gi,
                        "gain_j": gj,
                        "above": above,
                        "below": below,
                        "resolved": bool(resolved),
                    }
                )
            entry["sides"] = sides
            if all(side["resolved"] for side in sides):
                entry["status"] = HOLDS
                statuses.append(HOLDS)
            else:
                entry["status"] = INCONCLUSIVE
                entry["reason"] = "gain ordering unresolved along the witness line"
                statuses.append(INCONCLUSIVE)
            entries.append(entry)
    if any(s == FAILS for s in statuses):
        status = FAILS
        bad = [e["pair"] for e in entries if e.get("status") == FAILS]
        message = f"pairs {bad} can never be ordered"
        case = None
    elif all(s == HOLDS for s in statuses):
        status = HOLDS
        case = _combined_case(entries)
        message = "every pair resolves via case (a) or (b)"
    else:
        status = INCONCLUSIVE
        case = None
        bad = [e["pair"] for e in entries if e.get("status") == INCONCLUSIVE]
        message = f"pairs {bad} could not be resolved"
    return ConditionReport(
        name="gain separation",
        status=status,
        case=case,
        message=message,
        details={"pairs": entries},
    )


def check_transversality(term: TerminalSpec, n: int, x_tf=None) -> ConditionReport:
    """Check that the cost gradient escapes the boundary map's normal space.

    Builds v = (state gradient, time gradient) of the terminal cost and the
    matrix Mb of boundary-row normals in (x, t) space; the requirement is that
    the ray through v meets range(Mb) only at the origin, i.e. v is not in
    range(Mb). Quadratic costs need the solved terminal state; without one the
    check is inconclusive.
    """
    v = term.cost.gradient(n, x_tf)
    if v is None:
        return ConditionReport(
            name="transversality",
            status=INCONCLUSIVE,
            message="quadratic cost gradient needs the solved terminal state",
        )
    norm_v = float(np.linalg.norm(v))
    if norm_v == 0.0:
        raise ValueError("terminal cost gradient is zero; the problem is degenerate")
    Mb = term.normal_columns(n)
    if Mb.shape[1] == 0:
        return ConditionReport(
            name="transversality",
            status=HOLDS,
            message="no boundary rows; any nonzero cost gradient passes",
            details={"residual_ratio": 1.0},
        )
    coeffs, *_ = np.linalg.lstsq(Mb, v, rcond=None)
    residual = float(np.linalg.norm(v - Mb @ coeffs))
    ratio = residual / norm_v
    status = HOLDS if ratio > STRICT_TOL else FAILS
    message = (
        "cost gradient leaves the boundary normal space"
        if status == HOLDS
        else "cost gradient lies in the boundary normal space"
    )
    return ConditionReport(
        name="transversality",
        status=status,
        message=message,
        details={"residual_ratio": ratio, "boundary_columns": Mb.shape[1]},
    )


def check_all(spec: ProblemSpec, x_tf=None) -> ConditionsSummary:
    """Run all four condition checks on a problem spec.

    Parameters
    ----------
    spec : ProblemSpec
    x_tf : array_like, optional
        Solved terminal state, needed only to resolve transversality for
        quadratic costs.
    """
    return ConditionsSummary(
        observability=check_adjoint_observability(spec.sys),
        nondegeneracy=check_gain_nondegeneracy(spec.sys, spec.cones, spec.K),
        separation=check_gain_separation(spec.sys, spec.cones, spec.K),
        transversality=check_transversality(spec.terminal, spec.sys.n, x_tf),
    )
