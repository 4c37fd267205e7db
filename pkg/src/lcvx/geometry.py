"""Input pointing sets: polytopic cones, projection gains, and the disjoint-interior check."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

__all__ = [
    "PointingCone",
    "project_onto_cone",
    "project_gain",
    "gains",
    "interiors_disjoint",
    "overlapping_interiors",
]

# Interior overlap below this margin (with the unit-box normalization) counts as empty.
DISJOINT_MARGIN = 1e-9


@dataclass(frozen=True)
class PointingCone:
    """Polytopic cone {u : C u <= 0} restricting an input's direction.

    A cone is specified either by its facet matrix C (rows are outward normals,
    full row rank) or as the conical hull of a single unit direction. Ray cones
    in dimension m >= 2 have no full-row-rank facet form, so the ray is stored
    as the primary representation and a redundant facet matrix is generated for
    membership tests only. An empty facet matrix (zero rows) leaves the input
    direction free.

    Use the classmethods ``from_facets``, ``from_ray``, ``unconstrained``.
    """

    C: np.ndarray
    ray: np.ndarray = None

    def __post_init__(self):
        C = np.asarray(self.C, dtype=float)
        if C.ndim != 2:
            raise ValueError("facet matrix must be 2-D")
        if not np.all(np.isfinite(C)):
            raise ValueError("facet matrix must have finite entries")
        object.__setattr__(self, "C", C)
        if self.ray is not None:
            ray = np.asarray(self.ray, dtype=float).reshape(-1)
            if ray.shape[0] != C.shape[1]:
                raise ValueError("ray dimension does not match facet matrix")
            object.__setattr__(self, "ray", ray)

    @classmethod
    def from_facets(cls, C) -> "PointingCone":
        """Cone {u : C u <= 0} from a full-row-rank facet matrix (p x m, p >= 1)."""
        C = np.atleast_2d(np.asarray(C, dtype=float))
        if C.shape[0] == 0:
            raise ValueError("use unconstrained() for a cone with no facets")
        if np.linalg.matrix_rank(C) < C.shape[0]:
            raise ValueError("facet matrix must have full row rank")
        ray = None
        if C.shape[1] == 1:
            # In 1-D a single facet is exactly a ray; record the direction.
            if C.shape[0] == 1:
                ray = np.array([-np.sign(C[0, 0])])
        return cls(C=C, ray=ray)

    @classmethod
    def from_ray(cls, direction) -> "PointingCone":
        """Conical hull of a single direction (normalized to unit length)."""
        d = np.asarray(direction, dtype=float).reshape(-1)
        norm = np.linalg.norm(d)
        if norm == 0.0 or not np.all(np.isfinite(d)):
            raise ValueError("ray direction must be nonzero and finite")
        n = d / norm
        m = n.shape[0]
        if m == 1:
            C = np.array([[-n[0]]])
        else:
            # Orthonormal complement P: rows span the hyperplane normal to n.
            basis = np.linalg.svd(n.reshape(1, -1))[2][1:]
            C = np.vstack([basis, -basis, -n.reshape(1, -1)])
        return cls(C=C, ray=n)

    @classmethod
    def unconstrained(cls, m: int) -> "PointingCone":
        """Direction-free input: the cone is all of R^m."""
        if m < 1:
            raise ValueError("dimension must be at least 1")
        return cls(C=np.zeros((0, m)))

    @property
    def dim(self) -> int:
        return self.C.shape[1]

    @property
    def is_ray(self) -> bool:
        return self.ray is not None

    @property
    def is_unconstrained(self) -> bool:
        return self.C.shape[0] == 0

    def contains(self, u, tol: float = 0.0) -> bool:
        """True iff every facet satisfies C_j u <= tol."""
        if tol < 0:
            raise ValueError("tol must be nonnegative")
        u = np.asarray(u, dtype=float).reshape(-1)
        if u.shape[0] != self.dim:
            raise ValueError(f"expected a {self.dim}-vector, got shape {u.shape}")
        if self.C.shape[0] == 0:
            return True
        return bool(np.all(self.C @ u <= tol))


def project_onto_cone(cone: PointingCone, y) -> np.ndarray:
    """Euclidean projection of y onto the cone.

    Ray cones use the closed form max(n'y, 0) n. General polytopic cones are
    solved exactly by active-set enumeration over facet subsets: the projection
    onto {C u <= 0} equals the projection onto the span-orthogonal of some
    subset of active facets, identified by KKT feasibility (multipliers >= 0
    and primal feasibility).

    Parameters
    ----------
    cone : PointingCone
    y : array_like, shape (m,)

    Returns
    -------
    ndarray, shape (m,)
        The unique minimizer of ||y - z|| over z in the cone.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape[0] != cone.dim:
        raise ValueError(f"expected a {cone.dim}-vector, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise ValueError("y must be finite")
    if cone.is_ray:
        n = cone.ray
        return max(float(n @ y), 0.0) * n
    C = cone.C
    p, m = C.shape
    if p == 0:
        return y.copy()
    if np.all(C @ y <= 0.0):
        return y.copy()
    feas_tol = 1e-9 * max(1.0, float(np.linalg.norm(y)))
    best = np.zeros(m)
    best_dist = float(np.linalg.norm(y))
    # Subsets of active facets; the projection zeroes the component in their row span.
    for size in range(1, min(p, m) + 1):
        for subset in itertools.combinations(range(p), size):
            Cs = C[list(subset)]
            gram = Cs @ Cs.T
            try:
                mu = np.linalg.solve(gram, Cs @ y)
            except np.linalg.LinAlgError:
                continue  # linearly dependent subset; skip
            if np.any(mu < -feas_tol):
                continue
            z = y - Cs.T @ mu
            if not np.all(C @ z <= feas_tol):
                continue
            dist = float(np.linalg.norm(y - z))
            if dist < best_dist - 1e-15:
                best_dist = dist
                best = z
    return best


def project_gain(cone: PointingCone, y) -> float:
    """Input gain: magnitude of the Euclidean projection of y onto the cone."""
    return float(np.linalg.norm(project_onto_cone(cone, y)))


def gains(cones, y) -> np.ndarray:
    """Projection gains of y onto each cone, as an array of length M."""
    return np.array([project_gain(cone, y) for cone in cones])


def _has_interior(cone: PointingCone) -> bool:
    """Whether the cone has nonempty interior in its ambient dimension."""
    if cone.is_unconstrained:
        return True
    if cone.is_ray:
        # A halfline has interior only in 1-D.
        return cone.dim == 1
    # max t st C u + t <= 0, |u|_inf <= 1; interior nonempty iff t* > margin.
    return _interior_margin(cone.C) > DISJOINT_MARGIN


def _interior_margin(C: np.ndarray) -> float:
    """Largest t with C u <= -t for some u in the unit box (0 if none)."""
    p, m = C.shape
    if p == 0:
        return 1.0
    # Variables (u, t); maximize t.
    c = np.zeros(m + 1)
    c[m] = -1.0
    A_ub = np.hstack([C, np.ones((p, 1))])
    b_ub = np.zeros(p)
    bounds = [(-1.0, 1.0)] * m + [(None, None)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not res.success:
        return 0.0
    return float(res.x[m])


def overlapping_interiors(cones) -> list:
    """Pairs (i, j) whose interiors intersect, via a pairwise feasibility LP.

    Ray cones in dimension >= 2 have empty interior and never overlap anything.
    """
    cones = list(cones)
    dims = {c.dim for c in cones}
    if len(dims) > 1:
        raise ValueError("all cones must share one ambient dimension")
    pairs = []
    for i in range(len(cones)):
        for j in range(i + 1, len(cones)):
            ci, cj = cones[i], cones[j]
            if not (_has_interior(ci) and _has_interior(cj)):
                continue
            if ci.is_unconstrained or cj.is_unconstrained:
                # R^m overlaps any cone that has interior at all.
                pairs.append((i, j))
                continue
            stacked = np.vstack([ci.C, cj.C])
            if _interior_margin(stacked) > DISJOINT_MARGIN:
                pairs.append((i, j))
    return pairs


def interiors_disjoint(cones) -> bool:
    """True iff no two cones share an interior point (pairwise check)."""
    return len(overlapping_interiors(cones)) == 0
