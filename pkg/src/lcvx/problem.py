"""Problem containers: cost kinds, terminal boundary map, and the full problem spec."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import LtiSystem
from .geometry import PointingCone, interiors_disjoint

__all__ = [
    "MinimumTimeCost",
    "AffineTerminalCost",
    "QuadraticTerminalCost",
    "TerminalSpec",
    "ProblemSpec",
]


@dataclass(frozen=True)
class MinimumTimeCost:
    """Minimize the final time t_f."""

    kind = "min_time"

    def gradient(self, n: int, x_tf=None) -> np.ndarray:
        v = np.zeros(n + 1)
        v[n] = 1.0
        return v


@dataclass(frozen=True)
class AffineTerminalCost:
    """Minimize q' x(t_f) + time_weight * t_f."""

    q: np.ndarray
    time_weight: float = 0.0

    kind = "affine"

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).reshape(-1)
        if not np.all(np.isfinite(q)) or not np.isfinite(self.time_weight):
            raise ValueError("affine cost coefficients must be finite")
        if np.all(q == 0.0) and self.time_weight == 0.0:
            raise ValueError("affine cost must have a nonzero gradient")
        object.__setattr__(self, "q", q)

    def gradient(self, n: int, x_tf=None) -> np.ndarray:
        if self.q.shape[0] != n:
            raise ValueError(f"cost vector has length {self.q.shape[0]}, state has {n}")
        return np.concatenate([self.q, [self.time_weight]])


@dataclass(frozen=True)
class QuadraticTerminalCost:
    """Minimize ||W (x(t_f) - target)||^2 (W defaults to identity)."""

    target: np.ndarray
    W: np.ndarray = None

    kind = "quadratic"

    def __post_init__(self):
        target = np.asarray(self.target, dtype=float).reshape(-1)
        if not np.all(np.isfinite(target)):
            raise ValueError("target must be finite")
        object.__setattr__(self, "target", target)
        if self.W is not None:
            W = np.atleast_2d(np.asarray(self.W, dtype=float))
            if W.shape[1] != target.shape[0] or not np.all(np.isfinite(W)):
                raise ValueError("weight matrix must be finite with one column per state")
            if np.all(W == 0.0):
                raise ValueError("weight matrix must be nonzero")
            object.__setattr__(self, "W", W)

    def weight(self, n: int) -> np.ndarray:
        return np.eye(n) if self.W is None else self.W

    def value(self, x_tf) -> float:
        x_tf = np.asarray(x_tf, dtype=float).reshape(-1)
        W = self.weight(x_tf.shape[0])
        return float(np.sum((W @ (x_tf - self.target)) ** 2))

    def gradient(self, n: int, x_tf=None) -> np.ndarray:
        if x_tf is None:
            return None  # gradient depends on the terminal state
        x_tf = np.asarray(x_tf, dtype=float).reshape(-1)
        W = self.weight(n)
        return np.concatenate([2.0 * W.T @ W @ (x_tf - self.target), [0.0]])


@dataclass(frozen=True)
class TerminalSpec:
    """Affine terminal boundary map plus the terminal cost.

    The boundary map is H_x x(t_f) + h_t t_f + h0 = 0 (row-wise). `pins_time`
    marks problems whose final time is fixed by the boundary conditions; it
    contributes a pure time-gradient row to the transversality check without
    baking a numeric t_f into the problem data (t_f is a solve argument).
    """

    H_x: np.ndarray
    h_t: np.ndarray
    h0: np.ndarray
    cost: object
    pins_time: bool = False

    def __post_init__(self):
        H_x = np.atleast_2d(np.asarray(self.H_x, dtype=float))
        k = H_x.shape[0]
        h_t = np.asarray(self.h_t, dtype=float).reshape(-1)
        h0 = np.asarray(self.h0, dtype=float).reshape(-1)
        if h_t.shape != (k,) or h0.shape != (k,):
            raise ValueError("h_t and h0 must have one entry per boundary row")
        for name, arr in (("H_x", H_x), ("h_t", h_t), ("h0", h0)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite")
        if not hasattr(self.cost, "kind"):
            raise ValueError("cost must be one of the cost classes")
        object.__setattr__(self, "H_x", H_x)
        object.__setattr__(self, "h_t", h_t)
        object.__setattr__(self, "h0", h0)

    @classmethod
    def fixed_state(cls, x_f, cost, pins_time: bool = False) -> "TerminalSpec":
        """Fully fixed terminal state x(t_f) = x_f."""
        x_f = np.asarray(x_f, dtype=float).reshape(-1)
        n = x_f.shape[0]
        return cls(np.eye(n), np.zeros(n), -x_f, cost, pins_time)

    @classmethod
    def fix_components(cls, n: int, indices, values, cost, pins_time: bool = False) -> "TerminalSpec":
        """Fix selected state components at t_f, leave the rest free."""
        indices = list(indices)
        values = np.asarray(values, dtype=float).reshape(-1)
        if len(indices) != values.shape[0]:
            raise ValueError("indices and values must have equal length")
        H = np.zeros((len(indices), n))
        for row, idx in enumerate(indices):
            if not 0 <= idx < n:
                raise ValueError(f"state index {idx} out of range for n={n}")
            H[row, idx] = 1.0
        return cls(H, np.zeros(len(indices)), -values, cost, pins_time)

    @classmethod
    def free(cls, n: int, cost, pins_time: bool = False) -> "TerminalSpec":
        """No terminal equality constraints."""
        return cls(np.zeros((0, n)), np.zeros(0), np.zeros(0), cost, pins_time)

    @property
    def num_rows(self) -> int:
        return self.H_x.shape[0]

    def rhs(self, t_f: float) -> np.ndarray:
        """Right-hand side e of H_x x(t_f) = e at a concrete final time."""
        return -self.h0 - self.h_t * t_f

    def normal_columns(self, n: int) -> np.ndarray:
        """Columns spanning the boundary-map normal directions in (x, t) space."""
        cols = [np.concatenate([self.H_x[j], [self.h_t[j]]]) for j in range(self.num_rows)]
        if self.pins_time:
            time_col = np.zeros(n + 1)
            time_col[n] = 1.0
            cols.append(time_col)
        if not cols:
            return np.zeros((n + 1, 0))
        return np.column_stack(cols)


@dataclass(frozen=True)
class ProblemSpec:
    """A trajectory problem: dynamics, M cone-constrained semi-continuous inputs,
    norm bounds, an activation budget, and boundary conditions.

    Each input u_i is either off or has norm in [rho1, rho2] and direction in
    cone i; at most K inputs may be on at once. The bounds must be distinct
    and positive, cone interiors pairwise disjoint.
    """

    sys: LtiSystem
    cones: tuple
    rho1: float
    rho2: float
    K: int
    x0: np.ndarray
    terminal: TerminalSpec
    x_scale: np.ndarray = None

    def __post_init__(self):
        cones = tuple(self.cones)
        if len(cones) == 0:
            raise ValueError("at least one input cone is required")
        for cone in cones:
            if not isinstance(cone, PointingCone):
                raise ValueError("cones must be PointingCone instances")
            if cone.dim != self.sys.m:
                raise ValueError(
                    f"cone dimension {cone.dim} does not match input dimension {self.sys.m}"
                )
        if not (0.0 < self.rho1 < self.rho2):
            raise ValueError("norm bounds must satisfy 0 < rho1 < rho2 (distinct)")
        if not (1 <= self.K <= len(cones)):
            raise ValueError(f"K must be in [1, {len(cones)}]")
        x0 = np.asarray(self.x0, dtype=float).reshape(-1)
        if x0.shape[0] != self.sys.n:
            raise ValueError(f"x0 must have {self.sys.n} entries")
        if not np.all(np.isfinite(x0)):
            raise ValueError("x0 must be finite")
        if self.terminal.H_x.shape[1] != self.sys.n:
            raise ValueError("terminal boundary map does not match the state dimension")
        if not interiors_disjoint(cones):
            raise ValueError("input cone interiors must be pairwise disjoint")
        object.__setattr__(self, "cones", cones)
        object.__setattr__(self, "x0", x0)
        if self.x_scale is not None:
            xs = np.asarray(self.x_scale, dtype=float).reshape(-1)
            if xs.shape[0] != self.sys.n or np.any(xs <= 0) or not np.all(np.isfinite(xs)):
                raise ValueError("x_scale must be positive and finite with one entry per state")
            object.__setattr__(self, "x_scale", xs)

    @property
    def M(self) -> int:
        return len(self.cones)

    @property
    def cost(self):
        return self.terminal.cost

    def state_scales(self) -> np.ndarray:
        """Per-component state scales: explicit hints, else magnitudes of the
        boundary data with a floor of 1."""
        if self.x_scale is not None:
            return self.x_scale
        n = self.sys.n
        scale = np.maximum(np.abs(self.x0), 1.0)
        term = self.terminal
        for j in range(term.num_rows):
            row = term.H_x[j]
            nz = np.flatnonzero(row)
            if nz.size == 1:
                # Row fixes a single component; its target magnitude informs the scale.
                target = abs(term.h0[j] / row[nz[0]])
                scale[nz[0]] = max(scale[nz[0]], target)
        if self.cost.kind == "quadratic":
            scale = np.maximum(scale, np.abs(self.cost.target))
        return scale
