"""Continuous LTI systems, zero-order-hold discretization, and observability tools."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

__all__ = [
    "LtiSystem",
    "DiscreteDynamics",
    "skew",
    "station_dynamics",
    "zoh_discretize",
    "observability_matrix",
    "observability_rank",
    "pbh_observable",
    "unobservable_subspace",
    "rank_tolerance",
]


def _as_matrix(value, name: str) -> np.ndarray:
    arr = np.atleast_2d(np.asarray(value, dtype=float))
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must have finite entries")
    return arr


@dataclass(frozen=True)
class LtiSystem:
    """Continuous-time linear system x' = A x + B (sum of inputs) + w.

    Parameters
    ----------
    A : ndarray, shape (n, n)
        State matrix.
    B : ndarray, shape (n, m)
        Input matrix, shared by every input channel.
    w : ndarray, shape (n,), optional
        Constant exogenous state rate. Defaults to zero.
    """

    A: np.ndarray
    B: np.ndarray
    w: np.ndarray = None

    def __post_init__(self):
        A = _as_matrix(self.A, "A")
        B = _as_matrix(self.B, "B")
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError(f"A must be square, got shape {A.shape}")
        if B.shape[0] != n:
            raise ValueError(f"B must have {n} rows, got shape {B.shape}")
        w = np.zeros(n) if self.w is None else np.asarray(self.w, dtype=float).reshape(-1)
        if w.shape != (n,):
            raise ValueError(f"w must have {n} entries, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("w must have finite entries")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]


@dataclass(frozen=True)
class DiscreteDynamics:
    """Exact ZOH discretization x[k+1] = Ad x[k] + Bd u[k] + wd over N steps of dt."""

    Ad: np.ndarray
    Bd: np.ndarray
    wd: np.ndarray
    dt: float
    N: int

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.N < 1:
            raise ValueError("N must be at least 1")


def skew(v) -> np.ndarray:
    """Skew-symmetric cross-product matrix S(v) with S(v) x = v cross x."""
    v = np.asarray(v, dtype=float).reshape(3)
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


def station_dynamics(omega) -> LtiSystem:
    """Relative translational dynamics in a frame rotating at constant rate omega.

    State is (position, velocity) relative to the rotating frame origin; the
    input enters as commanded acceleration. Centrifugal and Coriolis terms give

        A = [[0, I], [-S(w)^2, -2 S(w)]],   B = [[0], [I]]

    with S(w) the cross-product matrix of the angular rate.

    Parameters
    ----------
    omega : array_like, shape (3,)
        Frame angular rate in rad/s.

    Returns
    -------
    LtiSystem
        Six-state, three-input system with w = 0.
    """
    S = skew(omega)
    Z = np.zeros((3, 3))
    I3 = np.eye(3)
    A = np.block([[Z, I3], [-S @ S, -2.0 * S]])
    B = np.vstack([Z, I3])
    return LtiSystem(A, B)


def zoh_discretize(sys: LtiSystem, dt: float, N: int = 1) -> DiscreteDynamics:
    """Exact zero-order-hold discretization via the augmented matrix exponential.

    Builds exp of [[A, B, w], [0, 0, 0], [0, 0, 0]] * dt and reads off
    Ad = exp(A dt), Bd = integral of exp(A s) B ds, wd = integral of exp(A s) w ds.

    Parameters
    ----------
    sys : LtiSystem
        Continuous system.
    dt : float
        Step duration, must be positive.
    N : int, optional
        Number of steps the grid will use (stored for bookkeeping).

    Returns
    -------
    DiscreteDynamics
    """
    if not np.isfinite(dt) or dt <= 0:
        raise ValueError("dt must be positive and finite")
    if N < 1:
        raise ValueError("N must be at least 1")
    n, m = sys.n, sys.m
    aug = np.zeros((n + m + 1, n + m + 1))
    aug[:n, :n] = sys.A
    aug[:n, n : n + m] = sys.B
    aug[:n, n + m] = sys.w
    E = expm(aug * dt)
    return DiscreteDynamics(
        Ad=E[:n, :n],
        Bd=E[:n, n : n + m],
        wd=E[:n, n + m],
        dt=float(dt),
        N=int(N),
    )


def rank_tolerance(M: np.ndarray, sigma_max: float) -> float:
    """Singular values below max(rows, cols) * eps * sigma_max count as zero."""
    return max(M.shape) * np.finfo(float).eps * sigma_max


def observability_matrix(F: np.ndarray, H: np.ndarray) -> np.ndarray:
    """Stacked observability matrix [H; H F; ...; H F^(n-1)] of the pair (F, H)."""
    F = _as_matrix(F, "F")
    H = _as_matrix(H, "H")
    n = F.shape[0]
    if F.shape != (n, n):
        raise ValueError("F must be square")
    if H.shape[1] != n:
        raise ValueError(f"H must have {n} columns, got shape {H.shape}")
    blocks = []
    Hk = H
    for _ in range(n):
        blocks.append(Hk)
        Hk = Hk @ F
    return np.vstack(blocks)


def observability_rank(F: np.ndarray, H: np.ndarray, rtol: float = None) -> int:
    """Numerical rank of the observability matrix of (F, H).

    The pair is observable iff the returned rank equals the state dimension.

    Parameters
    ----------
    F, H : ndarray
        State and output maps.
    rtol : float, optional
        Override for the rank tolerance. By default singular values below
        max(shape) * eps * sigma_max are treated as zero.
    """
    O = observability_matrix(F, H)
    if O.size == 0:
        return 0
    s = np.linalg.svd(O, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    tol = rank_tolerance(O, s[0]) if rtol is None else rtol * s[0]
    return int(np.count_nonzero(s > tol))


def pbh_observable(F: np.ndarray, H: np.ndarray, rtol: float = None) -> bool:
    """Eigenvector observability test: rank [F - lambda I; H] = n for every eigenvalue."""
    F = _as_matrix(F, "F")
    H = _as_matrix(H, "H")
    n = F.shape[0]
    for lam in np.linalg.eigvals(F):
        M = np.vstack([F - lam * np.eye(n), H]).astype(complex)
        s = np.linalg.svd(M, compute_uv=False)
        if s.size == 0 or s[0] == 0.0:
            return n == 0
        tol = rank_tolerance(M, s[0].real) if rtol is None else rtol * s[0].real
        if np.count_nonzero(s > tol) < n:
            return False
    return True


def unobservable_subspace(F: np.ndarray, H: np.ndarray, rtol: float = None) -> np.ndarray:
    """Orthonormal basis (n x d) of the null space of the observability matrix.

    d = n - observability_rank(F, H); the returned columns satisfy
    H F^k V = 0 for k = 0..n-1.
    """
    O = observability_matrix(F, H)
    n = O.shape[1]
    if O.size == 0:
        return np.eye(n)
    U, s, Vt = np.linalg.svd(O)
    if s.size == 0 or s[0] == 0.0:
        return np.eye(n)
    tol = rank_tolerance(O, s[0]) if rtol is None else rtol * s[0]
    rank = int(np.count_nonzero(s > tol))
    return Vt[rank:].T.copy()
