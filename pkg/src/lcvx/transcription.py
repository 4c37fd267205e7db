"""Build the discrete relaxed problem as a conic program for a fixed final time.

Decision variables, all scaled for interior-point conditioning:

    x[0..N]       states (divided componentwise by the state scales)
    u[k, i]       inputs per node and channel (divided by rho2)
    sigma[k, i]   norm slacks (divided by rho2)
    gamma[k, i]   activation levels (already in [0, 1])

Per node: exact ZOH dynamics equalities; gamma rho1 <= sigma <= gamma rho2;
0 <= gamma <= 1; sum_i gamma <= K; the pointing constraint of each cone; and
one second-order cone ||u|| <= sigma per (node, input). Activation levels stay
continuous: binariness is meant to emerge at the optimum and is checked after
the fact, never imposed here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .conic import ConicProgram
from .dynamics import DiscreteDynamics, zoh_discretize
from .problem import ProblemSpec

__all__ = ["Transcription", "transcribe"]


@dataclass(frozen=True)
class Transcription:
    """A transcribed instance: the conic program plus every map needed to read it back."""

    spec: ProblemSpec
    t_f: float
    N: int
    disc: DiscreteDynamics
    prog: ConicProgram
    x_scale: np.ndarray
    u_scale: float
    obj_scale: float
    eq_rows: dict
    ineq_rows: dict
    soc_rows: dict
    epi_index: int

    # ----- variable indexing -----

    @property
    def n(self) -> int:
        return self.spec.sys.n

    @property
    def m(self) -> int:
        return self.spec.sys.m

    @property
    def M(self) -> int:
        return self.spec.M

    def x_slice(self, k: int) -> slice:
        return slice(k * self.n, (k + 1) * self.n)

    def u_slice(self, k: int, i: int) -> slice:
        base = self.n * (self.N + 1) + (k * self.M + i) * self.m
        return slice(base, base + self.m)

    def sigma_index(self, k: int, i: int) -> int:
        return self.n * (self.N + 1) + self.N * self.M * self.m + k * self.M + i

    def gamma_index(self, k: int, i: int) -> int:
        return self.sigma_index(k, i) + self.N * self.M

    # ----- packing and unpacking -----

    def extract(self, z: np.ndarray):
        """Split a primal vector into unscaled (X, U, sigma, gamma) arrays."""
        n, m, M, N = self.n, self.m, self.M, self.N
        X = np.empty((N + 1, n))
        U = np.empty((N, M, m))
        S = np.empty((N, M))
        Gm = np.empty((N, M))
        for k in range(N + 1):
            X[k] = z[self.x_slice(k)] * self.x_scale
        for k in range(N):
            for i in range(M):
                U[k, i] = z[self.u_slice(k, i)] * self.u_scale
                S[k, i] = z[self.sigma_index(k, i)] * self.u_scale
                Gm[k, i] = z[self.gamma_index(k, i)]
        return X, U, S, Gm

    def pack(self, X, U, S, Gm, epi: float = 0.0) -> np.ndarray:
        """Assemble a scaled primal vector from unscaled trajectory arrays."""
        z = np.zeros(self.prog.num_vars)
        for k in range(self.N + 1):
            z[self.x_slice(k)] = np.asarray(X[k], dtype=float) / self.x_scale
        for k in range(self.N):
            for i in range(self.M):
                z[self.u_slice(k, i)] = np.asarray(U[k][i], dtype=float) / self.u_scale
                z[self.sigma_index(k, i)] = S[k][i] / self.u_scale
                z[self.gamma_index(k, i)] = Gm[k][i]
        if self.epi_index is not None:
            z[self.epi_index] = epi
        return z

    def constraint_residuals(self, X, U, S, Gm) -> dict:
        """Residuals of the discrete problem constraints in natural units.

        Each entry is normalized by its family's scale so the values are
        comparable to solver tolerances regardless of physical magnitudes.
        """
        spec = self.spec
        n, M, N = self.n, self.M, self.N
        X = np.asarray(X, dtype=float).reshape(N + 1, n)
        U = np.asarray(U, dtype=float).reshape(N, M, self.m)
        S = np.asarray(S, dtype=float).reshape(N, M)
        Gm = np.asarray(Gm, dtype=float).reshape(N, M)
        d = self.disc
        x_norm = 1.0 + float(np.max(np.abs(X / self.x_scale)))
        dyn = 0.0
        for k in range(N):
            pred = d.Ad @ X[k] + d.Bd @ U[k].sum(axis=0) + d.wd
            dyn = max(dyn, float(np.max(np.abs((X[k + 1] - pred) / self.x_scale))))
        res = {"dynamics": dyn / x_norm}
        res["initial_state"] = float(np.max(np.abs((X[0] - spec.x0) / self.x_scale))) / x_norm
        term = spec.terminal
        if term.num_rows > 0:
            lhs = term.H_x @ X[N]
            rhs = term.rhs(self.t_f)
            scale = 1.0 + float(np.max(np.abs(rhs)))
            res["terminal"] = float(np.max(np.abs(lhs - rhs))) / scale
        else:
            res["terminal"] = 0.0
        rho1, rho2 = spec.rho1, spec.rho2
        res["sigma_lower"] = float(np.max(Gm * rho1 - S, initial=0.0)) / rho2
        res["sigma_upper"] = float(np.max(S - Gm * rho2, initial=0.0)) / rho2
        res["gamma_bounds"] = float(max(np.max(-Gm, initial=0.0), np.max(Gm - 1.0, initial=0.0)))
        res["cardinality"] = float(np.max(Gm.sum(axis=1) - spec.K, initial=0.0))
        norms = np.linalg.norm(U, axis=2)
        res["input_norm"] = float(np.max(norms - S, initial=0.0)) / rho2
        pointing = 0.0
        for i, cone in enumerate(spec.cones):
            if cone.is_ray and self.m > 1:
                P = _perp_basis(cone.ray)
                for k in range(N):
                    pointing = max(pointing, float(np.max(np.abs(P @ U[k, i]))))
                    pointing = max(pointing, max(-float(cone.ray @ U[k, i]), 0.0))
            elif cone.C.shape[0] > 0:
                for k in range(N):
                    pointing = max(pointing, float(np.max(cone.C @ U[k, i], initial=0.0)))
        res["pointing"] = pointing / rho2
        res["max"] = max(res.values())
        return res


def _perp_basis(ray: np.ndarray) -> np.ndarray:
    """Orthonormal rows spanning the hyperplane perpendicular to a unit ray."""
    return np.linalg.svd(ray.reshape(1, -1))[2][1:]


def transcribe(
    spec: ProblemSpec,
    t_f: float,
    N: int,
    min_time_tie_break: bool = True,
) -> Transcription:
    """Transcribe the relaxed problem at a fixed final time into a conic program.

    Parameters
    ----------
    spec : ProblemSpec
    t_f : float
        Final time, > 0. The grid step is t_f / N.
    N : int
        Number of control intervals, >= 2.
    min_time_tie_break : bool, optional
        For the minimum-time cost the fixed-t_f subproblem is a pure
        feasibility question; by default a minimum-total-sigma objective is
        added to select a bang-bang vertex with informative duals. Pass False
        for a literal zero objective.

    Returns
    -------
    Transcription
    """
    if not np.isfinite(t_f) or t_f <= 0:
        raise ValueError("t_f must be positive and finite")
    if N < 2:
        raise ValueError("N must be at least 2")
    sys = spec.sys
    n, m, M = sys.n, sys.m, spec.M
    dt = t_f / N
    disc = zoh_discretize(sys, dt, N)

    x_scale = spec.state_scales()
    u_scale = spec.rho2
    Dx_inv = 1.0 / x_scale
    Ad_s = disc.Ad * np.outer(Dx_inv, x_scale)
    Bd_s = (disc.Bd * u_scale) * Dx_inv[:, None]
    wd_s = disc.wd * Dx_inv

    cost = spec.cost
    quadratic = cost.kind == "quadratic"
    nz = n * (N + 1) + N * M * (m + 2) + (1 if quadratic else 0)
    epi_index = nz - 1 if quadratic else None

    def x_slice(k):
        return slice(k * n, (k + 1) * n)

    def u_start(k, i):
        return n * (N + 1) + (k * M + i) * m

    def s_index(k, i):
        return n * (N + 1) + N * M * m + k * M + i

    def g_index(k, i):
        return s_index(k, i) + N * M

    # ----- equality block -----
    eq_r, eq_c, eq_v, beq = [], [], [], []
    eq_rows = {}
    row = 0

    def add_entries(r0, rows_idx, cols_idx, values):
        eq_r.extend(np.asarray(rows_idx) + r0)
        eq_c.extend(cols_idx)
        eq_v.extend(values)

    # initial state
    eq_rows["initial_state"] = slice(row, row + n)
    for j in range(n):
        eq_r.append(row + j)
        eq_c.append(j)
        eq_v.append(1.0)
    beq.extend(spec.x0 * Dx_inv)
    row += n

    # dynamics: x[k+1] - Ad x[k] - Bd sum_i u[k,i] = wd (scaled)
    dyn_slices = []
    for k in range(N):
        dyn_slices.append(slice(row, row + n))
        for j in range(n):
            eq_r.append(row + j)
            eq_c.append((k + 1) * n + j)
            eq_v.append(1.0)
        rr, cc = np.nonzero(Ad_s)
        add_entries(row, rr, cc + k * n, -Ad_s[rr, cc])
        rr, cc = np.nonzero(Bd_s)
        for i in range(M):
            add_entries(row, rr, cc + u_start(k, i), -Bd_s[rr, cc])
        beq.extend(wd_s)
        row += n
    eq_rows["dynamics"] = tuple(dyn_slices)

    # terminal boundary rows at x[N]
    term = spec.terminal
    term_rows = 0
    term_start = row
    rhs_full = term.rhs(t_f)
    for j in range(term.num_rows):
        coeffs = term.H_x[j] * x_scale
        if np.max(np.abs(coeffs)) <= 1e-14:
            # Row constrains no state; it must be consistent at this t_f.
            if abs(rhs_full[j]) > 1e-9 * (1.0 + abs(t_f)):
                raise ValueError(
                    f"terminal row {j} fixes no state and is inconsistent at t_f={t_f}"
                )
            continue
        scale = float(np.max(np.abs(coeffs)))
        nz_idx = np.flatnonzero(coeffs)
        add_entries(row, np.zeros(nz_idx.size, dtype=int), N * n + nz_idx, coeffs[nz_idx] / scale)
        beq.append(rhs_full[j] / scale)
        row += 1
        term_rows += 1
    eq_rows["terminal"] = slice(term_start, row)

    # ray pointing, perpendicular part: P u[k,i] = 0
    perp = {}
    for i, cone in enumerate(spec.cones):
        if cone.is_ray and m > 1:
            P = _perp_basis(cone.ray)
            for k in range(N):
                perp[(k, i)] = slice(row, row + m - 1)
                rr, cc = np.nonzero(P)
                add_entries(row, rr, cc + u_start(k, i), P[rr, cc])
                beq.extend(np.zeros(m - 1))
                row += m - 1
    eq_rows["pointing_perp"] = perp
    neq = row

    # ----- nonnegative block of G -----
    g_r, g_c, g_v, h = [], [], [], []
    row = 0
    ineq_rows = {}
    rho1_s = spec.rho1 / spec.rho2

    ineq_rows["sigma_lower"] = slice(row, row + N * M)
    for k in range(N):
        for i in range(M):
            g_r.extend([row, row])
            g_c.extend([g_index(k, i), s_index(k, i)])
            g_v.extend([rho1_s, -1.0])
            h.append(0.0)
            row += 1

    ineq_rows["sigma_upper"] = slice(row, row + N * M)
    for k in range(N):
        for i in range(M):
            g_r.extend([row, row])
            g_c.extend([s_index(k, i), g_index(k, i)])
            g_v.extend([1.0, -1.0])
            h.append(0.0)
            row += 1

    ineq_rows["gamma_lower"] = slice(row, row + N * M)
    for k in range(N):
        for i in range(M):
            g_r.append(row)
            g_c.append(g_index(k, i))
            g_v.append(-1.0)
            h.append(0.0)
            row += 1

    ineq_rows["gamma_upper"] = slice(row, row + N * M)
    for k in range(N):
        for i in range(M):
            g_r.append(row)
            g_c.append(g_index(k, i))
            g_v.append(1.0)
            h.append(1.0)
            row += 1

    ineq_rows["cardinality"] = slice(row, row + N)
    for k in range(N):
        for i in range(M):
            g_r.append(row)
            g_c.append(g_index(k, i))
            g_v.append(1.0)
        h.append(float(spec.K))
        row += 1

    pointing = {}
    for i, cone in enumerate(spec.cones):
        if cone.is_ray:
            # Axial part of the ray constraint: -(n' u) <= 0.
            for k in range(N):
                pointing[(k, i)] = slice(row, row + 1)
                nz_idx = np.flatnonzero(cone.ray)
                g_r.extend([row] * nz_idx.size)
                g_c.extend(u_start(k, i) + nz_idx)
                g_v.extend(-cone.ray[nz_idx])
                h.append(0.0)
                row += 1
        elif cone.C.shape[0] > 0:
            C = cone.C
            for k in range(N):
                pointing[(k, i)] = slice(row, row + C.shape[0])
                rr, cc = np.nonzero(C)
                g_r.extend(rr + row)
                g_c.extend(cc + u_start(k, i))
                g_v.extend(C[rr, cc])
                h.extend(np.zeros(C.shape[0]))
                row += C.shape[0]
    ineq_rows["pointing"] = pointing
    nonneg_rows = row

    # ----- second-order cone blocks: (sigma, u) per (k, i) -----
    soc_rows = {}
    cones_list = [("nonneg", nonneg_rows)] if nonneg_rows else []
    for k in range(N):
        for i in range(M):
            soc_rows[(k, i)] = (row, m + 1)
            g_r.append(row)
            g_c.append(s_index(k, i))
            g_v.append(-1.0)
            h.append(0.0)
            for j in range(m):
                g_r.append(row + 1 + j)
                g_c.append(u_start(k, i) + j)
                g_v.append(-1.0)
                h.append(0.0)
            row += m + 1
            cones_list.append(("soc", m + 1))

    # ----- objective -----
    c = np.zeros(nz)
    obj_scale = 1.0
    epi_rows = None
    if cost.kind == "min_time":
        if min_time_tie_break:
            for k in range(N):
                for i in range(M):
                    c[s_index(k, i)] = 1.0 / (N * M)
    elif cost.kind == "affine":
        c[x_slice(N)] = cost.q * x_scale
    else:
        W = cost.weight(n)
        Wx = W * x_scale[None, :]
        obj_scale = max(1.0, float(np.max(np.abs(Wx))))
        p = W.shape[0]
        epi_rows = (row, p + 1)
        g_r.append(row)
        g_c.append(epi_index)
        g_v.append(-1.0)
        h.append(0.0)
        rr, cc = np.nonzero(Wx)
        g_r.extend(rr + row + 1)
        g_c.extend(N * n + cc)
        g_v.extend(-Wx[rr, cc] / obj_scale)
        h.extend(-(W @ cost.target) / obj_scale)
        row += p + 1
        cones_list.append(("soc", p + 1))
        c[epi_index] = 1.0
    soc_rows["objective_epigraph"] = epi_rows

    names = _variable_names(n, m, M, N, quadratic)
    prog = ConicProgram(
        c=c,
        Aeq=sparse.csc_matrix(
            (eq_v, (eq_r, eq_c)), shape=(neq, nz)
        ),
        beq=np.asarray(beq),
        G=sparse.csc_matrix((g_v, (g_r, g_c)), shape=(row, nz)),
        h=np.asarray(h),
        cones=tuple(cones_list),
        var_names=names,
    )
    return Transcription(
        spec=spec,
        t_f=float(t_f),
        N=int(N),
        disc=disc,
        prog=prog,
        x_scale=x_scale,
        u_scale=u_scale,
        obj_scale=obj_scale,
        eq_rows=eq_rows,
        ineq_rows=ineq_rows,
        soc_rows=soc_rows,
        epi_index=epi_index,
    )


def _variable_names(n, m, M, N, quadratic) -> tuple:
    names = []
    for k in range(N + 1):
        names.extend(f"x[{k}][{j}]" for j in range(n))
    for k in range(N):
        for i in range(M):
            names.extend(f"u[{k}][{i}][{j}]" for j in range(m))
    for k in range(N):
        names.extend(f"sigma[{k}][{i}]" for i in range(M))
    for k in range(N):
        names.extend(f"gamma[{k}][{i}]" for i in range(M))
    if quadratic:
        names.append("cost_epigraph")
    return tuple(names)
