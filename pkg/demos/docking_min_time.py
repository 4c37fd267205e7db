"""Minimum-time docking to a rotating station with twelve thrusters.

The chaser carries twelve fixed thrust directions (four canted off the
approach axis, four canted off its opposite, four lateral) and may fire at
most four at once; each firing thruster must produce between 1 and 10 mm/s^2.
Rather than search the binary on/off combinations, the relaxation is solved
as a single second-order cone program, then verified a posteriori to carry
the semi-continuous bang-bang structure the original problem demands.

Run:
    python3 demos/docking_min_time.py
"""

import time

import numpy as np

import lcvx


def main():
    cfg = lcvx.load_config(lcvx.docking_preset())
    spec = cfg.spec
    print(f"{spec.M} thrusters, at most {spec.K} active per node")
    print(f"per-thruster magnitude while on: [{spec.rho1}, {spec.rho2}] m/s^2")
    print(f"approach from {spec.x0[:3]} m, grid N = {cfg.N}")

    # The a-priori checks certify, before any solve, that the relaxation
    # recovers a solution of the original semi-continuous problem.
    summary = lcvx.check_all(spec)
    print("\na-priori optimality-structure conditions:")
    for rep in summary.reports.values():
        print(f"  {rep.name}: {rep.status}")
    if not summary.all_hold:
        print("  (continuing; verification below is the ground truth)")

    t0 = time.perf_counter()
    sol = lcvx.min_time(spec, N=cfg.N, bracket=cfg.bracket, tol_t=cfg.tol_t)
    wall = time.perf_counter() - t0
    print(f"\nminimum docking time: {sol.t_f:.2f} s ({wall:.1f} s wall clock,")
    print(f"  {len(sol.search['probes'])} fixed-time probes, {sol.N} nodes each)")

    trace = lcvx.extract_primer(spec, sol.transcription, sol.conic_solution)
    report = lcvx.verify_lossless(sol, spec, trace=trace)
    print("\na-posteriori structure verification:")
    print(f"  conformance (off or on-at-bounds): {report.conformance:.4f}")
    print(f"  activation budget respected: {report.cardinality_ok}")
    print(f"  pointing sets respected: {report.pointing_ok}")
    print(f"  active set matches top-{spec.K} gains: {report.gain_agreement:.4f}")

    # How the budget is spent: nodes by number of firing thrusters.
    active = (sol.gamma >= 0.5).sum(axis=1)
    for count in range(int(active.max()) + 1):
        nodes = int((active == count).sum())
        if nodes:
            print(f"  {nodes:4d} nodes with {count} thrusters firing")

    touchdown = sol.X[-1]
    print(f"\nfinal position error: {np.linalg.norm(touchdown[:3]):.2e} m")
    print(f"final velocity: {touchdown[3:]} m/s")

    lcvx.write_trajectory_csv(sol, "docking_trajectory.csv", trace)
    print("\nwrote docking_trajectory.csv")


if __name__ == "__main__":
    main()
