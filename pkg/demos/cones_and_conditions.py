"""Pointing cones, projections, and the four a-priori structure conditions.

The toolkit's guarantee rests on four checkable conditions. This script
builds small systems that satisfy and violate each one, so the checker
output can be read against an understanding of what actually goes wrong:
an unobservable adjoint, a gain that can vanish, two inputs whose gains
tie forever, and a terminal set aligned with the cost gradient.

Run:
    python3 demos/cones_and_conditions.py
"""

import numpy as np

import lcvx
from lcvx.conditions import (
    check_adjoint_observability,
    check_gain_nondegeneracy,
    check_gain_separation,
    check_transversality,
)
from lcvx.geometry import project_gain, project_onto_cone


def show(report):
    print(f"  {report.name}: {report.status}")
    print(f"    {report.message}")


def main():
    # Projections drive everything: an input's gain is the norm of the
    # primer vector's projection onto that input's pointing cone.
    up = lcvx.PointingCone.from_ray([0.0, 1.0])
    tilted = lcvx.PointingCone.from_facets(np.array([[0.6, -0.8]]))
    y = np.array([1.0, 0.5])
    print("projection examples with y =", y)
    print(f"  onto the +y ray:        {project_onto_cone(up, y)} (gain {project_gain(up, y):.3f})")
    print(f"  onto a half-plane cone: {project_onto_cone(tilted, y)} (gain {project_gain(tilted, y):.3f})")
    print(f"  gain of -y on the ray:  {project_gain(up, -y):.3f} (points away, projects to apex)")

    # A healthy instance: double integrator, opposing thrust rays.
    sys = lcvx.LtiSystem(A=np.array([[0.0, 1.0], [0.0, 0.0]]), B=np.array([[0.0], [1.0]]))
    rays = (lcvx.PointingCone.from_ray([1.0]), lcvx.PointingCone.from_ray([-1.0]))
    print("\nhealthy instance (opposing 1-D rays):")
    show(check_adjoint_observability(sys))
    show(check_gain_nondegeneracy(sys, rays, K=1))
    show(check_gain_separation(sys, rays, K=1))
    term = lcvx.TerminalSpec.fixed_state([10.0, 0.0], lcvx.MinimumTimeCost())
    show(check_transversality(term, 2))

    # Pathology 1: no input authority. The adjoint output is identically
    # zero, so the gain carries no information at all.
    print("\npathology: B = 0")
    blind = lcvx.LtiSystem(A=sys.A, B=np.zeros((2, 1)))
    show(check_adjoint_observability(blind))

    # Pathology 2: duplicate thrust directions. Their gains are equal at
    # every instant, so no top-K rule can pick between them.
    print("\npathology: duplicate directions")
    A4 = np.zeros((4, 4))
    A4[0, 2] = A4[1, 3] = 1.0
    B4 = np.vstack([np.zeros((2, 2)), np.eye(2)])
    sys4 = lcvx.LtiSystem(A=A4, B=B4)
    dup = (lcvx.PointingCone.from_ray([0.0, 1.0]), lcvx.PointingCone.from_ray([0.0, 1.0]))
    show(check_gain_separation(sys4, dup, K=1))

    # Pathology 3: minimum time with every degree of freedom pinned. The
    # cost gradient lies inside the terminal normal space, so the usual
    # terminal-time optimality argument collapses.
    print("\npathology: minimum time with state and time both pinned")
    pinned = lcvx.TerminalSpec.fixed_state([10.0, 0.0], lcvx.MinimumTimeCost(), pins_time=True)
    show(check_transversality(pinned, 2))

    # The full-problem wrapper runs all four and aggregates.
    print("\ndocking preset, all four at once:")
    cfg = lcvx.load_config(lcvx.docking_preset())
    summary = lcvx.check_all(cfg.spec)
    for rep in summary.reports.values():
        show(rep)
    print(f"  all hold: {summary.all_hold}")


if __name__ == "__main__":
    main()
