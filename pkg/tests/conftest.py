"""Shared builders for the test suite."""

import numpy as np
import pytest

import lcvx


def double_integrator_1d() -> lcvx.LtiSystem:
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    B = np.array([[0.0], [1.0]])
    return lcvx.LtiSystem(A=A, B=B)


def double_integrator_2d() -> lcvx.LtiSystem:
    A = np.block([[np.zeros((2, 2)), np.eye(2)], [np.zeros((2, 4))]])
    B = np.vstack([np.zeros((2, 2)), np.eye(2)])
    return lcvx.LtiSystem(A=A, B=B)


def ray2(deg: float) -> lcvx.PointingCone:
    th = np.deg2rad(deg)
    return lcvx.PointingCone.from_ray([np.cos(th), np.sin(th)])


def opposing_rays_1d():
    return (lcvx.PointingCone.from_ray([1.0]), lcvx.PointingCone.from_ray([-1.0]))


def rest_to_rest_1d(d: float = 10.0) -> lcvx.ProblemSpec:
    """Single unconstrained input, rest at 0 to rest at d, minimum time."""
    term = lcvx.TerminalSpec.fixed_state([d, 0.0], lcvx.MinimumTimeCost())
    return lcvx.ProblemSpec(
        sys=double_integrator_1d(),
        cones=(lcvx.PointingCone.unconstrained(1),),
        rho1=0.3,
        rho2=1.0,
        K=1,
        x0=np.zeros(2),
        terminal=term,
    )


def planar_three_ray_spec() -> lcvx.ProblemSpec:
    """Three thrust rays 120 degrees apart, budget one active at a time,
    quadratic pull toward a position between two of the rays. The relaxation
    blends neighboring rays, so the root is genuinely fractional."""
    th = np.deg2rad(60.0)
    target = np.array([8.0 * np.cos(th), 8.0 * np.sin(th), 0.0, 0.0])
    cost = lcvx.QuadraticTerminalCost(
        target=target, W=np.array([[1.0, 0, 0, 0], [0, 1.0, 0, 0]])
    )
    term = lcvx.TerminalSpec.free(4, cost)
    return lcvx.ProblemSpec(
        sys=double_integrator_2d(),
        cones=(ray2(90.0), ray2(210.0), ray2(330.0)),
        rho1=0.3,
        rho2=1.0,
        K=1,
        x0=np.zeros(4),
        terminal=term,
    )


def push_past_reach_spec() -> lcvx.ProblemSpec:
    """Two opposing rays, budget one, quadratic pull toward an unreachable
    position. The unique optimum thrusts full-on the whole horizon, so the
    relaxation comes out exactly binary."""
    cost = lcvx.QuadraticTerminalCost(
        target=np.array([20.0, 0.0]), W=np.array([[1.0, 0.0]])
    )
    term = lcvx.TerminalSpec.free(2, cost)
    return lcvx.ProblemSpec(
        sys=double_integrator_1d(),
        cones=opposing_rays_1d(),
        rho1=0.3,
        rho2=1.0,
        K=1,
        x0=np.zeros(2),
        terminal=term,
    )


def small_impulse_spec() -> lcvx.ProblemSpec:
    """Two opposing rays, terminal velocity pinned below rho1 times one step's
    reach. Semi-continuity bites: binary patterns need an active node at the
    lower magnitude bound, while the relaxation may spread thrust thin."""
    cost = lcvx.MinimumTimeCost()
    term = lcvx.TerminalSpec.fix_components(2, [1], [0.15], cost)
    return lcvx.ProblemSpec(
        sys=double_integrator_1d(),
        cones=opposing_rays_1d(),
        rho1=0.3,
        rho2=1.0,
        K=1,
        x0=np.zeros(2),
        terminal=term,
    )


@pytest.fixture(scope="session")
def docking_config() -> lcvx.ProblemConfig:
    return lcvx.load_config(lcvx.docking_preset())
