"""A-priori structure conditions: observability, nondegeneracy, separation,
transversality, and the aggregate verdict."""

import numpy as np
import pytest

import lcvx
from lcvx.conditions import (
    FAILS,
    HOLDS,
    INCONCLUSIVE,
    check_adjoint_observability,
    check_all,
    check_gain_nondegeneracy,
    check_gain_separation,
    check_transversality,
)

from .conftest import (
    double_integrator_1d,
    double_integrator_2d,
    opposing_rays_1d,
    ray2,
)


def test_adjoint_observability_holds_for_double_integrator():
    rep = check_adjoint_observability(double_integrator_1d())
    assert rep.status == HOLDS


def test_adjoint_observability_fails_without_input_coupling():
    sys = lcvx.LtiSystem(A=np.array([[0.0, 1.0], [0.0, 0.0]]), B=np.zeros((2, 1)))
    rep = check_adjoint_observability(sys)
    assert rep.status == FAILS


def test_nondegeneracy_resolves_opposing_rays():
    # One-dimensional primer: every nonzero line value feeds exactly one
    # of the two opposing rays, and the difference system is observable.
    sys = double_integrator_1d()
    rep = check_gain_nondegeneracy(sys, opposing_rays_1d(), K=1)
    assert rep.status == HOLDS


def test_nondegeneracy_inconclusive_for_facet_cones():
    sys = double_integrator_2d()
    up = lcvx.PointingCone.from_facets(np.array([[0.0, -1.0]]))
    down = lcvx.PointingCone.from_facets(np.array([[0.0, 1.0]]))
    rep = check_gain_nondegeneracy(sys, (up, down), K=1)
    assert rep.status == INCONCLUSIVE


def test_separation_fails_on_duplicate_directions():
    sys = double_integrator_2d()
    cones = (ray2(0.0), ray2(0.0), ray2(90.0))
    rep = check_gain_separation(sys, cones, K=1)
    assert rep.status == FAILS


def test_separation_holds_for_docking(docking_config):
    spec = docking_config.spec
    rep = check_gain_separation(spec.sys, spec.cones, spec.K)
    assert rep.status == HOLDS


def test_transversality_holds_for_affine_cost():
    cost = lcvx.AffineTerminalCost(q=np.array([0.0, 1.0]))
    term = lcvx.TerminalSpec.fix_components(2, [0], [1.0], cost)
    rep = check_transversality(term, 2)
    assert rep.status == HOLDS


def test_transversality_fails_when_time_is_pinned():
    # Minimum-time cost with the final time pinned by the boundary: the cost
    # gradient is a pure time direction already inside the boundary normals.
    term = lcvx.TerminalSpec.fixed_state(
        [0.0, 0.0], lcvx.MinimumTimeCost(), pins_time=True
    )
    rep = check_transversality(term, 2)
    assert rep.status == FAILS


def test_transversality_error_on_zero_gradient():
    cost = lcvx.QuadraticTerminalCost(target=np.array([1.0, 0.0]))
    term = lcvx.TerminalSpec.free(2, cost)
    with pytest.raises(ValueError):
        check_transversality(term, 2, x_tf=np.array([1.0, 0.0]))


def test_transversality_inconclusive_without_terminal_point():
    cost = lcvx.QuadraticTerminalCost(target=np.array([1.0, 0.0]))
    term = lcvx.TerminalSpec.free(2, cost)
    rep = check_transversality(term, 2)
    assert rep.status == INCONCLUSIVE


def test_check_all_on_docking(docking_config):
    summary = check_all(docking_config.spec)
    assert summary.all_hold
    assert not summary.any_fails
    d = summary.to_dict()
    assert d["all_hold"] is True
    assert set(d) >= {"observability", "nondegeneracy", "separation", "transversality"}


def test_check_all_flags_failure_dominant():
    # Duplicate directions fail separation even when everything else holds.
    sys = double_integrator_2d()
    cones = (ray2(0.0), ray2(0.0), ray2(180.0))
    cost = lcvx.AffineTerminalCost(q=np.array([1.0, 0.0, 0.0, 0.0]))
    term = lcvx.TerminalSpec.fix_components(4, [0, 1], [0.0, 0.0], cost)
    spec = lcvx.ProblemSpec(
        sys=sys, cones=cones, rho1=0.3, rho2=1.0, K=1, x0=np.zeros(4), terminal=term
    )
    summary = check_all(spec)
    assert summary.any_fails
    assert summary.separation.status == FAILS


def test_reports_serialize():
    rep = check_adjoint_observability(double_integrator_1d())
    d = rep.to_dict()
    assert d["status"] == HOLDS
    assert isinstance(d["details"], dict)
