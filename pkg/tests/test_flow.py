"""Gradient-flow integration, orbit classification, boundary censuses."""

import numpy as np
import pytest

from hamflow import flow
from hamflow.basic import cotangent_t2, disc_d4, s1_d3
from hamflow.blowup import blowup_d4
from hamflow.errors import ImmediateExit
from hamflow.planar import free_action_planar


def test_disc_trajectory_endpoints():
    m = disc_d4(2, 3)
    up = flow.integrate(m, 0, [0.5, 0, 0, 0], direction=1)
    down = flow.integrate(m, 0, [0.5, 0, 0, 0], direction=-1)
    assert up.termination == "boundary"
    assert np.abs(up.end_point - [1.0, 0, 0, 0]).max() < 1e-8
    assert down.termination == "critical_set"
    assert np.abs(down.end_point).max() < 1e-6
    assert up.monotone and down.monotone


def test_monotone_along_random_starts():
    m = s1_d3(2, 1)
    rng = np.random.default_rng(12)
    for _ in range(10):
        p = rng.uniform(-0.4, 0.4, 4)
        p[0] = rng.uniform(0, 2 * np.pi)
        for direction in (1, -1):
            res = flow.integrate(m, 0, p, direction=direction)
            assert res.monotone
            assert res.termination == "boundary"
            diffs = np.diff(res.h_values) * direction
            assert diffs.min() > -1e-12


def test_orbit_trio():
    disc = flow.classify_orbit(disc_d4(2, 3), 0, [0.5, 0, 0, 0])
    assert disc.kind == "disc"
    ann = flow.classify_orbit(s1_d3(2, 1), 0, [1.0, 0.3, -0.2, 0.1])
    assert ann.kind == "annulus"
    sph = flow.classify_orbit(blowup_d4(3, 1, 0.2), 0, [0.0, 0.0, 0.5, -0.2])
    assert sph.kind == "sphere"
    assert sph.downward.end_chart == 1


def test_sphere_flow_switches_chart():
    res = flow.integrate(blowup_d4(3, 1, 0.2), 0, [0.0, 0.0, 0.5, -0.2], direction=-1)
    assert res.termination == "critical_set"
    assert res.end_chart == 1
    assert np.abs(res.end_point).max() < 1e-6


def test_fixed_point_and_constant_orbit():
    m = disc_d4(2, 3)
    assert flow.classify_orbit(m, 0, [0, 0, 0, 0]).kind == "fixed_point"
    oc = flow.classify_orbit(s1_d3(1, 0), 0, [0.3, 1.0, 0.0, 0.0])
    assert oc.kind == "constant_legendrian"


def test_immediate_exit_on_outward_boundary_start():
    m = disc_d4(1, 1)
    with pytest.raises(ImmediateExit):
        flow.integrate(m, 0, [1.0, 0, 0, 0], direction=1)


@pytest.mark.parametrize(
    "point,expect",
    [
        ([0, 0, 0, 0], 0),
        ([0.5, 0, 0, 0], 2),
        ([0, 0, 0.5, 0], 3),
        ([0.3, 0, 0.4, 0], 1),
    ],
)
def test_stabilizers_of_weighted_rotation(point, expect):
    assert flow.stabilizer_of(disc_d4(2, 3), 0, point) == expect


def test_stabilizer_free_translation():
    assert flow.stabilizer_of(s1_d3(1, 0), 0, [0.3, 0.2, 0.1, 0.0]) == 1


def test_liouville_flow_matches_closed_form():
    m = s1_d3(1, 0)
    cd = m.charts[0]
    start = np.array([0.7, 0.3, -0.2, 0.4])
    sigma = 0.5
    path = flow.integrate_vector_field(cd, cd.liouville, start, sigma, steps=400)
    expect = np.array(
        [
            start[0],
            np.exp(sigma / 2) * start[1],
            np.exp(sigma / 2) * start[2],
            np.exp(sigma) * start[3],
        ]
    )
    assert np.abs(path[-1] - expect).max() < 1e-9


def test_boundary_portrait_signs():
    port = flow.boundary_sign_portrait(s1_d3(1, 0), samples=200, seed=0)
    assert port.has_positive and port.has_negative
    assert port.total_mismatches == 0
    pos_only = flow.boundary_sign_portrait(disc_d4(1, 1), samples=200, seed=0)
    assert pos_only.has_positive and not pos_only.has_negative
    assert pos_only.total_mismatches == 0


@pytest.mark.parametrize(
    "build,expect",
    [
        (lambda: disc_d4(1, 1), 0),
        (lambda: disc_d4(1, -1), 1),
        (lambda: cotangent_t2(1, 0), 2),
        (lambda: s1_d3(1, 0), 1),
        (lambda: free_action_planar(2), 2),
    ],
)
def test_legendrian_census(build, expect):
    res = flow.detect_legendrian_set(build(), seed=0)
    assert res.count == expect
    for comp in res.components:
        assert comp.closed
        assert comp.torus_certified
        assert comp.tangent_pairing < 1e-10


def test_legendrian_level_value():
    # zero level of the moment map on the unit boundary sphere sits at
    # the negative root of h^2 - 4h = 1
    res = flow.detect_legendrian_set(s1_d3(2, 1), seed=0)
    assert res.count == 1
    h_level = 2.0 - np.sqrt(5.0)
    loop = res.components[0].loop
    assert np.abs(loop[:, 3] - h_level).max() < 1e-8
