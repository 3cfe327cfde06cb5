"""Jet linear algebra and pointwise matrix helpers."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamflow import jets, linalg
from hamflow.errors import DegenerateForm, DimensionMismatch, SingularMetric


def _jet_matrix_from_values(vals, like):
    return [
        [jets.constant(vals[i, j], like) for j in range(vals.shape[1])]
        for i in range(vals.shape[0])
    ]


def test_spd_solve_matches_numpy():
    rng = np.random.default_rng(3)
    b = rng.normal(size=(4, 4))
    spd = b @ b.T + 4 * np.eye(4)
    rhs = rng.normal(size=4)
    (anchor,) = jets.seed(np.array([[0.0]]))
    mat = _jet_matrix_from_values(spd, anchor)
    rj = [jets.constant(v, anchor) for v in rhs]
    x = linalg.solve_spd_jet(mat, rj)
    expected = np.linalg.solve(spd, rhs)
    got = np.array([xi.value[0] for xi in x])
    assert np.allclose(got, expected, atol=1e-12)


def test_spd_solve_carries_derivatives():
    # solve [[1+x^2, 0], [0, 2]] v = (x, 1); v0 = x/(1+x^2), dv0/dx known
    (x,) = jets.seed(np.array([[0.6]]))
    one = jets.constant(1.0, x)
    zero = jets.constant(0.0, x)
    mat = [[one + x.sq(), zero], [zero, jets.constant(2.0, x)]]
    v = linalg.solve_spd_jet(mat, [x, one])
    x0 = 0.6
    assert v[0].value[0] == pytest.approx(x0 / (1 + x0**2), rel=1e-14)
    expected_dv = (1 - x0**2) / (1 + x0**2) ** 2
    assert v[0].grad[0, 0] == pytest.approx(expected_dv, rel=1e-12)
    assert v[1].value[0] == pytest.approx(0.5)


def test_singular_metric_raises():
    (anchor,) = jets.seed(np.array([[0.0]]))
    mat = _jet_matrix_from_values(np.diag([1.0, 0.0]), anchor)
    with pytest.raises(SingularMetric):
        linalg.solve_spd_jet(mat, [anchor, anchor])


def test_pfaffian_frozen_values():
    j2 = np.array([[0.0, 5.0], [-5.0, 0.0]])
    assert linalg.pfaffian(j2)[0] == pytest.approx(5.0)
    # canonical 4x4 block form has Pfaffian 1
    j4 = np.zeros((4, 4))
    j4[0, 1] = j4[2, 3] = 1.0
    j4 -= j4.T
    assert linalg.pfaffian(j4)[0] == pytest.approx(1.0)
    j6 = np.zeros((6, 6))
    j6[0, 1], j6[2, 3], j6[4, 5] = 2.0, 3.0, 4.0
    j6 -= j6.T
    assert linalg.pfaffian(j6)[0] == pytest.approx(24.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10_000), st.sampled_from([2, 4, 6]))
def test_pfaffian_squares_to_determinant(seed, dim):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim))
    skew = a - a.T
    pf = linalg.pfaffian(skew)[0]
    det = np.linalg.det(skew)
    assert pf**2 == pytest.approx(det, rel=1e-8, abs=1e-10)


def test_pfaffian_odd_dimension_rejected():
    with pytest.raises(DimensionMismatch):
        linalg.pfaffian(np.zeros((3, 3)))


def test_nondegenerate_flags_degenerate_form():
    omegas = np.zeros((2, 4, 4))
    omegas[0, 0, 1] = omegas[0, 2, 3] = 1.0
    omegas[0] -= omegas[0].T
    omegas[1, 0, 1] = 1.0  # rank 2 only
    omegas[1] -= omegas[1].T
    ok, worst = linalg.nondegenerate(omegas)
    assert not ok
    ok1, worst1 = linalg.nondegenerate(omegas[:1])
    assert ok1 and worst1 > 0.5


def test_compatible_structure_standard_pair():
    omega = np.zeros((1, 4, 4))
    omega[0, 0, 2] = omega[0, 1, 3] = 1.0
    omega[0] -= omega[0].T
    metric = np.eye(4)[None]
    j = linalg.compatible_structure(omega, metric)
    assert np.allclose(j[0] @ j[0], -np.eye(4), atol=1e-12)
    # compatibility: G = Omega J reproduces the metric
    assert np.allclose(omega[0] @ j[0], metric[0], atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_compatible_structure_properties_random(seed):
    rng = np.random.default_rng(seed)
    b = rng.normal(size=(4, 4))
    metric = (b @ b.T + 5 * np.eye(4))[None]
    skew = rng.normal(size=(4, 4))
    omega = (skew - skew.T)[None]
    if np.abs(linalg.pfaffian(omega)[0]) < 1e-3:
        return
    j = linalg.compatible_structure(omega, metric)[0]
    assert np.allclose(j @ j, -np.eye(4), atol=1e-9)
    # J is g-orthogonal: J^T G J = G
    g = metric[0]
    assert np.allclose(j.T @ g @ j, g, atol=1e-9)
    # omega(J u, J v) = omega(u, v)
    om = omega[0]
    assert np.allclose(j.T @ om @ j, om, atol=1e-9)
    # the induced bilinear form omega(., J.) is symmetric positive definite
    induced = om @ j
    assert np.allclose(induced, induced.T, atol=1e-9)
    assert np.linalg.eigvalsh(induced).min() > 0


def test_compatible_structure_rejects_degenerate():
    omega = np.zeros((1, 4, 4))
    omega[0, 0, 1] = 1.0
    omega[0] -= omega[0].T
    with pytest.raises(DegenerateForm):
        linalg.compatible_structure(omega, np.eye(4)[None])
