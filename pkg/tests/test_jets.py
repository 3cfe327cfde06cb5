"""Jet arithmetic against closed forms and central finite differences."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamflow import jets
from hamflow.errors import JetOrderError

from oracles import fd_gradient, fd_hessian


def test_frozen_smooth_expression():
    # f(x, y) = sin(x) e^y + x^2 y at (0.7, -0.3); reference values frozen
    # from an independent finite-difference oracle run.
    x, y = jets.seed(np.array([[0.7, -0.3]]))
    f = jets.sin(x) * jets.exp(y) + x.sq() * y
    assert f.value[0] == pytest.approx(0.3302482007911177, abs=1e-14)
    assert f.grad[0] == pytest.approx(
        [0.14660902828640804, 0.9672482007911176], abs=1e-13
    )
    expected_hess = np.array(
        [
            [-1.0772482007911177, 1.966609028286408],
            [1.966609028286408, 0.4772482007911177],
        ]
    )
    assert np.allclose(f.hess[0], expected_hess, atol=1e-13)


def test_frozen_atan2_sqrt_log_expression():
    # g(x, y, z) = atan2(y, x) sqrt(z) + log(z)/x at (0.8, -0.5, 1.7).
    x, y, z = jets.seed(np.array([[0.8, -0.5, 1.7]]))
    g = jets.atan2(y, x) * jets.sqrt(z) + jets.log(z) / x
    assert g.value[0] == pytest.approx(-0.0650390861987481, abs=1e-12)
    assert g.grad[0] == pytest.approx(
        [-0.09661199, 1.17199144, 0.52108106], abs=1e-7
    )
    expected_hess = np.array(
        [
            [0.7559231, -0.64196121, -0.70367767],
            [-0.64196121, 1.31684663, 0.34470343],
            [-0.70367767, 0.34470343, -0.36952108],
        ]
    )
    assert np.allclose(g.hess[0], expected_hess, atol=1e-6)


def _expr(a, b, c):
    """A deliberately gnarly composite used by the property tests."""

    def fn(p):
        x, y = p[0], p[1]
        num = jets.sin(a * x) * jets.exp(b * y) + (x * y + c) ** 3
        den = 2.0 + jets.cos(x) * jets.cos(x) + y.sq()
        return num / den + jets.sqrt(2.5 + jets.sin(x + y)) - jets.atan2(y + 3.0, x + 4.0)

    return fn


def _expr_float(a, b, c):
    def fn(p):
        x, y = p
        num = np.sin(a * x) * np.exp(b * y) + (x * y + c) ** 3
        den = 2.0 + np.cos(x) ** 2 + y**2
        return num / den + np.sqrt(2.5 + np.sin(x + y)) - np.arctan2(y + 3.0, x + 4.0)

    return fn


coeff = st.floats(min_value=-2.0, max_value=2.0)
coord = st.floats(min_value=-1.5, max_value=1.5)


@settings(max_examples=60, deadline=None)
@given(a=coeff, b=coeff, c=coeff, x0=coord, y0=coord)
def test_jet_matches_finite_differences(a, b, c, x0, y0):
    pt = np.array([[x0, y0]])
    out = _expr(a, b, c)(jets.seed(pt))
    f = _expr_float(a, b, c)
    scale = 1.0 + abs(out.value[0])
    assert out.value[0] == pytest.approx(f(pt[0]), rel=1e-12)
    g = fd_gradient(f, pt[0])
    h = fd_hessian(f, pt[0])
    gscale = 1.0 + np.abs(g).max()
    hscale = 1.0 + np.abs(h).max()
    assert np.allclose(out.grad[0], g, atol=1e-5 * gscale)
    assert np.allclose(out.hess[0], h, atol=2e-5 * hscale + 1e-6 * scale)


def test_batched_evaluation_matches_loop():
    rng = np.random.default_rng(7)
    pts = rng.uniform(-1.0, 1.0, size=(40, 2))
    fn = _expr(1.3, -0.7, 0.4)
    batched = fn(jets.seed(pts))
    for i, p in enumerate(pts):
        single = fn(jets.seed(p[None, :]))
        assert batched.value[i] == pytest.approx(single.value[0], abs=1e-14)
        assert np.allclose(batched.grad[i], single.grad[0], atol=1e-14)
        assert np.allclose(batched.hess[i], single.hess[0], atol=1e-14)


def test_partial_drops_one_order():
    x, y = jets.seed(np.array([[0.3, 1.1]]))
    f = x.sq() * y  # df/dx = 2xy, d2f/dxdy = 2x
    fx = f.partial(0)
    assert fx.order == 1
    assert fx.value[0] == pytest.approx(2 * 0.3 * 1.1)
    assert fx.grad[0] == pytest.approx([2 * 1.1, 2 * 0.3])
    fxy = fx.partial(1)
    assert fxy.order == 0
    assert fxy.value[0] == pytest.approx(0.6)
    with pytest.raises(JetOrderError):
        fxy.partial(0)


def test_order_propagation_through_arithmetic():
    x, y = jets.seed(np.array([[0.4, 0.2]]), order=1)
    assert (x * y).order == 1
    assert (x * y).partial(0).order == 0
    # mixed-order products degrade to the weaker operand
    x2, y2 = jets.seed(np.array([[0.4, 0.2]]), order=2)
    mixed = x2 * (y2.partial(1))
    assert mixed.order == 1
    # constants keep the stronger order
    assert (x2 * 3.0).order == 2
    assert (2.0 / y2).order == 2


def test_constants_are_flat():
    x, _ = jets.seed(np.array([[0.5, 0.25], [1.0, 2.0]]))
    c = jets.constant(4.0, x)
    assert c.order == 2
    assert np.all(c.value == 4.0)
    assert not c.grad.any()
    assert not c.hess.any()
    s = x - 7
    assert s.value[0] == pytest.approx(-6.5)
    r = 7 - x
    assert r.value[1] == pytest.approx(6.0)
    assert r.grad[1, 0] == pytest.approx(-1.0)


def test_division_and_power_consistency():
    (x,) = jets.seed(np.array([[1.7]]))
    lhs = 1.0 / x
    rhs = x**-1.0
    assert lhs.value[0] == pytest.approx(rhs.value[0], rel=1e-14)
    assert lhs.grad[0, 0] == pytest.approx(rhs.grad[0, 0], rel=1e-13)
    assert lhs.hess[0, 0, 0] == pytest.approx(rhs.hess[0, 0, 0], rel=1e-13)
    assert (x**2).value[0] == pytest.approx(x.sq().value[0], rel=1e-14)


def test_trig_second_derivatives_close_loop():
    (t,) = jets.seed(np.array([[0.9]]))
    s = jets.sin(t)
    assert s.hess[0, 0, 0] == pytest.approx(-np.sin(0.9), abs=1e-15)
    c = jets.cos(t)
    assert c.hess[0, 0, 0] == pytest.approx(-np.cos(0.9), abs=1e-15)
