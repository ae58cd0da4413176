"""Bezier algebra tests: evaluation, derivatives, elevation, products, and the
8th-order transition construction."""

import numpy as np
import pytest
from math import comb

from footfeas.bezier import (BezierCurve, build_transition_curve, cross_product_curve,
                             curve_from_text, curve_to_text, derivative, elevate_degree,
                             evaluate, transition_eval_weights, transition_point_matrix)
from footfeas.errors import OutOfRange, ParseError


def bernstein_sum(points, u):
    n = len(points) - 1
    return sum(comb(n, i) * u ** i * (1 - u) ** (n - i) * np.asarray(points[i])
               for i in range(n + 1))


def test_evaluate_endpoints():
    curve = BezierCurve(np.array([[0.0, 1.0, 2.0], [3.0, 4.0, 5.0], [6.0, 7.0, 8.0]]), 1.0)
    assert np.allclose(evaluate(curve, 0.0), curve.control_points[0])
    assert np.allclose(evaluate(curve, 1.0), curve.control_points[-1])


def test_evaluate_linear_midpoint():
    curve = BezierCurve(np.array([[0.0, 0.0, 0.0], [1.0, 2.0, 3.0]]), 2.0)
    assert np.allclose(evaluate(curve, 0.5), [0.5, 1.0, 1.5])


def test_evaluate_matches_bernstein_summation():
    pts = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], dtype=float)
    curve = BezierCurve(pts, 1.0)
    assert np.max(np.abs(evaluate(curve, 0.5) - bernstein_sum(pts, 0.5))) < 1e-14
    rng = np.random.default_rng(0)
    for u in rng.uniform(0, 1, 50):
        assert np.max(np.abs(evaluate(curve, u) - bernstein_sum(pts, u))) < 1e-13


def test_evaluate_out_of_range():
    curve = BezierCurve(np.zeros((3, 3)), 1.0)
    with pytest.raises(OutOfRange):
        evaluate(curve, 1.2)


def test_derivative_constant_curve_is_zero():
    curve = BezierCurve(np.ones((4, 3)), 0.7)
    d = derivative(curve)
    for u in (0.0, 0.3, 1.0):
        assert np.allclose(evaluate(d, u), 0.0)


def test_derivative_finite_difference():
    rng = np.random.default_rng(1)
    pts = rng.normal(size=(5, 3))
    curve = BezierCurve(pts, 1.7)
    d = derivative(curve)
    h = 1e-7
    for u in rng.uniform(0.05, 0.95, 20):
        fd = (evaluate(curve, u + h) - evaluate(curve, u - h)) / (2 * h * curve.duration)
        assert np.max(np.abs(evaluate(d, u) - fd)) < 1e-6


def test_elevate_linear_to_quadratic():
    curve = BezierCurve(np.array([[0.0], [1.0]]), 1.0)
    up = elevate_degree(curve, 2)
    assert np.allclose(up.control_points[:, 0], [0.0, 0.5, 1.0])


def test_elevate_preserves_path():
    rng = np.random.default_rng(2)
    curve = BezierCurve(rng.normal(size=(4, 3)), 1.3)
    up = elevate_degree(curve, 7)
    for u in rng.uniform(0, 1, 50):
        assert np.max(np.abs(evaluate(up, u) - evaluate(curve, u))) < 1e-12


def test_elevate_by_zero_is_identity():
    curve = BezierCurve(np.arange(12.0).reshape(4, 3), 1.0)
    same = elevate_degree(curve, 3)
    assert np.array_equal(same.control_points, curve.control_points)


def test_cross_product_with_self_is_zero():
    rng = np.random.default_rng(3)
    a = BezierCurve(rng.normal(size=(4, 3)), 1.0)
    c = cross_product_curve(a, a)
    for u in rng.uniform(0, 1, 20):
        assert np.max(np.abs(evaluate(c, u))) < 1e-12


def test_cross_product_constant_axes():
    a = BezierCurve(np.tile([1.0, 0.0, 0.0], (2, 1)), 1.0)
    b = BezierCurve(np.tile([0.0, 1.0, 0.0], (2, 1)), 1.0)
    c = cross_product_curve(a, b)
    assert np.allclose(evaluate(c, 0.4), [0.0, 0.0, 1.0])


def test_cross_product_pointwise():
    rng = np.random.default_rng(4)
    a = BezierCurve(rng.normal(size=(4, 3)), 1.0)
    b = BezierCurve(rng.normal(size=(3, 3)), 1.0)
    c = cross_product_curve(a, b)
    assert c.order == a.order + b.order
    for u in rng.uniform(0, 1, 50):
        want = np.cross(evaluate(a, u), evaluate(b, u))
        assert np.max(np.abs(evaluate(c, u) - want)) < 1e-10


def test_transition_curve_static_degenerates_to_point():
    c = np.array([0.1, 0.2, 0.55])
    state = (c, np.zeros(3), np.zeros(3))
    curve = build_transition_curve(state, state, c, 1.0)
    assert np.max(np.abs(curve.control_points - c)) < 1e-14


def test_transition_curve_boundary_roundtrip():
    rng = np.random.default_rng(5)
    c0, cd0, cdd0 = rng.normal(size=(3, 3))
    cf, cdf, cddf = rng.normal(size=(3, 3))
    y = rng.normal(size=3)
    T = 1.8
    curve = build_transition_curve((c0, cd0, cdd0), (cf, cdf, cddf), y, T)
    d1 = derivative(curve)
    d2 = derivative(d1)
    for val, want, u in [(curve, c0, 0.0), (d1, cd0, 0.0), (d2, cdd0, 0.0),
                         (curve, cf, 1.0), (d1, cdf, 1.0), (d2, cddf, 1.0)]:
        assert np.max(np.abs(evaluate(val, u) - want)) < 1e-12


def test_transition_curve_affine_in_free_point():
    rng = np.random.default_rng(6)
    x0 = rng.normal(size=(3, 3))
    xf = rng.normal(size=(3, 3))
    y1, y2 = rng.normal(size=(2, 3))
    T = 1.0
    c1 = build_transition_curve(tuple(x0), tuple(xf), y1, T)
    c2 = build_transition_curve(tuple(x0), tuple(xf), y2, T)
    W = transition_point_matrix(T)
    for u in rng.uniform(0, 1, 30):
        diff = evaluate(c1, u) - evaluate(c2, u)
        # scalar Bernstein weight of the free point
        Bu = transition_eval_weights(T, [u], 0)[0, 6]
        assert np.max(np.abs(diff - Bu * (y1 - y2))) < 1e-12
    assert W.shape == (9, 7)


def test_transition_eval_weights_match_curves():
    rng = np.random.default_rng(7)
    x0 = rng.normal(size=(3, 3))
    xf = rng.normal(size=(3, 3))
    y = rng.normal(size=3)
    T = 1.0
    curve = build_transition_curve(tuple(x0), tuple(xf), y, T)
    d2 = derivative(derivative(curve))
    S = np.vstack([x0, xf, y[None, :]])
    us = rng.uniform(0, 1, 10)
    w0 = transition_eval_weights(T, us, 0)
    w2 = transition_eval_weights(T, us, 2)
    for k, u in enumerate(us):
        assert np.max(np.abs(w0[k] @ S - evaluate(curve, u))) < 1e-11
        assert np.max(np.abs(w2[k] @ S - evaluate(d2, u))) < 1e-9


def test_curve_text_roundtrip():
    rng = np.random.default_rng(8)
    curve = BezierCurve(rng.normal(size=(5, 3)), 1.23)
    back = curve_from_text(curve_to_text(curve))
    assert np.array_equal(back.control_points, curve.control_points)
    assert back.duration == curve.duration
    with pytest.raises(ParseError):
        curve_from_text("order x dim 3 duration 1.0")
