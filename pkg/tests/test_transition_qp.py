"""Convex formulation tests: assembly dimensions, static equilibrium, reference
momentum rates, infeasibility detection and determinism."""

import numpy as np

from footfeas.bezier import BezierCurve
from footfeas.dynamics import angular_momentum_rate
from footfeas.horizon import GaitParams, build_contact_schedule
from footfeas.model import State, default_robot, euler_rate_map, world_inertia
from footfeas.problem import Status, make_problem
from footfeas.transition_qp import (assemble_convex_qp, reference_angular_momentum_rate,
                                    solve_transition_convex)


def square_footholds():
    return {
        "LF": np.array([0.37, 0.21, 0.0]),
        "RF": np.array([0.37, -0.21, 0.0]),
        "LH": np.array([-0.37, 0.21, 0.0]),
        "RH": np.array([-0.37, -0.21, 0.0]),
    }


def static_problem(N=10):
    model = default_robot()
    sched = build_contact_schedule(GaitParams(), square_footholds(), 0)
    x0 = State(c=(0.0, 0.0, 0.55))
    return make_problem(model, sched, (0.0, 0.0, 0.0), x0, N=N)


def walk_problem(N=10, switches=8, v=(0.07, 0.0, 0.0)):
    model = default_robot()
    feet = square_footholds()
    landings = {leg: [feet[leg] + np.array([v[0], v[1], 0.0]) * GaitParams().cycle_duration]
                for leg in feet}
    sched = build_contact_schedule(GaitParams(), feet, switches, landings=landings)
    x0 = State(c=(0.0, 0.0, 0.55), c_dot=(v[0], v[1], 0.0))
    return make_problem(model, sched, v, x0, N=N)


def test_reference_rate_constant_orientation():
    prob = static_problem()
    curves = [BezierCurve(np.tile([0.1, 0.05, 0.2], (5, 1)), sh.duration)
              for sh in prob.schedule.sub_horizons]
    refs = reference_angular_momentum_rate(prob.model, curves, prob.knots)
    assert np.max(np.abs(refs)) < 1e-12


def test_reference_rate_principal_axis_yaw_ramp():
    prob = static_problem()
    T = prob.schedule.sub_horizons[0].duration
    pts = np.column_stack([np.zeros(5), np.zeros(5), np.linspace(0.0, 0.4, 5)])
    curves = [BezierCurve(pts, T)]
    refs = reference_angular_momentum_rate(prob.model, curves, prob.knots)
    assert np.max(np.abs(refs)) < 1e-10


def test_reference_rate_matches_momentum_finite_difference():
    prob = static_problem()
    T = prob.schedule.sub_horizons[0].duration
    rng = np.random.default_rng(0)
    pts = np.column_stack([np.zeros(5), rng.uniform(-0.2, 0.2, 5), np.zeros(5)])
    curve = BezierCurve(pts, T)
    refs = reference_angular_momentum_rate(prob.model, [curve], prob.knots)
    from footfeas.bezier import derivative, evaluate
    d1 = derivative(curve)

    def momentum(u):
        th = evaluate(curve, u)
        td = evaluate(d1, u)
        return world_inertia(prob.model, th) @ euler_rate_map(th) @ td

    h = 1e-6
    for kn in prob.knots:
        if not h <= kn.u <= 1.0 - h:
            continue
        fd = (momentum(kn.u + h) - momentum(kn.u - h)) / (2 * h * T)
        assert np.max(np.abs(refs[kn.idx] - fd)) < 1e-4


def test_assembled_dimensions():
    prob = static_problem(N=2)  # 1 sub-horizon, 3 knots, 4 feet throughout
    data = assemble_convex_qp(prob, pin_L_dot=False)
    assert data.n_vars == 3 + 36 + 9 == 48
    assert data.A_eq.shape == (18, 48)
    pinned = assemble_convex_qp(prob)
    assert pinned.n_vars == 48
    assert pinned.A_eq.shape == (27, 48)  # 3 extra reference-pin rows per knot


def test_static_qp_feasible_with_hand_constructed_point():
    prob = static_problem(N=2)
    data = assemble_convex_qp(prob)
    x = np.zeros(data.n_vars)
    x[data.sl_y[0]] = prob.waypoints[0].c  # free point at the stationary CoM
    share = prob.model.mass * 9.81 / 4.0
    for s in data.sl_f:
        f = np.zeros(12)
        f[2::3] = share
        x[s] = f
    assert np.max(np.abs(data.A_eq @ x - data.b_eq)) < 1e-9
    assert np.max(data.G @ x - data.h) <= 0.0
    assert data.cost_at(x) < 1e-8


def test_static_solve_near_zero_cost():
    res = solve_transition_convex(static_problem())
    assert res.status is Status.FEASIBLE
    assert res.cost < 1e-8
    # the CoM curve is constant at the standing pose
    pts = res.com_curves[0].control_points
    assert np.max(np.abs(pts - pts[0])) < 1e-5


def test_walk_solve_feasible_and_pins_reference():
    prob = walk_problem()
    res = solve_transition_convex(prob)
    assert res.status is Status.FEASIBLE
    data = assemble_convex_qp(prob)
    assert np.max(np.abs(res.L_dot - data.L_ref)) < 1e-7


def test_impossible_lateral_jump_infeasible():
    model = default_robot()
    feet = square_footholds()
    sched = build_contact_schedule(GaitParams(), feet, 2)
    x0 = State(c=(0.0, 0.0, 0.55))
    prob = make_problem(model, sched, (0.0, 0.0, 0.0), x0)
    # displace the final way-point 10 m sideways within a single crawl step
    wp = prob.waypoints[-1]
    prob.waypoints[-1] = State(c=wp.c + np.array([0.0, 10.0, 0.0]), c_dot=wp.c_dot,
                               c_ddot=wp.c_ddot, theta=wp.theta,
                               theta_dot=wp.theta_dot, theta_ddot=wp.theta_ddot)
    res = solve_transition_convex(prob)
    assert res.status is Status.INFEASIBLE


def test_solve_deterministic():
    prob = walk_problem()
    a = solve_transition_convex(prob)
    b = solve_transition_convex(prob)
    assert a.status is b.status
    assert abs(a.cost - b.cost) < 1e-9
    for ca, cb in zip(a.com_curves, b.com_curves):
        assert np.max(np.abs(ca.control_points - cb.control_points)) < 1e-9


def test_pin_L_dot_zero_variant():
    prob = static_problem()
    res = solve_transition_convex(prob, pin_L_dot_zero=True)
    assert res.status is Status.FEASIBLE
    assert np.max(np.abs(res.L_dot)) < 1e-9
