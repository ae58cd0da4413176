"""Nonlinear formulation tests: assembly, Jacobian oracle, continuity rows,
convex-solution embedding and small solves."""

import numpy as np

from footfeas.dynamics import recheck_knots
from footfeas.horizon import GaitParams, build_contact_schedule
from footfeas.model import State, default_robot
from footfeas.problem import Status, make_problem, result_knot_records
from footfeas.transition_nlp import (MODE_TRACK, MODE_ZERO, assemble_nlp, embed_convex,
                                     initial_point, solve_transition_nonlinear)
from footfeas.transition_qp import solve_transition_convex


def square_footholds():
    return {
        "LF": np.array([0.37, 0.21, 0.0]),
        "RF": np.array([0.37, -0.21, 0.0]),
        "LH": np.array([-0.37, 0.21, 0.0]),
        "RH": np.array([-0.37, -0.21, 0.0]),
    }


def static_problem():
    model = default_robot()
    sched = build_contact_schedule(GaitParams(), square_footholds(), 0)
    return make_problem(model, sched, (0.0, 0.0, 0.0), State(c=(0.0, 0.0, 0.55)))


def step_problem(v=(0.07, 0.0, 0.0), switches=2):
    model = default_robot()
    feet = square_footholds()
    landings = {leg: [feet[leg] + np.array([v[0], v[1], 0.0]) * GaitParams().cycle_duration]
                for leg in feet}
    sched = build_contact_schedule(GaitParams(), feet, switches, landings=landings)
    x0 = State(c=(0.0, 0.0, 0.55), c_dot=(v[0], v[1], 0.0))
    return make_problem(model, sched, v, x0)


def test_static_nlp_stationary_at_zero():
    prob = static_problem()
    nlp = assemble_nlp(prob)
    z0 = initial_point(nlp)
    assert np.max(np.abs(nlp.eq_fun(z0))) < 1e-8
    assert nlp.ineq_violation(z0) <= 0.0
    assert nlp.cost(z0) < 1e-8


def test_eq_jacobian_matches_finite_differences():
    prob = step_problem()
    nlp = assemble_nlp(prob)
    rng = np.random.default_rng(0)
    z = initial_point(nlp) + 0.01 * rng.normal(size=nlp.n_vars)
    J = nlp.eq_jac(z)
    f0 = nlp.eq_fun(z)
    h = 1e-6
    cols = rng.choice(nlp.n_vars, size=60, replace=False)
    for j in cols:
        dz = np.zeros(nlp.n_vars)
        dz[j] = h
        fd = (nlp.eq_fun(z + dz) - nlp.eq_fun(z - dz)) / (2 * h)
        assert np.max(np.abs(J[:, j] - fd)) < 1e-4
    assert f0.shape[0] == J.shape[0]


def test_cost_gradient_matches_finite_differences():
    prob = step_problem()
    nlp = assemble_nlp(prob)
    rng = np.random.default_rng(1)
    z = initial_point(nlp) + 0.01 * rng.normal(size=nlp.n_vars)
    g = nlp.cost_grad(z)
    h = 1e-6
    for j in rng.choice(nlp.n_vars, size=40, replace=False):
        dz = np.zeros(nlp.n_vars)
        dz[j] = h
        fd = (nlp.cost(z + dz) - nlp.cost(z - dz)) / (2 * h)
        assert abs(g[j] - fd) < 1e-4 * max(1.0, abs(fd))


def test_continuity_rows_zero_at_chained_candidate():
    # the desired angular spline satisfies the chaining rows by construction
    prob = step_problem(switches=4)
    nlp = assemble_nlp(prob)
    z = initial_point(nlp)
    assert np.max(np.abs(nlp.E_ang @ z + nlp.e_ang)) < 1e-7


def test_embedding_of_convex_solution():
    prob = step_problem(switches=4)
    conv = solve_transition_convex(prob)
    assert conv.status is Status.FEASIBLE
    nlp = assemble_nlp(prob)
    z = embed_convex(nlp, conv)
    assert np.max(np.abs(nlp.eq_fun(z))) < 1e-6
    assert nlp.ineq_violation(z) < 1e-6


def test_static_solve_feasible():
    prob = static_problem()
    res = solve_transition_nonlinear(prob)
    assert res.status is Status.FEASIBLE
    assert res.cost < 1e-6


def test_step_solve_and_recheck():
    prob = step_problem()
    conv = solve_transition_convex(prob)
    res = solve_transition_nonlinear(prob, initial_guess=conv)
    assert res.status is Status.FEASIBLE
    dyn, fric = recheck_knots(prob.model, result_knot_records(prob, res))
    assert dyn < 1e-5 and fric < 1e-5
    # warm-start dominance: the embedded convex point is feasible, so the NLP
    # optimum cannot cost more than the convex solution evaluated in NLP terms
    nlp = assemble_nlp(prob)
    z_embed = embed_convex(nlp, conv)
    assert res.cost <= nlp.cost(z_embed) + 1e-6


def test_track_and_zero_modes():
    prob = step_problem()
    conv = solve_transition_convex(prob)
    track = solve_transition_nonlinear(prob, initial_guess=conv, mode=MODE_TRACK)
    zero = solve_transition_nonlinear(prob, initial_guess=conv, mode=MODE_ZERO)
    assert track.status is Status.FEASIBLE
    assert zero.status is Status.FEASIBLE
    assert np.max(np.abs(zero.L_dot)) == 0.0
    # frozen-angular modes report the desired spline
    for c, d in zip(track.angular_curves, prob.desired_angular):
        assert np.max(np.abs(c.control_points - d.control_points)) < 1e-12
