"""Convex transition feasibility: a QP over free control points, contact
forces and per-knot angular momentum rates.

The CoM curve is affine in the free control point, and the y x y term of
c x cdd cancels, so the wrench balance stays linear. The angular momentum
rate enters as a decision variable tracking a reference computed from the
desired angular Bezier trajectory.
"""

import time
from dataclasses import dataclass, field

import numpy as np
import cvxpy as cp

from .bezier import build_transition_curve, evaluate
from .dynamics import angular_momentum_rate
from .errors import DimensionMismatch, SolverError
from .model import GRAVITY, skew
from .problem import (Status, TransitionProblem, TransitionResult, friction_stack)

EQ_TOL = 1e-6
INEQ_TOL = 1e-6


@dataclass
class ConvexQPData:
    """Explicit QP: minimize x' P x + q' x + c0  s.t.  A_eq x = b_eq, G x <= h."""

    P: np.ndarray
    q: np.ndarray
    c0: float
    A_eq: np.ndarray
    b_eq: np.ndarray
    G: np.ndarray
    h: np.ndarray
    n_vars: int
    sl_y: list = field(default_factory=list)       # slice per sub-horizon
    sl_f: list = field(default_factory=list)       # slice per knot
    sl_L: list = field(default_factory=list)       # slice per knot
    L_ref: np.ndarray | None = None                # (K, 3)

    def cost_at(self, x):
        return float(x @ self.P @ x + self.q @ x + self.c0)


def reference_angular_momentum_rate(model, angular_curves, knots):
    """L_dot_ref per knot, from the desired angular Bezier trajectory."""
    from .bezier import derivative
    refs = np.zeros((len(knots), 3))
    d1 = [derivative(c) for c in angular_curves]
    d2 = [derivative(c) for c in d1]
    for kn in knots:
        th = evaluate(angular_curves[kn.sh], kn.u)
        thd = evaluate(d1[kn.sh], kn.u)
        thdd = evaluate(d2[kn.sh], kn.u)
        refs[kn.idx] = angular_momentum_rate(model, th, thd, thdd)
    return refs


def assemble_convex_qp(problem: TransitionProblem, pin_L_dot_zero: bool = False,
                       pin_L_dot: bool = True) -> ConvexQPData:
    """Build the explicit QP matrices over (y per sub-horizon, f per knot, L_dot per knot).

    By default L_dot is constrained to the reference exactly (3 extra rows
    per knot), which makes every convex solution a feasible point of the
    nonlinear program; with pin_L_dot=False the reference is only tracked
    through the quadratic penalty. pin_L_dot_zero reduces the formulation to
    the constant-angular-momentum case: the reference is zeroed and L_dot is
    constrained to zero.
    """
    m = problem.model.mass
    S = problem.n_sub
    K = problem.n_knots
    knots = problem.knots

    sl_y = [slice(3 * i, 3 * i + 3) for i in range(S)]
    sl_f = []
    off = 3 * S
    for kn in knots:
        nf = 3 * kn.contacts.count
        sl_f.append(slice(off, off + nf))
        off += nf
    sl_L = [slice(off + 3 * k, off + 3 * k + 3) for k in range(K)]
    n = off + 3 * K

    if pin_L_dot_zero:
        L_ref = np.zeros((K, 3))
    else:
        L_ref = reference_angular_momentum_rate(problem.model, problem.desired_angular, knots)

    # fixed boundary-state table per sub-horizon: rows (c0, cd0, cdd0, cf, cdf, cddf)
    s_fix = []
    for i in range(S):
        a, b = problem.boundary_states(i)
        s_fix.append(np.vstack([a.c, a.c_dot, a.c_ddot, b.c, b.c_dot, b.c_ddot]))

    P = np.zeros((n, n))
    q = np.zeros(n)
    c0 = 0.0
    A_rows, b_rows = [], []
    G_rows, h_rows = [], []

    fric = friction_stack(problem)
    for kn in knots:
        i = kn.sh
        c_fix = kn.w_pos[:6] @ s_fix[i]
        cdd_fix = kn.w_acc[:6] @ s_fix[i]
        alpha = kn.w_pos[6]
        beta = kn.w_acc[6]
        d_fix = cdd_fix - GRAVITY

        # cost terms
        iy = sl_y[i]
        P[iy, iy] += problem.w_acc * beta * beta * np.eye(3)
        q[iy] += 2.0 * problem.w_acc * beta * cdd_fix
        c0 += problem.w_acc * float(cdd_fix @ cdd_fix)
        iL = sl_L[kn.idx]
        P[iL, iL] += problem.w_L * np.eye(3)
        q[iL] += -2.0 * problem.w_L * L_ref[kn.idx]
        c0 += problem.w_L * float(L_ref[kn.idx] @ L_ref[kn.idx])

        # wrench balance rows
        row = np.zeros((6, n))
        row[:3, iy] = m * beta * np.eye(3)
        row[3:, iy] = m * (-alpha * skew(d_fix) + beta * skew(c_fix))
        row[:, sl_f[kn.idx]] = -kn.A
        row[3:, iL] = np.eye(3)
        rhs = np.concatenate([-m * d_fix, -m * np.cross(c_fix, d_fix)])
        A_rows.append(row)
        b_rows.append(rhs)

        if pin_L_dot or pin_L_dot_zero:
            pin = np.zeros((3, n))
            pin[:, iL] = np.eye(3)
            A_rows.append(pin)
            b_rows.append(L_ref[kn.idx].copy())

        Gk, hk = fric[kn.idx]
        Grow = np.zeros((Gk.shape[0], n))
        Grow[:, sl_f[kn.idx]] = Gk
        G_rows.append(Grow)
        h_rows.append(hk)

    data = ConvexQPData(
        P=P, q=q, c0=c0,
        A_eq=np.vstack(A_rows), b_eq=np.concatenate(b_rows),
        G=np.vstack(G_rows), h=np.concatenate(h_rows),
        n_vars=n, sl_y=sl_y, sl_f=sl_f, sl_L=sl_L, L_ref=L_ref,
    )
    if data.A_eq.shape[1] != n:
        raise DimensionMismatch("equality block width does not match the variable layout")
    return data


def solve_transition_convex(problem: TransitionProblem,
                            pin_L_dot_zero: bool = False,
                            pin_L_dot: bool = True) -> TransitionResult:
    """Solve the convex formulation; statuses: Feasible / Infeasible / SolverError."""
    data = assemble_convex_qp(problem, pin_L_dot_zero=pin_L_dot_zero, pin_L_dot=pin_L_dot)
    x = cp.Variable(data.n_vars)
    cost = cp.quad_form(x, cp.psd_wrap(data.P)) + data.q @ x + data.c0
    cons = [data.A_eq @ x == data.b_eq, data.G @ x <= data.h]
    prob = cp.Problem(cp.Minimize(cost), cons)
    t0 = time.perf_counter()
    try:
        prob.solve(solver=cp.CLARABEL)
    except cp.error.SolverError as exc:
        return TransitionResult(status=Status.SOLVER_ERROR, message=str(exc),
                                solve_time=time.perf_counter() - t0)
    wall = time.perf_counter() - t0

    if prob.status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        return TransitionResult(status=Status.INFEASIBLE, solve_time=wall,
                                message=prob.status)
    if prob.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE) or x.value is None:
        return TransitionResult(status=Status.SOLVER_ERROR, solve_time=wall,
                                message=str(prob.status))

    xv = np.asarray(x.value)
    eq_res = float(np.max(np.abs(data.A_eq @ xv - data.b_eq), initial=0.0))
    ineq_res = float(np.max(data.G @ xv - data.h, initial=0.0))
    if eq_res > EQ_TOL or ineq_res > INEQ_TOL:
        return TransitionResult(status=Status.SOLVER_ERROR, solve_time=wall,
                                message=f"loose solution: eq {eq_res:.2e}, ineq {ineq_res:.2e}")

    subs = problem.schedule.sub_horizons
    com_curves = []
    for i, sh in enumerate(subs):
        a, b = problem.boundary_states(i)
        com_curves.append(build_transition_curve(a, b, xv[data.sl_y[i]], sh.duration))
    forces = [xv[s].copy() for s in data.sl_f]
    L_dot = np.vstack([xv[s] for s in data.sl_L])
    return TransitionResult(
        status=Status.FEASIBLE,
        cost=data.cost_at(xv),
        com_curves=com_curves,
        angular_curves=list(problem.desired_angular),
        forces=forces,
        L_dot=L_dot,
        solve_time=wall,
    )
