"""Nonlinear transition feasibility: free control points, per-knot forces,
way-point slacks on position and acceleration, and a per-sub-horizon angular
Bezier trajectory whose knot values feed the full angular-momentum-rate
expression inside the wrench balance.

Way-point velocities stay pinned to the commanded values: the slack layout
simply has no velocity entries. Continuity across sub-horizons is structural
for the linear part (adjacent curves share their way-point variables) and
enforced as linear rows for the angular curves.
"""

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .bezier import BezierCurve, bernstein_row, build_transition_curve
from .dynamics import angular_momentum_rate, angular_momentum_rate_jacobian
from .errors import DimensionMismatch, SolverError
from .horizon import ANGULAR_ORDER
from .model import GRAVITY, State, skew
from .problem import (Status, TransitionProblem, TransitionResult, angular_deriv_operators,
                      friction_stack)

FEAS_TOL = 1e-5
ANGULAR_POINTS = ANGULAR_ORDER + 1  # 5 control points per sub-horizon

MODE_FREE = "free"      # angular curve optimized, L_dot from the full expression
MODE_TRACK = "track"    # angular curve frozen at the desired spline, L_dot != 0
MODE_ZERO = "zero"      # L_dot forced to zero in the dynamics (constant momentum)


@dataclass
class NonlinearNLP:
    """Assembled smooth program: cost/grad, equality vector/Jacobian, linear
    inequalities G z <= h, and variable bounds."""

    problem: TransitionProblem
    mode: str
    n_vars: int
    sl_y: list
    sl_f: list
    sl_dc: list            # slack slices for way-points 1..S (None for wp 0)
    sl_dcdd: list
    sl_q: list             # angular control-point slices per sub-horizon ([] unless free)
    E_lin: np.ndarray      # linear wrench rows: E_lin z + e_lin = 0
    e_lin: np.ndarray
    E_ang: np.ndarray      # angular-curve linear rows: E_ang z + e_ang = 0
    e_ang: np.ndarray
    G: np.ndarray          # friction rows
    h: np.ndarray
    bounds: list
    L_fixed: np.ndarray    # (K, 3) L_dot values used when the curve is frozen
    knot_groups: list = field(default_factory=list)   # per-knot variable couplings
    B_ang: list = field(default_factory=list)          # per-knot 9x15 maps q -> (th, thd, thdd)

    # -- evaluation helpers ---------------------------------------------------

    def com_at(self, z, kn):
        """(c, cdd) at a knot, affine in z."""
        c = kn.w_pos[:6] @ self._s_fix[kn.sh]
        cdd = kn.w_acc[:6] @ self._s_fix[kn.sh]
        for sl, wp, wa in self.knot_groups[kn.idx]:
            c = c + wp * z[sl]
            cdd = cdd + wa * z[sl]
        return c, cdd

    def angular_at(self, z, kn):
        """(theta, theta_dot, theta_ddot) at a knot."""
        if self.mode == MODE_FREE:
            v = self.B_ang[kn.idx] @ z[self.sl_q[kn.sh]]
        else:
            v = self._ang_fixed[kn.idx]
        return v[:3], v[3:6], v[6:9]

    def L_dot_at(self, z, kn):
        if self.mode == MODE_ZERO:
            return np.zeros(3)
        if self.mode == MODE_TRACK:
            return self.L_fixed[kn.idx]
        th, thd, thdd = self.angular_at(z, kn)
        return angular_momentum_rate(self.problem.model, th, thd, thdd, check=False)

    # -- NLP callbacks ---------------------------------------------------------

    def cost(self, z):
        p = self.problem
        total = 0.0
        for kn in p.knots:
            _, cdd = self.com_at(z, kn)
            total += p.w_acc * float(cdd @ cdd)
            ld = self.L_dot_at(z, kn)
            total += p.w_L * float(ld @ ld)
        return total

    def cost_grad(self, z):
        p = self.problem
        g = np.zeros(self.n_vars)
        for kn in p.knots:
            _, cdd = self.com_at(z, kn)
            for sl, _, wa in self.knot_groups[kn.idx]:
                if wa != 0.0:
                    g[sl] += 2.0 * p.w_acc * wa * cdd
            if self.mode == MODE_FREE:
                th, thd, thdd = self.angular_at(z, kn)
                ld = angular_momentum_rate(p.model, th, thd, thdd, check=False)
                Jt, Jtd, Jtdd = angular_momentum_rate_jacobian(p.model, th, thd, thdd,
                                                               check=False)
                JL = np.hstack([Jt, Jtd, Jtdd]) @ self.B_ang[kn.idx]   # 3 x 15
                g[self.sl_q[kn.sh]] += 2.0 * p.w_L * (ld @ JL)
        return g

    def eq_fun(self, z):
        p = self.problem
        m = p.model.mass
        rows = [self.E_lin @ z + self.e_lin]
        ang = np.zeros(3 * p.n_knots)
        for kn in p.knots:
            c, cdd = self.com_at(z, kn)
            d = cdd - GRAVITY
            ld = self.L_dot_at(z, kn)
            f = z[self.sl_f[kn.idx]]
            ang[3 * kn.idx:3 * kn.idx + 3] = (m * np.cross(c, d) + ld - kn.A[3:] @ f)
        rows.append(ang)
        if self.E_ang.size:
            rows.append(self.E_ang @ z + self.e_ang)
        return np.concatenate(rows)

    def eq_jac(self, z):
        p = self.problem
        m = p.model.mass
        J_ang = np.zeros((3 * p.n_knots, self.n_vars))
        for kn in p.knots:
            r = slice(3 * kn.idx, 3 * kn.idx + 3)
            c, cdd = self.com_at(z, kn)
            d = cdd - GRAVITY
            for sl, wp, wa in self.knot_groups[kn.idx]:
                J_ang[r, sl] += m * (-wp * skew(d) + wa * skew(c))
            J_ang[r, self.sl_f[kn.idx]] = -kn.A[3:]
            if self.mode == MODE_FREE:
                th, thd, thdd = self.angular_at(z, kn)
                Jt, Jtd, Jtdd = angular_momentum_rate_jacobian(p.model, th, thd, thdd,
                                                               check=False)
                J_ang[r, self.sl_q[kn.sh]] += np.hstack([Jt, Jtd, Jtdd]) @ self.B_ang[kn.idx]
        blocks = [self.E_lin, J_ang]
        if self.E_ang.size:
            blocks.append(self.E_ang)
        return np.vstack(blocks)

    def eq_residual(self, z):
        return float(np.max(np.abs(self.eq_fun(z)), initial=0.0))

    def ineq_violation(self, z):
        return float(np.max(self.G @ z - self.h, initial=0.0))


def _angular_knot_map(us, duration):
    """9x15 maps from interleaved control values to (theta, rate, acc) per u."""
    D1, D2 = angular_deriv_operators(duration)
    maps = []
    for u in us:
        bp = bernstein_row(ANGULAR_ORDER, u)
        bv = bernstein_row(ANGULAR_ORDER - 1, u) @ D1
        ba = bernstein_row(ANGULAR_ORDER - 2, u) @ D2
        B = np.zeros((9, 3 * ANGULAR_POINTS))
        for a in range(3):
            B[a, a::3] = bp
            B[3 + a, a::3] = bv
            B[6 + a, a::3] = ba
        maps.append(B)
    return maps


def desired_angular_control(problem: TransitionProblem):
    """Desired spline control points in the NLP's interleaved layout, (15S,)."""
    return np.concatenate([c.control_points.reshape(-1) for c in problem.desired_angular])


def assemble_nlp(problem: TransitionProblem, mode: str = MODE_FREE) -> NonlinearNLP:
    if mode not in (MODE_FREE, MODE_TRACK, MODE_ZERO):
        raise ValueError(f"unknown mode {mode!r}")
    S = problem.n_sub
    K = problem.n_knots
    knots = problem.knots
    subs = problem.schedule.sub_horizons

    sl_y = [slice(3 * i, 3 * i + 3) for i in range(S)]
    off = 3 * S
    sl_f = []
    for kn in knots:
        nf = 3 * kn.contacts.count
        sl_f.append(slice(off, off + nf))
        off += nf
    sl_dc = [slice(off + 3 * j, off + 3 * j + 3) for j in range(S)]
    off += 3 * S
    sl_dcdd = [slice(off + 3 * j, off + 3 * j + 3) for j in range(S)]
    off += 3 * S
    if mode == MODE_FREE:
        sl_q = [slice(off + 15 * i, off + 15 * i + 15) for i in range(S)]
        off += 15 * S
    else:
        sl_q = []
    n = off

    # per-knot variable couplings: (slice, pos weight, acc weight)
    groups = []
    for kn in knots:
        i = kn.sh
        g = [(sl_y[i], kn.w_pos[6], kn.w_acc[6])]
        if i >= 1:  # start way-point i carries slack i-1
            g.append((sl_dc[i - 1], kn.w_pos[0], kn.w_acc[0]))
            g.append((sl_dcdd[i - 1], kn.w_pos[2], kn.w_acc[2]))
        g.append((sl_dc[i], kn.w_pos[3], kn.w_acc[3]))
        g.append((sl_dcdd[i], kn.w_pos[5], kn.w_acc[5]))
        groups.append(g)

    s_fix = []
    for i in range(S):
        a, b = problem.boundary_states(i)
        s_fix.append(np.vstack([a.c, a.c_dot, a.c_ddot, b.c, b.c_dot, b.c_ddot]))

    mmass = problem.model.mass
    E_lin = np.zeros((3 * K, n))
    e_lin = np.zeros(3 * K)
    for kn in knots:
        r = slice(3 * kn.idx, 3 * kn.idx + 3)
        for sl, _, wa in groups[kn.idx]:
            E_lin[r, sl] += mmass * wa * np.eye(3)
        E_lin[r, sl_f[kn.idx]] = -kn.A[:3]
        cdd_fix = kn.w_acc[:6] @ s_fix[kn.sh]
        e_lin[3 * kn.idx:3 * kn.idx + 3] = mmass * (cdd_fix - GRAVITY)

    # angular-curve linear rows (free mode): start pins, C0/C1/C2 chaining,
    # final orientation pin
    if mode == MODE_FREE:
        rows, consts = [], []
        T0 = subs[0].duration
        th0 = problem.waypoints[0]

        def _rows_for(coeffs, rhs3):
            # coeffs: list of (sub-horizon, control index, weight); per-axis rows
            for a in range(3):
                row = np.zeros(n)
                for i, j, w in coeffs:
                    row[sl_q[i].start + 3 * j + a] = w
                rows.append(row)
                consts.append(-rhs3[a])

        _rows_for([(0, 0, 1.0)], th0.theta)
        _rows_for([(0, 1, 4.0 / T0), (0, 0, -4.0 / T0)], th0.theta_dot)
        _rows_for([(0, 2, 12.0 / T0 ** 2), (0, 1, -24.0 / T0 ** 2), (0, 0, 12.0 / T0 ** 2)],
                  th0.theta_ddot)
        for i in range(S - 1):
            Ta, Tb = subs[i].duration, subs[i + 1].duration
            _rows_for([(i, 4, 1.0), (i + 1, 0, -1.0)], np.zeros(3))
            _rows_for([(i, 4, 4.0 / Ta), (i, 3, -4.0 / Ta),
                       (i + 1, 1, -4.0 / Tb), (i + 1, 0, 4.0 / Tb)], np.zeros(3))
            _rows_for([(i, 4, 12.0 / Ta ** 2), (i, 3, -24.0 / Ta ** 2), (i, 2, 12.0 / Ta ** 2),
                       (i + 1, 0, -12.0 / Tb ** 2), (i + 1, 1, 24.0 / Tb ** 2),
                       (i + 1, 2, -12.0 / Tb ** 2)], np.zeros(3))
        _rows_for([(S - 1, 4, 1.0)], problem.waypoints[S].theta)
        E_ang = np.array(rows)
        e_ang = np.array(consts)
    else:
        E_ang = np.zeros((0, n))
        e_ang = np.zeros(0)

    fric = friction_stack(problem)
    G_rows, h_rows = [], []
    for kn in knots:
        Gk, hk = fric[kn.idx]
        Grow = np.zeros((Gk.shape[0], n))
        Grow[:, sl_f[kn.idx]] = Gk
        G_rows.append(Grow)
        h_rows.append(hk)
    G = np.vstack(G_rows)
    h = np.concatenate(h_rows)

    bounds = [(None, None)] * n
    for j in range(S):
        for a in range(3):
            bounds[sl_dc[j].start + a] = (-problem.slack_pos, problem.slack_pos)
            bounds[sl_dcdd[j].start + a] = (-problem.slack_acc, problem.slack_acc)
    if mode == MODE_FREE:
        # keep pitch away from the Euler singularity; the curve lies in the
        # convex hull of its control points, so bounding those suffices
        pitch_cap = np.pi / 2 - 5e-3
        for i in range(S):
            for j in range(ANGULAR_POINTS):
                bounds[sl_q[i].start + 3 * j + 1] = (-pitch_cap, pitch_cap)

    # frozen angular knot values and L_dot (also used for reporting)
    ang_fixed = np.zeros((K, 9))
    L_fixed = np.zeros((K, 3))
    from .bezier import derivative, evaluate
    d1 = [derivative(c) for c in problem.desired_angular]
    d2 = [derivative(c) for c in d1]
    for kn in knots:
        th = evaluate(problem.desired_angular[kn.sh], kn.u)
        thd = evaluate(d1[kn.sh], kn.u)
        thdd = evaluate(d2[kn.sh], kn.u)
        ang_fixed[kn.idx] = np.concatenate([th, thd, thdd])
        L_fixed[kn.idx] = angular_momentum_rate(problem.model, th, thd, thdd)

    nlp = NonlinearNLP(
        problem=problem, mode=mode, n_vars=n,
        sl_y=sl_y, sl_f=sl_f, sl_dc=sl_dc, sl_dcdd=sl_dcdd, sl_q=sl_q,
        E_lin=E_lin, e_lin=e_lin, E_ang=E_ang, e_ang=e_ang,
        G=G, h=h, bounds=bounds, L_fixed=L_fixed,
        knot_groups=groups,
    )
    nlp._s_fix = s_fix
    nlp._ang_fixed = ang_fixed
    if mode == MODE_FREE:
        nlp.B_ang = []
        for kn in knots:
            maps = _angular_knot_map([kn.u], subs[kn.sh].duration)
            nlp.B_ang.append(maps[0])
    return nlp


def initial_point(nlp: NonlinearNLP, warm: TransitionResult | None = None):
    """Zero slacks, desired angular spline, static or warm-started y and f."""
    p = nlp.problem
    z = np.zeros(nlp.n_vars)
    if warm is not None and warm.feasible:
        for i in range(p.n_sub):
            # the free point is the middle control point of the 8th-order curve
            z[nlp.sl_y[i]] = warm.com_curves[i].control_points[4]
        for kn in p.knots:
            z[nlp.sl_f[kn.idx]] = warm.forces[kn.idx]
    else:
        for i in range(p.n_sub):
            a, b = p.boundary_states(i)
            z[nlp.sl_y[i]] = 0.5 * (a.c + b.c)
        for kn in p.knots:
            nc = kn.contacts.count
            share = p.model.mass * 9.81 / nc
            f0 = np.zeros(3 * nc)
            f0[2::3] = share
            z[nlp.sl_f[kn.idx]] = f0
    if nlp.mode == MODE_FREE:
        q = desired_angular_control(p)
        for i in range(p.n_sub):
            z[nlp.sl_q[i]] = q[15 * i:15 * i + 15]
    return z


def embed_convex(nlp: NonlinearNLP, convex_result: TransitionResult):
    """Convex solution with zero slacks and the desired angular trajectory."""
    return initial_point(nlp, warm=convex_result)


def solve_transition_nonlinear(problem: TransitionProblem,
                               initial_guess: TransitionResult | None = None,
                               mode: str = MODE_FREE,
                               max_iter: int = 300) -> TransitionResult:
    """SLSQP solve with analytic gradients; statuses: Feasible / NoConvergence /
    SolverError. Local failure is never reported as Infeasible."""
    nlp = assemble_nlp(problem, mode=mode)
    z0 = initial_point(nlp, warm=initial_guess)

    # contact forces live on a ~mg scale while positions are decimeters;
    # rescaling the force variables is what lets SLSQP terminate
    s = np.ones(nlp.n_vars)
    for sl in nlp.sl_f:
        s[sl] = problem.model.mass * 9.81
    bnds = [(None if lo is None else lo / si, None if hi is None else hi / si)
            for (lo, hi), si in zip(nlp.bounds, s)]
    cons = [
        {"type": "eq", "fun": lambda w: nlp.eq_fun(s * w),
         "jac": lambda w: nlp.eq_jac(s * w) * s},
        {"type": "ineq", "fun": lambda w: nlp.h - nlp.G @ (s * w),
         "jac": lambda w: -(nlp.G * s)},
    ]
    t0 = time.perf_counter()
    try:
        res = minimize(lambda w: nlp.cost(s * w), z0 / s,
                       jac=lambda w: nlp.cost_grad(s * w) * s, method="SLSQP",
                       bounds=bnds, constraints=cons,
                       options={"maxiter": max_iter, "ftol": 1e-9})
    except (np.linalg.LinAlgError, ValueError, FloatingPointError) as exc:
        return TransitionResult(status=Status.SOLVER_ERROR, message=str(exc),
                                solve_time=time.perf_counter() - t0)
    wall = time.perf_counter() - t0
    z = np.asarray(res.x) * s
    if not np.all(np.isfinite(z)):
        return TransitionResult(status=Status.SOLVER_ERROR, message="non-finite iterate",
                                solve_time=wall)

    eq_res = nlp.eq_residual(z)
    ineq_res = nlp.ineq_violation(z)
    if eq_res > FEAS_TOL or ineq_res > FEAS_TOL:
        return TransitionResult(status=Status.NO_CONVERGENCE, solve_time=wall,
                                message=f"eq {eq_res:.2e}, ineq {ineq_res:.2e}: {res.message}")

    return _extract(nlp, z, wall)


def _extract(nlp: NonlinearNLP, z, wall):
    p = nlp.problem
    subs = p.schedule.sub_horizons
    com_curves = []
    for i, sh in enumerate(subs):
        a, b = p.boundary_states(i)
        dc_s = z[nlp.sl_dc[i - 1]] if i >= 1 else np.zeros(3)
        dcdd_s = z[nlp.sl_dcdd[i - 1]] if i >= 1 else np.zeros(3)
        dc_e = z[nlp.sl_dc[i]]
        dcdd_e = z[nlp.sl_dcdd[i]]
        start = (a.c + dc_s, a.c_dot, a.c_ddot + dcdd_s)
        end = (b.c + dc_e, b.c_dot, b.c_ddot + dcdd_e)
        com_curves.append(build_transition_curve(start, end, z[nlp.sl_y[i]], sh.duration))
    if nlp.mode == MODE_FREE:
        angular_curves = [BezierCurve(z[nlp.sl_q[i]].reshape(ANGULAR_POINTS, 3), subs[i].duration)
                          for i in range(p.n_sub)]
    else:
        angular_curves = list(p.desired_angular)
    forces = [z[s].copy() for s in nlp.sl_f]
    L_dot = np.vstack([nlp.L_dot_at(z, kn) for kn in p.knots])
    return TransitionResult(
        status=Status.FEASIBLE,
        cost=float(nlp.cost(z)),
        com_curves=com_curves,
        angular_curves=angular_curves,
        forces=forces,
        L_dot=L_dot,
        solve_time=wall,
    )
