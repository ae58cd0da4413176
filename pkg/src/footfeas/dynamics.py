"""Rigid-body wrench balance, angular momentum rate and contact constraints.

Moments are taken about the world origin, matching the c x (cdd - g) form of
the wrench: w = [m(cdd - g); m c x (cdd - g) + Ldot] = A f, with A stacking
identity blocks over the skew matrices of the contact points.
"""

from dataclasses import dataclass, field

import numpy as np

from .model import (GRAVITY, RobotModel, euler_rate_map, euler_rate_map_dot,
                    euler_rate_map_partials, euler_rate_map_second_partials,
                    rotation_matrix, rotation_matrix_partials, skew, world_inertia)

DEFAULT_KNOTS = 10  # constraint samples per sub-horizon (N; N+1 knots)


@dataclass(frozen=True)
class ContactSet:
    points: np.ndarray  # (nc, 3) world-frame contact positions
    feet: tuple = ()    # leg names, parallel to points (informational)

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        object.__setattr__(self, "points", pts)
        if not 1 <= pts.shape[0] <= 4 or pts.shape[1] != 3:
            raise ValueError("need 1..4 finite 3D contact points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("contact points must be finite")

    @property
    def count(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class Wrench:
    linear: np.ndarray   # N
    angular: np.ndarray  # N m, about the world origin

    def stacked(self):
        return np.concatenate([np.asarray(self.linear, float), np.asarray(self.angular, float)])


@dataclass
class LinearConstraintSet:
    """Equality pairs (A, b) and two-sided inequality triples (A, lo, hi)."""

    equalities: list = field(default_factory=list)
    inequalities: list = field(default_factory=list)

    def inequalities_le(self):
        """Stack two-sided rows into a single G x <= h system (finite bounds only)."""
        G_rows, h_rows = [], []
        for A, lo, hi in self.inequalities:
            for i in range(A.shape[0]):
                if np.isfinite(hi[i]):
                    G_rows.append(A[i])
                    h_rows.append(hi[i])
                if np.isfinite(lo[i]):
                    G_rows.append(-A[i])
                    h_rows.append(-lo[i])
        return np.array(G_rows), np.array(h_rows)

    def satisfied(self, x, tol=1e-8):
        for A, b in self.equalities:
            if np.max(np.abs(A @ x - b), initial=0.0) > tol:
                return False
        for A, lo, hi in self.inequalities:
            v = A @ x
            if np.any(v > hi + tol) or np.any(v < lo - tol):
                return False
        return True


def grf_matrix(contacts: ContactSet):
    """6 x 3nc matrix: identity blocks over [p_j]_x blocks."""
    nc = contacts.count
    A = np.zeros((6, 3 * nc))
    for j in range(nc):
        A[:3, 3 * j:3 * j + 3] = np.eye(3)
        A[3:, 3 * j:3 * j + 3] = skew(contacts.points[j])
    return A


def angular_momentum_rate(model: RobotModel, theta, theta_dot, theta_ddot, check=True):
    """Ldot = T td x I_W T td + I_W (Tdot td + T tdd)."""
    theta_dot = np.asarray(theta_dot, dtype=float).reshape(3)
    theta_ddot = np.asarray(theta_ddot, dtype=float).reshape(3)
    T = euler_rate_map(theta, check=check)
    Tdot = euler_rate_map_dot(theta, theta_dot, check=check)
    Iw = world_inertia(model, theta)
    omega = T @ theta_dot
    return np.cross(omega, Iw @ omega) + Iw @ (Tdot @ theta_dot + T @ theta_ddot)


def angular_momentum_rate_jacobian(model: RobotModel, theta, theta_dot, theta_ddot,
                                   check=True):
    """Analytic partials of Ldot w.r.t. (theta, theta_dot, theta_ddot).

    Returns three 3x3 matrices (columns = input components).
    """
    theta = np.asarray(theta, dtype=float).reshape(3)
    theta_dot = np.asarray(theta_dot, dtype=float).reshape(3)
    theta_ddot = np.asarray(theta_ddot, dtype=float).reshape(3)
    T = euler_rate_map(theta, check=check)
    dT = euler_rate_map_partials(theta, check=check)
    d2T = euler_rate_map_second_partials(theta, check=check)
    Tdot = euler_rate_map_dot(theta, theta_dot, check=check)
    R = rotation_matrix(theta)
    dR = rotation_matrix_partials(theta)
    I = model.body_inertia
    Iw = R @ I @ R.T
    omega = T @ theta_dot
    alpha = Tdot @ theta_dot + T @ theta_ddot
    Iw_omega = Iw @ omega

    J_theta = np.zeros((3, 3))
    for i in range(3):
        dIw = dR[i] @ I @ R.T + R @ I @ dR[i].T
        domega = dT[i] @ theta_dot
        dTdot = sum(d2T[i, j] * theta_dot[j] for j in range(3))
        dalpha = dTdot @ theta_dot + dT[i] @ theta_ddot
        J_theta[:, i] = (np.cross(domega, Iw_omega)
                         + np.cross(omega, dIw @ omega + Iw @ domega)
                         + dIw @ alpha + Iw @ dalpha)

    J_td = np.zeros((3, 3))
    for i in range(3):
        e = np.zeros(3); e[i] = 1.0
        domega = T @ e
        dalpha = dT[i] @ theta_dot + Tdot @ e  # Tdot is linear in theta_dot
        J_td[:, i] = (np.cross(domega, Iw_omega)
                      + np.cross(omega, Iw @ domega)
                      + Iw @ dalpha)

    J_tdd = Iw @ T
    return J_theta, J_td, J_tdd


def wrench_from_motion(model: RobotModel, c, c_ddot, L_dot, g=GRAVITY) -> Wrench:
    c = np.asarray(c, dtype=float).reshape(3)
    c_ddot = np.asarray(c_ddot, dtype=float).reshape(3)
    L_dot = np.asarray(L_dot, dtype=float).reshape(3)
    lin = model.mass * (c_ddot - g)
    ang = model.mass * np.cross(c, c_ddot - g) + L_dot
    return Wrench(lin, ang)


def friction_constraints(contacts: ContactSet, mu: float, f_max: float) -> LinearConstraintSet:
    """Linearized pyramid per contact over the stacked force vector.

    Rows per contact: 0 <= f_z <= f_max, |f_x| <= mu f_z, |f_y| <= mu f_z.
    """
    if mu <= 0.0 or f_max <= 0.0:
        raise ValueError("mu and f_max must be positive")
    nc = contacts.count
    A = np.zeros((5 * nc, 3 * nc))
    lo = np.zeros(5 * nc)
    hi = np.zeros(5 * nc)
    inf = np.inf
    for j in range(nc):
        r, cidx = 5 * j, 3 * j
        A[r, cidx + 2] = 1.0;                lo[r] = 0.0;   hi[r] = f_max
        A[r + 1, cidx] = 1.0;     A[r + 1, cidx + 2] = -mu; lo[r + 1] = -inf; hi[r + 1] = 0.0
        A[r + 2, cidx] = 1.0;     A[r + 2, cidx + 2] = mu;  lo[r + 2] = 0.0;  hi[r + 2] = inf
        A[r + 3, cidx + 1] = 1.0; A[r + 3, cidx + 2] = -mu; lo[r + 3] = -inf; hi[r + 3] = 0.0
        A[r + 4, cidx + 1] = 1.0; A[r + 4, cidx + 2] = mu;  lo[r + 4] = 0.0;  hi[r + 4] = inf
    return LinearConstraintSet(inequalities=[(A, lo, hi)])


def sample_knots(sub_horizon, N: int = DEFAULT_KNOTS):
    """N+1 uniform normalized parameters with the active contact set at each.

    A knot landing exactly on a phase boundary takes the intersection of the
    adjacent stance sets, the conservative choice with fewer feet.
    """
    if N < 2:
        raise ValueError("need N >= 2 knot intervals")
    dur = sub_horizon.duration
    bounds = np.cumsum([p.duration for p in sub_horizon.phases])
    out = []
    for k in range(N + 1):
        u = k / N
        t = u * dur
        # locate the phase; detect an exact hit on an internal boundary
        idx = 0
        on_boundary = None
        for i, b in enumerate(bounds[:-1]):
            if abs(t - b) <= 1e-9 * max(dur, 1.0):
                on_boundary = i
                break
            if t > b:
                idx = i + 1
        if on_boundary is not None:
            a = sub_horizon.phases[on_boundary]
            b_ = sub_horizon.phases[on_boundary + 1]
            feet = tuple(l for l in a.stance_feet if l in b_.stance_feet)
            positions = {l: (b_.foot_positions[l] if l in b_.foot_positions
                             else a.foot_positions[l]) for l in feet}
        else:
            ph = sub_horizon.phases[idx]
            feet = ph.stance_feet
            positions = ph.foot_positions
        pts = np.array([positions[l] for l in feet])
        out.append((u, ContactSet(pts, feet)))
    return out


def recheck_knots(model: RobotModel, knots):
    """Independent re-check of a returned trajectory at its knots.

    knots: iterable of dicts with keys c, c_ddot, L_dot, forces (3nc,),
    contacts (ContactSet). Returns (max dynamics residual, max friction
    violation); both should be ~0 for a valid solution.
    """
    dyn_res = 0.0
    fric_res = 0.0
    for k in knots:
        contacts = k["contacts"]
        w = wrench_from_motion(model, k["c"], k["c_ddot"], k["L_dot"])
        A = grf_matrix(contacts)
        f = np.asarray(k["forces"], dtype=float)
        dyn_res = max(dyn_res, float(np.max(np.abs(w.stacked() - A @ f))))
        con = friction_constraints(contacts, model.mu, model.f_max)
        for M, lo, hi in con.inequalities:
            v = M @ f
            fric_res = max(fric_res, float(np.max(np.maximum(v - hi, 0.0), initial=0.0)),
                           float(np.max(np.maximum(lo - v, 0.0), initial=0.0)))
    return dyn_res, fric_res
