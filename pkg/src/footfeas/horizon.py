"""Contact schedule for a periodic crawl, sub-horizon partitioning and way-points.

The horizon is measured in contact switches (a foot making or breaking
contact). Each sub-horizon carries at most two switches, i.e. lift-off and
touchdown of the same leg, so a full crawl cycle (8 switches) splits into
four sub-horizons. Interior 4-stance phases are split at their midpoint so
consecutive sub-horizons tile the schedule exactly and every way-point falls
in a 4-stance phase.
"""

from dataclasses import dataclass, field

import numpy as np

from .bezier import BezierCurve, bernstein_matrix, diff_matrix
from .errors import InvalidGait
from .model import LEG_NAMES, State, rot_z

DEFAULT_SEQUENCE = ("RH", "RF", "LH", "LF")


@dataclass(frozen=True)
class GaitParams:
    swing_duration: float = 0.8
    stance_duration: float = 0.2   # 4-stance phase between swings
    sequence: tuple = DEFAULT_SEQUENCE

    def __post_init__(self):
        if self.swing_duration <= 0.0 or self.stance_duration <= 0.0:
            raise InvalidGait("swing and stance durations must be positive")
        if any(leg not in LEG_NAMES for leg in self.sequence) or not self.sequence:
            raise InvalidGait(f"sequence must draw from {LEG_NAMES}")

    @property
    def cycle_duration(self):
        return len(self.sequence) * (self.swing_duration + self.stance_duration)


@dataclass(frozen=True)
class ContactPhase:
    duration: float
    stance_feet: tuple                 # subset of LEG_NAMES
    foot_positions: dict               # leg -> world 3-vector for stance feet

    def __post_init__(self):
        if self.duration <= 0.0:
            raise InvalidGait("phase duration must be positive")
        if not self.stance_feet:
            raise InvalidGait("at least one stance foot is required")

    def positions_array(self):
        return np.array([self.foot_positions[leg] for leg in self.stance_feet])


@dataclass(frozen=True)
class SubHorizon:
    phases: tuple                      # 1-3 consecutive ContactPhases
    start_time: float
    start_state_index: int
    end_state_index: int

    @property
    def duration(self):
        return sum(p.duration for p in self.phases)

    @property
    def switches(self):
        n = 0
        for a, b in zip(self.phases[:-1], self.phases[1:]):
            n += len(set(a.stance_feet) ^ set(b.stance_feet))
        return n

    def phase_at(self, u: float):
        """Phase containing normalized time u in [0, 1] (boundaries go to the later phase)."""
        t = u * self.duration
        acc = 0.0
        for p in self.phases[:-1]:
            acc += p.duration
            if t < acc - 1e-12:
                return p
        return self.phases[-1]


@dataclass(frozen=True)
class ContactSchedule:
    phases: tuple
    sub_horizons: tuple = field(default_factory=tuple)

    @property
    def csh(self):
        n = 0
        for a, b in zip(self.phases[:-1], self.phases[1:]):
            n += len(set(a.stance_feet) ^ set(b.stance_feet))
        return n

    @property
    def duration(self):
        return sum(p.duration for p in self.phases)

    @property
    def nc(self):
        return tuple(len(p.stance_feet) for p in self.phases)


def build_contact_schedule(gait: GaitParams, footholds: dict, horizon_switches: int,
                           landings: dict | None = None) -> ContactSchedule:
    """Alternating 4-stance / 3-stance crawl phases covering the requested switches.

    footholds: current world position per leg. landings: per-leg list of
    successive touchdown positions, consumed in swing order; a missing entry
    keeps the foot where it was.
    """
    if horizon_switches < 0:
        raise InvalidGait("horizon_switches must be non-negative")
    positions = {leg: np.asarray(footholds[leg], dtype=float).reshape(3) for leg in LEG_NAMES}
    pending = {leg: list(landings.get(leg, [])) for leg in LEG_NAMES} if landings else \
              {leg: [] for leg in LEG_NAMES}

    phases = []
    if horizon_switches == 0:
        phases.append(ContactPhase(gait.stance_duration, LEG_NAMES, dict(positions)))
        sched = ContactSchedule(tuple(phases))
        return ContactSchedule(sched.phases, tuple(partition_subhorizons(sched)))

    switches = 0
    swing_idx = 0
    phases.append(ContactPhase(gait.stance_duration, LEG_NAMES, dict(positions)))
    while switches < horizon_switches:
        leg = gait.sequence[swing_idx % len(gait.sequence)]
        swing_idx += 1
        stance = tuple(l for l in LEG_NAMES if l != leg)
        phases.append(ContactPhase(gait.swing_duration, stance,
                                   {l: positions[l] for l in stance}))
        switches += 1  # lift-off
        if switches >= horizon_switches:
            break  # horizon ends mid-swing
        if pending[leg]:
            positions[leg] = np.asarray(pending[leg].pop(0), dtype=float).reshape(3)
        phases.append(ContactPhase(gait.stance_duration, LEG_NAMES, dict(positions)))
        switches += 1  # touchdown
    sched = ContactSchedule(tuple(phases))
    return ContactSchedule(sched.phases, tuple(partition_subhorizons(sched)))


def partition_subhorizons(schedule: ContactSchedule):
    """Greedy split into sub-horizons of at most two contact switches.

    A phase that would bring a group past two switches is split at its
    midpoint; the two halves share the stance set, so no switch is lost or
    double-counted and concatenating the groups reproduces the stance
    function exactly.
    """
    phases = list(schedule.phases)
    groups = [[phases[0]]]
    switches = 0
    for p in phases[1:]:
        if switches == 2:
            last = groups[-1].pop()
            half = 0.5 * last.duration
            groups[-1].append(ContactPhase(half, last.stance_feet, last.foot_positions))
            groups.append([ContactPhase(half, last.stance_feet, last.foot_positions)])
            switches = 0
        switches += len(set(groups[-1][-1].stance_feet) ^ set(p.stance_feet))
        groups[-1].append(p)
    out = []
    t = 0.0
    for i, g in enumerate(groups):
        sh = SubHorizon(tuple(g), t, i, i + 1)
        out.append(sh)
        t += sh.duration
    return out


def fit_plane(points):
    """Least-squares plane z = a x + b y + c through world points (k, 3), k >= 3."""
    pts = np.asarray(points, dtype=float)
    A = np.column_stack([pts[:, 0], pts[:, 1], np.ones(len(pts))])
    coef, *_ = np.linalg.lstsq(A, pts[:, 2], rcond=None)
    return coef  # (a, b, c)


def terrain_aligned_rp(points, yaw: float):
    """Desired (roll, pitch) aligning the base with the stance plane.

    Nose-up on ascent: a slope of +s along the heading gives pitch -atan(s).
    """
    a, b, _ = fit_plane(points)
    grad = rot_z(-yaw)[:2, :2] @ np.array([a, b])
    pitch = -np.arctan(grad[0])
    roll = np.arctan(grad[1])
    return roll, pitch


def waypoint_states(schedule: ContactSchedule, v_cmd, initial_state: State,
                    com_height: float | None = None):
    """Desired state at each way-point (sub-horizon boundaries, ends included).

    v_cmd = (vx, vy, yaw_rate): planar velocity in the heading frame plus yaw
    rate. Positions integrate the yaw-rotated command; height tracks the mean
    stance-foot height (offset calibrated on the initial state) so the CoM
    follows the terrain. Roll/pitch come from a plane fit over the stance
    feet; accelerations are zero.
    """
    vx, vy, yaw_rate = (float(v) for v in v_cmd)
    subs = schedule.sub_horizons
    times = [0.0] + list(np.cumsum([sh.duration for sh in subs]))

    # stance feet observed at each way-point (phase containing the boundary)
    feet_at = []
    for j in range(len(times)):
        if j < len(subs):
            feet_at.append(subs[j].phases[0].positions_array())
        else:
            feet_at.append(subs[-1].phases[-1].positions_array())

    if com_height is None:
        com_height = float(initial_state.c[2] - feet_at[0][:, 2].mean())

    # integrate planar command, sample terrain height
    states = []
    heights = [feet_at[j][:, 2].mean() + com_height for j in range(len(times))]
    pos = np.array(initial_state.c, dtype=float)
    yaw0 = float(initial_state.theta[2])
    for j, t in enumerate(times):
        yaw = yaw0 + yaw_rate * t
        if abs(yaw_rate) > 1e-12:
            # closed-form integral of Rz(yaw(t)) @ (vx, vy)
            s0, c0 = np.sin(yaw0), np.cos(yaw0)
            s1, c1 = np.sin(yaw), np.cos(yaw)
            dx = (vx * (s1 - s0) + vy * (c1 - c0)) / yaw_rate
            dy = (-vx * (c1 - c0) + vy * (s1 - s0)) / yaw_rate
        else:
            dx = (vx * np.cos(yaw0) - vy * np.sin(yaw0)) * t
            dy = (vx * np.sin(yaw0) + vy * np.cos(yaw0)) * t
        c = np.array([pos[0] + dx, pos[1] + dy, heights[j]])
        # vertical rate from the terrain height profile (forward difference)
        if j + 1 < len(times):
            vz = (heights[j + 1] - heights[j]) / (times[j + 1] - times[j])
        elif j > 0:
            vz = (heights[j] - heights[j - 1]) / (times[j] - times[j - 1])
        else:
            vz = 0.0
        if vx == 0.0 and vy == 0.0:
            vz = 0.0
        v_world = rot_z(yaw) @ np.array([vx, vy, 0.0]) + np.array([0.0, 0.0, vz])
        if j == 0:
            theta = np.array(initial_state.theta, dtype=float)
            theta_dot = np.array(initial_state.theta_dot, dtype=float)
            theta_ddot = np.array(initial_state.theta_ddot, dtype=float)
            states.append(State(c=np.array(initial_state.c, dtype=float),
                                c_dot=np.array(initial_state.c_dot, dtype=float),
                                c_ddot=np.array(initial_state.c_ddot, dtype=float),
                                theta=theta, theta_dot=theta_dot, theta_ddot=theta_ddot))
            continue
        roll, pitch = terrain_aligned_rp(feet_at[j], yaw)
        states.append(State(
            c=c, c_dot=v_world, c_ddot=np.zeros(3),
            theta=np.array([roll, pitch, yaw]),
            theta_dot=np.array([0.0, 0.0, yaw_rate]),
            theta_ddot=np.zeros(3),
        ))
    return states


# --- desired angular trajectory ---------------------------------------------
#
# A per-sub-horizon 4th-order Bezier spline for the Euler angles: hits the
# way-point orientations, is pinned to the initial angular state, keeps rate
# and acceleration continuous across junctions, and among those minimizes the
# integrated squared angular acceleration (natural-spline flavor). The same
# spline seeds the nonlinear solve, so the chained representation has to
# satisfy the chaining constraints by construction.

ANGULAR_ORDER = 4


def _bernstein_gram(n):
    from math import comb
    G = np.zeros((n + 1, n + 1))
    for i in range(n + 1):
        for j in range(n + 1):
            G[i, j] = comb(n, i) * comb(n, j) / ((2 * n + 1) * comb(2 * n, i + j))
    return G


def angular_constraint_rows(durations):
    """Linear rows C q = 0-pattern shared by the desired spline and the NLP.

    Variables q are the stacked per-axis control values, 5 per sub-horizon.
    Returns (C, meta) where rows encode, in order: start position/rate/acc,
    rate and acceleration continuity per junction, and nothing else. Position
    pins are added by callers since they differ between uses.
    """
    S = len(durations)
    m = 5 * S
    rows = []
    # start rate and acceleration (position pin added by caller)
    r = np.zeros(m); r[1] = 4.0 / durations[0]; r[0] = -4.0 / durations[0]
    rows.append(("start_rate", r))
    r = np.zeros(m)
    r[0] = 12.0 / durations[0] ** 2; r[1] = -24.0 / durations[0] ** 2; r[2] = 12.0 / durations[0] ** 2
    rows.append(("start_acc", r))
    for i in range(S - 1):
        a, b = 5 * i, 5 * (i + 1)
        Ta, Tb = durations[i], durations[i + 1]
        r = np.zeros(m)
        r[a + 4] = 4.0 / Ta; r[a + 3] = -4.0 / Ta
        r[b + 1] = -4.0 / Tb; r[b + 0] = 4.0 / Tb
        rows.append((f"junction_rate_{i}", r))
        r = np.zeros(m)
        r[a + 4] = 12.0 / Ta ** 2; r[a + 3] = -24.0 / Ta ** 2; r[a + 2] = 12.0 / Ta ** 2
        r[b + 0] = -12.0 / Tb ** 2; r[b + 1] = 24.0 / Tb ** 2; r[b + 2] = -12.0 / Tb ** 2
        rows.append((f"junction_acc_{i}", r))
    return rows


def desired_angular_curves(waypoints, durations):
    """C2 spline of ANGULAR_ORDER Bezier pieces through the way-point orientations.

    waypoints: desired States (len = len(durations) + 1). The initial angular
    state (value, rate, acceleration) is pinned exactly; interior/final
    way-point orientations are interpolated; remaining freedom minimizes the
    integrated squared angular acceleration.
    """
    S = len(durations)
    m = 5 * S
    thetas = np.array([w.theta for w in waypoints])        # (S+1, 3)
    # equality rows: per-axis identical matrices, per-axis rhs differ
    A_rows, rhs_cols = [], []
    r = np.zeros(m); r[0] = 1.0
    A_rows.append(r); rhs_cols.append(thetas[0])
    for name, row in angular_constraint_rows(durations):
        A_rows.append(row)
        if name == "start_rate":
            rhs_cols.append(waypoints[0].theta_dot)
        elif name == "start_acc":
            rhs_cols.append(waypoints[0].theta_ddot)
        else:
            rhs_cols.append(np.zeros(3))
    for i in range(S - 1):  # interior way-point positions (both sides)
        r = np.zeros(m); r[5 * i + 4] = 1.0
        A_rows.append(r); rhs_cols.append(thetas[i + 1])
        r = np.zeros(m); r[5 * (i + 1)] = 1.0
        A_rows.append(r); rhs_cols.append(thetas[i + 1])
    r = np.zeros(m); r[5 * (S - 1) + 4] = 1.0
    A_rows.append(r); rhs_cols.append(thetas[S])

    A = np.array(A_rows)
    B = np.array(rhs_cols)                                  # (rows, 3)

    # energy: sum_i T_i * || D2 D1 q_i ||^2_Gram over the order-2 acc curve
    H = np.zeros((m, m))
    G2 = _bernstein_gram(2)
    for i, T in enumerate(durations):
        D = diff_matrix(3, T) @ diff_matrix(4, T)           # (3, 5)
        Hi = T * (D.T @ G2 @ D)
        H[5 * i:5 * i + 5, 5 * i:5 * i + 5] += Hi

    # KKT system per axis (shared factorization)
    nr = A.shape[0]
    K = np.zeros((m + nr, m + nr))
    K[:m, :m] = H + 1e-12 * np.eye(m)
    K[:m, m:] = A.T
    K[m:, :m] = A
    rhs = np.zeros((m + nr, 3))
    rhs[m:, :] = B
    sol = np.linalg.solve(K, rhs)
    q = sol[:m]                                             # (5S, 3)
    return [BezierCurve(q[5 * i:5 * i + 5], durations[i]) for i in range(S)]
