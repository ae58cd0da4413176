"""Shared structure for the transition optimizations.

Collects, per constraint knot: the active contact set, the GRF matrix, the
friction rows, and the evaluation weights that express the CoM position and
acceleration as linear functions of the sub-horizon boundary states and the
free control point. Both the convex and the nonlinear formulations are
assembled from this table.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .bezier import BezierCurve, bernstein_matrix, diff_matrix, transition_eval_weights
from .dynamics import (ContactSet, DEFAULT_KNOTS, friction_constraints, grf_matrix,
                       sample_knots)
from .errors import DimensionMismatch
from .horizon import ANGULAR_ORDER, ContactSchedule, desired_angular_curves, waypoint_states
from .model import RobotModel, State


@dataclass(frozen=True)
class Knot:
    sh: int                  # sub-horizon index
    idx: int                 # global knot index
    u: float                 # normalized parameter within the sub-horizon
    t: float                 # global time
    contacts: ContactSet
    A: np.ndarray            # 6 x 3nc GRF matrix
    w_pos: np.ndarray        # (7,) transition weights for c
    w_vel: np.ndarray        # (7,) for c_dot
    w_acc: np.ndarray        # (7,) for c_ddot


@dataclass
class TransitionProblem:
    """Fixed data of a transition solve over a partitioned contact schedule."""

    model: RobotModel
    schedule: ContactSchedule
    waypoints: list                    # desired States, len = n_sub + 1
    N: int = DEFAULT_KNOTS
    w_L: float = 1.0                   # angular-momentum cost weight
    w_acc: float = 1.0                 # CoM acceleration cost weight
    slack_pos: float = 0.1             # NLP |dc|_inf bound, m
    slack_acc: float = 2.0             # NLP |dcdd|_inf bound, m/s^2
    knots: list = field(default_factory=list)
    desired_angular: list = field(default_factory=list)   # BezierCurve per sub-horizon

    def __post_init__(self):
        subs = self.schedule.sub_horizons
        if len(self.waypoints) != len(subs) + 1:
            raise DimensionMismatch(
                f"{len(subs)} sub-horizons need {len(subs) + 1} way-points, "
                f"got {len(self.waypoints)}")
        durations = [sh.duration for sh in subs]
        if not self.desired_angular:
            self.desired_angular = desired_angular_curves(self.waypoints, durations)
        if not self.knots:
            self.knots = build_knot_table(self.schedule, self.N)

    @property
    def n_sub(self):
        return len(self.schedule.sub_horizons)

    @property
    def n_knots(self):
        return len(self.knots)

    def boundary_states(self, i):
        """(start, end) desired way-point states of sub-horizon i."""
        return self.waypoints[i], self.waypoints[i + 1]


def build_knot_table(schedule: ContactSchedule, N: int):
    knots = []
    idx = 0
    for i, sh in enumerate(schedule.sub_horizons):
        samples = sample_knots(sh, N)
        us = [u for u, _ in samples]
        contact_sets = [cs for _, cs in samples]
        w_pos = transition_eval_weights(sh.duration, us, 0)
        w_vel = transition_eval_weights(sh.duration, us, 1)
        w_acc = transition_eval_weights(sh.duration, us, 2)
        for k, (u, cs) in enumerate(zip(us, contact_sets)):
            knots.append(Knot(sh=i, idx=idx, u=u, t=sh.start_time + u * sh.duration,
                              contacts=cs, A=grf_matrix(cs),
                              w_pos=w_pos[k], w_vel=w_vel[k], w_acc=w_acc[k]))
            idx += 1
    return knots


def make_problem(model: RobotModel, schedule: ContactSchedule, v_cmd,
                 initial_state: State, N: int = DEFAULT_KNOTS, **kwargs) -> TransitionProblem:
    """Convenience builder: desired way-points from the velocity command."""
    wps = waypoint_states(schedule, v_cmd, initial_state, com_height=model.com_height)
    return TransitionProblem(model=model, schedule=schedule, waypoints=wps, N=N, **kwargs)


def angular_eval_rows(us):
    """Bernstein evaluation rows for the order-4 angular curve and its derivatives.

    Returns (pos, vel, acc) arrays of shape (len(us), 5); derivative scaling by
    duration is applied by the caller through diff matrices.
    """
    return bernstein_matrix(ANGULAR_ORDER, us)


def angular_deriv_operators(duration: float):
    """(D1, D2): control-point maps for the first and second time derivative."""
    D1 = diff_matrix(ANGULAR_ORDER, duration)
    D2 = diff_matrix(ANGULAR_ORDER - 1, duration) @ D1
    return D1, D2


def friction_stack(problem: TransitionProblem):
    """Per-knot friction systems as (G, h) with G f_k <= h."""
    out = []
    for kn in problem.knots:
        con = friction_constraints(kn.contacts, problem.model.mu, problem.model.f_max)
        out.append(con.inequalities_le())
    return out


# --- results -----------------------------------------------------------------

class Status(Enum):
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    NO_CONVERGENCE = "NoConvergence"
    SOLVER_ERROR = "SolverError"


@dataclass
class TransitionResult:
    status: Status
    cost: float = float("nan")
    com_curves: list = field(default_factory=list)        # BezierCurve per sub-horizon
    angular_curves: list = field(default_factory=list)    # realized Theta curves
    forces: list = field(default_factory=list)            # (3nc_k,) per knot
    L_dot: np.ndarray | None = None                       # (K, 3)
    solve_time: float = 0.0
    message: str = ""

    @property
    def feasible(self):
        return self.status is Status.FEASIBLE


def result_knot_records(problem: TransitionProblem, result: TransitionResult):
    """Rows for the independent dynamics re-check: c, c_ddot, L_dot, forces, contacts."""
    rows = []
    for kn in problem.knots:
        curve = result.com_curves[kn.sh]
        from .bezier import derivative, evaluate
        c = evaluate(curve, kn.u)
        cdd = evaluate(derivative(derivative(curve)), kn.u)
        rows.append({
            "c": c, "c_ddot": cdd,
            "L_dot": result.L_dot[kn.idx],
            "forces": result.forces[kn.idx],
            "contacts": kn.contacts,
            "t": kn.t,
        })
    return rows


def deserialize_result(text: str) -> TransitionResult:
    """Inverse of serialize_result (knot indices follow the problem's layout)."""
    from .bezier import curve_from_text
    from .errors import ParseError
    lines = text.strip().splitlines()
    if not lines or not lines[0].startswith("status "):
        raise ParseError("result record must start with a status line")
    status = Status(lines[0].split(None, 1)[1])
    cost = float(lines[1].split()[1])
    com_curves, angular_curves = [], []
    forces, l_rows = {}, {}
    i = 2
    while i < len(lines):
        ln = lines[i]
        if ln.startswith("com_curve") or ln.startswith("angular_curve"):
            target = com_curves if ln.startswith("com_curve") else angular_curves
            j = i + 1
            block = [lines[j]]
            j += 1
            while j < len(lines) and not lines[j].split()[0] in ("com_curve", "angular_curve",
                                                                "knot", "order"):
                block.append(lines[j])
                j += 1
            target.append(curve_from_text("\n".join(block)))
            i = j
        elif ln.startswith("knot"):
            toks = ln.split()
            idx = int(toks[1])
            ld_at = toks.index("L_dot")
            f_at = toks.index("forces")
            l_rows[idx] = np.array([float(v) for v in toks[ld_at + 1:f_at]])
            forces[idx] = np.array([float(v) for v in toks[f_at + 1:]])
            i += 1
        else:
            i += 1
    K = len(forces)
    L_dot = np.vstack([l_rows[k] for k in range(K)]) if K else None
    return TransitionResult(status=status, cost=cost, com_curves=com_curves,
                            angular_curves=angular_curves,
                            forces=[forces[k] for k in range(K)], L_dot=L_dot)


def sample_trajectory(problem: TransitionProblem, result: TransitionResult, rate: float = 50.0):
    """Uniform time samples of the solution: CoM kinematics, orientation, rates.

    Returns a dict of arrays keyed t, c, c_dot, c_ddot, theta, theta_dot.
    """
    from .bezier import derivative, evaluate
    subs = problem.schedule.sub_horizons
    total = sum(sh.duration for sh in subs)
    n = max(2, int(round(total * rate)) + 1)
    ts = np.linspace(0.0, total, n)
    com_d1 = [derivative(c) for c in result.com_curves]
    com_d2 = [derivative(c) for c in com_d1]
    ang_d1 = [derivative(c) for c in result.angular_curves]
    starts = np.array([sh.start_time for sh in subs])
    out = {k: [] for k in ("c", "c_dot", "c_ddot", "theta", "theta_dot")}
    for t in ts:
        i = int(np.searchsorted(starts, t, side="right") - 1)
        i = min(max(i, 0), len(subs) - 1)
        u = min(max((t - subs[i].start_time) / subs[i].duration, 0.0), 1.0)
        out["c"].append(evaluate(result.com_curves[i], u))
        out["c_dot"].append(evaluate(com_d1[i], u))
        out["c_ddot"].append(evaluate(com_d2[i], u))
        out["theta"].append(evaluate(result.angular_curves[i], u))
        out["theta_dot"].append(evaluate(ang_d1[i], u))
    return {"t": ts, **{k: np.array(v) for k, v in out.items()}}


def serialize_result(problem: TransitionProblem, result: TransitionResult) -> str:
    """Structured text record: status, cost, curves, per-knot forces and L_dot."""
    from .bezier import curve_to_text
    lines = [f"status {result.status.value}", f"cost {result.cost:.17g}"]
    for i, c in enumerate(result.com_curves):
        lines.append(f"com_curve {i}")
        lines.append(curve_to_text(c))
    for i, c in enumerate(result.angular_curves):
        lines.append(f"angular_curve {i}")
        lines.append(curve_to_text(c))
    if result.L_dot is not None:
        for kn in problem.knots:
            f = " ".join(f"{v:.17g}" for v in result.forces[kn.idx])
            ld = " ".join(f"{v:.17g}" for v in result.L_dot[kn.idx])
            lines.append(f"knot {kn.idx} sh {kn.sh} u {kn.u:.17g} L_dot {ld} forces {f}")
    return "\n".join(lines)
