"""Scenario plumbing: config loading and construction of concrete transition
problems (initial state, nominal footholds, landings, schedule) from a robot
model, a terrain and a velocity command.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .dynamics import DEFAULT_KNOTS
from .errors import ParseError
from .foothold import (GRID_HALF_EXTENT, GRID_RESOLUTION, HeightMap, flat_heightmap,
                       load_heightmap, stairs_heightmap)
from .horizon import GaitParams, build_contact_schedule
from .model import LEG_NAMES, RobotModel, State, default_robot, load_robot_config, rot_z
from .horizon import terrain_aligned_rp
from .problem import TransitionProblem, make_problem


@dataclass
class Scenario:
    model: RobotModel
    terrain: HeightMap
    gait: GaitParams = field(default_factory=GaitParams)
    v_cmd: tuple = (0.0, 0.0, 0.0)      # vx, vy, yaw_rate
    horizon_switches: int = 8
    formulation: str = "convex"          # convex | nonlinear | both
    N: int = DEFAULT_KNOTS
    start_xy: tuple = (0.0, 0.0)
    start_yaw: float = 0.0
    grid_half_extent: float = GRID_HALF_EXTENT
    grid_resolution: float = GRID_RESOLUTION
    slack_pos: float = 0.1
    slack_acc: float = 2.0
    output_rate: float = 50.0            # trajectory samples per second

    def __post_init__(self):
        if self.formulation not in ("convex", "nonlinear", "both"):
            raise ParseError(f"formulation must be convex|nonlinear|both, got {self.formulation!r}")


def load_scenario(path) -> Scenario:
    """Scenario from a YAML config; see configs in the demos directory."""
    path = Path(path)
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
    except FileNotFoundError:
        raise ParseError(f"scenario not found: {path}")
    except yaml.YAMLError as exc:
        raise ParseError(f"scenario {path}: {exc}")

    robot_cfg = data.get("robot")
    if robot_cfg is None:
        model = default_robot()
    elif isinstance(robot_cfg, str):
        model = load_robot_config(path.parent / robot_cfg)
    else:
        raise ParseError(f"scenario {path}: robot must be a config file path")

    terr = data.get("terrain", {"kind": "flat"})
    kind = terr.get("kind", "flat")
    if kind == "file":
        terrain = load_heightmap(path.parent / terr["path"])
    elif kind == "stairs":
        terrain = stairs_heightmap(
            first_riser_x=float(terr.get("first_riser_x", 1.0)),
            step_height=float(terr.get("step_height", 0.08)),
            tread_depth=float(terr.get("tread_depth", 0.30)),
            num_steps=int(terr.get("num_steps", 2)),
            origin=tuple(terr.get("origin", (-1.0, -1.0))),
            size=tuple(terr.get("size", (4.0, 2.0))),
            resolution=float(terr.get("resolution", 0.02)),
        )
    elif kind == "flat":
        terrain = flat_heightmap(
            origin=tuple(terr.get("origin", (-1.0, -1.0))),
            size=tuple(terr.get("size", (4.0, 2.0))),
            resolution=float(terr.get("resolution", 0.02)),
        )
    else:
        raise ParseError(f"scenario {path}: unknown terrain kind {kind!r}")

    gait_cfg = data.get("gait", {})
    gait = GaitParams(
        swing_duration=float(gait_cfg.get("swing_duration", 0.8)),
        stance_duration=float(gait_cfg.get("stance_duration", 0.2)),
        sequence=tuple(gait_cfg.get("sequence", ("RH", "RF", "LH", "LF"))),
    )
    cmd = data.get("command", {})
    v_cmd = (float(cmd.get("vx", 0.0)), float(cmd.get("vy", 0.0)),
             float(cmd.get("yaw_rate", 0.0)))
    try:
        return Scenario(
            model=model, terrain=terrain, gait=gait, v_cmd=v_cmd,
            horizon_switches=int(data.get("horizon_switches", 8)),
            formulation=str(data.get("formulation", "convex")),
            N=int(data.get("knots", DEFAULT_KNOTS)),
            start_xy=tuple(data.get("start_xy", (0.0, 0.0))),
            start_yaw=float(data.get("start_yaw", 0.0)),
            grid_half_extent=float(data.get("grid_half_extent", GRID_HALF_EXTENT)),
            grid_resolution=float(data.get("grid_resolution", GRID_RESOLUTION)),
            slack_pos=float(data.get("slack_pos", 0.1)),
            slack_acc=float(data.get("slack_acc", 2.0)),
            output_rate=float(data.get("output_rate", 50.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"scenario {path}: {exc}")


def initial_footholds(scenario: Scenario) -> dict:
    """Feet under the hips at the start pose, heights from the terrain."""
    Rz = rot_z(scenario.start_yaw)
    out = {}
    for leg, hip in zip(LEG_NAMES, scenario.model.hip_offsets):
        p = np.array([scenario.start_xy[0], scenario.start_xy[1], 0.0]) + Rz @ hip
        p[2] = scenario.terrain.lookup(p[0], p[1])
        out[leg] = p
    return out


def planned_landings(scenario: Scenario, footholds: dict, cycles: int = 3) -> dict:
    """Nominal touchdown positions: one stride per gait cycle per leg."""
    vx, vy, _ = scenario.v_cmd
    stride = rot_z(scenario.start_yaw) @ np.array([vx, vy, 0.0]) * scenario.gait.cycle_duration
    out = {}
    for leg in LEG_NAMES:
        seq = []
        p = np.asarray(footholds[leg], dtype=float).copy()
        for _ in range(cycles):
            p = p + stride
            p[2] = scenario.terrain.lookup(p[0], p[1])
            seq.append(p.copy())
        out[leg] = seq
    return out


def initial_state(scenario: Scenario, footholds: dict) -> State:
    feet = np.array([footholds[leg] for leg in LEG_NAMES])
    c = np.array([scenario.start_xy[0], scenario.start_xy[1],
                  feet[:, 2].mean() + scenario.model.com_height])
    vx, vy, yaw_rate = scenario.v_cmd
    v = rot_z(scenario.start_yaw) @ np.array([vx, vy, 0.0])
    roll, pitch = terrain_aligned_rp(feet, scenario.start_yaw)
    return State(c=c, c_dot=v, c_ddot=np.zeros(3),
                 theta=np.array([roll, pitch, scenario.start_yaw]),
                 theta_dot=np.array([0.0, 0.0, yaw_rate]),
                 theta_ddot=np.zeros(3))


def build_problem(scenario: Scenario, landing_override: dict | None = None) -> TransitionProblem:
    """Transition problem over the scenario's horizon.

    landing_override: {leg: position} replacing that leg's first planned
    touchdown (used by the foothold sweep).
    """
    feet = initial_footholds(scenario)
    landings = planned_landings(scenario, feet)
    if landing_override:
        for leg, pos in landing_override.items():
            seq = landings[leg]
            if seq:
                seq[0] = np.asarray(pos, dtype=float).reshape(3)
    schedule = build_contact_schedule(scenario.gait, feet, scenario.horizon_switches,
                                      landings=landings)
    x0 = initial_state(scenario, feet)
    return make_problem(scenario.model, schedule, scenario.v_cmd, x0, N=scenario.N,
                        slack_pos=scenario.slack_pos, slack_acc=scenario.slack_acc)


def nominal_landing(scenario: Scenario, leg: str):
    feet = initial_footholds(scenario)
    return planned_landings(scenario, feet)[leg][0]


def hip_at_touchdown(scenario: Scenario, leg: str):
    """World hip position of a leg when it touches down (first swing)."""
    feet = initial_footholds(scenario)
    schedule = build_contact_schedule(scenario.gait, feet, scenario.horizon_switches,
                                      landings=planned_landings(scenario, feet))
    x0 = initial_state(scenario, feet)
    from .horizon import waypoint_states
    wps = waypoint_states(schedule, scenario.v_cmd, x0, com_height=scenario.model.com_height)
    # touchdown of swing k for the gait sequence happens at the end of sub-horizon k
    seq = list(scenario.gait.sequence)
    sh_idx = min(seq.index(leg), len(schedule.sub_horizons) - 1)
    wp = wps[sh_idx + 1]
    hip = scenario.model.hip_offsets[LEG_NAMES.index(leg)]
    from .model import rotation_matrix
    return wp.c + rotation_matrix(wp.theta) @ hip
