"""Robot parameters, state definition and Euler-angle kinematics.

Orientation is expressed as ZYX (yaw-pitch-roll) Euler angles
theta = (roll phi, pitch gamma, yaw psi), composed as
R = Rz(psi) @ Ry(gamma) @ Rx(phi).
"""

from dataclasses import dataclass, field

import numpy as np
import yaml

from .errors import ParseError, SingularOrientation

GRAVITY = np.array([0.0, 0.0, -9.81])

# pitch singularity guard: |pitch| must stay below pi/2 - EPS_SING
EPS_SING = 1e-3

LEG_NAMES = ("LF", "RF", "LH", "RH")


@dataclass(frozen=True)
class RobotModel:
    """Physical parameters of the quadruped treated as a single rigid body."""

    mass: float
    body_inertia: np.ndarray          # 3x3, body frame at the CoM, kg m^2
    mu: float                         # friction coefficient
    f_max: float                      # max vertical contact force per foot, N
    hip_offsets: np.ndarray           # 4x3 body-frame hip positions (LF, RF, LH, RH), m
    leg_min_reach: float
    leg_max_reach: float
    com_height: float = 0.55          # nominal CoM height above the stance plane, m

    def __post_init__(self):
        object.__setattr__(self, "body_inertia",
                           np.asarray(self.body_inertia, dtype=float).reshape(3, 3))
        object.__setattr__(self, "hip_offsets",
                           np.asarray(self.hip_offsets, dtype=float).reshape(4, 3))
        if self.mass <= 0.0:
            raise ValueError("mass must be positive")
        if self.mu <= 0.0 or self.f_max <= 0.0:
            raise ValueError("mu and f_max must be positive")
        if not (0.0 < self.leg_min_reach < self.leg_max_reach):
            raise ValueError("need 0 < leg_min_reach < leg_max_reach")
        I = self.body_inertia
        if not np.allclose(I, I.T, atol=1e-9):
            raise ValueError("body inertia must be symmetric")
        if np.any(np.linalg.eigvalsh(I) <= 0.0):
            raise ValueError("body inertia must be positive definite")


@dataclass(frozen=True)
class State:
    """CoM position/velocity/acceleration plus Euler orientation/rate/acceleration."""

    c: np.ndarray = field(default_factory=lambda: np.zeros(3))
    c_dot: np.ndarray = field(default_factory=lambda: np.zeros(3))
    c_ddot: np.ndarray = field(default_factory=lambda: np.zeros(3))
    theta: np.ndarray = field(default_factory=lambda: np.zeros(3))
    theta_dot: np.ndarray = field(default_factory=lambda: np.zeros(3))
    theta_ddot: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        for name in ("c", "c_dot", "c_ddot", "theta", "theta_dot", "theta_ddot"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(3))
        if abs(self.theta[1]) >= np.pi / 2 - EPS_SING:
            raise SingularOrientation(f"pitch {self.theta[1]:.4f} rad too close to +/-pi/2")

    def linear(self):
        return self.c, self.c_dot, self.c_ddot

    def angular(self):
        return self.theta, self.theta_dot, self.theta_ddot


def _check_pitch(theta):
    if abs(theta[1]) >= np.pi / 2 - EPS_SING:
        raise SingularOrientation(f"pitch {theta[1]:.6f} rad within {EPS_SING} of +/-pi/2")


def rot_x(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_matrix(theta):
    """World-from-body rotation for ZYX Euler angles (roll, pitch, yaw)."""
    phi, gamma, psi = np.asarray(theta, dtype=float)
    return rot_z(psi) @ rot_y(gamma) @ rot_x(phi)


def skew(v):
    x, y, z = np.asarray(v, dtype=float).reshape(3)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def rotation_matrix_partials(theta):
    """d R / d theta_i for i in (roll, pitch, yaw), as a list of 3x3 matrices."""
    phi, gamma, psi = np.asarray(theta, dtype=float)
    Rz, Ry, Rx = rot_z(psi), rot_y(gamma), rot_x(phi)
    e1 = np.array([1.0, 0.0, 0.0])
    e2 = np.array([0.0, 1.0, 0.0])
    e3 = np.array([0.0, 0.0, 1.0])
    dR_phi = Rz @ Ry @ Rx @ skew(e1)
    dR_gamma = Rz @ Ry @ skew(e2) @ Rx
    dR_psi = skew(e3) @ Rz @ Ry @ Rx
    return [dR_phi, dR_gamma, dR_psi]


def euler_rate_map(theta, check=True):
    """Matrix T with world angular velocity omega = T @ theta_dot.

    Columns are the world-frame axes about which the roll, pitch and yaw
    rates act; T depends on pitch and yaw only. check=False skips the
    pitch-singularity guard (T itself stays well defined, only its inverse
    degenerates); optimizer internals use that to survive transient iterates.
    """
    theta = np.asarray(theta, dtype=float)
    if check:
        _check_pitch(theta)
    _, gamma, psi = theta
    cg, sg = np.cos(gamma), np.sin(gamma)
    cp, sp = np.cos(psi), np.sin(psi)
    return np.array([
        [cp * cg, -sp, 0.0],
        [sp * cg,  cp, 0.0],
        [-sg,     0.0, 1.0],
    ])


def euler_rate_map_partials(theta, check=True):
    """d T / d theta_i, list of 3x3 matrices (the roll partial is zero)."""
    theta = np.asarray(theta, dtype=float)
    if check:
        _check_pitch(theta)
    _, gamma, psi = theta
    cg, sg = np.cos(gamma), np.sin(gamma)
    cp, sp = np.cos(psi), np.sin(psi)
    dT_gamma = np.array([
        [-cp * sg, 0.0, 0.0],
        [-sp * sg, 0.0, 0.0],
        [-cg,      0.0, 0.0],
    ])
    dT_psi = np.array([
        [-sp * cg, -cp, 0.0],
        [cp * cg,  -sp, 0.0],
        [0.0,      0.0, 0.0],
    ])
    return [np.zeros((3, 3)), dT_gamma, dT_psi]


def euler_rate_map_second_partials(theta, check=True):
    """d^2 T / d theta_i d theta_j as a 3x3 array of 3x3 matrices (only gamma/psi entries nonzero)."""
    theta = np.asarray(theta, dtype=float)
    if check:
        _check_pitch(theta)
    _, gamma, psi = theta
    cg, sg = np.cos(gamma), np.sin(gamma)
    cp, sp = np.cos(psi), np.sin(psi)
    H = np.zeros((3, 3, 3, 3))
    # d2T/dgamma2
    H[1, 1] = np.array([
        [-cp * cg, 0.0, 0.0],
        [-sp * cg, 0.0, 0.0],
        [sg,       0.0, 0.0],
    ])
    # d2T/dgamma dpsi (symmetric)
    H[1, 2] = H[2, 1] = np.array([
        [sp * sg,  0.0, 0.0],
        [-cp * sg, 0.0, 0.0],
        [0.0,      0.0, 0.0],
    ])
    # d2T/dpsi2
    H[2, 2] = np.array([
        [-cp * cg, sp,  0.0],
        [-sp * cg, -cp, 0.0],
        [0.0,      0.0, 0.0],
    ])
    return H


def euler_rate_map_dot(theta, theta_dot, check=True):
    """Analytic time derivative of T along (theta, theta_dot)."""
    theta_dot = np.asarray(theta_dot, dtype=float)
    parts = euler_rate_map_partials(theta, check=check)
    return parts[1] * theta_dot[1] + parts[2] * theta_dot[2]


def world_inertia(model: RobotModel, theta):
    """Body inertia rotated into the world frame: I_W = R I R^T."""
    R = rotation_matrix(theta)
    return R @ model.body_inertia @ R.T


def load_robot_config(path) -> RobotModel:
    """Load a RobotModel from a YAML config file.

    Required keys: mass, inertia (9 values, row-major), mu, f_max,
    hip_offsets (4x3, order LF RF LH RH), leg_min_reach, leg_max_reach.
    Optional: com_height.
    """
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ParseError(f"robot config not found: {path}")
    except yaml.YAMLError as exc:
        raise ParseError(f"robot config {path}: {exc}")
    if not isinstance(data, dict):
        raise ParseError(f"robot config {path}: expected a mapping at top level")
    try:
        inertia = np.asarray(data["inertia"], dtype=float).reshape(3, 3)
        hips = np.asarray(data["hip_offsets"], dtype=float).reshape(4, 3)
        kwargs = dict(
            mass=float(data["mass"]),
            body_inertia=inertia,
            mu=float(data["mu"]),
            f_max=float(data["f_max"]),
            hip_offsets=hips,
            leg_min_reach=float(data["leg_min_reach"]),
            leg_max_reach=float(data["leg_max_reach"]),
        )
        if "com_height" in data:
            kwargs["com_height"] = float(data["com_height"])
        return RobotModel(**kwargs)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"robot config {path}: {exc}")


def default_robot() -> RobotModel:
    """90 kg HyQ-like default parameters."""
    return RobotModel(
        mass=90.0,
        body_inertia=np.diag([2.0, 8.0, 9.0]),
        mu=0.7,
        f_max=1000.0,
        hip_offsets=np.array([
            [0.37, 0.21, 0.0],    # LF
            [0.37, -0.21, 0.0],   # RF
            [-0.37, 0.21, 0.0],   # LH
            [-0.37, -0.21, 0.0],  # RH
        ]),
        leg_min_reach=0.3,
        leg_max_reach=0.8,
        com_height=0.55,
    )
