"""Bezier curve algebra on the normalized parameter u = (t - t0) / duration.

Control points are stored row-wise as an (n+1, d) array (d = 1 or 3).
Time derivatives include the 1/duration scaling, so derivative(curve)
evaluated at u equals d/dt of the original at the same u.
"""

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import OutOfRange, ParseError


@dataclass(frozen=True)
class BezierCurve:
    control_points: np.ndarray  # (n+1, d)
    duration: float             # s

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.control_points, dtype=float))
        object.__setattr__(self, "control_points", pts)
        if pts.shape[0] < 2:
            raise ValueError("a Bezier curve needs at least 2 control points")
        if self.duration <= 0.0:
            raise ValueError("duration must be positive")

    @property
    def order(self):
        return self.control_points.shape[0] - 1

    @property
    def dim(self):
        return self.control_points.shape[1]


def evaluate(curve: BezierCurve, u: float):
    """Point on the curve at normalized parameter u, by de Casteljau."""
    if not 0.0 <= u <= 1.0:
        raise OutOfRange(f"parameter {u} outside [0, 1]")
    b = curve.control_points.copy()
    n = curve.order
    for r in range(n):
        b[: n - r] = (1.0 - u) * b[: n - r] + u * b[1: n - r + 1]
    return b[0].copy()


def bernstein_row(n: int, u: float):
    """Bernstein basis values B_{i,n}(u), i = 0..n."""
    i = np.arange(n + 1)
    binom = np.array([comb(n, k) for k in i], dtype=float)
    return binom * u ** i * (1.0 - u) ** (n - i)


def bernstein_matrix(n: int, us):
    """Rows of Bernstein basis values for each parameter in us, shape (len(us), n+1)."""
    return np.array([bernstein_row(n, u) for u in np.asarray(us, dtype=float)])


def diff_matrix(n: int, duration: float):
    """Matrix D with derivative control points = D @ control points, shape (n, n+1)."""
    D = np.zeros((n, n + 1))
    for i in range(n):
        D[i, i] = -n / duration
        D[i, i + 1] = n / duration
    return D


def derivative(curve: BezierCurve) -> BezierCurve:
    """Time derivative as a Bezier curve of one order less (constant for order 1)."""
    n = curve.order
    if n == 1:
        pts = diff_matrix(1, curve.duration) @ curve.control_points
        # keep a valid 2-point representation of the constant derivative
        return BezierCurve(np.vstack([pts, pts]), curve.duration)
    return BezierCurve(diff_matrix(n, curve.duration) @ curve.control_points, curve.duration)


def elevate_degree(curve: BezierCurve, target_order: int) -> BezierCurve:
    """Same path re-expressed with target_order + 1 control points."""
    n = curve.order
    if target_order < n:
        raise ValueError(f"cannot lower order {n} to {target_order}")
    pts = curve.control_points
    while n < target_order:
        new = np.zeros((n + 2, curve.dim))
        new[0] = pts[0]
        new[n + 1] = pts[n]
        for i in range(1, n + 1):
            a = i / (n + 1)
            new[i] = a * pts[i - 1] + (1.0 - a) * pts[i]
        pts = new
        n += 1
    return BezierCurve(pts, curve.duration)


def cross_product_curve(a: BezierCurve, b: BezierCurve) -> BezierCurve:
    """Curve evaluating to a(u) x b(u), order order_a + order_b.

    Control points come from the Bernstein product convolution:
    C_k = sum_{i+j=k} [C(m,i) C(n,j) / C(m+n,k)] a_i x b_j.
    """
    if a.dim != 3 or b.dim != 3:
        raise ValueError("cross product needs 3D curves")
    if abs(a.duration - b.duration) > 1e-12:
        raise ValueError("curves must share duration")
    m, n = a.order, b.order
    out = np.zeros((m + n + 1, 3))
    for i in range(m + 1):
        for j in range(n + 1):
            w = comb(m, i) * comb(n, j) / comb(m + n, i + j)
            out[i + j] += w * np.cross(a.control_points[i], b.control_points[j])
    return BezierCurve(out, a.duration)


# --- 8th-order transition curve -------------------------------------------
#
# Boundary CoM states fix the first and last three control points through the
# endpoint-derivative relations; the three interior points are all tied to a
# single free point, which keeps the wrench affine in it.

TRANSITION_ORDER = 8
FREE_POINT_SLOTS = (3, 4, 5)


def transition_point_matrix(duration: float):
    """Linear map from (c0, cd0, cdd0, cf, cdf, cddf, y) to the 9 control points.

    Returns a (9, 7) weight matrix applied per axis.
    """
    T = float(duration)
    W = np.zeros((9, 7))
    W[0] = [1, 0, 0, 0, 0, 0, 0]
    W[1] = [1, T / 8, 0, 0, 0, 0, 0]
    W[2] = [1, T / 4, T * T / 56, 0, 0, 0, 0]
    for i in FREE_POINT_SLOTS:
        W[i] = [0, 0, 0, 0, 0, 0, 1]
    W[6] = [0, 0, 0, 1, -T / 4, T * T / 56, 0]
    W[7] = [0, 0, 0, 1, -T / 8, 0, 0]
    W[8] = [0, 0, 0, 1, 0, 0, 0]
    return W


def build_transition_curve(x0, xf, free_point, duration: float) -> BezierCurve:
    """8th-order curve matching (c, c_dot, c_ddot) at both ends.

    x0, xf: objects with .c, .c_dot, .c_ddot (States work), or 3-tuples of
    3-vectors. free_point is the single interior control point.
    """
    def _triple(x):
        if hasattr(x, "c"):
            return np.asarray(x.c, float), np.asarray(x.c_dot, float), np.asarray(x.c_ddot, float)
        c, cd, cdd = x
        return np.asarray(c, float), np.asarray(cd, float), np.asarray(cdd, float)

    c0, cd0, cdd0 = _triple(x0)
    cf, cdf, cddf = _triple(xf)
    y = np.asarray(free_point, dtype=float).reshape(3)
    S = np.vstack([c0, cd0, cdd0, cf, cdf, cddf, y])  # (7, 3)
    W = transition_point_matrix(duration)
    return BezierCurve(W @ S, duration)


def transition_eval_weights(duration: float, us, deriv: int = 0):
    """Evaluation weights of the transition curve's deriv-th time derivative.

    Returns an array (len(us), 7); row @ (c0, cd0, cdd0, cf, cdf, cddf, y)
    gives the evaluated value per axis.
    """
    W = transition_point_matrix(duration)
    n = TRANSITION_ORDER
    M = W
    for _ in range(deriv):
        M = diff_matrix(n, duration) @ M
        n -= 1
    return bernstein_matrix(n, us) @ M


# --- serialization ----------------------------------------------------------

def curve_to_text(curve: BezierCurve) -> str:
    """One-record text form: order, dim, duration, then control points row-major."""
    lines = [f"order {curve.order} dim {curve.dim} duration {curve.duration:.17g}"]
    for p in curve.control_points:
        lines.append(" ".join(f"{v:.17g}" for v in p))
    return "\n".join(lines)


def curve_from_text(text: str) -> BezierCurve:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    try:
        head = lines[0].split()
        order, dim, duration = int(head[1]), int(head[3]), float(head[5])
        pts = np.array([[float(v) for v in ln.split()] for ln in lines[1:]])
        if pts.shape != (order + 1, dim):
            raise ValueError(f"expected {order + 1}x{dim} points, got {pts.shape}")
    except (IndexError, ValueError) as exc:
        raise ParseError(f"bad curve record: {exc}")
    return BezierCurve(pts, duration)
