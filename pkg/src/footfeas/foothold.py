"""Terrain heightmaps, candidate foothold grids, the geometric filter and the
dynamic feasibility / cost map.

The geometric filter stands in for a learned foothold classifier with three
explicit tests: kinematic reachability of the leg, local terrain roughness
against a plane fit, and shin-proxy collision clearance along the hip-to-foot
segment. Dynamic evaluation only runs on geometric survivors.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import OutOfBounds, ParseError
from .problem import Status

ROUGH_TOL = 0.03   # m, max deviation from the local plane fit
CLEAR_TOL = 0.02   # m, shin clearance above terrain
GRID_HALF_EXTENT = 0.08
GRID_RESOLUTION = 0.02


@dataclass(frozen=True)
class HeightMap:
    origin: np.ndarray     # world (x, y) of cell (0, 0)
    resolution: float      # m / cell
    heights: np.ndarray    # (rows, cols); rows advance along y, cols along x

    def __post_init__(self):
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float).reshape(2))
        object.__setattr__(self, "heights", np.asarray(self.heights, dtype=float))
        if self.resolution <= 0.0:
            raise ValueError("resolution must be positive")
        if self.heights.ndim != 2 or not np.all(np.isfinite(self.heights)):
            raise ValueError("heights must be a finite 2D grid")

    @property
    def rows(self):
        return self.heights.shape[0]

    @property
    def cols(self):
        return self.heights.shape[1]

    def cell_of(self, x, y):
        j = int(round((x - self.origin[0]) / self.resolution))
        i = int(round((y - self.origin[1]) / self.resolution))
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise OutOfBounds(f"({x:.3f}, {y:.3f}) outside heightmap")
        return i, j

    def lookup(self, x, y):
        """Nearest-cell height at world (x, y)."""
        i, j = self.cell_of(x, y)
        return float(self.heights[i, j])

    def contains(self, x, y):
        try:
            self.cell_of(x, y)
            return True
        except OutOfBounds:
            return False


def save_heightmap(hm: HeightMap, path):
    with open(path, "w") as fh:
        fh.write(f"origin {hm.origin[0]:.17g} {hm.origin[1]:.17g}\n")
        fh.write(f"resolution {hm.resolution:.17g}\n")
        fh.write(f"rows {hm.rows}\n")
        fh.write(f"cols {hm.cols}\n")
        for row in hm.heights:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def load_heightmap(path) -> HeightMap:
    """Parse the structured text heightmap format written by save_heightmap."""
    try:
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except FileNotFoundError:
        raise ParseError(f"heightmap not found: {path}")
    try:
        head = {}
        for ln in lines[:4]:
            key, *vals = ln.split()
            head[key] = vals
        origin = np.array([float(head["origin"][0]), float(head["origin"][1])])
        resolution = float(head["resolution"][0])
        rows, cols = int(head["rows"][0]), int(head["cols"][0])
        data = np.array([[float(v) for v in ln.split()] for ln in lines[4:]])
        if data.shape != (rows, cols):
            raise ValueError(f"expected {rows}x{cols} heights, got {data.shape}")
    except (KeyError, IndexError, ValueError) as exc:
        raise ParseError(f"heightmap {path}: {exc}")
    return HeightMap(origin, resolution, data)


def flat_heightmap(origin=(-1.0, -1.0), size=(4.0, 2.0), resolution=0.02) -> HeightMap:
    cols = int(round(size[0] / resolution)) + 1
    rows = int(round(size[1] / resolution)) + 1
    return HeightMap(np.asarray(origin, float), resolution, np.zeros((rows, cols)))


def stairs_heightmap(first_riser_x=1.0, step_height=0.08, tread_depth=0.30, num_steps=2,
                     origin=(-1.0, -1.0), size=(4.0, 2.0), resolution=0.02) -> HeightMap:
    """Synthetic ascending stairs: num_steps risers, then a plateau."""
    cols = int(round(size[0] / resolution)) + 1
    rows = int(round(size[1] / resolution)) + 1
    xs = origin[0] + resolution * np.arange(cols)
    level = np.clip(np.floor((xs - first_riser_x) / tread_depth) + 1, 0, num_steps)
    heights = np.tile(step_height * level, (rows, 1))
    return HeightMap(np.asarray(origin, float), resolution, heights)


@dataclass(frozen=True)
class CandidateGrid:
    nominal: np.ndarray    # world 3-vector
    cells: np.ndarray      # (k, k, 3) candidate positions
    half_extent: float
    resolution: float

    @property
    def side(self):
        return self.cells.shape[0]


def candidate_grid(nominal, heightmap: HeightMap, half_extent=GRID_HALF_EXTENT,
                   resolution=GRID_RESOLUTION) -> CandidateGrid:
    """Square grid of candidates centered at the nominal landing position."""
    nominal = np.asarray(nominal, dtype=float).reshape(3)
    k = 2 * int(round(half_extent / resolution)) + 1
    half = (k - 1) // 2
    cells = np.zeros((k, k, 3))
    for iy in range(k):
        for ix in range(k):
            x = nominal[0] + (ix - half) * resolution
            y = nominal[1] + (iy - half) * resolution
            if not heightmap.contains(x, y):
                raise OutOfBounds(f"candidate grid cell ({x:.3f}, {y:.3f}) outside heightmap")
            cells[iy, ix] = (x, y, heightmap.lookup(x, y))
    return CandidateGrid(nominal, cells, half_extent, resolution)


def _patch_roughness(heightmap: HeightMap, x, y):
    """Max deviation from a plane fit over the 3x3 cell patch around (x, y)."""
    i, j = heightmap.cell_of(x, y)
    pts = []
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            ii, jj = i + di, j + dj
            if 0 <= ii < heightmap.rows and 0 <= jj < heightmap.cols:
                pts.append((heightmap.origin[0] + jj * heightmap.resolution,
                            heightmap.origin[1] + ii * heightmap.resolution,
                            heightmap.heights[ii, jj]))
    pts = np.asarray(pts)
    A = np.column_stack([pts[:, 0], pts[:, 1], np.ones(len(pts))])
    coef, *_ = np.linalg.lstsq(A, pts[:, 2], rcond=None)
    return float(np.max(np.abs(A @ coef - pts[:, 2])))


def _shin_clearance_ok(heightmap: HeightMap, hip, candidate, clear_tol):
    """Clearance of the hip-to-foot segment above terrain at 10 samples.

    The samples stop short of the foot end, where contact makes the
    clearance zero by definition.
    """
    hip = np.asarray(hip, float)
    candidate = np.asarray(candidate, float)
    for s in np.linspace(0.0, 0.9, 10):
        p = hip + s * (candidate - hip)
        if not heightmap.contains(p[0], p[1]):
            return False
        if p[2] - heightmap.lookup(p[0], p[1]) < clear_tol:
            return False
    return True


def geometric_filter(grid: CandidateGrid, hip_position, model, heightmap: HeightMap,
                     rough_tol=ROUGH_TOL, clear_tol=CLEAR_TOL):
    """Boolean (k, k) array: reachability, roughness and collision tests."""
    hip = np.asarray(hip_position, dtype=float).reshape(3)
    k = grid.side
    ok = np.zeros((k, k), dtype=bool)
    for iy in range(k):
        for ix in range(k):
            cand = grid.cells[iy, ix]
            reach = np.linalg.norm(cand - hip)
            if not model.leg_min_reach <= reach <= model.leg_max_reach:
                continue
            if _patch_roughness(heightmap, cand[0], cand[1]) > rough_tol:
                continue
            if not _shin_clearance_ok(heightmap, hip, cand, clear_tol):
                continue
            ok[iy, ix] = True
    return ok


@dataclass
class FeasibilityMap:
    grid: CandidateGrid
    geometric_ok: np.ndarray   # (k, k) bool
    dynamic_ok: np.ndarray     # (k, k) bool
    cost: np.ndarray           # (k, k) float, NaN where not dynamically feasible
    error: np.ndarray          # (k, k) bool, per-cell solver breakdowns

    def summary(self):
        return {
            "total": int(self.grid.side ** 2),
            "geometric_ok": int(self.geometric_ok.sum()),
            "dynamic_ok": int(self.dynamic_ok.sum()),
            "errors": int(self.error.sum()),
        }


def evaluate_foothold_map(grid: CandidateGrid, geometric_ok, solve_candidate,
                          jobs: int = 1) -> FeasibilityMap:
    """Solve the transition problem for every geometric survivor.

    solve_candidate(position) must return a TransitionResult; cells failing
    geometry are never solved, per-cell solver errors are recorded without
    aborting the sweep.
    """
    k = grid.side
    geometric_ok = np.asarray(geometric_ok, dtype=bool)
    dynamic_ok = np.zeros((k, k), dtype=bool)
    cost = np.full((k, k), np.nan)
    error = np.zeros((k, k), dtype=bool)
    tasks = [(iy, ix) for iy in range(k) for ix in range(k) if geometric_ok[iy, ix]]

    def run(cell):
        iy, ix = cell
        try:
            return cell, solve_candidate(grid.cells[iy, ix])
        except Exception as exc:  # per-cell failures must not kill the sweep
            return cell, exc

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(run, tasks))
    else:
        outcomes = [run(t) for t in tasks]

    for (iy, ix), res in outcomes:
        if isinstance(res, Exception):
            error[iy, ix] = True
        elif res.status is Status.FEASIBLE:
            dynamic_ok[iy, ix] = True
            cost[iy, ix] = res.cost
        elif res.status is Status.SOLVER_ERROR:
            error[iy, ix] = True
    return FeasibilityMap(grid, geometric_ok, dynamic_ok, cost, error)


def export_feasibility_map(fmap: FeasibilityMap, path):
    """Delimited text export: one record per cell for external plotting."""
    with open(path, "w") as fh:
        fh.write("ix iy x y z geometric_ok dynamic_ok cost\n")
        k = fmap.grid.side
        for iy in range(k):
            for ix in range(k):
                x, y, z = fmap.grid.cells[iy, ix]
                c = fmap.cost[iy, ix]
                fh.write(f"{ix} {iy} {x:.17g} {y:.17g} {z:.17g} "
                         f"{int(fmap.geometric_ok[iy, ix])} {int(fmap.dynamic_ok[iy, ix])} "
                         f"{'nan' if np.isnan(c) else format(c, '.17g')}\n")
