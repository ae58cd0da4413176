"""Heightmaps, candidate grids, geometric filtering and the feasibility sweep."""

import numpy as np
import pytest

from footfeas.errors import OutOfBounds, ParseError
from footfeas.foothold import (FeasibilityMap, HeightMap, candidate_grid,
                               evaluate_foothold_map, export_feasibility_map,
                               flat_heightmap, geometric_filter, load_heightmap,
                               save_heightmap, stairs_heightmap)
from footfeas.model import default_robot
from footfeas.problem import Status, TransitionResult


def test_flat_map_lookup():
    hm = flat_heightmap()
    assert hm.lookup(0.0, 0.0) == 0.0
    assert hm.lookup(1.7, -0.9) == 0.0


def test_stairs_lookup_past_first_edge():
    hm = stairs_heightmap(first_riser_x=1.0, step_height=0.08, tread_depth=0.30, num_steps=2)
    assert hm.lookup(0.5, 0.0) == 0.0
    assert abs(hm.lookup(1.1, 0.0) - 0.08) < 1e-12
    assert abs(hm.lookup(1.5, 0.0) - 0.16) < 1e-12
    assert abs(hm.lookup(2.5, 0.0) - 0.16) < 1e-12  # plateau


def test_lookup_out_of_bounds():
    hm = flat_heightmap(origin=(-1.0, -1.0), size=(2.0, 2.0))
    with pytest.raises(OutOfBounds):
        hm.lookup(5.0, 0.0)
    assert not hm.contains(5.0, 0.0)


def test_heightmap_file_roundtrip(tmp_path):
    hm = stairs_heightmap(size=(1.0, 0.5), resolution=0.05)
    path = tmp_path / "terrain.txt"
    save_heightmap(hm, path)
    back = load_heightmap(path)
    assert np.array_equal(back.heights, hm.heights)
    assert np.array_equal(back.origin, hm.origin)
    assert back.resolution == hm.resolution
    with pytest.raises(ParseError):
        load_heightmap(tmp_path / "missing.txt")
    bad = tmp_path / "bad.txt"
    bad.write_text("origin 0 0\nresolution 0.02\nrows 2\ncols 2\n1 2 3\n")
    with pytest.raises(ParseError):
        load_heightmap(bad)


def test_candidate_grid_geometry():
    hm = flat_heightmap()
    grid = candidate_grid((0.4, 0.0, 0.0), hm, half_extent=0.08, resolution=0.02)
    assert grid.side == 9
    assert grid.cells.shape == (9, 9, 3)
    center = grid.cells[4, 4]
    assert np.allclose(center[:2], [0.4, 0.0])
    for iy in range(9):
        for ix in range(9):
            x, y, z = grid.cells[iy, ix]
            assert z == hm.lookup(x, y)


def test_geometric_filter_reach_and_roughness():
    model = default_robot()
    hm = flat_heightmap()
    grid = candidate_grid((0.4, 0.0, 0.0), hm)
    hip = np.array([0.4, 0.0, 0.55])  # nominal leg length within [0.3, 0.8]
    ok = geometric_filter(grid, hip, model, hm)
    assert ok[4, 4]  # directly below the hip
    far = geometric_filter(grid, hip + np.array([5.0, 0.0, 0.0]), model, hm)
    assert not far.any()  # all candidates beyond max reach


def test_geometric_filter_riser_edge_roughness():
    hm = stairs_heightmap(first_riser_x=0.45, step_height=0.12, tread_depth=0.30)
    grid = candidate_grid((0.45, 0.0, 0.12), hm)
    hip = np.array([0.45, 0.0, 0.67])
    ok = geometric_filter(grid, hip, model=default_robot(), heightmap=hm)
    # the column of cells on the riser edge fails the plane-fit roughness test
    edge_cols = [ix for ix in range(grid.side)
                 if abs(grid.cells[0, ix, 0] - 0.45) <= 0.021]
    assert any(not ok[:, ix].any() for ix in edge_cols)


def _feasible(cost):
    return TransitionResult(status=Status.FEASIBLE, cost=cost)


def test_evaluate_map_skips_geometric_failures():
    hm = flat_heightmap()
    grid = candidate_grid((0.4, 0.0, 0.0), hm, half_extent=0.02, resolution=0.02)
    geo = np.zeros((3, 3), dtype=bool)
    geo[1, 1] = True
    calls = []

    def solve(pos):
        calls.append(tuple(np.round(pos, 6)))
        return _feasible(1.0)

    fmap = evaluate_foothold_map(grid, geo, solve)
    assert len(calls) == 1
    assert fmap.dynamic_ok.sum() == 1
    assert np.isnan(fmap.cost[0, 0])
    # dynamic_ok implies geometric_ok
    assert not np.any(fmap.dynamic_ok & ~fmap.geometric_ok)


def test_evaluate_map_empty_survivors_runs_no_solves():
    hm = flat_heightmap()
    grid = candidate_grid((0.4, 0.0, 0.0), hm, half_extent=0.02, resolution=0.02)

    def solve(pos):
        raise AssertionError("must not be called")

    fmap = evaluate_foothold_map(grid, np.zeros((3, 3), dtype=bool), solve)
    assert fmap.summary()["dynamic_ok"] == 0


def test_evaluate_map_records_errors_and_infeasible():
    hm = flat_heightmap()
    grid = candidate_grid((0.4, 0.0, 0.0), hm, half_extent=0.02, resolution=0.02)
    geo = np.ones((3, 3), dtype=bool)

    def solve(pos):
        if pos[0] < 0.4 - 1e-9:
            raise RuntimeError("boom")
        if pos[1] < -1e-9:
            return TransitionResult(status=Status.INFEASIBLE)
        return _feasible(2.0)

    fmap = evaluate_foothold_map(grid, geo, solve)
    s = fmap.summary()
    assert s["errors"] == 3
    assert s["dynamic_ok"] == 4
    assert np.isnan(fmap.cost[0, 1])  # infeasible cell keeps NaN cost


def test_evaluate_map_order_independent_and_parallel():
    hm = flat_heightmap()
    grid = candidate_grid((0.4, 0.0, 0.0), hm, half_extent=0.04, resolution=0.02)
    geo = np.ones((5, 5), dtype=bool)

    def solve(pos):
        return _feasible(float(pos[0] * 7 + pos[1]))

    serial = evaluate_foothold_map(grid, geo, solve, jobs=1)
    parallel = evaluate_foothold_map(grid, geo, solve, jobs=4)
    assert np.array_equal(serial.dynamic_ok, parallel.dynamic_ok)
    assert np.allclose(serial.cost, parallel.cost, equal_nan=True)


def test_export_format(tmp_path):
    hm = flat_heightmap()
    grid = candidate_grid((0.4, 0.0, 0.0), hm, half_extent=0.02, resolution=0.02)
    geo = np.ones((3, 3), dtype=bool)
    fmap = evaluate_foothold_map(grid, geo, lambda pos: _feasible(1.5))
    path = tmp_path / "map.txt"
    export_feasibility_map(fmap, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0].split() == ["ix", "iy", "x", "y", "z",
                                "geometric_ok", "dynamic_ok", "cost"]
    assert len(lines) == 1 + 9
    first = lines[1].split()
    assert first[0] == "0" and first[1] == "0"
    assert float(first[7]) == 1.5
