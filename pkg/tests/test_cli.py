"""CLI surface tests: subcommands, exit codes, output determinism."""

import numpy as np

from footfeas.cli import main

FLAT_YAML = """
terrain: {kind: flat}
command: {vx: 0.07}
horizon_switches: 4
formulation: convex
"""

STAIRS_SMALL_YAML = """
terrain: {kind: stairs, first_riser_x: 0.45}
command: {vx: 0.07}
horizon_switches: 4
formulation: convex
grid_half_extent: 0.02
"""


def write_scenario(tmp_path, text, name="scenario.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_gen_terrain_and_file_scenario(tmp_path):
    terrain = tmp_path / "stairs.txt"
    assert main(["gen-terrain", "--out", str(terrain), "--kind", "stairs",
                 "--step-height", "0.08", "--first-riser-x", "0.45"]) == 0
    sc = tmp_path / "scenario.yaml"
    sc.write_text("terrain: {kind: file, path: stairs.txt}\n"
                  "command: {vx: 0.07}\nhorizon_switches: 4\nformulation: convex\n")
    out = tmp_path / "out"
    assert main(["plan", "--scenario", str(sc), "--out", str(out)]) == 0
    assert (out / "trajectory_convex.txt").exists()
    assert (out / "report.txt").exists()


def test_plan_convex_deterministic(tmp_path):
    sc = write_scenario(tmp_path, FLAT_YAML)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["plan", "--scenario", sc, "--out", str(out1)]) == 0
    assert main(["plan", "--scenario", sc, "--out", str(out2)]) == 0
    assert (out1 / "trajectory_convex.txt").read_bytes() == \
        (out2 / "trajectory_convex.txt").read_bytes()
    assert (out1 / "result_convex.txt").read_bytes() == \
        (out2 / "result_convex.txt").read_bytes()


def test_plan_report_matches_trajectory_file(tmp_path):
    sc = write_scenario(tmp_path, FLAT_YAML)
    out = tmp_path / "out"
    assert main(["plan", "--scenario", sc, "--out", str(out)]) == 0
    report = (out / "report.txt").read_text()
    data = np.loadtxt(out / "trajectory_convex.txt", skiprows=1)
    t = data[:, 0]
    acc = data[:, 7:10]
    integral = np.trapezoid(np.sum(acc ** 2, axis=1), t)
    reported = float([ln for ln in report.splitlines()
                      if "int_acc_sq" in ln][0].split()[-1])
    assert abs(integral - reported) < 1e-9
    rates = np.abs(data[:, 13:16]).max(axis=0)
    line = [ln for ln in report.splitlines() if "peak_theta_dot" in ln][0]
    assert np.allclose([float(v) for v in line.split()[-3:]], rates, atol=1e-9)


def test_check_command_verifies_result(tmp_path):
    sc = write_scenario(tmp_path, FLAT_YAML)
    out = tmp_path / "out"
    assert main(["plan", "--scenario", sc, "--out", str(out)]) == 0
    assert main(["check", "--scenario", sc,
                 "--result", str(out / "result_convex.txt")]) == 0
    # corrupt a force entry: the re-check must fail
    text = (out / "result_convex.txt").read_text()
    lines = text.splitlines()
    for i, ln in enumerate(lines):
        if ln.startswith("knot 0 "):
            toks = ln.split()
            toks[-1] = str(float(toks[-1]) + 50.0)
            lines[i] = " ".join(toks)
            break
    bad = out / "bad_result.txt"
    bad.write_text("\n".join(lines))
    assert main(["check", "--scenario", sc, "--result", str(bad)]) == 1


def test_footmap_flat_small(tmp_path):
    sc = write_scenario(tmp_path, STAIRS_SMALL_YAML.replace("stairs, first_riser_x: 0.45",
                                                            "flat"))
    out = tmp_path / "out"
    assert main(["footmap", "--scenario", sc, "--leg", "RF", "--out", str(out),
                 "--jobs", "2"]) == 0
    data = np.loadtxt(out / "footmap_RF.txt", skiprows=1)
    geo, dyn = data[:, 5].astype(bool), data[:, 6].astype(bool)
    assert not np.any(dyn & ~geo)
    assert geo.all() and dyn.all()  # flat interior: geometry and dynamics agree


def test_bad_leg_and_missing_files_exit_2(tmp_path):
    sc = write_scenario(tmp_path, FLAT_YAML)
    assert main(["footmap", "--scenario", sc, "--leg", "XX",
                 "--out", str(tmp_path / "o")]) == 2
    assert main(["plan", "--scenario", str(tmp_path / "missing.yaml"),
                 "--out", str(tmp_path / "o")]) == 2
    missing_terrain = tmp_path / "mt.yaml"
    missing_terrain.write_text("terrain: {kind: file, path: nowhere.txt}\n")
    assert main(["plan", "--scenario", str(missing_terrain),
                 "--out", str(tmp_path / "o")]) == 2
