"""Command-line front end.

Subcommands: plan (transition solve + trajectory/report files), footmap
(foothold feasibility/cost map), gen-terrain (synthetic stairs or flat
heightmap files), check (re-verify a result file against the dynamics).
Exit codes: 0 success/feasible, 1 infeasible, 2 error.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import recheck_knots
from .errors import FootfeasError
from .foothold import (candidate_grid, evaluate_foothold_map, export_feasibility_map,
                       flat_heightmap, geometric_filter, save_heightmap, stairs_heightmap)
from .model import LEG_NAMES
from .problem import (Status, deserialize_result, result_knot_records, sample_trajectory,
                      serialize_result)
from .scenario import (build_problem, hip_at_touchdown, load_scenario, nominal_landing)
from .transition_nlp import solve_transition_nonlinear
from .transition_qp import solve_transition_convex

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_ERROR = 2


def _write_trajectory(path, samples):
    cols = ["t",
            "x", "y", "z", "vx", "vy", "vz", "ax", "ay", "az",
            "roll", "pitch", "yaw", "roll_rate", "pitch_rate", "yaw_rate"]
    with open(path, "w") as fh:
        fh.write(" ".join(cols) + "\n")
        for i, t in enumerate(samples["t"]):
            row = [t, *samples["c"][i], *samples["c_dot"][i], *samples["c_ddot"][i],
                   *samples["theta"][i], *samples["theta_dot"][i]]
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def trajectory_metrics(samples):
    """Peak |angular rate| per axis and the trapezoidal integral of |c_ddot|^2."""
    peak = np.max(np.abs(samples["theta_dot"]), axis=0)
    sq = np.sum(samples["c_ddot"] ** 2, axis=1)
    integral = float(np.trapezoid(sq, samples["t"]))
    return peak, integral


def _run_formulation(problem, formulation, warm=None):
    if formulation == "convex":
        return solve_transition_convex(problem)
    return solve_transition_nonlinear(problem, initial_guess=warm)


def cmd_plan(args):
    scenario = load_scenario(args.scenario)
    if args.formulation:
        scenario.formulation = args.formulation
    if args.knots:
        scenario.N = args.knots
    problem = build_problem(scenario)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    formulations = ["convex", "nonlinear"] if scenario.formulation == "both" \
        else [scenario.formulation]
    report_lines = []
    worst = EXIT_OK
    warm = None
    for form in formulations:
        result = _run_formulation(problem, form, warm=warm)
        if form == "convex":
            warm = result
        report_lines.append(f"[{form}] status {result.status.value} "
                            f"solve_time {result.solve_time:.3f}s")
        if result.status is Status.FEASIBLE:
            samples = sample_trajectory(problem, result, scenario.output_rate)
            _write_trajectory(out / f"trajectory_{form}.txt", samples)
            (out / f"result_{form}.txt").write_text(serialize_result(problem, result))
            peak, integral = trajectory_metrics(samples)
            report_lines.append(f"[{form}] cost {result.cost:.17g}")
            report_lines.append(f"[{form}] peak_theta_dot "
                                f"{peak[0]:.17g} {peak[1]:.17g} {peak[2]:.17g}")
            report_lines.append(f"[{form}] int_acc_sq {integral:.17g}")
        elif result.status is Status.INFEASIBLE:
            worst = max(worst, EXIT_INFEASIBLE)
            print(f"{form}: infeasible ({result.message})", file=sys.stderr)
        else:
            worst = max(worst, EXIT_ERROR)
            print(f"{form}: {result.status.value} ({result.message})", file=sys.stderr)
    report = "\n".join(report_lines) + "\n"
    (out / "report.txt").write_text(report)
    print(report, end="")
    return worst


def cmd_footmap(args):
    scenario = load_scenario(args.scenario)
    if args.formulation:
        scenario.formulation = args.formulation
    leg = args.leg
    if leg not in LEG_NAMES:
        raise FootfeasError(f"unknown leg {leg!r}, expected one of {LEG_NAMES}")
    nominal = nominal_landing(scenario, leg)
    grid = candidate_grid(nominal, scenario.terrain, scenario.grid_half_extent,
                          scenario.grid_resolution)
    hip = hip_at_touchdown(scenario, leg)
    geo = geometric_filter(grid, hip, scenario.model, scenario.terrain)

    formulation = scenario.formulation if scenario.formulation != "both" else "convex"

    def solve_candidate(pos):
        problem = build_problem(scenario, landing_override={leg: pos})
        return _run_formulation(problem, formulation)

    fmap = evaluate_foothold_map(grid, geo, solve_candidate, jobs=args.jobs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    export_feasibility_map(fmap, out / f"footmap_{leg}.txt")
    s = fmap.summary()
    print(f"total {s['total']} geometric_ok {s['geometric_ok']} "
          f"dynamic_ok {s['dynamic_ok']} errors {s['errors']}")
    return EXIT_OK


def cmd_gen_terrain(args):
    if args.kind == "stairs":
        hm = stairs_heightmap(first_riser_x=args.first_riser_x, step_height=args.step_height,
                              tread_depth=args.tread_depth, num_steps=args.num_steps,
                              origin=tuple(args.origin), size=tuple(args.size),
                              resolution=args.resolution)
    else:
        hm = flat_heightmap(origin=tuple(args.origin), size=tuple(args.size),
                            resolution=args.resolution)
    save_heightmap(hm, args.out)
    print(f"wrote {args.out} ({hm.rows}x{hm.cols} cells)")
    return EXIT_OK


def cmd_check(args):
    scenario = load_scenario(args.scenario)
    problem = build_problem(scenario)
    result = deserialize_result(Path(args.result).read_text())
    if result.status is not Status.FEASIBLE:
        print(f"result status is {result.status.value}; nothing to check")
        return EXIT_INFEASIBLE
    records = result_knot_records(problem, result)
    dyn, fric = recheck_knots(scenario.model, records)
    print(f"dynamics residual {dyn:.3e} friction violation {fric:.3e} (tol {args.tol:g})")
    if dyn > args.tol or fric > args.tol:
        print("check FAILED", file=sys.stderr)
        return EXIT_INFEASIBLE
    print("check passed")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="footfeas",
                                description="Dynamic transition-feasibility evaluation "
                                            "of quadruped footholds")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    plan = sub.add_parser("plan", help="solve a transition scenario and write trajectories")
    plan.add_argument("--scenario", required=True)
    plan.add_argument("--formulation", choices=["convex", "nonlinear", "both"])
    plan.add_argument("--knots", type=int)
    plan.add_argument("--out", default="out")
    plan.set_defaults(func=cmd_plan)

    fm = sub.add_parser("footmap", help="evaluate a candidate foothold grid")
    fm.add_argument("--scenario", required=True)
    fm.add_argument("--leg", required=True)
    fm.add_argument("--formulation", choices=["convex", "nonlinear"])
    fm.add_argument("--out", default="out")
    fm.add_argument("--jobs", type=int, default=1)
    fm.set_defaults(func=cmd_footmap)

    gt = sub.add_parser("gen-terrain", help="write a synthetic heightmap file")
    gt.add_argument("--out", required=True)
    gt.add_argument("--kind", choices=["flat", "stairs"], default="stairs")
    gt.add_argument("--step-height", type=float, default=0.08)
    gt.add_argument("--tread-depth", type=float, default=0.30)
    gt.add_argument("--num-steps", type=int, default=2)
    gt.add_argument("--first-riser-x", type=float, default=1.0)
    gt.add_argument("--origin", type=float, nargs=2, default=[-1.0, -1.0])
    gt.add_argument("--size", type=float, nargs=2, default=[4.0, 2.0])
    gt.add_argument("--resolution", type=float, default=0.02)
    gt.set_defaults(func=cmd_gen_terrain)

    ck = sub.add_parser("check", help="re-verify a result file against the dynamics")
    ck.add_argument("--scenario", required=True)
    ck.add_argument("--result", required=True)
    ck.add_argument("--tol", type=float, default=1e-5)
    ck.set_defaults(func=cmd_check)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FootfeasError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
