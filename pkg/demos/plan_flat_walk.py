"""Plan a straight crawl on flat ground and compare both formulations.

Run from the repository root:

    python demos/plan_flat_walk.py

Solves the transition problem from demos/configs/flat_walk.yaml with the
convex stage, warm-starts the nonlinear stage from it, and prints a short
comparison of cost, smoothness and solve time.
"""

from pathlib import Path

import numpy as np

from footfeas import (Status, build_problem, load_scenario, sample_trajectory,
                      solve_transition_convex, solve_transition_nonlinear)

HERE = Path(__file__).resolve().parent


def smoothness(problem, result):
    s = sample_trajectory(problem, result)
    int_acc = float(np.trapezoid(np.sum(s["c_ddot"] ** 2, axis=1), s["t"]))
    peak_rate = np.max(np.abs(s["theta_dot"]), axis=0)
    return int_acc, peak_rate


def main():
    scenario = load_scenario(HERE / "configs" / "flat_walk.yaml")
    problem = build_problem(scenario)
    horizon = sum(sh.duration for sh in problem.schedule.sub_horizons)
    print(f"horizon {horizon:.2f}s over {len(problem.schedule.sub_horizons)} "
          f"sub-horizons, command vx={scenario.v_cmd[0]} m/s")

    convex = solve_transition_convex(problem)
    print(f"\nconvex:    {convex.status.value}, cost {convex.cost:.4f}, "
          f"{convex.solve_time:.3f}s")
    nonlinear = solve_transition_nonlinear(problem, initial_guess=convex)
    print(f"nonlinear: {nonlinear.status.value}, cost {nonlinear.cost:.4f}, "
          f"{nonlinear.solve_time:.1f}s")

    for name, result in [("convex", convex), ("nonlinear", nonlinear)]:
        if result.status is not Status.FEASIBLE:
            continue
        int_acc, peak = smoothness(problem, result)
        print(f"{name:9s}  int||acc||^2 {int_acc:.4f}   "
              f"peak |roll,pitch,yaw rate| {peak[0]:.3f} {peak[1]:.3f} "
              f"{peak[2]:.3f} rad/s")


if __name__ == "__main__":
    main()
