"""Score candidate footholds for the right-front leg on the stair edge.

Run from the repository root:

    python demos/foothold_map.py

Builds a 9x9 candidate grid around the nominal landing, filters it
geometrically (reach, local roughness, shin clearance), solves a convex
transition problem per surviving cell, and renders the result as ASCII:
'.' rejected geometrically, 'x' dynamically infeasible, digits 0-9 cost
from cheapest to most expensive.
"""

from pathlib import Path

import numpy as np

from footfeas import (build_problem, candidate_grid, evaluate_foothold_map,
                      geometric_filter, hip_at_touchdown, load_scenario,
                      nominal_landing, solve_transition_convex)

HERE = Path(__file__).resolve().parent
LEG = "RF"


def main():
    scenario = load_scenario(HERE / "configs" / "stairs_climb.yaml")
    nominal = nominal_landing(scenario, LEG)
    grid = candidate_grid(nominal, scenario.terrain, scenario.grid_half_extent,
                          scenario.grid_resolution)
    geo = geometric_filter(grid, hip_at_touchdown(scenario, LEG),
                           scenario.model, scenario.terrain)

    def solve(pos):
        return solve_transition_convex(
            build_problem(scenario, landing_override={LEG: pos}))

    fmap = evaluate_foothold_map(grid, geo, solve, jobs=4)
    s = fmap.summary()
    print(f"leg {LEG}, nominal landing ({nominal[0]:.2f}, {nominal[1]:.2f}): "
          f"{s['geometric_ok']}/{s['total']} pass geometry, "
          f"{s['dynamic_ok']} dynamically feasible\n")

    finite = np.sort(fmap.cost[np.isfinite(fmap.cost)])
    for iy in range(grid.side - 1, -1, -1):  # +y up the page
        row = []
        for ix in range(grid.side):
            if not fmap.geometric_ok[iy, ix]:
                row.append(".")
            elif not fmap.dynamic_ok[iy, ix]:
                row.append("x")
            else:
                rank = np.searchsorted(finite, fmap.cost[iy, ix]) / len(finite)
                row.append(str(min(9, int(10 * rank))))
        print(" ".join(row))
    print("\n'.' fails geometry, 'x' fails dynamics, "
          "digits rank cost (0 cheapest .. 9 costliest)")


if __name__ == "__main__":
    main()
