"""footfeas: dynamic transition-feasibility evaluation of quadruped footholds.

A candidate foothold is judged by whether a dynamically consistent
centre-of-mass / base-orientation trajectory exists across the contact-switch
horizon it induces. Two formulations are provided: a convex QP over
Bezier-parameterized CoM motion with the angular dynamics linearized about a
desired orientation spline, and a nonlinear program that optimizes the
orientation jointly.
"""

__version__ = "0.1.0"

from .bezier import (BezierCurve, bernstein_matrix, build_transition_curve,
                     cross_product_curve, curve_from_text, curve_to_text, derivative,
                     elevate_degree, evaluate, transition_point_matrix)
from .dynamics import (ContactSet, Wrench, angular_momentum_rate,
                       angular_momentum_rate_jacobian, friction_constraints, grf_matrix,
                       recheck_knots, sample_knots, wrench_from_motion)
from .errors import (DimensionMismatch, FootfeasError, InvalidGait, OutOfBounds,
                     OutOfRange, ParseError, SingularOrientation, SolverError)
from .foothold import (CandidateGrid, FeasibilityMap, HeightMap, candidate_grid,
                       evaluate_foothold_map, export_feasibility_map, flat_heightmap,
                       geometric_filter, load_heightmap, save_heightmap, stairs_heightmap)
from .horizon import (ContactPhase, ContactSchedule, GaitParams, SubHorizon,
                      build_contact_schedule, desired_angular_curves, partition_subhorizons,
                      waypoint_states)
from .model import (GRAVITY, LEG_NAMES, RobotModel, State, default_robot, euler_rate_map,
                    load_robot_config, rotation_matrix, world_inertia)
from .problem import (Status, TransitionProblem, TransitionResult, deserialize_result,
                      make_problem, sample_trajectory, serialize_result)
from .scenario import (Scenario, build_problem, hip_at_touchdown, initial_footholds,
                       initial_state, load_scenario, nominal_landing, planned_landings)
from .transition_nlp import (MODE_FREE, MODE_TRACK, MODE_ZERO, assemble_nlp, embed_convex,
                             initial_point, solve_transition_nonlinear)
from .transition_qp import (assemble_convex_qp, reference_angular_momentum_rate,
                            solve_transition_convex)

__all__ = [name for name in dir() if not name.startswith("_")]
