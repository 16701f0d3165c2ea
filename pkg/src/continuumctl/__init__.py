"""Model-less control stack for a planar tendon-driven continuum arm."""

from .controller import (ControlState, ControllerConfig, StepInfo,
                         assemble_actuation_qp, clip_step, control_step)
from .jacobian import (DegenerateColumnError, JacobianEstimate,
                       clipped_increment, init_jacobian_fd, update_jacobian)
from .kinematics import (ActuatorState, PlantParams, TipPosition, arc_tip,
                         backbone_polyline, measure_displacement, plant_tip,
                         surrogate_fk)
from .qp import QpProblem, QpSolution, check_kkt, solve_qp
from .simulator import (RunRecord, RunSummary, SimulationAbortError,
                        SimulationConfig, StepRow, compute_error_profile,
                        run_simulation, summarize)
from .tension import (SlackViolationError, TensionState, backbone_tension,
                      propagate_tension)
from .trajectory import TrajectorySpec, generate_waypoints, reference_at

__version__ = "0.1.0"
