"""One control cycle of the model-less loop.

Each cycle clips the commanded tip step, solves the actuation QP for an
actuator increment that trades tracking against tension buildup and motor
excursion, applies it to the plant, propagates tensions, and feeds the
measured displacement back into the Jacobian estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .jacobian import JacobianEstimate, clipped_increment, update_jacobian
from .kinematics import ActuatorState, PlantParams, TipPosition, measure_displacement, plant_tip
from .qp import OPTIMAL, QpProblem, solve_qp
from .tension import TAU_MAX, TAU_MIN, TensionState, propagate_tension


def _default_y_min() -> np.ndarray:
    return np.array([0.0, 230.0, 230.0])


def _default_y_max() -> np.ndarray:
    return np.array([100.0, 330.0, 330.0])


@dataclass(frozen=True)
class ControllerConfig:
    """Weights, caps, and actuator limits of the actuation QP.

    The travel bounds default to a 280 mm backbone (insertion 0..100 mm,
    tendons within +-50 mm of rest); configure them per plant.
    """

    lambda_x: float = 1.0
    lambda_t: float = 1e-3
    lambda_y: float = 1e-2
    s_max: float = 1.0
    tau_min: float = TAU_MIN
    tau_max: float = TAU_MAX
    dy_min: float = -2.0
    dy_max: float = 2.0
    y_min: np.ndarray = field(default_factory=_default_y_min)
    y_max: np.ndarray = field(default_factory=_default_y_max)
    alpha_j: float = 0.15
    dj_max: float = 0.035

    def __post_init__(self):
        y_min = np.asarray(self.y_min, dtype=float)
        y_max = np.asarray(self.y_max, dtype=float)
        if y_min.shape != (3,) or y_max.shape != (3,):
            raise ValueError("y_min and y_max must have shape (3,)")
        if self.s_max <= 0:
            raise ValueError("s_max must be positive")
        if self.lambda_x <= 0:
            raise ValueError("lambda_x must be positive")
        if self.lambda_y <= 0:
            # keeps the QP strictly convex even when the tension weight is off
            raise ValueError("lambda_y must be positive")
        if self.lambda_t < 0:
            raise ValueError("lambda_t must be nonnegative")
        if not (self.dy_min < 0.0 < self.dy_max):
            raise ValueError("dy bounds must straddle zero")
        if np.any(y_min >= y_max):
            raise ValueError("y_min must be below y_max elementwise")
        if self.tau_min >= self.tau_max:
            raise ValueError("tau_min must be below tau_max")
        if self.alpha_j < 0:
            raise ValueError("alpha_j must be nonnegative")
        if self.dj_max <= 0:
            raise ValueError("dj_max must be positive")
        y_min.flags.writeable = False
        y_max.flags.writeable = False
        object.__setattr__(self, "y_min", y_min)
        object.__setattr__(self, "y_max", y_max)


@dataclass(frozen=True)
class ControlState:
    """Loop state carried between cycles."""

    y: ActuatorState
    x: TipPosition
    tension: TensionState
    jacobian: JacobianEstimate
    dy_prev: np.ndarray
    step_index: int = 0

    def __post_init__(self):
        dy_prev = np.asarray(self.dy_prev, dtype=float)
        if dy_prev.shape != (3,):
            raise ValueError("dy_prev must have shape (3,)")
        dy_prev.flags.writeable = False
        object.__setattr__(self, "dy_prev", dy_prev)


@dataclass(frozen=True)
class StepInfo:
    """Diagnostics of one executed cycle."""

    dy: np.ndarray
    qp_status: str
    kkt_residual: float
    dj_clip_norm: float


def clip_step(x_now: TipPosition, x_des: TipPosition, s_max: float) -> np.ndarray:
    """Magnitude-clip the desired tip displacement to at most s_max,
    preserving direction; zero input stays zero."""
    if s_max <= 0:
        raise ValueError("s_max must be positive")
    dxd = x_des.as_array() - x_now.as_array()
    norm = float(np.linalg.norm(dxd))
    if norm <= s_max:
        return dxd
    return (s_max / norm) * dxd


def assemble_actuation_qp(state: ControlState, dx, cfg: ControllerConfig) -> QpProblem:
    """Build the actuation QP for a clipped tip step dx.

    Objective: lambda_x |J dy - dx|^2 + lambda_t |tau + K dy|^2
    + lambda_y |dy - dy_prev|^2.  General rows keep the post-step tensions
    inside [tau_min, tau_max]; the box combines the per-step increment
    limits with the remaining travel to the geometric bounds.
    """
    dx = np.asarray(dx, dtype=float)
    J = state.jacobian.J
    k = state.tension.stiffness
    tau = state.tension.tau

    H = 2.0 * (cfg.lambda_x * (J.T @ J)
               + cfg.lambda_t * np.diag(k * k)
               + cfg.lambda_y * np.eye(3))
    g = -2.0 * (cfg.lambda_x * (J.T @ dx)
                - cfg.lambda_t * (k * tau)
                + cfg.lambda_y * state.dy_prev)

    A = np.vstack([np.diag(k), -np.diag(k)])
    b = np.concatenate([cfg.tau_min - tau, tau - cfg.tau_max])

    y = state.y.as_array()
    lower = np.maximum(cfg.dy_min, cfg.y_min - y)
    upper = np.minimum(cfg.dy_max, cfg.y_max - y)
    return QpProblem(H, g, A, b, lower, upper)


def control_step(state: ControlState, x_des: TipPosition, cfg: ControllerConfig,
                 plant: PlantParams, rng: np.random.Generator | None = None,
                 ) -> tuple[ControlState, StepInfo]:
    """Execute one cycle and return the successor state plus diagnostics.

    A QP that fails to solve holds the pose (dy = 0) and flags the step in
    the diagnostics rather than raising.
    """
    dx = clip_step(state.x, x_des, cfg.s_max)
    problem = assemble_actuation_qp(state, dx, cfg)
    sol = solve_qp(problem)
    if sol.status == OPTIMAL:
        dy = np.asarray(sol.z_star, dtype=float)
    else:
        dy = np.zeros(3)

    y_new = ActuatorState.from_array(state.y.as_array() + dy)
    x_new = plant_tip(y_new, plant)
    dx_meas = measure_displacement(state.y, y_new, plant, rng)
    tension_new = propagate_tension(state.tension, dy, cfg.tau_min)

    dj = clipped_increment(state.jacobian, dy, dx_meas, cfg.dj_max)
    jac_new = update_jacobian(state.jacobian, dy, dx_meas, cfg.alpha_j, cfg.dj_max)

    info = StepInfo(dy=dy, qp_status=sol.status, kkt_residual=sol.kkt_residual,
                    dj_clip_norm=float(np.linalg.norm(dj)))
    new_state = ControlState(y=y_new, x=x_new, tension=tension_new, jacobian=jac_new,
                             dy_prev=dy, step_index=state.step_index + 1)
    return new_state, info
