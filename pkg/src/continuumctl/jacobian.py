"""Empirical task-space Jacobian.

Lifecycle: finite-difference initialization against a plant, column-norm
balancing into a normalized form, then per-step minimal rank-one
corrections that are element-clipped and exponentially smoothed.  The
column-norm matrix is frozen at initialization so the normalized map keeps
a stable meaning while it adapts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .kinematics import ActuatorState, PlantParams, TipPosition, plant_tip

DEAD_BAND = 1e-6      # mm of scaled actuator motion below which updates skip
_MIN_COLUMN_NORM = 1e-9


class DegenerateColumnError(ValueError):
    """A probed actuator axis produced no measurable tip motion."""


@dataclass(frozen=True)
class JacobianEstimate:
    """Raw Jacobian J = J_hat * diag(w), with w the frozen column norms."""

    J_hat: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        J_hat = np.asarray(self.J_hat, dtype=float)
        w = np.asarray(self.w, dtype=float)
        if J_hat.shape != (2, 3):
            raise ValueError(f"J_hat must be 2x3, got {J_hat.shape}")
        if w.shape != (3,):
            raise ValueError(f"w must have shape (3,), got {w.shape}")
        if not np.all(np.isfinite(J_hat)) or not np.all(np.isfinite(w)):
            raise ValueError("estimate must be finite")
        if np.any(w <= 0.0):
            raise ValueError("column norms must be positive")
        J_hat.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "J_hat", J_hat)
        object.__setattr__(self, "w", w)

    @property
    def J(self) -> np.ndarray:
        return self.J_hat * self.w[None, :]

    @property
    def W(self) -> np.ndarray:
        return np.diag(self.w)


def init_jacobian_fd(y0: ActuatorState, params: PlantParams,
                     perturbation: float = 0.5,
                     tip_fn: Callable[[ActuatorState], TipPosition] | None = None,
                     ) -> JacobianEstimate:
    """Probe each actuator axis with a forward difference.

    Column i is (tip(y0 + d*e_i) - tip(y0)) / d.  Columns are then scaled
    to unit norm and the norms collected into the balancing matrix.
    """
    if perturbation <= 0:
        raise ValueError("perturbation must be positive")
    if tip_fn is None:
        tip_fn = lambda y: plant_tip(y, params)
    base = tip_fn(y0).as_array()
    y_arr = y0.as_array()
    cols = []
    for i in range(3):
        probe = y_arr.copy()
        probe[i] += perturbation
        moved = tip_fn(ActuatorState.from_array(probe)).as_array()
        cols.append((moved - base) / perturbation)
    J = np.column_stack(cols)
    w = np.linalg.norm(J, axis=0)
    if np.any(w < _MIN_COLUMN_NORM):
        dead = [i for i in range(3) if w[i] < _MIN_COLUMN_NORM]
        raise DegenerateColumnError(f"plant insensitive to actuator axes {dead}")
    return JacobianEstimate(J / w[None, :], w)


def clipped_increment(est: JacobianEstimate, dy, dx_meas, dj_max: float,
                      dead_band: float = DEAD_BAND) -> np.ndarray:
    """Element-clipped minimal-Frobenius correction of the normalized map.

    Solves min ||dJ||_F^2 subject to dx_meas = (J_hat + dJ) v with
    v = W dy, whose closed form is the rank-one matrix r v' / |v|^2 with
    r the prediction residual.  Returns zeros when the scaled motion falls
    below the dead band (the constraint divides by |v|^2).
    """
    dy = np.asarray(dy, dtype=float)
    dx_meas = np.asarray(dx_meas, dtype=float)
    v = est.w * dy
    vv = float(v @ v)
    if vv < dead_band ** 2:
        return np.zeros((2, 3))
    r = dx_meas - est.J_hat @ v
    dj = np.outer(r, v) / vv
    return np.sign(dj) * np.minimum(np.abs(dj), dj_max)


def update_jacobian(est: JacobianEstimate, dy, dx_meas,
                    alpha_j: float, dj_max: float,
                    dead_band: float = DEAD_BAND) -> JacobianEstimate:
    """One smoothed correction step; returns the estimate unchanged when
    the motion is below the dead band or the prediction was exact."""
    dj = clipped_increment(est, dy, dx_meas, dj_max, dead_band)
    if not dj.any():
        return est
    return JacobianEstimate(est.J_hat + alpha_j * dj, est.w)
