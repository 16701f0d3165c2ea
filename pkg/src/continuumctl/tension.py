"""Tendon tension bookkeeping.

Tensions evolve through the linear stiffness map tau+ = tau + K*dy and are
kept taut by the actuation QP; the backbone tension is the mean of the two
bending tendons and is always recomputed, never stored.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TAU_MIN = 0.3   # N, slackness bound
TAU_MAX = 3.0   # N, mechanical limit

_SLACK_TOL = 1e-9


class SlackViolationError(RuntimeError):
    """A tension update fell below the slack bound.

    The actuation QP constrains every step so this cannot happen; seeing it
    means a controller bug, not a recoverable run condition.
    """


@dataclass(frozen=True)
class TensionState:
    """Tendon tensions (insertion, left, right) in N plus the stiffness
    diagonal in N/mm."""

    tau: np.ndarray
    stiffness: np.ndarray

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=float)
        stiff = np.asarray(self.stiffness, dtype=float)
        if tau.shape != (3,) or stiff.shape != (3,):
            raise ValueError("tau and stiffness must have shape (3,)")
        if not np.all(np.isfinite(tau)):
            raise ValueError("tensions must be finite")
        if np.any(stiff <= 0.0):
            raise ValueError("stiffness entries must be positive")
        tau.flags.writeable = False
        stiff.flags.writeable = False
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "stiffness", stiff)

    @property
    def t_bb(self) -> float:
        return backbone_tension(self.tau)

    @property
    def K(self) -> np.ndarray:
        return np.diag(self.stiffness)


def backbone_tension(tau) -> float:
    """Mean of the left/right tendon tensions; insertion is excluded."""
    tau = np.asarray(tau, dtype=float)
    return float((tau[1] + tau[2]) / 2.0)


def propagate_tension(state: TensionState, dy, tau_min: float = TAU_MIN) -> TensionState:
    """Apply the stiffness map for one actuator increment."""
    dy = np.asarray(dy, dtype=float)
    tau_new = state.tau + state.stiffness * dy
    if np.any(tau_new < tau_min - _SLACK_TOL):
        raise SlackViolationError(
            f"tension fell to {tau_new.min():.6g} N, below the slack bound {tau_min} N")
    return TensionState(tau_new, state.stiffness)
