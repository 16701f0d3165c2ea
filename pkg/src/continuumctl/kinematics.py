"""Plant models for a planar tendon-driven continuum arm.

Both plants share one actuator convention, y = (insertion depth, left
tendon length, right tendon length) in mm, and one tip frame in which the
straight rest pose (0, L, L) maps to (0, 0).  The affine plant is the
simple surrogate map used to seed the empirical Jacobian; the circular-arc
plant bends a constant-curvature backbone and serves as the nonlinear test
plant for online adaptation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_SMALL_ARC = 1e-6  # |kappa * s| below this switches to the series branch

PLANT_KINDS = ("affine", "arc")


@dataclass(frozen=True)
class ActuatorState:
    """Insertion depth and tendon lengths, mm."""

    y_i: float
    y_l: float
    y_r: float

    def __post_init__(self):
        for name in ("y_i", "y_l", "y_r"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)

    def as_array(self) -> np.ndarray:
        return np.array([self.y_i, self.y_l, self.y_r])

    @classmethod
    def from_array(cls, a) -> "ActuatorState":
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]))


@dataclass(frozen=True)
class TipPosition:
    """Planar tip coordinate, mm: x lateral, y axial."""

    x: float
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("tip coordinates must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])

    @classmethod
    def from_array(cls, a) -> "TipPosition":
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), float(a[1]))


@dataclass(frozen=True)
class PlantParams:
    """Geometry and gains of the simulated arm.

    ``gamma`` defaults to 2*k_x/L**2, which makes the arc plant's lateral
    sensitivity match the affine plant near the straight pose.
    """

    L: float = 280.0
    k_x: float = 1.0
    k_y: float = 1.0
    gamma: float | None = None
    plant_kind: str = "affine"
    noise_sigma: float = 0.0

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError("L must be positive")
        if self.k_x <= 0 or self.k_y <= 0:
            raise ValueError("k_x and k_y must be positive")
        if self.gamma is None:
            object.__setattr__(self, "gamma", 2.0 * self.k_x / self.L ** 2)
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.plant_kind not in PLANT_KINDS:
            raise ValueError(f"plant_kind must be one of {PLANT_KINDS}")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")


def surrogate_fk(y: ActuatorState, p: PlantParams) -> TipPosition:
    """Affine tip map: lateral from the tendon differential, axial from
    insertion minus the mean tendon excess."""
    lateral = p.k_x * (y.y_r - y.y_l)
    axial = -p.k_y * ((y.y_l + y.y_r) / 2.0 - p.L) + y.y_i
    return TipPosition(lateral, axial)


def _arc_point_exact(kappa: float, s: float) -> tuple[float, float]:
    u = kappa * s
    return (1.0 - math.cos(u)) / kappa, math.sin(u) / kappa


def _arc_point_series(kappa: float, s: float) -> tuple[float, float]:
    # fourth-order expansion in kappa*s; exact straight line at kappa == 0
    x = 0.5 * kappa * s * s - (kappa ** 3) * (s ** 4) / 24.0
    y = s - (kappa * kappa) * (s ** 3) / 6.0
    return x, y


def arc_point(kappa: float, s: float) -> tuple[float, float]:
    """Point at arc length s on a circular arc of curvature kappa, rooted
    at the origin and initially tangent to +y."""
    if abs(kappa * s) < _SMALL_ARC:
        return _arc_point_series(kappa, s)
    return _arc_point_exact(kappa, s)


def effective_arc_length(y: ActuatorState, p: PlantParams) -> float:
    # Insertion lengthens the arc; mean tendon excess shortens it through
    # the same axial gain as the affine map, so the two plants agree near
    # the straight pose.
    return y.y_i + p.L - p.k_y * ((y.y_l + y.y_r) / 2.0 - p.L)


def arc_tip(y: ActuatorState, p: PlantParams) -> TipPosition:
    """Tip of the constant-curvature backbone, in the shifted frame where
    the straight rest pose sits at (0, 0)."""
    kappa = p.gamma * (y.y_r - y.y_l)
    ell = effective_arc_length(y, p)
    ax, ay = arc_point(kappa, ell)
    return TipPosition(ax, ay - p.L)


def backbone_polyline(y: ActuatorState, p: PlantParams, n_samples: int) -> list[TipPosition]:
    """Uniform arc-length samples of the backbone, base first at (0, -L)."""
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    kappa = p.gamma * (y.y_r - y.y_l)
    ell = effective_arc_length(y, p)
    pts = []
    for j in range(n_samples):
        s = ell * j / (n_samples - 1)
        ax, ay = arc_point(kappa, s)
        pts.append(TipPosition(ax, ay - p.L))
    return pts


def plant_tip(y: ActuatorState, p: PlantParams) -> TipPosition:
    if p.plant_kind == "arc":
        return arc_tip(y, p)
    return surrogate_fk(y, p)


def measure_displacement(before: ActuatorState, after: ActuatorState,
                         p: PlantParams, rng: np.random.Generator | None = None) -> np.ndarray:
    """Measured tip displacement between two actuator states.

    Gaussian sensor noise of std ``p.noise_sigma`` is added per axis when
    configured; the generator must then be supplied by the caller, which
    keeps runs reproducible.
    """
    delta = plant_tip(after, p).as_array() - plant_tip(before, p).as_array()
    if p.noise_sigma > 0.0:
        if rng is None:
            raise ValueError("rng is required when noise_sigma > 0")
        delta = delta + rng.normal(0.0, p.noise_sigma, size=2)
    return delta
