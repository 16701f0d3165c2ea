"""Closed reference paths: circle, regular pentagon, square.

Paths are sampled counterclockwise at uniform arc-length spacing and
paired with cumulative arc length from 0 to the perimeter.  Polygon
corners are exact vertices.  The module also exposes the side and corner
geometry in the rooted arc-length coordinate, which the error analysis
uses to window edges and vertices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kinematics import TipPosition

KINDS = ("circle", "pentagon", "square")
APPROACHES = ("direct", "none")

_VERTEX_SNAP = 1e-9


@dataclass(frozen=True)
class TrajectorySpec:
    """Reference path description.

    ``size`` is the radius (circle), circumradius (pentagon), or side
    length (square).  With approach "direct" the lap starts at the path
    point nearest the home tip (0, 0); with "none" it starts at the path's
    canonical origin (circle: angle 0, polygon: first vertex).
    """

    kind: str
    size: float
    center: TipPosition = TipPosition(0.0, 150.0)
    waypoint_spacing: float = 0.25
    approach: str = "direct"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.size <= 0:
            raise ValueError("size must be positive")
        if self.waypoint_spacing <= 0:
            raise ValueError("waypoint_spacing must be positive")
        if self.approach not in APPROACHES:
            raise ValueError(f"approach must be one of {APPROACHES}")


def _vertices(spec: TrajectorySpec) -> np.ndarray:
    """Canonical counterclockwise vertex list of a polygon spec."""
    c = spec.center.as_array()
    if spec.kind == "pentagon":
        # one vertex points at the home tip below the center
        angles = [-math.pi / 2.0 + 2.0 * math.pi * k / 5.0 for k in range(5)]
        return np.array([c + spec.size * np.array([math.cos(a), math.sin(a)])
                         for a in angles])
    if spec.kind == "square":
        h = spec.size / 2.0
        return np.array([c + np.array([h, -h]), c + np.array([h, h]),
                         c + np.array([-h, h]), c + np.array([-h, -h])])
    raise ValueError(f"{spec.kind} has no vertices")


def perimeter(spec: TrajectorySpec) -> float:
    if spec.kind == "circle":
        return 2.0 * math.pi * spec.size
    V = _vertices(spec)
    return float(sum(np.linalg.norm(V[(i + 1) % len(V)] - V[i]) for i in range(len(V))))


def _nearest_on_polygon(V: np.ndarray, point: np.ndarray) -> tuple[int, float]:
    """Edge index and fractional position of the boundary point nearest
    ``point``."""
    best = (0, 0.0)
    best_d = math.inf
    m = len(V)
    for i in range(m):
        a, b = V[i], V[(i + 1) % m]
        ab = b - a
        t = float(np.clip(np.dot(point - a, ab) / np.dot(ab, ab), 0.0, 1.0))
        d = float(np.linalg.norm(a + t * ab - point))
        if d < best_d - 1e-12:
            best_d = d
            best = (i, t)
    return best


def _root_param(spec: TrajectorySpec) -> tuple[int, float]:
    """Starting edge and fraction in canonical coordinates."""
    if spec.approach == "none":
        return 0, 0.0
    seg, t = _nearest_on_polygon(_vertices(spec), np.zeros(2))
    if t > 1.0 - 1e-12:
        return (seg + 1) % len(_vertices(spec)), 0.0
    return seg, t


def _polygon_chain(spec: TrajectorySpec) -> list[np.ndarray]:
    """Corner points visited in order, starting and ending at the root."""
    V = _vertices(spec)
    m = len(V)
    seg, t = _root_param(spec)
    root = V[seg] + t * (V[(seg + 1) % m] - V[seg])
    chain = [root] + [V[(seg + 1 + j) % m] for j in range(m)]
    if t > _VERTEX_SNAP:
        chain.append(root)  # close the split edge
    return chain


def generate_waypoints(spec: TrajectorySpec) -> list[tuple[TipPosition, float]]:
    """Sample the closed path at spacing <= waypoint_spacing.

    Returns (point, cumulative arc length) pairs; the last waypoint closes
    the loop at exactly the perimeter.
    """
    if spec.kind == "circle":
        r = spec.size
        c = spec.center.as_array()
        total = 2.0 * math.pi * r
        n = max(1, math.ceil(total / spec.waypoint_spacing - 1e-9))
        if spec.approach == "direct":
            theta0 = math.atan2(-c[1], -c[0])
        else:
            theta0 = 0.0
        out = []
        for j in range(n + 1):
            a = theta0 + 2.0 * math.pi * j / n
            out.append((TipPosition(c[0] + r * math.cos(a), c[1] + r * math.sin(a)),
                        total * j / n))
        return out

    chain = _polygon_chain(spec)
    out = [(TipPosition.from_array(chain[0]), 0.0)]
    acc = 0.0
    for a, b in zip(chain[:-1], chain[1:]):
        seglen = float(np.linalg.norm(b - a))
        if seglen < 1e-12:
            continue
        nseg = max(1, math.ceil(seglen / spec.waypoint_spacing - 1e-9))
        for j in range(1, nseg + 1):
            q = a + (j / nseg) * (b - a)
            out.append((TipPosition.from_array(q), acc + seglen * j / nseg))
        acc += seglen
    return out


def reference_at(spec: TrajectorySpec, waypoints, k: int) -> TipPosition:
    """Time-indexed reference: one waypoint per cycle, holding at the last."""
    if not waypoints:
        raise ValueError("waypoints must be nonempty")
    return waypoints[min(k, len(waypoints) - 1)][0]


def _rooted_offset(spec: TrajectorySpec) -> float:
    """Canonical boundary position of the rooted start point."""
    V = _vertices(spec)
    m = len(V)
    seg, t = _root_param(spec)
    lengths = [float(np.linalg.norm(V[(i + 1) % m] - V[i])) for i in range(m)]
    return sum(lengths[:seg]) + t * lengths[seg]


def corner_arclens(spec: TrajectorySpec) -> list[float]:
    """Rooted arc lengths of the corners the lap actually turns through.

    A corner coinciding with the root is excluded: the lap begins and ends
    there without turning.
    """
    if spec.kind == "circle":
        return []
    V = _vertices(spec)
    m = len(V)
    P = perimeter(spec)
    offs = _rooted_offset(spec)
    lengths = [float(np.linalg.norm(V[(i + 1) % m] - V[i])) for i in range(m)]
    canonical = np.concatenate([[0.0], np.cumsum(lengths)])[:m]
    rooted = sorted(float((s - offs) % P) for s in canonical)
    return [s for s in rooted if s > _VERTEX_SNAP and s < P - _VERTEX_SNAP]


def _rooted_interval(lo: float, hi: float, offs: float, P: float) -> list[tuple[float, float]]:
    a = (lo - offs) % P
    b = a + (hi - lo)
    if b <= P + 1e-9:
        return [(a, min(b, P))]
    return [(a, P), (0.0, b - P)]


def side_intervals(spec: TrajectorySpec, middle_fraction: float = 1.0) -> list[list[tuple[float, float]]]:
    """Rooted arc-length windows of each geometric side.

    ``middle_fraction`` trims each side symmetrically, e.g. 0.5 keeps the
    central half.  A window may wrap past the lap closure, in which case it
    is returned as two pieces.
    """
    if spec.kind == "circle":
        raise ValueError("circle has no sides")
    if not (0.0 < middle_fraction <= 1.0):
        raise ValueError("middle_fraction must be in (0, 1]")
    V = _vertices(spec)
    m = len(V)
    P = perimeter(spec)
    offs = _rooted_offset(spec)
    lengths = [float(np.linalg.norm(V[(i + 1) % m] - V[i])) for i in range(m)]
    start = 0.0
    trim = (1.0 - middle_fraction) / 2.0
    out = []
    for i in range(m):
        lo = start + trim * lengths[i]
        hi = start + (1.0 - trim) * lengths[i]
        out.append(_rooted_interval(lo, hi, offs, P))
        start += lengths[i]
    return out
