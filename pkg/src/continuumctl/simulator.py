"""Closed-loop trajectory runs with per-step logging and metrics.

A run drives the control loop over the waypoint schedule plus a hold tail
at the final waypoint, recording one row per cycle.  Rows log the state at
the start of the cycle (tip, actuators, tensions) together with the action
the cycle took, so the step-0 error is the initial offset from the path.
Summaries are recomputable from the record alone, wall time aside.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .controller import ControlState, ControllerConfig, control_step
from .jacobian import init_jacobian_fd
from .kinematics import ActuatorState, PlantParams, plant_tip
from .qp import OPTIMAL
from .tension import TensionState
from .trajectory import TrajectorySpec, corner_arclens, generate_waypoints, reference_at, side_intervals

_ABORT_FRACTION = 0.1


class SimulationAbortError(RuntimeError):
    """Raised when a run is dominated by infeasible QP steps, which means
    the configuration is broken, not that the controller is struggling."""


@dataclass(frozen=True)
class SimulationConfig:
    """Everything a run needs, cross-validated at construction."""

    plant: PlantParams
    controller: ControllerConfig
    trajectory: TrajectorySpec
    tau_init: tuple[float, float, float] = (1.0, 1.0, 1.0)
    stiffness: tuple[float, float, float] = (0.09, 0.4, 0.4)
    hold_steps: int = 100
    seed: int = 0
    fd_perturbation: float = 0.5

    def __post_init__(self):
        if self.hold_steps < 0:
            raise ValueError("hold_steps must be nonnegative")
        if self.fd_perturbation <= 0:
            raise ValueError("fd_perturbation must be positive")
        if self.trajectory.waypoint_spacing > self.controller.s_max:
            raise ValueError("waypoint spacing must not exceed the step cap")
        tau = np.asarray(self.tau_init, dtype=float)
        stiff = np.asarray(self.stiffness, dtype=float)
        if tau.shape != (3,) or stiff.shape != (3,):
            raise ValueError("tau_init and stiffness must have 3 entries")
        if np.any(stiff <= 0):
            raise ValueError("stiffness entries must be positive")
        if np.any(tau < self.controller.tau_min) or np.any(tau > self.controller.tau_max):
            raise ValueError("initial tensions must lie within the tension bounds")


@dataclass(frozen=True)
class StepRow:
    step: int
    ref_x: float
    ref_y: float
    tip_x: float
    tip_y: float
    err: float
    arclen: float
    y_i: float
    y_l: float
    y_r: float
    dy_i: float
    dy_l: float
    dy_r: float
    tau_i: float
    tau_l: float
    tau_r: float
    t_bb: float
    dj_norm: float
    qp_status: str
    kkt: float


@dataclass(frozen=True)
class RunRecord:
    rows: tuple[StepRow, ...]
    n_waypoints: int
    hold_steps: int


@dataclass(frozen=True)
class RunSummary:
    steady_mean_err: float
    steady_max_err: float
    peak_err: float
    tau_i_min: float
    tau_i_max: float
    tau_l_min: float
    tau_l_max: float
    tau_r_min: float
    tau_r_max: float
    t_bb_min: float
    t_bb_max: float
    infeasible_steps: int
    total_steps: int
    wall_time_s: float


def initial_state(cfg: SimulationConfig) -> ControlState:
    """Home pose with the finite-difference Jacobian probed on the plant."""
    y0 = ActuatorState(0.0, cfg.plant.L, cfg.plant.L)
    x0 = plant_tip(y0, cfg.plant)
    est = init_jacobian_fd(y0, cfg.plant, cfg.fd_perturbation)
    tension = TensionState(np.asarray(cfg.tau_init, dtype=float),
                           np.asarray(cfg.stiffness, dtype=float))
    return ControlState(y=y0, x=x0, tension=tension, jacobian=est,
                        dy_prev=np.zeros(3), step_index=0)


def run_simulation(cfg: SimulationConfig, seed: int | None = None) -> tuple[RunRecord, RunSummary]:
    """Execute one full run; deterministic for a given config and seed."""
    t_start = time.perf_counter()
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    waypoints = generate_waypoints(cfg.trajectory)
    state = initial_state(cfg)

    total = len(waypoints) + cfg.hold_steps
    last = len(waypoints) - 1
    rows = []
    infeasible = 0
    for k in range(total):
        ref = reference_at(cfg.trajectory, waypoints, k)
        arclen = waypoints[min(k, last)][1]
        pre = state
        state, info = control_step(state, ref, cfg.controller, cfg.plant, rng)
        if info.qp_status != OPTIMAL:
            infeasible += 1
        err = float(math.hypot(pre.x.x - ref.x, pre.x.y - ref.y))
        rows.append(StepRow(
            step=k, ref_x=ref.x, ref_y=ref.y, tip_x=pre.x.x, tip_y=pre.x.y,
            err=err, arclen=arclen,
            y_i=pre.y.y_i, y_l=pre.y.y_l, y_r=pre.y.y_r,
            dy_i=float(info.dy[0]), dy_l=float(info.dy[1]), dy_r=float(info.dy[2]),
            tau_i=float(pre.tension.tau[0]), tau_l=float(pre.tension.tau[1]),
            tau_r=float(pre.tension.tau[2]), t_bb=pre.tension.t_bb,
            dj_norm=info.dj_clip_norm, qp_status=info.qp_status,
            kkt=info.kkt_residual))

    if infeasible > _ABORT_FRACTION * total:
        raise SimulationAbortError(
            f"{infeasible} of {total} steps had an infeasible actuation QP; "
            "the configuration is inconsistent")

    record = RunRecord(rows=tuple(rows), n_waypoints=len(waypoints),
                       hold_steps=cfg.hold_steps)
    return record, summarize(record, wall_time=time.perf_counter() - t_start)


def steady_threshold(record: RunRecord) -> int:
    """First step index of the steady-state window: the final half of the
    waypoint schedule plus the whole hold tail."""
    return record.n_waypoints // 2


def summarize(record: RunRecord, wall_time: float = float("nan")) -> RunSummary:
    """Summary statistics recomputed from the record rows."""
    if not record.rows:
        raise ValueError("record is empty")
    errs = np.array([r.err for r in record.rows])
    start = steady_threshold(record)
    steady = errs[start:] if start < len(errs) else errs
    taus = np.array([[r.tau_i, r.tau_l, r.tau_r] for r in record.rows])
    t_bbs = np.array([r.t_bb for r in record.rows])
    infeasible = sum(1 for r in record.rows if r.qp_status != OPTIMAL)
    return RunSummary(
        steady_mean_err=float(np.mean(steady)),
        steady_max_err=float(np.max(steady)),
        peak_err=float(np.max(errs)),
        tau_i_min=float(taus[:, 0].min()), tau_i_max=float(taus[:, 0].max()),
        tau_l_min=float(taus[:, 1].min()), tau_l_max=float(taus[:, 1].max()),
        tau_r_min=float(taus[:, 2].min()), tau_r_max=float(taus[:, 2].max()),
        t_bb_min=float(t_bbs.min()), t_bb_max=float(t_bbs.max()),
        infeasible_steps=infeasible,
        total_steps=len(record.rows),
        wall_time_s=float(wall_time))


def compute_error_profile(record: RunRecord) -> list[tuple[float, float]]:
    """(cumulative reference arc length, error) per step."""
    if not record.rows:
        raise ValueError("record is empty")
    return [(r.arclen, r.err) for r in record.rows]


def _in_intervals(arclen: float, intervals) -> bool:
    return any(lo - 1e-9 <= arclen <= hi + 1e-9 for lo, hi in intervals)


def polygon_edge_means(record: RunRecord, spec: TrajectorySpec,
                       middle_fraction: float = 0.5) -> list[float | None]:
    """Mean steady-state error over the middle of each geometric side.

    Sides the lap traverses before the steady-state window begins have no
    eligible rows and report None.
    """
    start = steady_threshold(record)
    windows = side_intervals(spec, middle_fraction)
    out: list[float | None] = []
    for intervals in windows:
        vals = [r.err for r in record.rows
                if r.step >= start and _in_intervals(r.arclen, intervals)]
        out.append(float(np.mean(vals)) if vals else None)
    return out


def polygon_vertex_stats(record: RunRecord, spec: TrajectorySpec,
                         window: float = 5.0) -> list[dict]:
    """Per traversed corner: peak error in a +-window of arc length and the
    minima of the adjacent edge interiors, over steady-state rows.

    Corners or edges without steady coverage are dropped.
    """
    start = steady_threshold(record)
    corners = corner_arclens(spec)
    per = max(r.arclen for r in record.rows)
    steady_rows = [r for r in record.rows if r.step >= start]

    def errs_between(lo, hi):
        return [r.err for r in steady_rows if lo <= r.arclen <= hi]

    out = []
    for c in corners:
        peak_vals = errs_between(c - window, c + window)
        prev_c = max([0.0] + [v for v in corners if v < c - window])
        next_c = min([per] + [v for v in corners if v > c + window])
        before = errs_between(prev_c + window, c - window)
        after = errs_between(c + window, next_c - window)
        if not peak_vals or not before or not after:
            continue
        out.append({
            "corner_arclen": c,
            "peak": float(np.max(peak_vals)),
            "before_min": float(np.min(before)),
            "after_min": float(np.min(after)),
        })
    return out
