"""Dense active-set solver for small convex quadratic programs.

Problems have the form

    minimize    0.5 * z' H z + g' z
    subject to  A_ineq z >= b_ineq,   lower <= z <= upper

with very few variables (n <= 8).  Solves are exact (dense factorizations,
no iterative tolerances) and deterministic: the same problem instance
always produces the same solution bit for bit.

Constraint indexing convention, used for ``QpSolution.active_set`` and the
optional warm-start argument: general inequality row i keeps index i, the
lower bound on variable j is ``m + j``, and the upper bound is ``m + n + j``
(m = number of general rows).
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.optimize import nnls

MAX_VARS = 8
MAX_ITER = 200

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
MAX_ITERATIONS = "max_iter"

_ACTIVE_TOL = 1e-9    # slack below this counts as tight
_FEAS_TOL = 1e-11
_PHASE1_TOL = 1e-8    # residual phase-1 slack that still counts as feasible
_STEP_TOL = 1e-12
_DUAL_TOL = 1e-11
_MIN_EIG = -1e-10     # smallest admissible eigenvalue of H


def _as_vector(x, n: int, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.shape != (n,):
        raise ValueError(f"{name} must have shape ({n},), got {v.shape}")
    return v


@dataclass(frozen=True)
class QpProblem:
    """Convex QP data. Validated and frozen at construction."""

    H: np.ndarray
    g: np.ndarray
    A_ineq: np.ndarray
    b_ineq: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        H = np.atleast_2d(np.asarray(self.H, dtype=float))
        n = H.shape[0]
        if H.shape != (n, n):
            raise ValueError(f"H must be square, got {H.shape}")
        if n > MAX_VARS:
            raise ValueError(f"at most {MAX_VARS} variables supported, got {n}")
        g = _as_vector(self.g, n, "g")
        A = np.asarray(self.A_ineq, dtype=float)
        if A.size == 0:
            A = np.zeros((0, n))
        A = np.atleast_2d(A)
        if A.shape[1] != n:
            raise ValueError(f"A_ineq must have {n} columns, got {A.shape}")
        b = _as_vector(self.b_ineq, A.shape[0], "b_ineq")
        lower = _as_vector(self.lower, n, "lower")
        upper = _as_vector(self.upper, n, "upper")

        if not (np.all(np.isfinite(H)) and np.all(np.isfinite(g))):
            raise ValueError("H and g must be finite")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("A_ineq and b_ineq must be finite")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise ValueError("bounds must not be NaN")
        if np.any(lower > upper):
            raise ValueError("lower bound exceeds upper bound")
        if np.any(lower == np.inf) or np.any(upper == -np.inf):
            raise ValueError("bounds leave no feasible value")

        sym_err = np.max(np.abs(H - H.T)) if n else 0.0
        if sym_err > 1e-9 * max(1.0, float(np.max(np.abs(H)))):
            raise ValueError("H must be symmetric")
        if n and float(np.min(np.linalg.eigvalsh(H))) < _MIN_EIG:
            raise ValueError("H must be positive semidefinite")

        for name, arr in (("H", H), ("g", g), ("A_ineq", A), ("b_ineq", b),
                          ("lower", lower), ("upper", upper)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.H.shape[0]

    @property
    def m(self) -> int:
        return self.A_ineq.shape[0]


@dataclass(frozen=True)
class QpSolution:
    """Solver output. ``z_star`` is None unless a point was produced."""

    z_star: np.ndarray | None
    objective_value: float
    active_set: tuple[int, ...]
    kkt_residual: float
    status: str


def _stacked_constraints(p: QpProblem):
    """All inequalities as rows r.z >= c, with global constraint indices.

    Rows for infinite bounds are dropped; the returned index array maps
    each kept row back to the documented indexing convention.
    """
    n, m = p.n, p.m
    rows = [p.A_ineq] if m else []
    rhs = [p.b_ineq] if m else []
    idx = list(range(m))
    eye = np.eye(n)
    for j in range(n):
        if np.isfinite(p.lower[j]):
            rows.append(eye[j:j + 1])
            rhs.append(np.array([p.lower[j]]))
            idx.append(m + j)
    for j in range(n):
        if np.isfinite(p.upper[j]):
            rows.append(-eye[j:j + 1])
            rhs.append(np.array([-p.upper[j]]))
            idx.append(m + n + j)
    if rows:
        return np.vstack(rows), np.concatenate(rhs), np.asarray(idx)
    return np.zeros((0, n)), np.zeros(0), np.zeros(0, dtype=int)


def _factorize(H: np.ndarray):
    """Cholesky factor of H, adding a diagonal shift if H is only PSD."""
    n = H.shape[0]
    for delta in (0.0, 1e-10, 1e-8, 1e-6, 1e-4):
        Hreg = H + delta * np.eye(n) if delta else H
        try:
            return Hreg, cho_factor(Hreg, lower=True)
        except np.linalg.LinAlgError:
            continue
    raise np.linalg.LinAlgError("cost matrix is not positive definite")


def _minimize(cho, Hreg, g, R, c, z0, working0, max_iter, step_tol=_STEP_TOL):
    """Primal active-set loop from the feasible point z0.

    ``working0`` holds row positions into R that are active at z0. Both the
    entering and the leaving constraint are chosen by smallest index, which
    keeps degenerate vertices from cycling.
    """
    z = z0.copy()
    work = sorted(working0)
    row_scale = np.maximum(np.max(np.abs(R), axis=1), 1e-30) if R.size else np.zeros(0)
    in_work = np.zeros(R.shape[0], dtype=bool)
    in_work[work] = True

    for _ in range(max_iter):
        grad = Hreg @ z + g
        hg = cho_solve(cho, grad)
        if work:
            A_w = R[work]
            Y = cho_solve(cho, A_w.T)
            G = A_w @ Y
            try:
                lam = np.linalg.solve(G, A_w @ hg)
            except np.linalg.LinAlgError:
                lam = np.linalg.lstsq(G, A_w @ hg, rcond=None)[0]
            p = Y @ lam - hg
        else:
            lam = np.zeros(0)
            p = -hg

        if np.max(np.abs(p)) <= step_tol * (1.0 + np.max(np.abs(z))):
            if not work:
                return z, True, work
            neg = [k for k, v in enumerate(lam) if v < -_DUAL_TOL]
            if not neg:
                return z, True, work
            drop = min(neg, key=lambda k: work[k])
            pos = work[drop]
            work.pop(drop)
            in_work[pos] = False
            continue

        # ratio test against constraints outside the working set
        alpha = 1.0
        block = -1
        if R.size:
            Rp = R @ p
            slack = R @ z - c
            pscale = np.max(np.abs(p))
            for i in range(R.shape[0]):
                if in_work[i] or Rp[i] >= -1e-13 * row_scale[i] * max(pscale, 1.0):
                    continue
                ratio = max(slack[i], 0.0) / (-Rp[i])
                if ratio < alpha - 1e-14:
                    alpha = ratio
                    block = i
                elif block >= 0 and abs(ratio - alpha) <= 1e-14 and i < block:
                    block = i
        z = z + alpha * p
        if block >= 0:
            bisect.insort(work, block)
            in_work[block] = True

    return z, False, work


def _phase_one(A, b, lower, upper, z0):
    """Minimum-slack feasibility program over (z, s): A z + s >= b, s >= 0."""
    n = z0.size
    q = b.size
    nv = n + q
    diag = np.concatenate([np.full(n, 1e-12), np.ones(q)])
    Hreg = np.diag(diag)
    g = np.concatenate([-1e-12 * z0, np.zeros(q)])

    rows = [np.hstack([A, np.eye(q)])]
    rhs = [b]
    eye = np.eye(nv)
    for j in range(n):
        if np.isfinite(lower[j]):
            rows.append(eye[j:j + 1])
            rhs.append(np.array([lower[j]]))
        if np.isfinite(upper[j]):
            rows.append(-eye[j:j + 1])
            rhs.append(np.array([-upper[j]]))
    for j in range(q):
        rows.append(eye[n + j:n + j + 1])
        rhs.append(np.array([0.0]))
    R = np.vstack(rows)
    c = np.concatenate(rhs)

    s0 = np.maximum(b - A @ z0, 0.0)
    start = np.concatenate([z0, s0])
    cho = cho_factor(Hreg, lower=True)
    zaug, converged, _ = _minimize(cho, Hreg, g, R, c, start, [], MAX_ITER)
    return zaug[:n], zaug[n:], converged


def _independent_subset(R, positions):
    """Greedy prefix of positions whose rows stay linearly independent."""
    kept: list[int] = []
    for pos in positions:
        trial = kept + [pos]
        if np.linalg.matrix_rank(R[trial], tol=1e-12) == len(trial):
            kept.append(pos)
    return kept


def solve_qp(problem: QpProblem, initial_active_set=None) -> QpSolution:
    """Globally minimize the QP.

    ``initial_active_set`` optionally seeds the working set with constraint
    indices (the previous solution's active set, typically); entries that
    are not tight at the starting point are ignored.

    Status is "optimal" when the KKT point was found, "infeasible" when the
    phase-1 slack program proves the constraint set empty, and "max_iter"
    when the iteration guard trips.
    """
    n = problem.n
    Hreg, cho = _factorize(problem.H)
    R, c, gidx = _stacked_constraints(problem)

    z0 = np.clip(np.zeros(n), problem.lower, problem.upper)
    if R.size and float(np.max(c - R @ z0)) > _FEAS_TOL:
        zf, slack_aug, converged = _phase_one(
            problem.A_ineq, problem.b_ineq, problem.lower, problem.upper, z0)
        if not converged:
            return QpSolution(None, float("nan"), (), float("inf"), MAX_ITERATIONS)
        if slack_aug.size and float(np.max(slack_aug)) > _PHASE1_TOL:
            return QpSolution(None, float("nan"), (), float("inf"), INFEASIBLE)
        z0 = np.clip(zf, problem.lower, problem.upper)

    working0: list[int] = []
    if initial_active_set:
        warm = set(int(i) for i in initial_active_set)
        slack0 = R @ z0 - c if R.size else np.zeros(0)
        candidates = [i for i in range(R.shape[0])
                      if int(gidx[i]) in warm and abs(slack0[i]) <= _ACTIVE_TOL]
        working0 = _independent_subset(R, candidates)

    z, converged, _ = _minimize(cho, Hreg, problem.g, R, c, z0, working0, MAX_ITER)

    obj = float(0.5 * z @ problem.H @ z + problem.g @ z)
    kkt = check_kkt(problem, z)
    if R.size:
        slack = R @ z - c
        active = tuple(sorted(int(gidx[i]) for i in range(R.shape[0])
                              if slack[i] <= _ACTIVE_TOL))
    else:
        active = ()
    z.flags.writeable = False
    status = OPTIMAL if converged else MAX_ITERATIONS
    return QpSolution(z, obj, active, kkt, status)


def check_kkt(problem: QpProblem, z) -> float:
    """Largest first-order optimality violation at z.

    Multipliers are recovered by nonnegative least squares on the gradients
    of the tight constraints (plain least squares would split the multiplier
    of an equality encoded as two opposing rows into a spurious negative
    pair). The result is the max of the stationarity residual, the primal
    constraint violation, and the complementary-slackness products; dual
    feasibility holds by construction of the recovery.
    """
    z = _as_vector(z, problem.n, "z")
    R, c, _ = _stacked_constraints(problem)
    grad = problem.H @ z + problem.g

    primal = 0.0
    comp = 0.0
    if R.size:
        slack = R @ z - c
        primal = max(0.0, float(np.max(-slack)))
        active = slack <= _ACTIVE_TOL
        if np.any(active):
            A_act = R[active]
            lam, _ = nnls(A_act.T, grad)
            stationarity = float(np.max(np.abs(A_act.T @ lam - grad)))
            comp = float(np.max(np.abs(lam * slack[active])))
        else:
            stationarity = float(np.max(np.abs(grad))) if grad.size else 0.0
    else:
        stationarity = float(np.max(np.abs(grad))) if grad.size else 0.0

    return max(primal, stationarity, comp)
