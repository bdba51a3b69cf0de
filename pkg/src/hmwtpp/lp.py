"""Bounded-variable two-phase simplex over a dense tableau.

Every linear program is solved in the computational form

    min c.x   s.t.  A x + s = b,  lb <= (x, s) <= ub

with one slack per row (its bounds encode the row sense).  Phase one runs a
primal simplex on the total bound infeasibility of the basic solution (a
piecewise-linear exact penalty, stepping kink to kink), phase two a primal
simplex on the true costs from the feasible basis.  Planning objectives are
sparse (almost all costs zero), which makes dual pricing hopelessly
degenerate; minimizing infeasibility instead keeps every step's progress at
the scale of the data.  Both phases use a two-pass Harris ratio test and
fall back to Bland's rule after a run of degenerate pivots, so termination
does not rely on nondegeneracy.

The tableau depends only on the basis, never on variable bounds, so
branch-and-bound re-solves just swap bounds and continue from the current
basis.  The tableau is refactorized at a fixed pivot cadence to bound
numerical drift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .kernels import AT_LOWER, AT_UPPER, BASIC, FREE

FEAS_TOL = 1e-7
DUAL_TOL = 1e-9
PIVOT_TOL = 1e-7
REFACTOR_EVERY = 192
BLAND_AFTER = 40

INF = float("inf")


class LpError(Exception):
    pass


class LpStallError(LpError):
    """Iteration cap hit without convergence; carries a diagnostic."""


@dataclass
class LpData:
    """Dense LP arrays; rows carry senses 'L', 'G' or 'E'."""

    c: np.ndarray
    A: np.ndarray
    senses: list[str]
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    names: list[str]
    integers: np.ndarray

    @property
    def nrows(self) -> int:
        return self.A.shape[0]

    @property
    def ncols(self) -> int:
        return self.A.shape[1]


@dataclass
class LpSolution:
    status: str  # optimal | infeasible | unbounded
    objective: float
    values: np.ndarray
    max_residual: float
    iterations: int


def _slack_bounds(senses: list[str]) -> tuple[np.ndarray, np.ndarray]:
    m = len(senses)
    lb = np.zeros(m)
    ub = np.zeros(m)
    for i, s in enumerate(senses):
        if s == "L":
            lb[i], ub[i] = 0.0, INF
        elif s == "G":
            lb[i], ub[i] = -INF, 0.0
        elif s == "E":
            lb[i], ub[i] = 0.0, 0.0
        else:
            raise LpError(f"unknown row sense {s!r}")
    return lb, ub


class SimplexEngine:
    """Stateful solver bound to one coefficient matrix."""

    def __init__(self, data: LpData):
        m, n = data.A.shape
        self.m, self.n = m, n
        self.N = n + m
        self.A_full = np.hstack([data.A, np.eye(m)])
        self.c_full = np.concatenate([data.c, np.zeros(m)])
        slack_lb, slack_ub = _slack_bounds(data.senses)
        self.lb = np.concatenate([data.lb, slack_lb])
        self.ub = np.concatenate([data.ub, slack_ub])
        self.rhs = data.b.astype(float)
        self.basis = np.arange(n, self.N, dtype=np.int64)
        self.status = np.empty(self.N, dtype=np.int8)
        self.T: np.ndarray | None = None
        self.xB = np.zeros(m)
        self.d = self.c_full.copy()  # true reduced costs, kept in sync with T
        self.pivots = 0
        self._since_refactor = 0

    # -- state -------------------------------------------------------------

    def set_bounds(self, lb: np.ndarray, ub: np.ndarray) -> None:
        """Replace structural variable bounds (slack bounds are fixed)."""
        self.lb[: self.n] = lb
        self.ub[: self.n] = ub
        self._snap_nonbasic()

    def _snap_nonbasic(self) -> None:
        # nonbasic variables must sit on a bound that still exists
        nb = np.nonzero(self.status != BASIC)[0]
        for j in nb:
            if self.status[j] == AT_LOWER and not np.isfinite(self.lb[j]):
                self.status[j] = AT_UPPER if np.isfinite(self.ub[j]) else FREE
            elif self.status[j] == AT_UPPER and not np.isfinite(self.ub[j]):
                self.status[j] = AT_LOWER if np.isfinite(self.lb[j]) else FREE

    def reset(self) -> None:
        """All-slack basis; structural variables start on a finite bound."""
        n = self.n
        self.basis = np.arange(n, self.N, dtype=np.int64)
        self.status[:] = AT_LOWER
        self.status[n:] = BASIC
        for j in range(n):
            if np.isfinite(self.lb[j]):
                self.status[j] = AT_LOWER
            elif np.isfinite(self.ub[j]):
                self.status[j] = AT_UPPER
            else:
                self.status[j] = FREE
        self.T = self.A_full.copy()
        self.d = self.c_full.copy()
        self.pivots = 0
        self._since_refactor = 0
        self.compute_xB()

    def nonbasic_values(self) -> np.ndarray:
        vals = np.where(self.status == AT_LOWER, self.lb, 0.0)
        vals = np.where(self.status == AT_UPPER, self.ub, vals)
        vals[self.basis] = 0.0
        return vals

    def compute_xB(self) -> None:
        vals = self.nonbasic_values()
        # columns n.. of T hold B^-1 because the slack block of A_full is I
        self.xB = self.T[:, self.n:] @ self.rhs - self.T @ vals

    def _repair_basis(self) -> None:
        """Replace linearly dependent basis columns with slacks of uncovered
        rows (deterministic greedy LU probe)."""
        m = self.m
        W = self.A_full[:, self.basis].copy()
        used_rows: list[int] = []
        free_rows = set(range(m))
        dependent: list[int] = []
        for k in range(m):
            col = W[:, k]
            masked = col.copy()
            masked[used_rows] = 0.0
            r = int(np.argmax(np.abs(masked)))
            if abs(masked[r]) < 1e-9:
                dependent.append(k)
                continue
            used_rows.append(r)
            free_rows.discard(r)
            if k + 1 < m:
                W[:, k + 1:] -= np.outer(col / col[r], W[r, k + 1:])
        for k in dependent:
            j = int(self.basis[k])
            row = min(free_rows)
            free_rows.discard(row)
            self.basis[k] = self.n + row
            if np.isfinite(self.lb[j]):
                self.status[j] = AT_LOWER
            elif np.isfinite(self.ub[j]):
                self.status[j] = AT_UPPER
            else:
                self.status[j] = FREE
            self.status[self.n + row] = BASIC

    def refactorize(self) -> None:
        B = self.A_full[:, self.basis]
        try:
            self.T = np.linalg.solve(B, self.A_full)
        except np.linalg.LinAlgError:
            self._repair_basis()
            B = self.A_full[:, self.basis]
            try:
                self.T = np.linalg.solve(B, self.A_full)
            except np.linalg.LinAlgError as exc:
                raise LpError(f"singular basis survives repair: {exc}") from exc
        cB = self.c_full[self.basis]
        if np.any(cB):
            self.d = self.c_full - self.T.T @ cB
        else:
            self.d = self.c_full.copy()
        self.d[self.basis] = 0.0
        self._since_refactor = 0
        self.compute_xB()

    def solution(self) -> np.ndarray:
        vals = self.nonbasic_values()
        vals[self.basis] = self.xB
        return vals

    def objective(self) -> float:
        return float(self.c_full @ self.solution())

    def infeasibility(self) -> float:
        lbB = self.lb[self.basis]
        ubB = self.ub[self.basis]
        below = np.maximum(lbB - self.xB, 0.0)
        above = np.maximum(self.xB - ubB, 0.0)
        below[~np.isfinite(below)] = 0.0
        above[~np.isfinite(above)] = 0.0
        return float(below.sum() + above.sum())

    # -- pivoting ------------------------------------------------------------

    def _pivot(self, r: int, q: int, target: float, leave_status: int) -> float | None:
        """Make q basic in row r; the leaving variable lands on ``target``
        with nonbasic status ``leave_status``.  Returns |step| of the
        entering variable for degeneracy tracking, or None when the pivot
        element is numerically unsound (the tableau was refactorized and the
        caller must redo its selection)."""
        p = int(self.basis[r])
        e_q = self.T[r, q]
        if abs(e_q) < 1e-9 * max(1.0, float(np.abs(self.T[:, q]).max())):
            self.refactorize()
            return None
        delta = (self.xB[r] - target) / e_q
        if self.status[q] == AT_LOWER:
            x_q = self.lb[q]
        elif self.status[q] == AT_UPPER:
            x_q = self.ub[q]
        else:
            x_q = 0.0
        col = self.T[:, q].copy()
        row = self.T[r, :].copy()
        kernels.apply_pivot(self.T, r, q)
        self.xB -= delta * col
        self.xB[r] = x_q + delta
        theta = self.d[q] / e_q
        if theta != 0.0:
            self.d -= theta * row
        self.d[q] = 0.0
        self.d[p] = -theta
        self.status[q] = BASIC
        self.status[p] = leave_status
        self.basis[r] = q
        self.pivots += 1
        self._since_refactor += 1
        if self._since_refactor >= REFACTOR_EVERY:
            self.refactorize()
        return abs(delta)

    def _entering_sign(self, q: int, price: float) -> float:
        if self.status[q] == AT_UPPER:
            return -1.0
        if self.status[q] == AT_LOWER:
            return 1.0
        return 1.0 if price < 0 else -1.0

    def _phase1_long_step(self, q: int, sign: float, slope0: float,
                          below: np.ndarray, above: np.ndarray) -> float:
        """Multi-breakpoint ratio step for the infeasibility penalty.

        Walks the kinks of the penalty along the entering direction while its
        slope stays negative and pivots once at the blocking event; crossed
        violated rows turn feasible in the same step.  Returns |step|.
        """
        col = self.T[:, q].copy()
        rate = -sign * col
        lbB = self.lb[self.basis]
        ubB = self.ub[self.basis]
        feas = ~(below | above)
        up = rate > PIVOT_TOL
        dn = rate < -PIVOT_TOL

        rows: list[np.ndarray] = []
        ss: list[np.ndarray] = []
        ds: list[np.ndarray] = []
        low_tag: list[np.ndarray] = []

        def emit(mask: np.ndarray, bound: np.ndarray, at_lower: bool) -> None:
            idx = np.nonzero(mask & np.isfinite(bound))[0]
            if idx.size == 0:
                return
            rows.append(idx)
            ss.append((bound[idx] - self.xB[idx]) / rate[idx])
            ds.append(np.abs(rate[idx]))
            low_tag.append(np.full(idx.size, at_lower, dtype=bool))

        emit(up & below, lbB, True)    # violated row becomes feasible
        emit(up & below, ubB, False)   # ... and would overshoot its upper bound
        emit(up & feas, ubB, False)
        emit(dn & above, ubB, False)
        emit(dn & above, lbB, True)
        emit(dn & feas, lbB, True)

        own_gap = self.ub[q] - self.lb[q]
        if rows:
            row_arr = np.concatenate(rows)
            s_arr = np.maximum(np.concatenate(ss), 0.0)
            ds_arr = np.concatenate(ds)
            low_arr = np.concatenate(low_tag)
            order = np.lexsort((low_arr, self.basis[row_arr], s_arr))
        else:
            row_arr = np.zeros(0, dtype=np.int64)
            s_arr = ds_arr = np.zeros(0)
            low_arr = np.zeros(0, dtype=bool)
            order = np.zeros(0, dtype=np.int64)

        slope = slope0
        for k in order:
            if own_gap <= s_arr[k]:
                break
            slope += ds_arr[k]
            if slope >= -1e-12:
                r = int(row_arr[k])
                p = int(self.basis[r])
                target = self.lb[p] if low_arr[k] else self.ub[p]
                leave = AT_LOWER if low_arr[k] else AT_UPPER
                return self._pivot(r, q, target, leave)  # may be None
        if not np.isfinite(own_gap):
            raise LpError("infeasibility descent unblocked; inconsistent bounds")
        # entering variable flips to its other bound
        self.xB -= sign * own_gap * col
        self.status[q] = AT_UPPER if self.status[q] == AT_LOWER else AT_LOWER
        return own_gap

    def phase1(self, max_iter: int) -> str:
        """Primal simplex on the exact infeasibility penalty.
        Returns 'feasible' or 'infeasible'."""
        bland = False
        degenerate_run = 0
        for _ in range(max_iter):
            lbB = self.lb[self.basis]
            ubB = self.ub[self.basis]
            below = (lbB - self.xB) > FEAS_TOL
            above = (self.xB - ubB) > FEAS_TOL
            if not below.any() and not above.any():
                return "feasible"
            w = below.astype(np.float64) - above.astype(np.float64)
            g = w @ self.T  # gradient of total infeasibility per unit increase
            g[self.basis] = 0.0
            q = kernels.primal_entering(g, self.status, DUAL_TOL, bland)
            if q == -1:
                return "infeasible"
            sign = self._entering_sign(q, g[q])
            if not bland:
                moved = self._phase1_long_step(q, sign, -abs(g[q]), below, above)
                if moved is None:
                    continue
            else:
                # plain first-kink step under Bland's rule
                col = self.T[:, q].copy()
                lb_eff = np.where(below, -INF, lbB)
                ub_eff = np.where(below, lbB, ubB)
                lb_eff = np.where(above, ubB, lb_eff)
                ub_eff = np.where(above, INF, ub_eff)
                r, step = kernels.primal_ratio(
                    col, self.xB, lb_eff, ub_eff, sign, PIVOT_TOL, bland, self.basis,
                )
                own_gap = self.ub[q] - self.lb[q]
                if r == -1 and not np.isfinite(own_gap):
                    raise LpError("infeasibility descent unblocked; inconsistent bounds")
                if own_gap <= step:
                    self.xB -= sign * own_gap * col
                    self.status[q] = AT_UPPER if self.status[q] == AT_LOWER else AT_LOWER
                    moved = own_gap
                else:
                    rate = -sign * col[r]
                    if rate > 0:
                        target = ub_eff[r]
                        leave_status = AT_LOWER if below[r] else AT_UPPER
                    else:
                        target = lb_eff[r]
                        leave_status = AT_UPPER if above[r] else AT_LOWER
                    moved = step
                    if self._pivot(r, q, target, leave_status) is None:
                        continue
            if moved < 1e-10:
                degenerate_run += 1
                bland = bland or degenerate_run >= BLAND_AFTER
            else:
                degenerate_run = 0
                bland = False
        raise LpStallError(
            f"phase-1 simplex did not converge in {max_iter} pivots "
            f"(m={self.m}, n={self.n}, infeasibility={self.infeasibility():g})"
        )

    def phase2(self, max_iter: int) -> str:
        """Primal simplex on the true costs from a feasible basis.
        Returns 'optimal' or 'unbounded'."""
        bland = False
        degenerate_run = 0
        for _ in range(max_iter):
            q = kernels.primal_entering(self.d, self.status, DUAL_TOL, bland)
            if q == -1:
                return "optimal"
            sign = self._entering_sign(q, self.d[q])
            col = self.T[:, q].copy()
            r, step = kernels.primal_ratio(
                col, self.xB, self.lb[self.basis], self.ub[self.basis],
                sign, PIVOT_TOL, bland, self.basis,
            )
            own_gap = self.ub[q] - self.lb[q]
            if r == -1 and not np.isfinite(own_gap):
                return "unbounded"
            if own_gap <= step:
                self.xB -= sign * own_gap * col
                self.status[q] = AT_UPPER if self.status[q] == AT_LOWER else AT_LOWER
                moved = own_gap
            else:
                rate = -sign * col[r]
                if rate > 0:
                    target = self.ub[self.basis[r]]
                    leave_status = AT_UPPER
                else:
                    target = self.lb[self.basis[r]]
                    leave_status = AT_LOWER
                moved = step
                if self._pivot(r, q, target, leave_status) is None:
                    continue
            if moved < 1e-10:
                degenerate_run += 1
                bland = bland or degenerate_run >= BLAND_AFTER
            else:
                degenerate_run = 0
                bland = False
        raise LpStallError(
            f"phase-2 simplex did not converge in {max_iter} pivots "
            f"(m={self.m}, n={self.n}, pivots={self.pivots})"
        )

    # -- drivers -------------------------------------------------------------

    def optimize(self, max_iter: int | None = None) -> str:
        """Feasibility phase then optimality phase."""
        if max_iter is None:
            max_iter = 20000 + 40 * (self.m + self.N)
        status = self.phase1(max_iter)
        if status != "feasible":
            return status
        return self.phase2(max_iter)


def residuals(data: LpData, x: np.ndarray) -> float:
    """Worst constraint/bound violation of a structural solution vector."""
    worst = 0.0
    ax = data.A @ x if data.nrows else np.zeros(0)
    for i, s in enumerate(data.senses):
        if s == "L":
            worst = max(worst, ax[i] - data.b[i])
        elif s == "G":
            worst = max(worst, data.b[i] - ax[i])
        else:
            worst = max(worst, abs(ax[i] - data.b[i]))
    finite_l = np.isfinite(data.lb)
    finite_u = np.isfinite(data.ub)
    if finite_l.any():
        worst = max(worst, float((data.lb - x)[finite_l].max(initial=0.0)))
    if finite_u.any():
        worst = max(worst, float((x - data.ub)[finite_u].max(initial=0.0)))
    return worst


def solve_lp_data(data: LpData) -> LpSolution:
    """Solve one LP from scratch; relaxes any integrality declarations."""
    engine = SimplexEngine(data)
    engine.reset()
    status = engine.optimize()
    if status != "optimal":
        return LpSolution(status, float("nan"), np.full(data.ncols, np.nan),
                          float("nan"), engine.pivots)
    x = engine.solution()[: data.ncols]
    worst = residuals(data, x)
    if worst > FEAS_TOL:
        engine.refactorize()
        status = engine.optimize()
        x = engine.solution()[: data.ncols]
        worst = residuals(data, x)
        if status != "optimal" or worst > FEAS_TOL:
            raise LpStallError(f"residual {worst:g} above tolerance after refactorization")
    return LpSolution("optimal", float(data.c @ x), x, worst, engine.pivots)
