"""Shared dense numerical kernels: symmetric eigensolver and LP solver.

The LP solver is a bounded-variable revised simplex (dense explicit basis
inverse) with a two-phase start, Bland anti-cycling fallback, and a dual
simplex mode so that models can be re-solved cheaply after cut rows are
appended.  An exact Fraction-based simplex is provided for small
feasibility problems where float verdicts near the boundary are not good
enough.  An adapter hook lets large runs go through an external solver with
the same contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

PIVOT_TOL = 1e-9
DUAL_TOL = 1e-7
FEAS_TOL = 1e-7
INF = float("inf")


class LpNumericalError(Exception):
    """Numerical failure inside the simplex (singular basis, drift)."""


class EigenError(Exception):
    """Jacobi sweep cap exceeded before reaching the target tolerance."""


class LpStatus:
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    UNBOUNDED = "UNBOUNDED"
    ITER_LIMIT = "ITER_LIMIT"


@dataclass
class LpProblem:
    """min c.x  s.t.  A x (<=, >=, =) b,  lb <= x <= ub (inf allowed)."""

    c: np.ndarray
    A: np.ndarray
    senses: list  # one of '<', '>', '=' per row
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.A = np.asarray(self.A, dtype=float)
        if self.A.ndim != 2:
            self.A = self.A.reshape(-1, self.c.size)
        self.b = np.asarray(self.b, dtype=float)
        self.lb = np.asarray(self.lb, dtype=float)
        self.ub = np.asarray(self.ub, dtype=float)
        m, n = self.A.shape
        if not (self.c.size == n and self.b.size == m == len(self.senses)
                and self.lb.size == n and self.ub.size == n):
            raise ValueError("inconsistent LP dimensions")
        if any(s not in ("<", ">", "=") for s in self.senses):
            raise ValueError("row sense must be one of '<', '>', '='")

    @property
    def nrows(self):
        return self.A.shape[0]

    @property
    def ncols(self):
        return self.A.shape[1]

    def add_rows(self, A_new, senses, b_new):
        A_new = np.asarray(A_new, dtype=float).reshape(len(senses), self.ncols)
        self.A = np.vstack([self.A, A_new])
        self.senses = list(self.senses) + list(senses)
        self.b = np.concatenate([self.b, np.asarray(b_new, dtype=float)])


@dataclass
class LpSolution:
    status: str
    x: np.ndarray | None = None
    obj: float = math.nan
    y: np.ndarray | None = None  # row duals
    iterations: int = 0
    feas_residual: float = 0.0
    cs_residual: float = 0.0
    dual_obj: float = math.nan


def dump_lp(p: LpProblem) -> str:
    """Sectioned text dump (rows / columns / bounds) for external debugging."""
    out = [f"LP rows={p.nrows} cols={p.ncols} minimize"]
    out.append("ROWS")
    for i, s in enumerate(p.senses):
        out.append(f"  r{i} {s} {p.b[i]:.17g}")
    out.append("COLUMNS")
    for j in range(p.ncols):
        nz = " ".join(f"r{i}:{p.A[i, j]:.17g}" for i in np.nonzero(p.A[:, j])[0])
        out.append(f"  c{j} obj:{p.c[j]:.17g} {nz}")
    out.append("BOUNDS")
    for j in range(p.ncols):
        out.append(f"  c{j} [{p.lb[j]:.17g}, {p.ub[j]:.17g}]")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# bounded-variable revised simplex
# ---------------------------------------------------------------------------

AT_LB, AT_UB, BASIC, FREE_NB = 0, 1, 2, 3


class RevisedSimplex:
    """Primal/dual bounded simplex over [structural | slack | artificial] columns.

    Keeps an explicit dense basis inverse, refactorized periodically.  After
    ``solve`` the object can absorb extra rows via ``add_rows`` and re-solve
    with the dual simplex from the previous (still dual-feasible) basis.
    """

    REFACTOR_EVERY = 400

    def __init__(self, prob: LpProblem, max_iters: int | None = None):
        self.prob = prob
        self.m = prob.nrows
        self.n = prob.ncols
        self.max_iters = max_iters or max(2000, 60 * (self.m + self.n))
        self.iterations = 0
        self._degenerate = 0
        self._bland = False
        self._setup()

    # column layout: [0, n) structural, [n, n+m) slacks, [n+m, n+2m) artificials
    def _setup(self):
        p, m, n = self.prob, self.m, self.n
        self.ntot = n + 2 * m
        self.lb = np.concatenate([p.lb, np.zeros(m), np.zeros(m)])
        self.ub = np.concatenate([p.ub, np.zeros(m), np.full(m, INF)])
        for i, s in enumerate(p.senses):
            if s == "<":
                self.ub[n + i] = INF
            elif s == ">":
                self.lb[n + i] = -INF
        self.art_sign = np.ones(m)
        self.x = np.zeros(self.ntot)
        self.state = np.full(self.ntot, AT_LB, dtype=np.int8)
        for j in range(n):
            if p.lb[j] == -INF and p.ub[j] == INF:
                self.state[j] = FREE_NB
                self.x[j] = 0.0
            elif p.lb[j] == -INF:
                self.state[j] = AT_UB
                self.x[j] = p.ub[j]
            elif p.ub[j] == INF or abs(p.lb[j]) <= abs(p.ub[j]):
                self.state[j] = AT_LB
                self.x[j] = p.lb[j]
            else:
                self.state[j] = AT_UB
                self.x[j] = p.ub[j]
        # slacks nonbasic at their zero-side bound; artificials form the basis
        for i in range(m):
            self.x[n + i] = 0.0
            self.state[n + i] = AT_UB if p.senses[i] == ">" else AT_LB
        resid = p.b - p.A @ self.x[:n]
        self.art_sign = np.where(resid >= 0, 1.0, -1.0)
        self.basis = np.arange(n + m, n + 2 * m)
        self.state[self.basis] = BASIC
        self.x[self.basis] = np.abs(resid)
        self.binv = np.diag(self.art_sign.copy())
        self._in_phase1 = True

    # -- column access -------------------------------------------------------

    def _col(self, j):
        n, m = self.n, self.m
        if j < n:
            return self.prob.A[:, j]
        e = np.zeros(m)
        if j < n + m:
            e[j - n] = 1.0
        else:
            e[j - n - m] = self.art_sign[j - n - m]
        return e

    def _cost_vec(self, phase1: bool):
        c = np.zeros(self.ntot)
        if phase1:
            c[self.n + self.m:] = 1.0
        else:
            c[: self.n] = self.prob.c
        return c

    def _reduced_costs(self, c, y):
        n, m = self.n, self.m
        d = np.empty(self.ntot)
        d[:n] = c[:n] - self.prob.A.T @ y
        d[n:n + m] = c[n:n + m] - y
        d[n + m:] = c[n + m:] - self.art_sign * y
        return d

    def _refactor(self):
        B = np.column_stack([self._col(j) for j in self.basis])
        try:
            self.binv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise LpNumericalError("singular basis matrix") from exc
        nb = [j for j in range(self.ntot) if self.state[j] != BASIC]
        rhs = self.prob.b.copy()
        for j in nb:
            if self.x[j] != 0.0:
                rhs -= self._col(j) * self.x[j]
        self.x[self.basis] = self.binv @ rhs

    # -- primal simplex ------------------------------------------------------

    def _primal(self, phase1: bool):
        c = self._cost_vec(phase1)
        since_refactor = 0
        while True:
            if self.iterations >= self.max_iters:
                return LpStatus.ITER_LIMIT
            y = c[self.basis] @ self.binv
            d = self._reduced_costs(c, y)
            nb_lb = self.state == AT_LB
            nb_ub = self.state == AT_UB
            nb_fr = self.state == FREE_NB
            # artificials never re-enter once expelled
            nb_lb[self.n + self.m:] = False
            nb_ub[self.n + self.m:] = False
            nb_fr[self.n + self.m:] = False
            cand = np.zeros(self.ntot)
            cand[nb_lb] = np.minimum(d[nb_lb], 0.0)
            cand[nb_ub] = -np.maximum(d[nb_ub], 0.0)
            cand[nb_fr] = -np.abs(d[nb_fr])
            cand_idx = np.nonzero(cand < -DUAL_TOL)[0]
            if cand_idx.size == 0:
                return LpStatus.OPTIMAL
            if self._bland:
                q = int(cand_idx[0])
            else:
                q = int(cand_idx[np.argmin(cand[cand_idx])])
            direction = 1.0
            if self.state[q] == AT_UB or (self.state[q] == FREE_NB and d[q] > 0):
                direction = -1.0
            w = self.binv @ self._col(q)
            dw = direction * w
            xb = self.x[self.basis]
            lo_b = self.lb[self.basis]
            hi_b = self.ub[self.basis]
            with np.errstate(divide="ignore", invalid="ignore"):
                t_lb = np.where(dw > PIVOT_TOL,
                                np.maximum(xb - lo_b, 0.0) / np.where(dw > PIVOT_TOL, dw, 1.0),
                                INF)
                t_ub = np.where(dw < -PIVOT_TOL,
                                np.maximum(hi_b - xb, 0.0) / np.where(dw < -PIVOT_TOL, -dw, 1.0),
                                INF)
            t_row = np.minimum(t_lb, t_ub)
            tmin = float(t_row.min()) if self.m else INF
            rng_q = self.ub[q] - self.lb[q]
            if tmin == INF and rng_q == INF:
                return LpStatus.UNBOUNDED
            self.iterations += 1
            since_refactor += 1
            if rng_q < tmin:
                # entering runs to its own opposite bound: flip, no basis change
                self.x[self.basis] = xb - rng_q * dw
                self.x[q] += direction * rng_q
                self.state[q] = AT_UB if self.state[q] == AT_LB else AT_LB
            else:
                ties = np.nonzero(t_row <= tmin + 1e-10)[0]
                if self._bland:
                    leave_pos = int(ties[np.argmin(self.basis[ties])])
                else:
                    leave_pos = int(ties[np.argmax(np.abs(dw[ties]))])
                step = max(tmin, 0.0)
                if step <= 1e-12:
                    self._degenerate += 1
                    if self._degenerate > 5 * (self.m + self.n):
                        self._bland = True
                leave_to = AT_LB if t_lb[leave_pos] <= t_ub[leave_pos] else AT_UB
                self.x[self.basis] = xb - step * dw
                self.x[q] += direction * step
                p_out = self.basis[leave_pos]
                self.state[p_out] = leave_to
                self.x[p_out] = self.lb[p_out] if leave_to == AT_LB else self.ub[p_out]
                self.basis[leave_pos] = q
                self.state[q] = BASIC
                self._update_binv(leave_pos, w)
            if since_refactor >= self.REFACTOR_EVERY:
                self._refactor()
                since_refactor = 0

    def _update_binv(self, r, w):
        piv = w[r]
        if abs(piv) < PIVOT_TOL:
            raise LpNumericalError("pivot element below tolerance")
        row = self.binv[r, :] / piv
        self.binv -= np.outer(w, row)
        self.binv[r, :] = row

    # -- dual simplex (used after appending rows) -----------------------------

    def _dual(self):
        c = self._cost_vec(phase1=False)
        since_refactor = 0
        while True:
            if self.iterations >= self.max_iters:
                return LpStatus.ITER_LIMIT
            xb = self.x[self.basis]
            lo = self.lb[self.basis]
            hi = self.ub[self.basis]
            viol_lo = lo - xb
            viol_hi = xb - hi
            viol = np.maximum(viol_lo, viol_hi)
            r = int(np.argmax(viol))
            if viol[r] <= FEAS_TOL:
                return LpStatus.OPTIMAL
            if self._bland:
                bad = np.nonzero(viol > FEAS_TOL)[0]
                r = int(bad[np.argmin(self.basis[bad])])
            below = viol_lo[r] > viol_hi[r]
            y = c[self.basis] @ self.binv
            d = self._reduced_costs(c, y)
            rowv = self.binv[r, :]
            n, m = self.n, self.m
            alpha = np.empty(self.ntot)
            alpha[:n] = rowv @ self.prob.A
            alpha[n:n + m] = rowv
            alpha[n + m:] = rowv * self.art_sign
            if below:
                alpha = -alpha  # normalize to the "basic above ub" case
            eligible = np.zeros(self.ntot, dtype=bool)
            eligible[(self.state == AT_LB) & (alpha > PIVOT_TOL)] = True
            eligible[(self.state == AT_UB) & (alpha < -PIVOT_TOL)] = True
            eligible[(self.state == FREE_NB) & (np.abs(alpha) > PIVOT_TOL)] = True
            eligible[n + m:] = False  # artificials stay out
            idx = np.nonzero(eligible)[0]
            if idx.size == 0:
                return LpStatus.INFEASIBLE
            ratios = d[idx] / alpha[idx]
            ratios = np.where(np.abs(ratios) < 1e-14, 0.0, ratios)
            if self._bland:
                best = idx[ratios <= ratios.min() + 1e-12][0]
            else:
                near = idx[ratios <= ratios.min() + 1e-9]
                best = near[np.argmax(np.abs(alpha[near]))]
            q = int(best)
            w = self.binv @ self._col(q)
            bound_r = lo[r] if below else hi[r]
            delta = (xb[r] - bound_r) / w[r]
            self.iterations += 1
            since_refactor += 1
            if abs(delta) <= 1e-12:
                self._degenerate += 1
                if self._degenerate > 5 * (self.m + self.n):
                    self._bland = True
            self.x[self.basis] = xb - delta * w
            self.x[q] += delta
            p_out = self.basis[r]
            self.state[p_out] = AT_LB if below else AT_UB
            self.x[p_out] = bound_r
            self.basis[r] = q
            self.state[q] = BASIC
            self._update_binv(r, w)
            if since_refactor >= self.REFACTOR_EVERY:
                self._refactor()
                since_refactor = 0

    # -- public driver ---------------------------------------------------------

    def solve(self) -> LpSolution:
        self._refactor()
        status = self._primal(phase1=True)
        if status == LpStatus.ITER_LIMIT:
            return self._finish(status)
        art = self.x[self.n + self.m:]
        art_basic = [i for i, j in enumerate(self.basis) if j >= self.n + self.m]
        phase1_obj = float(np.sum(art))
        if phase1_obj > 1e-7 * max(1.0, float(np.abs(self.prob.b).max(initial=0.0))):
            return self._finish(LpStatus.INFEASIBLE)
        # pin artificials at zero; drive basic ones out when a pivot exists
        self.ub[self.n + self.m:] = 0.0
        for i in list(art_basic):
            if self.basis[i] < self.n + self.m:
                continue
            rowv = self.binv[i, :]
            alpha = np.concatenate([rowv @ self.prob.A, rowv])
            nb = np.nonzero((self.state[: self.n + self.m] != BASIC)
                            & (np.abs(alpha) > 1e-7))[0]
            if nb.size:
                q = int(nb[np.argmax(np.abs(alpha[nb]))])
                w = self.binv @ self._col(q)
                p_out = self.basis[i]
                self.state[p_out] = AT_LB
                self.x[p_out] = 0.0
                self.basis[i] = q
                self.state[q] = BASIC
                self._update_binv(i, w)
        self._in_phase1 = False
        self._refactor()
        status = self._primal(phase1=False)
        return self._finish(status)

    def add_rows(self, A_new, senses, b_new):
        """Append rows and extend the basis with their slacks (dual re-solve)."""
        if self._in_phase1:
            raise LpNumericalError("add_rows requires a solved model")
        k = len(senses)
        old_m, n = self.m, self.n
        self.prob.add_rows(A_new, senses, b_new)
        m = self.m = self.prob.nrows
        ins = n + old_m  # new slack columns slot in before old artificials
        self.basis = np.where(self.basis >= ins, self.basis + k, self.basis)
        # rebuild padded vectors: [struct | slacks(m) | artificials(m)]
        def expand(vec, slack_fill, art_fill):
            out = np.empty(n + 2 * m)
            out[:ins] = vec[:ins]
            out[ins:n + m] = slack_fill
            out[n + m:n + m + old_m] = vec[ins:ins + old_m]
            out[n + m + old_m:] = art_fill
            return out

        new_lb = np.zeros(k)
        new_ub = np.zeros(k)
        for t, s in enumerate(self.prob.senses[old_m:]):
            new_ub[t] = INF if s == "<" else 0.0
            new_lb[t] = -INF if s == ">" else 0.0
        self.lb = expand(self.lb, new_lb, 0.0)
        self.ub = expand(self.ub, new_ub, 0.0)
        self.x = expand(self.x, 0.0, 0.0)
        st = np.full(n + 2 * m, AT_LB, dtype=np.int8)
        st[:ins] = self.state[:ins]
        st[n + m:n + m + old_m] = self.state[ins:ins + old_m]
        for t, s in enumerate(self.prob.senses[old_m:]):
            st[ins + t] = AT_UB if s == ">" else AT_LB
        self.state = st
        self.art_sign = np.concatenate([self.art_sign, np.ones(k)])
        self.ntot = n + 2 * m
        # new slacks join the basis holding the row residual
        self.basis = np.concatenate([self.basis, np.arange(ins, ins + k)])
        self.state[self.basis] = BASIC
        self._refactor()

    def resolve(self) -> LpSolution:
        self._degenerate = 0
        self._bland = False
        status = self._dual()
        if status == LpStatus.OPTIMAL:
            status = self._primal(phase1=False)  # mop up any dual wobble
        return self._finish(status)

    def _finish(self, status) -> LpSolution:
        n, m = self.n, self.m
        c = self._cost_vec(phase1=False)
        y = c[self.basis] @ self.binv
        x = self.x[:n].copy()
        if status != LpStatus.OPTIMAL:
            return LpSolution(status=status, x=x if status == LpStatus.ITER_LIMIT else None,
                              y=None, iterations=self.iterations)
        obj = float(self.prob.c @ x)
        resid = self.prob.A @ x - self.prob.b
        feas = 0.0
        for i, s in enumerate(self.prob.senses):
            if s == "<":
                feas = max(feas, resid[i])
            elif s == ">":
                feas = max(feas, -resid[i])
            else:
                feas = max(feas, abs(resid[i]))
        feas = max(feas, float(np.max(self.prob.lb - x, initial=0.0)),
                   float(np.max(x - self.prob.ub, initial=0.0)))
        d = self._reduced_costs(c, y)[:n]
        # dual objective: y.b plus reduced-cost contributions of active bounds
        dual_obj = float(y @ self.prob.b)
        cs = 0.0
        for j in range(n):
            if self.state[j] == BASIC or self.state[j] == FREE_NB:
                continue
            bound = self.prob.lb[j] if self.state[j] == AT_LB else self.prob.ub[j]
            if np.isfinite(bound):
                dual_obj += d[j] * bound
                cs = max(cs, abs(d[j] * (x[j] - bound)))
        for i, s in enumerate(self.prob.senses):
            if s == "<" and y[i] > DUAL_TOL:
                cs = max(cs, abs(y[i] * resid[i]))
            if s == ">" and y[i] < -DUAL_TOL:
                cs = max(cs, abs(y[i] * resid[i]))
        return LpSolution(status=status, x=x, obj=obj, y=y.copy(),
                          iterations=self.iterations, feas_residual=float(feas),
                          cs_residual=float(cs), dual_obj=dual_obj)


def lp_solve(prob: LpProblem, max_iters: int | None = None) -> LpSolution:
    return RevisedSimplex(prob, max_iters=max_iters).solve()


def solve_with_scipy(prob: LpProblem) -> LpSolution:
    """External-solver adapter with the same contract (HiGHS via scipy)."""
    from scipy.optimize import linprog  # optional dependency

    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for row, s, rhs in zip(prob.A, prob.senses, prob.b):
        if s == "<":
            A_ub.append(row)
            b_ub.append(rhs)
        elif s == ">":
            A_ub.append(-row)
            b_ub.append(-rhs)
        else:
            A_eq.append(row)
            b_eq.append(rhs)
    bounds = [(l if np.isfinite(l) else None, u if np.isfinite(u) else None)
              for l, u in zip(prob.lb, prob.ub)]
    res = linprog(prob.c, A_ub=np.array(A_ub) if A_ub else None,
                  b_ub=np.array(b_ub) if b_ub else None,
                  A_eq=np.array(A_eq) if A_eq else None,
                  b_eq=np.array(b_eq) if b_eq else None,
                  bounds=bounds, method="highs")
    if res.status == 0:
        return LpSolution(status=LpStatus.OPTIMAL, x=res.x, obj=float(res.fun),
                          y=None, iterations=int(res.nit))
    if res.status == 2:
        return LpSolution(status=LpStatus.INFEASIBLE)
    if res.status == 3:
        return LpSolution(status=LpStatus.UNBOUNDED)
    raise LpNumericalError(f"external solver failure: {res.message}")


# ---------------------------------------------------------------------------
# exact simplex over Fractions (standard form, small problems)
# ---------------------------------------------------------------------------

def exact_standard_lp(c, A, b):
    """Exact min c.x s.t. A x = b, x >= 0 over Fractions; Bland's rule.

    Returns (status, x, obj).  Intended for small refinement problems (the
    cone-domination certificates); everything is O(rows * cols) per pivot in
    exact arithmetic.
    """
    m = len(A)
    n = len(A[0]) if m else len(c)
    A = [[Fraction(v) for v in row] for row in A]
    b = [Fraction(v) for v in b]
    c = [Fraction(v) for v in c]
    for i in range(m):
        if b[i] < 0:
            A[i] = [-v for v in A[i]]
            b[i] = -b[i]
    # tableau with artificial basis: columns [x | artificials]
    T = [A[i] + [Fraction(int(i == k)) for k in range(m)] + [b[i]] for i in range(m)]
    basis = list(range(n, n + m))

    def pivot(T, basis, row, col):
        piv = T[row][col]
        T[row] = [v / piv for v in T[row]]
        for i in range(len(T)):
            if i != row and T[i][col] != 0:
                f = T[i][col]
                T[i] = [a - f * r for a, r in zip(T[i], T[row])]
        basis[row] = col

    def run(T, basis, cost, ncols):
        while True:
            in_basis = set(basis)
            for j in range(ncols):  # Bland: first improving column
                if j in in_basis:
                    continue
                dj = cost[j] - sum(cost[basis[i]] * T[i][j] for i in range(m))
                if dj < 0:
                    col = j
                    break
            else:
                return True
            ratios = [(T[i][-1] / T[i][col], basis[i], i)
                      for i in range(m) if T[i][col] > 0]
            if not ratios:
                return False  # unbounded
            _, _, row = min(ratios, key=lambda t: (t[0], t[1]))
            pivot(T, basis, row, col)

    ncols = n + m
    cost1 = [Fraction(0)] * n + [Fraction(1)] * m
    if not run(T, basis, cost1, ncols):
        raise LpNumericalError("phase-1 unbounded (cannot happen)")
    p1 = sum(cost1[basis[i]] * T[i][-1] for i in range(m))
    if p1 != 0:
        return LpStatus.INFEASIBLE, None, None
    # force artificials out of the basis where possible
    for i in range(m):
        if basis[i] >= n:
            for j in range(n):
                if T[i][j] != 0:
                    pivot(T, basis, i, j)
                    break
    cost2 = list(c) + [Fraction(0)] * m
    if not run(T, basis, cost2, ncols):
        return LpStatus.UNBOUNDED, None, None
    x = [Fraction(0)] * n
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = T[i][-1]
    obj = sum(ci * xi for ci, xi in zip(c, x))
    return LpStatus.OPTIMAL, x, obj


# ---------------------------------------------------------------------------
# symmetric eigensolver
# ---------------------------------------------------------------------------

def jacobi_eigen(M, tol: float = 1e-12, max_sweeps: int = 60):
    """Cyclic Jacobi rotations; returns (eigenvalues ascending, V columns).

    Terminates when the off-diagonal Frobenius norm drops below
    tol * ||M||_F.  V is orthonormal with M @ V == V @ diag(w).
    """
    A = np.array(M, dtype=float)
    A = 0.5 * (A + A.T)
    n = A.shape[0]
    V = np.eye(n)
    norm = np.linalg.norm(A)
    if norm == 0.0 or n == 1:
        w = np.diag(A).copy()
        order = np.argsort(w)
        return w[order], V[:, order]
    for _ in range(max_sweeps):
        strict = A - np.diag(np.diag(A))
        off = float(np.linalg.norm(strict))
        if off <= tol * norm:
            w = np.diag(A).copy()
            order = np.argsort(w)
            return w[order], V[:, order]
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                # hypot keeps theta^2 from overflowing for tiny pivots
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                cth = 1.0 / math.sqrt(t * t + 1.0)
                sth = t * cth
                rot_p = A[:, p].copy()
                rot_q = A[:, q].copy()
                A[:, p] = cth * rot_p - sth * rot_q
                A[:, q] = sth * rot_p + cth * rot_q
                rot_p = A[p, :].copy()
                rot_q = A[q, :].copy()
                A[p, :] = cth * rot_p - sth * rot_q
                A[q, :] = sth * rot_p + cth * rot_q
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = cth * vp - sth * vq
                V[:, q] = sth * vp + cth * vq
    raise EigenError(f"Jacobi did not reach tol={tol} within {max_sweeps} sweeps")


def sym_eigen(M, method: str = "auto"):
    """Symmetric eigendecomposition; LAPACK above size 32, Jacobi below.

    Same output contract as :func:`jacobi_eigen` (ascending eigenvalues,
    orthonormal columns).
    """
    M = np.asarray(M, dtype=float)
    if method == "jacobi" or (method == "auto" and M.shape[0] <= 32):
        return jacobi_eigen(M)
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    return w, V


def smallest_eigenvalue(M) -> float:
    M = np.asarray(M, dtype=float)
    return float(np.linalg.eigvalsh(0.5 * (M + M.T))[0])
