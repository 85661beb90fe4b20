"""Lifted LP relaxations and the cutting-plane pipelines.

The lifted model has variables x (n of them) and the symmetric matrix X
(diagonal included, upper triangle flattened); the semidefiniteness of the
moment matrix is enforced by an outer-approximation loop that repeatedly
adds the quadratic-form cut of every sufficiently negative eigenvector.
The pipeline stages (i)-(ix) compose McCormick rows, triangle rows (all or
violated-only), facet-atlas lookup passes, and the randomized BH separator
on top, re-solving the LP warm after every batch of cuts.
"""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .atlas import FacetAtlas, atlas_separate, enumerate_facets
from .eigencg import eigvec_cuts
from .ineq import (
    LiftedPoint,
    LinearIneq,
    QcqpInstance,
    evaluate,
    iter_pairs,
    mccormick_ineqs,
    n_pairs,
    pair_index,
    triangle_ineqs,
)
from .numerics import INF, LpNumericalError, LpProblem, LpStatus, RevisedSimplex
from .separate import SeparatorConfig, sampling_loop

SELECTORS = ("i", "ii", "iii", "iv", "v", "vi", "vii", "viii", "ix")


@dataclass
class RelaxConfig:
    use_mccormick: bool = True
    triangle_mode: str = "NONE"          # NONE | ALL | VIOLATED
    sdp_mode: str = "NONE"               # NONE | EIGEN_CUT_LOOP
    atlas_passes: list = field(default_factory=list)  # (k, tol, cap)
    bh_mode: SeparatorConfig | None = None
    bqp4_cap: int = 50_000
    bqp5_combo_cap: int = 100_000
    tol_with_sdp: float = 1e-3
    tol_without_sdp: float = 1e-2
    presolve: bool = False
    eig_tol: float = 1e-6
    max_sdp_iters: int = 500
    triangle_rounds_cap: int = 20

    def __post_init__(self):
        if self.triangle_mode not in ("NONE", "ALL", "VIOLATED"):
            raise ValueError("bad triangle mode")
        if self.sdp_mode not in ("NONE", "EIGEN_CUT_LOOP"):
            raise ValueError("bad sdp mode")
        if self.bqp4_cap <= 0 or self.bqp5_combo_cap <= 0:
            raise ValueError("caps must be positive")
        if self.tol_with_sdp <= 0 or self.tol_without_sdp <= 0:
            raise ValueError("tolerances must be positive")


class VarMap:
    """Column layout: x_i -> i, X_ii -> n+i, X_ij (i<j) -> 2n + pair index."""

    def __init__(self, n: int):
        self.n = n
        self.ncols = 2 * n + n_pairs(n)

    def x(self, i):
        return i

    def diag(self, i):
        return self.n + i

    def pair(self, i, j):
        if i > j:
            i, j = j, i
        return 2 * self.n + pair_index(i, j, self.n)


@dataclass
class LiftedModel:
    problem: LpProblem
    varmap: VarMap
    inst: QcqpInstance
    dropped_pairs: list = field(default_factory=list)  # presolved-away rows
    solver: RevisedSimplex | None = None
    solves: int = 0

    def solve(self):
        if self.solver is None:
            self.solver = RevisedSimplex(self.problem)
            sol = self.solver.solve()
        else:
            sol = self.solver.resolve()
        self.solves += 1
        if sol.status == LpStatus.ITER_LIMIT:
            raise LpNumericalError("simplex iteration cap in relaxation solve")
        if sol.status != LpStatus.OPTIMAL:
            raise LpNumericalError(f"relaxation LP ended {sol.status}")
        return sol

    def point(self, sol) -> LiftedPoint:
        vm, n = self.varmap, self.varmap.n
        x = np.clip(sol.x[:n], 0.0, 1.0)
        X = np.empty((n, n))
        for i in range(n):
            X[i, i] = sol.x[vm.diag(i)]
        for i, j in iter_pairs(n):
            X[i, j] = X[j, i] = sol.x[vm.pair(i, j)]
        for i, j in self.dropped_pairs:
            lo = max(0.0, x[i] + x[j] - 1.0)
            hi = min(x[i], x[j])
            X[i, j] = X[j, i] = min(max(X[i, j], lo), hi)
        return LiftedPoint(x=x, X=X)

    def ineq_row(self, q: LinearIneq):
        """LP row for a >= 0 inequality: non-constant part >= -gamma."""
        vm = self.varmap
        row = np.zeros(vm.ncols)
        for i, a in enumerate(q.alpha):
            if a:
                row[vm.x(i)] = float(a)
        for i, d in enumerate(q.diag):
            if d:
                row[vm.diag(i)] = float(d)
        for (i, j), b in zip(iter_pairs(q.n), q.beta):
            if b:
                row[vm.pair(i, j)] = float(b)
        return row, ">", -float(q.gamma)

    def add_ineqs(self, ineqs) -> int:
        rows, senses, rhs = [], [], []
        for q in ineqs:
            r, s, b = self.ineq_row(q)
            rows.append(r)
            senses.append(s)
            rhs.append(b)
        if not rows:
            return 0
        if self.solver is None:
            self.problem.add_rows(np.array(rows), senses, np.array(rhs))
        else:
            self.solver.add_rows(np.array(rows), senses, np.array(rhs))
        return len(rows)

    def add_raw_rows(self, rows, senses, rhs) -> int:
        if not len(rows):
            return 0
        if self.solver is None:
            self.problem.add_rows(np.asarray(rows), senses, np.asarray(rhs))
        else:
            self.solver.add_rows(np.asarray(rows), senses, np.asarray(rhs))
        return len(rows)


def build_lifted_model(inst: QcqpInstance, cfg: RelaxConfig) -> LiftedModel:
    """Variables x and X (diagonal included); McCormick and diagonal rows.

    With ``cfg.presolve`` (static objective-only models), McCormick rows
    that can never bind at a minimum are omitted: the objective sign of
    each X_ij decides which side of its envelope is active, and pairs with
    zero objective weight need no rows at all (their value is repaired into
    the envelope when the point is extracted).  The variable count is
    unchanged.
    """
    n = inst.n
    vm = VarMap(n)
    c = np.zeros(vm.ncols)
    for i in range(n):
        c[vm.x(i)] = inst.c0[i]
        c[vm.diag(i)] = inst.Q0[i, i]
    for i, j in iter_pairs(n):
        c[vm.pair(i, j)] = 2.0 * inst.Q0[i, j]
    lb = np.zeros(vm.ncols)
    ub = np.ones(vm.ncols)
    rows, senses, rhs = [], [], []

    def add(indices_values, sense, b):
        row = np.zeros(vm.ncols)
        for idx, v in indices_values:
            row[idx] += v
        rows.append(row)
        senses.append(sense)
        rhs.append(b)

    for Qi, ci, di, sense in inst.constraints:
        row = np.zeros(vm.ncols)
        for i in range(n):
            row[vm.x(i)] += ci[i]
            if Qi[i, i]:
                row[vm.diag(i)] += Qi[i, i]
        for i, j in iter_pairs(n):
            if Qi[i, j]:
                row[vm.pair(i, j)] += 2.0 * Qi[i, j]
        rows.append(row)
        senses.append("<" if sense == "<=" else "=")
        rhs.append(-di)

    for i in range(n):
        add([(vm.diag(i), 1.0), (vm.x(i), -1.0)], "<", 0.0)   # X_ii <= x_i
        add([(vm.x(i), 2.0), (vm.diag(i), -1.0)], "<", 1.0)   # X_ii >= 2x_i - 1

    dropped = []
    if cfg.use_mccormick:
        if cfg.presolve:
            if inst_touches_offdiag(inst):
                raise ValueError("presolve requires constraints without X_ij terms")
            for i, j in iter_pairs(n):
                w = c[vm.pair(i, j)]
                if w > 0:
                    # lower envelope active: X >= 0 is the variable bound
                    add([(vm.pair(i, j), 1.0), (vm.x(i), -1.0), (vm.x(j), -1.0)],
                        ">", -1.0)
                elif w < 0:
                    add([(vm.pair(i, j), 1.0), (vm.x(i), -1.0)], "<", 0.0)
                    add([(vm.pair(i, j), 1.0), (vm.x(j), -1.0)], "<", 0.0)
                else:
                    dropped.append((i, j))
        else:
            for i, j in iter_pairs(n):
                add([(vm.pair(i, j), 1.0)], ">", 0.0)
                add([(vm.pair(i, j), 1.0), (vm.x(i), -1.0)], "<", 0.0)
                add([(vm.pair(i, j), 1.0), (vm.x(j), -1.0)], "<", 0.0)
                add([(vm.pair(i, j), 1.0), (vm.x(i), -1.0), (vm.x(j), -1.0)],
                    ">", -1.0)
    if cfg.triangle_mode == "ALL":
        model = LiftedModel(problem=LpProblem(c=c, A=np.array(rows), senses=senses,
                                              b=np.array(rhs), lb=lb, ub=ub),
                            varmap=vm, inst=inst, dropped_pairs=dropped)
        model.add_ineqs(triangle_ineqs(n))
        return model
    A = np.array(rows) if rows else np.zeros((0, vm.ncols))
    prob = LpProblem(c=c, A=A, senses=senses, b=np.array(rhs), lb=lb, ub=ub)
    return LiftedModel(problem=prob, varmap=vm, inst=inst, dropped_pairs=dropped)


def inst_touches_offdiag(inst: QcqpInstance) -> bool:
    for Qi, _, _, _ in inst.constraints:
        off = Qi - np.diag(np.diag(Qi))
        if np.any(off != 0.0):
            return True
    return False


# ---------------------------------------------------------------------------
# eigen-cut outer approximation of the moment-matrix PSD constraint
# ---------------------------------------------------------------------------

@dataclass
class SdpLoopResult:
    point: LiftedPoint
    bound: float
    converged: bool
    iterations: int
    trace: list                 # (iteration, bound, min_eig, cuts_added)


def sdp_loop(model: LiftedModel, max_iters: int = 500,
             eig_tol: float = 1e-6) -> SdpLoopResult:
    """Alternate LP solves with eigenvector cuts until the moment matrix is
    PSD to tolerance; the LP bound is non-decreasing along the way."""
    sol = model.solve()
    trace = []
    point = model.point(sol)
    vm = model.varmap
    for it in range(max_iters):
        M = point.moment_matrix()
        vals, vecs = np.linalg.eigh(M)
        min_eig = float(vals[0])
        if min_eig >= -eig_tol:
            trace.append((it, sol.obj, min_eig, 0))
            return SdpLoopResult(point=point, bound=sol.obj, converged=True,
                                 iterations=it, trace=trace)
        rows, senses, rhs = [], [], []
        added = 0
        for k in range(vals.size):
            if vals[k] >= -eig_tol:
                break
            v0 = float(vecs[0, k])
            v = vecs[1:, k]
            row = np.zeros(vm.ncols)
            row[: vm.n] = 2.0 * v0 * v
            for i in range(vm.n):
                row[vm.diag(i)] = v[i] * v[i]
            for i, j in iter_pairs(vm.n):
                row[vm.pair(i, j)] = 2.0 * v[i] * v[j]
            rows.append(row)
            senses.append(">")
            rhs.append(-v0 * v0)
            added += 1
        trace.append((it, sol.obj, min_eig, added))
        prev = sol.obj
        model.add_raw_rows(rows, senses, rhs)
        sol = model.solve()
        if sol.obj < prev - 1e-6 * max(1.0, abs(prev)):
            raise LpNumericalError(
                f"bound regressed in eigen-cut loop: {prev} -> {sol.obj}")
        point = model.point(sol)
    M = point.moment_matrix()
    min_eig = float(np.linalg.eigvalsh(M)[0])
    trace.append((max_iters, sol.obj, min_eig, 0))
    return SdpLoopResult(point=point, bound=sol.obj, converged=min_eig >= -eig_tol,
                         iterations=max_iters, trace=trace)


# ---------------------------------------------------------------------------
# pipeline driver
# ---------------------------------------------------------------------------

_ATLAS_CACHE: dict = {}


def cached_atlas(k: int) -> FacetAtlas:
    if k not in _ATLAS_CACHE:
        _ATLAS_CACHE[k] = enumerate_facets(k)
    return _ATLAS_CACHE[k]


@dataclass
class PipelineResult:
    selector: str
    bound: float
    stage_bounds: dict
    cuts_added: dict
    trace: list                 # (stage, cuts_added, bound, seconds)
    seed: int
    converged_sdp: bool = True
    bh_pool_size: int = 0

    def gap_against(self, ub: float) -> float:
        return gap_report(ub, self.bound)


def gap_report(ub: float, lb: float) -> float:
    """|UB - LB| / |LB| * 100."""
    if lb == 0:
        raise ZeroDivisionError("gap undefined for a zero lower bound")
    return abs(ub - lb) / abs(lb) * 100.0


def run_pipeline(inst: QcqpInstance, selector: str, cfg: RelaxConfig | None = None,
                 atlases: dict | None = None, seed: int = 0,
                 bh_cfg: SeparatorConfig | None = None) -> PipelineResult:
    """Execute one of the relaxation pipelines (i)-(ix) and report the bound.

    (i)   McCormick rows only
    (ii)  (i) + every triangle row
    (iii) (i) + the eigen-cut PSD loop
    (iv)  (ii) + the eigen-cut PSD loop
    (v)   (iii) + violated triangles (iterated) + one size-4 atlas pass
    (vi)  (v) + one size-5 atlas pass
    (vii) no PSD: McCormick + violated triangles + capped size-4 atlas pass
    (viii)(vii) + subsampled size-5 atlas pass
    (ix)  (viii) + the BH sampling loop
    """
    if selector not in SELECTORS:
        raise ValueError(f"unknown relaxation selector {selector!r}")
    cfg = cfg or RelaxConfig()
    rng = random.Random(seed)
    with_sdp = selector in ("iii", "iv", "v", "vi")
    all_triangles = selector in ("ii", "iv")
    base = replace(cfg, triangle_mode="ALL" if all_triangles else "NONE",
                   sdp_mode="EIGEN_CUT_LOOP" if with_sdp else "NONE")
    t0 = time.time()
    model = build_lifted_model(inst, base)
    trace = []
    stage_bounds = {}
    cuts_added = {"mccormick": 4 * n_pairs(inst.n) if cfg.use_mccormick else 0,
                  "triangle": 4 * math.comb(inst.n, 3) if all_triangles else 0,
                  "eigen": 0, "bqp4": 0, "bqp5": 0, "bh": 0}
    converged = True

    def resolve_stage(stage):
        nonlocal converged
        if with_sdp:
            res = sdp_loop(model, max_iters=cfg.max_sdp_iters, eig_tol=cfg.eig_tol)
            converged = converged and res.converged
            cuts_added["eigen"] += sum(t[3] for t in res.trace)
            bound, point = res.bound, res.point
        else:
            sol = model.solve()
            bound, point = sol.obj, model.point(sol)
        stage_bounds[stage] = bound
        trace.append((stage, 0, bound, round(time.time() - t0, 3)))
        return bound, point

    bound, point = resolve_stage("base")

    tol_default = cfg.tol_with_sdp if with_sdp else cfg.tol_without_sdp

    # violated triangle rounds (pipelines v, vi, vii, viii, ix)
    if selector in ("v", "vi", "vii", "viii", "ix"):
        tris = triangle_ineqs(inst.n) if inst.n >= 3 else []
        for _ in range(cfg.triangle_rounds_cap):
            violated = [(evaluate(q, point), q) for q in tris]
            violated = [(v, q) for v, q in violated if v < -tol_default]
            if not violated:
                break
            violated.sort(key=lambda t: t[0])
            added = model.add_ineqs([q for _, q in violated])
            cuts_added["triangle"] += added
            bound, point = resolve_stage("triangle")

    # atlas lookup passes: selector defaults, overridable via cfg.atlas_passes
    passes = list(cfg.atlas_passes)
    if not passes:
        if selector in ("v", "vi", "vii", "viii", "ix"):
            passes.append((4, tol_default,
                           cfg.bqp4_cap if not with_sdp else 10**9))
        if selector in ("vi", "viii", "ix"):
            passes.append((5, tol_default, 10**9))
    elif selector in ("i", "ii", "iii", "iv"):
        passes = []
    for k, tol, cap in passes:
        if inst.n < k:
            continue
        atlas_k = (atlases or {}).get(k) or cached_atlas(k)
        subsets = None
        if k == 5 and not with_sdp and math.comb(inst.n, 5) > cfg.bqp5_combo_cap:
            universe = list(itertools.combinations(range(inst.n), 5))
            subsets = rng.sample(universe, cfg.bqp5_combo_cap)
        hits = atlas_separate(point, atlas_k, tol=tol, cap=cap, subsets=subsets)
        key = f"bqp{k}"
        cuts_added[key] = cuts_added.get(key, 0) + model.add_ineqs([q for q, _ in hits])
        bound, point = resolve_stage(key)

    bh_pool_size = 0
    if selector == "ix":
        scfg = bh_cfg or cfg.bh_mode or SeparatorConfig(time_limit=30.0)

        def provider(pool_ineqs):
            nonlocal bound, point
            new = pool_ineqs[provider.absorbed:]
            provider.absorbed = len(pool_ineqs)
            if new:
                cuts_added["bh"] += model.add_ineqs(new)
            sol = model.solve()
            bound, point = sol.obj, model.point(sol)
            return point

        provider.absorbed = 0
        result = sampling_loop(provider, scfg, seed=seed)
        bh_pool_size = len(result.records)
        if result.records:
            provider(result.cuts)
        stage_bounds["bh"] = bound
        trace.append(("bh", bh_pool_size, bound, round(time.time() - t0, 3)))

    return PipelineResult(selector=selector, bound=bound, stage_bounds=stage_bounds,
                          cuts_added=cuts_added, trace=trace, seed=seed,
                          converged_sdp=converged, bh_pool_size=bh_pool_size)
