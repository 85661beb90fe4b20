"""Boros-Hammer cut separation at a lifted relaxation point.

The separator minimizes the BH objective over a bounded integer box with an
L1 sparsity budget (depth-first branch and bound, anytime under a time
limit), a greedy eigenvalue-based index refinement shrinks the working set,
and the sampling loop repeats randomized subset separation between
re-solves of the relaxation, pooling the cuts it finds.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .atlas import canonicalize
from .eigencg import bh_ineq
from .ineq import LiftedPoint, LinearIneq
from .numerics import EigenError


@dataclass
class SeparatorConfig:
    L: int = -2
    U: int = 2
    u_bar: int = 2            # per-coordinate sparsity cap
    U_hat: int = 10           # total sparsity budget sum |w_i|
    viol_tol: float = -0.01   # keep solutions with objective below this
    time_limit: float | None = 10.0
    refine_fraction: float = 0.15
    select_fraction: float = 0.10
    samples_per_round: int = 100
    max_rounds: int = 30
    stall_rounds: int = 2
    refine_size: int | None = None  # absolute overrides for small n
    select_size: int | None = None

    def __post_init__(self):
        if not (self.L <= 0 <= self.U):
            raise ValueError("coordinate bounds must satisfy L <= 0 <= U")
        if self.viol_tol >= 0:
            raise ValueError("violation tolerance must be negative")
        for f in (self.refine_fraction, self.select_fraction):
            if not 0 < f <= 1:
                raise ValueError("fractions must lie in (0, 1]")

    def refine_target(self, n: int) -> int:
        if self.refine_size is not None:
            return min(self.refine_size, n)
        return max(1, int(math.floor(self.refine_fraction * n)))

    def select_target(self, n: int) -> int:
        if self.select_size is not None:
            return min(self.select_size, n)
        return max(1, int(math.floor(self.select_fraction * n)))


def bh_objective(w0: int, w, p: LiftedPoint) -> float:
    """w0(w0-1) + sum w_i(w_i+2w0-1) x_i + sum 2 w_i w_j X_ij at the point."""
    w = np.asarray(w, dtype=float)
    if w.size != p.n:
        raise ValueError("w length must match the point dimension")
    x, X = p.x, p.X
    lin = float(np.sum(w * (w + 2 * w0 - 1) * x))
    X0 = X - np.diag(np.diag(X))
    cross = float(w @ X0 @ w)  # = 2 sum_{i<j} w_i w_j X_ij
    return w0 * (w0 - 1) + lin + cross


@dataclass
class SeparationResult:
    cuts: list                 # (w0, w tuple, v_cut), v_cut < viol_tol
    complete: bool             # False when the time limit truncated the search
    nodes: int = 0

    def __iter__(self):
        return iter(self.cuts)

    def __len__(self):
        return len(self.cuts)


def bh_separate(p: LiftedPoint, indices, cfg: SeparatorConfig) -> SeparationResult:
    """Collect every (w0, w) in the box with objective below the tolerance.

    Depth-first over the coordinates with an interval-relaxation lower
    bound; anytime under cfg.time_limit (partial pool, complete=False).
    """
    idx = list(indices)
    if not idx:
        raise ValueError("empty index set")
    k = len(idx)
    sub = p.restrict(idx)
    x = sub.x
    X0 = sub.X - np.diag(np.diag(sub.X))
    lo = max(cfg.L, -cfg.u_bar)
    hi = min(cfg.U, cfg.u_bar)
    # w0 range [kL, kU+1]: for symmetric bounds the quadratic in w0 is
    # increasing in |w0| beyond it for every x in the box, so no violated
    # solution is lost; verified against exhaustive search in the tests.
    w0_lo, w0_hi = cfg.L * k, cfg.U * k + 1
    omega = max(abs(w0_lo), abs(w0_hi))
    u_abs = max(abs(lo), abs(hi))
    # per-index pessimistic coupling: |w_j| * (2*omega*x_j + 2*u*sum |X_jl|)
    couple = 2.0 * omega * x + 2.0 * u_abs * np.abs(X0).sum(axis=1)
    vals = [v for v in range(lo, hi + 1)]
    vals.sort(key=lambda v: (abs(v), v))  # sparse assignments first

    deadline = None if cfg.time_limit is None else time.monotonic() + cfg.time_limit
    found = []
    state = {"nodes": 0, "complete": True}
    w = [0] * k

    def unassigned_bound(t, budget):
        total = 0.0
        for j in range(t, k):
            best = 0.0
            cmax = couple[j]
            for v in range(max(lo, -budget), min(hi, budget) + 1):
                cand = v * v * x[j] - v * x[j] - abs(v) * cmax
                if cand < best:
                    best = cand
            total += best
        return total

    def w0_pure_min(s):
        # min over the w0 range of w0^2 + w0 (2 s - 1)
        star = 0.5 - s
        best = math.inf
        for c in (math.floor(star), math.ceil(star)):
            c = min(max(c, w0_lo), w0_hi)
            best = min(best, c * c + c * (2 * s - 1))
        return best

    def dfs(t, s, lin, cross, budget):
        if state["nodes"] % 4096 == 0 and deadline is not None:
            if time.monotonic() > deadline:
                state["complete"] = False
                return
        state["nodes"] += 1
        if t == k:
            # violated w0 form a window around the vertex of the convex
            # quadratic w0^2 + w0 (2s - 1) + (lin + cross)
            const = lin + cross
            b = 2.0 * s - 1.0
            disc = b * b - 4.0 * (const - cfg.viol_tol)
            if disc <= 0.0:
                return
            root = math.sqrt(disc)
            lo_w = max(w0_lo, math.ceil((-b - root) / 2.0 - 1e-12))
            hi_w = min(w0_hi, math.floor((-b + root) / 2.0 + 1e-12))
            for w0 in range(int(lo_w), int(hi_w) + 1):
                f = w0 * (w0 - 1) + 2 * w0 * s + const
                if f < cfg.viol_tol:
                    found.append((w0, tuple(w), float(f)))
            return
        # lower bound: assigned part + separable minima + best w0 quadratic
        lb = lin + cross + w0_pure_min(s) + unassigned_bound(t, budget)
        if lb >= cfg.viol_tol:
            return
        for v in vals:
            if abs(v) > budget:
                continue
            w[t] = v
            dcross = sum(2.0 * w[i] * v * sub.X[i, t] for i in range(t))
            dfs(t + 1, s + v * x[t], lin + v * (v - 1) * x[t],
                cross + dcross, budget - abs(v))
            if not state["complete"]:
                w[t] = 0
                return
        w[t] = 0

    dfs(0, 0.0, 0.0, 0.0, cfg.U_hat)
    found.sort(key=lambda rec: rec[2])
    return SeparationResult(cuts=found, complete=state["complete"], nodes=state["nodes"])


def bh_separate_exhaustive(p: LiftedPoint, indices, cfg: SeparatorConfig) -> SeparationResult:
    """Vectorized full-box scan; the independent oracle for the search."""
    idx = list(indices)
    k = len(idx)
    sub = p.restrict(idx)
    x = sub.x
    X0 = sub.X - np.diag(np.diag(sub.X))
    lo = max(cfg.L, -cfg.u_bar)
    hi = min(cfg.U, cfg.u_bar)
    grids = np.meshgrid(*[np.arange(lo, hi + 1)] * k, indexing="ij")
    W = np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)
    W = W[np.abs(W).sum(axis=1) <= cfg.U_hat]
    Wf = W.astype(float)
    s = Wf @ x
    lin = ((Wf * Wf - Wf) * x).sum(axis=1)
    cross = ((Wf @ X0) * Wf).sum(axis=1)
    found = []
    for w0 in range(cfg.L * k, cfg.U * k + 2):
        f = w0 * (w0 - 1) + 2 * w0 * s + lin + cross
        for pos in np.nonzero(f < cfg.viol_tol)[0]:
            found.append((w0, tuple(int(v) for v in W[pos]), float(f[pos])))
    found.sort(key=lambda rec: rec[2])
    return SeparationResult(cuts=found, complete=True, nodes=len(W))


# ---------------------------------------------------------------------------
# greedy eigenvalue refinement
# ---------------------------------------------------------------------------

def greedy_refine(p: LiftedPoint, target_size: int) -> list:
    """Shrink the index set by repeatedly dropping the index whose removal
    leaves the smallest minimum eigenvalue of the moment submatrix.

    Ties break toward the lowest original index, so the output is
    deterministic and permutation-equivariant.
    """
    if target_size > p.n:
        raise ValueError("target size exceeds the point dimension")
    M = p.moment_matrix()
    R = list(range(p.n))
    while len(R) > target_size:
        best_j, best_val = None, math.inf
        for j in R:
            keep = [0] + [i + 1 for i in R if i != j]
            sub = M[np.ix_(keep, keep)]
            try:
                val = float(np.linalg.eigvalsh(sub)[0])
            except np.linalg.LinAlgError as exc:
                raise EigenError(f"eigensolver failure on subset {keep}") from exc
            if val < best_val - 1e-15:
                best_j, best_val = j, val
        R.remove(best_j)
    return R


# ---------------------------------------------------------------------------
# sampling loop (randomized subset separation between re-solves)
# ---------------------------------------------------------------------------

@dataclass
class CutRecord:
    ineq: LinearIneq
    w0: int
    w: tuple
    indices: tuple
    v_cut: float
    round: int
    sample: int


@dataclass
class SamplingResult:
    records: list
    rounds_run: int
    seed: int
    aborted: str | None = None

    @property
    def cuts(self):
        return [r.ineq for r in self.records]


def _separate_sample(args):
    x, X, idx, cfg = args
    res = bh_separate(LiftedPoint(x=x, X=X), idx, cfg)
    return res.cuts


def sampling_loop(provider, cfg: SeparatorConfig, seed: int = 0,
                  threads: int | None = None) -> SamplingResult:
    """Refine, sample index subsets, separate, re-solve; repeat to a stall.

    ``provider(pool)`` re-solves the relaxation with the cumulative cut pool
    and returns the new lifted point; the loop stops after
    ``cfg.max_rounds`` rounds or once ``cfg.stall_rounds`` consecutive
    rounds add nothing new.  Cuts are deduplicated by canonical form; the
    RNG seed is recorded in the result.
    """
    import random as _random

    if threads is None:
        threads = int(os.environ.get("CUTFORGE_THREADS", "1"))
    rng = _random.Random(seed)
    pool: dict = {}
    records: list = []

    def call_provider():
        return provider([r.ineq for r in records])

    try:
        p = call_provider()
    except Exception as exc:  # noqa: BLE001 - callback failures abort with pool kept
        return SamplingResult(records=records, rounds_run=0, seed=seed, aborted=str(exc))

    stall = 0
    rounds = 0
    for rnd in range(1, cfg.max_rounds + 1):
        rounds = rnd
        R = greedy_refine(p, cfg.refine_target(p.n))
        ksel = min(cfg.select_target(p.n), len(R))
        tasks = []
        for snum in range(cfg.samples_per_round):
            idx = tuple(sorted(rng.sample(R, ksel)))
            tasks.append((snum, idx))
        added = 0
        if threads > 1:
            with ProcessPoolExecutor(max_workers=threads) as ex:
                all_cuts = list(ex.map(_separate_sample,
                                       [(p.x, p.X, idx, cfg) for _, idx in tasks]))
        else:
            all_cuts = [_separate_sample((p.x, p.X, idx, cfg)) for _, idx in tasks]
        for (snum, idx), cuts in zip(tasks, all_cuts):
            for w0, wvec, v_cut in cuts:
                lifted = canonicalize(bh_ineq(w0, wvec).lifted_to(p.n, idx))
                key = (lifted.gamma, lifted.alpha, lifted.beta)
                if key in pool:
                    continue
                pool[key] = True
                records.append(CutRecord(ineq=lifted, w0=w0, w=wvec, indices=idx,
                                         v_cut=v_cut, round=rnd, sample=snum))
                added += 1
        stall = stall + 1 if added == 0 else 0
        if stall >= cfg.stall_rounds:
            break
        try:
            p = call_provider()
        except Exception as exc:  # noqa: BLE001
            return SamplingResult(records=records, rounds_run=rounds, seed=seed,
                                  aborted=str(exc))
    return SamplingResult(records=records, rounds_run=rounds, seed=seed)


def write_cut_pool(result: SamplingResult, path: str) -> None:
    """Text export: one inequality per line with provenance in a comment."""
    with open(path, "w") as fh:
        fh.write(f"# seed={result.seed} rounds={result.rounds_run}"
                 f" cuts={len(result.records)}\n")
        for r in result.records:
            fh.write(f"{r.ineq} # round={r.round} sample={r.sample}"
                     f" vcut={r.v_cut:.6f} indices={','.join(str(i) for i in r.indices)}\n")
