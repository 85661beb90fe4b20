import math
import random

import numpy as np
import pytest

from cutforge.atlas import canonicalize
from cutforge.eigencg import bh_ineq
from cutforge.ineq import LiftedPoint, evaluate, is_valid_bqp, triangle_ineqs
from cutforge.separate import (
    SeparatorConfig,
    bh_objective,
    bh_separate,
    bh_separate_exhaustive,
    greedy_refine,
    sampling_loop,
    write_cut_pool,
)

CFG = SeparatorConfig(time_limit=None)


def random_point(rng, n, psd=False):
    x = rng.uniform(0.05, 0.95, size=n)
    if psd:
        return LiftedPoint.rank_one(x)
    A = rng.normal(size=(n, n)) * 0.1
    X = np.outer(x, x) + 0.5 * (A + A.T)
    X = np.clip(X, 0.0, 1.0)
    return LiftedPoint(x=x, X=X)


def test_bh_objective_basics():
    p = LiftedPoint.rank_one(np.array([0.3, 0.7]))
    assert bh_objective(0, [0, 0], p) == 0.0
    assert bh_objective(1, [0, 0], p) == 0.0
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = rng.integers(2, 6)
        bits = rng.integers(0, 2, size=n).astype(float)
        p = LiftedPoint.rank_one(bits)
        w0 = int(rng.integers(-3, 4))
        w = rng.integers(-3, 4, size=n)
        s = float(w @ bits)
        # identity at rank-1 binary points: (w.x + w0 - 1)(w.x + w0)
        assert bh_objective(w0, w, p) == pytest.approx((s + w0 - 1) * (s + w0))
        assert bh_objective(w0, w, p) >= 0.0


def test_bh_objective_matches_inequality_lhs():
    rng = np.random.default_rng(5)
    for _ in range(30):
        n = int(rng.integers(2, 6))
        p = random_point(rng, n)
        w0 = int(rng.integers(-2, 3))
        w = [int(v) for v in rng.integers(-2, 3, size=n)]
        assert bh_objective(w0, w, p) == pytest.approx(
            evaluate(bh_ineq(w0, w), p), abs=1e-9)


def test_separate_rank_one_empty():
    rng = np.random.default_rng(1)
    p = random_point(rng, 5, psd=True)
    res = bh_separate(p, range(5), CFG)
    assert res.complete and len(res) == 0


def test_separate_finds_triangle_violation():
    # X12 = 0 but X13 = X23 = 0.5 at x = 1/2: triangle slack is -0.5
    x = np.array([0.5, 0.5, 0.5])
    X = np.array([[0.25, 0.0, 0.5], [0.0, 0.25, 0.5], [0.5, 0.5, 0.25]])
    p = LiftedPoint(x=x, X=X)
    res = bh_separate(p, [0, 1, 2], CFG)
    assert res.cuts
    hits = {(w0, w) for w0, w, _ in res.cuts}
    assert (0, (1, 1, -1)) in hits
    v = dict(((w0, w), v) for w0, w, v in res.cuts)[(0, (1, 1, -1))]
    assert v == pytest.approx(-1.0)  # objective is twice the triangle slack


def test_budget_zero_yields_nothing():
    rng = np.random.default_rng(2)
    p = random_point(rng, 4)
    res = bh_separate(p, range(4), SeparatorConfig(U_hat=0, time_limit=None))
    assert len(res) == 0


def test_separate_oracle_equivalence():
    rng = np.random.default_rng(7)
    for trial in range(12):
        k = int(rng.integers(3, 7))
        p = random_point(rng, k)
        got = bh_separate(p, range(k), CFG)
        ref = bh_separate_exhaustive(p, range(k), CFG)
        assert got.complete
        assert {(w0, w) for w0, w, _ in got.cuts} == {(w0, w) for w0, w, _ in ref.cuts}
        if ref.cuts:
            assert got.cuts[0][2] == pytest.approx(ref.cuts[0][2], abs=1e-12)


def test_emitted_cuts_are_valid_and_consistent():
    rng = np.random.default_rng(9)
    p = random_point(rng, 6)
    res = bh_separate(p, range(6), CFG)
    for w0, w, v_cut in res.cuts[:25]:
        q = bh_ineq(w0, w)
        assert evaluate(q, p) == pytest.approx(v_cut, abs=1e-9)
        assert is_valid_bqp(q)
        assert v_cut < CFG.viol_tol


def test_time_limit_partial_pool():
    rng = np.random.default_rng(11)
    p = random_point(rng, 11)
    cfg = SeparatorConfig(time_limit=1e-4)
    res = bh_separate(p, range(11), cfg)
    assert isinstance(res.cuts, list)  # anytime: possibly truncated but usable


def test_greedy_refine():
    rng = np.random.default_rng(3)
    p = random_point(rng, 8)
    assert greedy_refine(p, 8) == list(range(8))
    R = greedy_refine(p, 4)
    assert len(R) == 4 and all(0 <= i < 8 for i in R)
    # PSD point: all candidate minima stay >= 0 (interlacing sanity)
    psd = random_point(rng, 6, psd=True)
    M = psd.moment_matrix()
    for j in range(6):
        keep = [0] + [i + 1 for i in range(6) if i != j]
        assert np.linalg.eigvalsh(M[np.ix_(keep, keep)])[0] >= -1e-9


def test_greedy_refine_targets_negative_block():
    # embed a hard SDP violation on {1, 3, 5}: X = 0 with x = 1/2 there
    n = 8
    rng = np.random.default_rng(4)
    x = rng.uniform(0.2, 0.8, size=n)
    X = np.outer(x, x)
    S = [1, 3, 5]
    for i in S:
        x[i] = 0.5
        for j in S:
            X[i, j] = 0.25 if i == j else 0.0
    p = LiftedPoint(x=x, X=X)
    R = greedy_refine(p, 3)
    assert set(R) == set(S)


def test_greedy_refine_permutation_equivariance():
    rng = np.random.default_rng(6)
    p = random_point(rng, 7)
    base = greedy_refine(p, 3)
    perm = list(rng.permutation(7))
    inv = np.argsort(perm)
    moved = LiftedPoint(x=p.x[perm], X=p.X[np.ix_(perm, perm)])
    mapped = sorted(int(inv[i]) for i in base)

    def tie_free(point):
        M = point.moment_matrix()
        vals = []
        for j in range(point.n):
            keep = [0] + [i + 1 for i in range(point.n) if i != j]
            vals.append(np.linalg.eigvalsh(M[np.ix_(keep, keep)])[0])
        vals = sorted(vals)
        return min(b - a for a, b in zip(vals, vals[1:])) > 1e-10

    if tie_free(p):
        assert sorted(greedy_refine(moved, 3)) == mapped


def test_sampling_loop_stalls_on_clean_point():
    calls = []

    def provider(pool):
        calls.append(len(pool))
        return LiftedPoint.rank_one(np.array([1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]))

    cfg = SeparatorConfig(time_limit=None, samples_per_round=5, refine_size=4,
                          select_size=3)
    res = sampling_loop(provider, cfg, seed=1)
    assert res.records == []
    assert res.rounds_run == cfg.stall_rounds
    assert res.aborted is None


def test_sampling_loop_finds_cuts_and_reproducible(tmp_path):
    n = 10
    x = np.full(n, 0.5)
    X = np.outer(x, x)
    for i, j in [(0, 1), (2, 3), (4, 5)]:
        X[i, j] = X[j, i] = 0.0
    for i, j in [(0, 2), (1, 2), (3, 4), (3, 5)]:
        X[i, j] = X[j, i] = 0.5
    point = LiftedPoint(x=x, X=X)

    def provider(pool):
        return point  # static point: pool grows once, then stalls

    cfg = SeparatorConfig(time_limit=None, samples_per_round=8, refine_size=6,
                          select_size=4, max_rounds=6)
    res1 = sampling_loop(provider, cfg, seed=42)
    res2 = sampling_loop(provider, cfg, seed=42)
    assert len(res1.records) > 0
    assert [str(r.ineq) for r in res1.records] == [str(r.ineq) for r in res2.records]
    out = tmp_path / "pool.txt"
    write_cut_pool(res1, str(out))
    text = out.read_text()
    assert "seed=42" in text and "round=" in text
    diff_seed = sampling_loop(provider, cfg, seed=7)
    assert len(diff_seed.records) > 0


def test_sampling_loop_aborts_preserving_pool():
    n = 10
    x = np.full(n, 0.5)
    X = np.outer(x, x)
    X[0, 1] = X[1, 0] = 0.0
    X[0, 2] = X[2, 0] = X[1, 2] = X[2, 1] = 0.5
    point = LiftedPoint(x=x, X=X)
    calls = {"k": 0}

    def provider(pool):
        if calls["k"] >= 1:
            raise RuntimeError("relaxation solver exploded")
        calls["k"] += 1
        return point

    cfg = SeparatorConfig(time_limit=None, samples_per_round=10, refine_size=3,
                          select_size=3, max_rounds=5)
    res = sampling_loop(provider, cfg, seed=3)
    assert res.aborted == "relaxation solver exploded"
    assert len(res.records) > 0  # pool from round 1 preserved
