import itertools
import json
import random

import numpy as np
import pytest

from cutforge.atlas import canonicalize, enumerate_facets, facetness_check
from cutforge.certify import (
    CertStatus,
    bh_representable,
    certify_batch,
    ratio_2x2_test,
    sign_pattern_test,
    write_certify_report,
    _product_hull,
)
from cutforge.eigencg import bh_ineq
from cutforge.ineq import LinearIneq, is_valid_bqp, iter_pairs, mccormick_ineqs, n_pairs, pair_index, triangle_ineqs


def make6(gamma, alpha, beta_map):
    beta = [0] * n_pairs(6)
    for (i, j), v in beta_map.items():
        beta[pair_index(i - 1, j - 1, 6)] = v
    return LinearIneq(6, gamma, alpha, tuple(beta))


# the three hand-analyzed facets of the six-variable polytope
FACET_SIGN = make6(2, (-2, -1, 1, -2, 3, -1), {
    (1, 2): 2, (1, 3): -1, (2, 3): -1, (1, 4): 2, (2, 4): 1,
    (1, 5): -2, (2, 5): -1, (4, 5): -1, (1, 6): 1, (3, 6): 1,
    (4, 6): 1, (5, 6): -1})

FACET_RATIO = make6(5, (-4, -4, 4, -5, 4, -3), {
    (1, 2): 3, (1, 3): -2, (2, 3): -2, (1, 4): 5, (2, 4): 5, (3, 4): -3,
    (1, 5): -2, (2, 5): -2, (3, 5): 1, (4, 5): -3, (1, 6): 2, (2, 6): 2,
    (3, 6): -1, (4, 6): 3, (5, 6): -1})

FACET_HARD = make6(1, (-1, 0, 2, 0, 1, 0), {
    (1, 2): 2, (1, 3): -1, (2, 3): -3, (1, 4): 1, (2, 4): 2, (3, 4): -2,
    (1, 5): -1, (2, 5): -2, (3, 5): 2, (4, 5): -1, (1, 6): 1, (2, 6): 2,
    (3, 6): -2, (4, 6): 1, (5, 6): -1})


def test_anchor_facets_are_facets():
    for facet in (FACET_SIGN, FACET_RATIO, FACET_HARD):
        assert is_valid_bqp(facet)
        assert facetness_check(facet, 6)


def test_sign_pattern_anchors():
    res = sign_pattern_test(FACET_SIGN)
    assert res.status == CertStatus.CERTIFIED_NON_ECG
    # this facet has several contradictions; ours closes the {1,3,6} odd
    # cycle (-,+,+), the hand proof uses the (2,6) zero pair instead
    assert res.witness["kind"] in ("odd-cycle", "same-sign-chain",
                                   "component-flip-conflict")
    if res.witness["kind"] == "odd-cycle":
        i, j = res.witness["closing_pair"]
        chain = res.witness["path"]
        # the path plus closing pair really is a cycle through i and j
        ends = {i, j}
        for a, b, _ in chain:
            ends ^= {a, b}
        assert not ends
    assert sign_pattern_test(FACET_RATIO).status == CertStatus.INCONCLUSIVE
    assert sign_pattern_test(FACET_HARD).status == CertStatus.INCONCLUSIVE


def test_sign_pattern_all_positive_triangle():
    ineq = make6(0, (0,) * 6, {(1, 2): 1, (1, 3): 1, (2, 3): 1})
    assert sign_pattern_test(ineq).status == CertStatus.INCONCLUSIVE


def test_sign_pattern_permutation_invariance():
    rng = random.Random(5)
    for facet in (FACET_SIGN, FACET_RATIO, FACET_HARD):
        base = sign_pattern_test(facet).certified
        for _ in range(6):
            perm = list(range(6))
            rng.shuffle(perm)
            permuted = facet.lifted_to(6, perm)
            assert sign_pattern_test(permuted).certified == base


def test_ratio_anchors():
    res = ratio_2x2_test(FACET_RATIO)
    assert res.status == CertStatus.CERTIFIED_NON_ECG
    assert ratio_2x2_test(FACET_HARD).status == CertStatus.INCONCLUSIVE
    assert ratio_2x2_test(mccormick_ineqs(4)[0]).status == CertStatus.INCONCLUSIVE


def test_ratio_witness_quadruple_from_paper_analysis():
    # pairing products for {1,2,3,5}: (3l-1,3l]*(l-1,l] tops out at 3l^2,
    # while (-2l-1,-2l]^2 starts at 4l^2: disjoint for every l >= 1
    lam = np.arange(1, 50, dtype=np.int64)
    loA, hiA = _product_hull(3, 1, lam)
    loB, hiB = _product_hull(-2, -2, lam)
    assert np.all(hiA < loB)


def test_ratio_lambda_horizon_consistency():
    # the exact tail analysis makes the verdict independent of lambda_max
    for facet in (FACET_RATIO, FACET_HARD, FACET_SIGN):
        r1 = ratio_2x2_test(facet, lambda_max=1).certified
        r50 = ratio_2x2_test(facet, lambda_max=50).certified
        rbig = ratio_2x2_test(facet).certified
        assert r1 == r50 == rbig


def test_bh_representable_examples():
    tri_a = triangle_ineqs(3)[0]
    ok, (w0, w, lam) = bh_representable(tri_a)
    assert ok
    assert bh_ineq(w0, w) == tri_a.scaled(lam)
    mc = mccormick_ineqs(2)[0]
    ok, (w0, w, lam) = bh_representable(mc)
    assert ok
    assert bh_ineq(w0, w) == mc.scaled(lam)
    ok, wit = bh_representable(FACET_SIGN)
    assert not ok and wit is None


def test_bh_representable_random_roundtrip():
    rng = random.Random(31)
    for _ in range(120):
        n = rng.randint(2, 6)
        w0 = rng.randint(-3, 3)
        w = [rng.randint(-3, 3) for _ in range(n)]
        q = bh_ineq(w0, w)
        if all(v == 0 for v in (q.gamma,) + q.alpha + q.beta):
            continue
        target = canonicalize(q)
        ok, wit = bh_representable(target, box=3)
        assert ok, (w0, w)
        rw0, rw, rlam = wit
        assert bh_ineq(rw0, rw) == target.scaled(rlam)


def test_certificate_soundness_on_representables():
    """A BH-representable inequality is never certified non-representable."""
    rng = random.Random(17)
    atlas = enumerate_facets(4)
    pool = [canonicalize(f) for f in atlas.facets]
    for _ in range(200):
        n = rng.randint(2, 6)
        w0 = rng.randint(-4, 4)
        w = [rng.randint(-4, 4) for _ in range(n)]
        q = bh_ineq(w0, w)
        if all(v == 0 for v in (q.gamma,) + q.alpha + q.beta):
            continue
        pool.append(canonicalize(q))
    for q in pool:
        assert not sign_pattern_test(q).certified, str(q)
        assert not ratio_2x2_test(q).certified, str(q)


def test_all_small_atlas_facets_are_bh():
    for n in (2, 3, 4):
        atlas = enumerate_facets(n)
        for f in atlas.facets:
            ok, _ = bh_representable(canonicalize(f), box=4)
            assert ok, str(f)


def test_certify_batch_n3(tmp_path):
    atlas = enumerate_facets(3)
    report = certify_batch(atlas)
    assert report.bh_count == 16
    assert report.sign_certified == report.ratio_certified == report.inconclusive == 0
    csv_path = tmp_path / "report.csv"
    json_path = tmp_path / "summary.json"
    write_certify_report(report, str(csv_path), str(json_path))
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "facet_id,bucket,witness"
    assert len(lines) == 17
    summary = json.loads(json_path.read_text())
    assert summary["bh_count"] == 16 and summary["total"] == 16
