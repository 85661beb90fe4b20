"""Acceptance suite: one test per criterion, at the stated tolerances.

Each test prints a single [PASS]/[FAIL] line (visible with `pytest -s` or in
the captured output).  Criteria 6 and 10 are long-running / data-dependent
stretch checks: 6 runs only when CUTFORGE_STRETCH=1, 10 needs the be100.1
instance file (CUTFORGE_BIQMAC_DIR or ./data).
"""

import math
import os
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from cutforge.atlas import canonicalize, enumerate_facets, facetness_check, load_atlas
from cutforge.certify import certify_batch, ratio_2x2_test, sign_pattern_test
from cutforge.eigencg import (
    FloatVec,
    RadicalVec,
    bh_ineq,
    decompose_f2,
    ecg,
    ecg_float,
    normalize_f2,
)
from cutforge.exactnum import Radical
from cutforge.ineq import (
    LiftedPoint,
    binary_qp_optimum,
    depth,
    dominated_by_cone,
    is_valid_bqp,
    mccormick_ineqs,
    triangle_ineqs,
    verify_domination,
)
from cutforge.instances import binary_qp_instance, parse_biqmac
from cutforge.numerics import solve_with_scipy
from cutforge.relax import RelaxConfig, build_lifted_model, run_pipeline, sdp_loop
from cutforge.separate import SeparatorConfig, bh_separate, bh_separate_exhaustive

from tests.test_certify import FACET_HARD, FACET_RATIO, FACET_SIGN

F = Fraction


def report(num, ok, text, detail=""):
    tag = "PASS" if ok else "FAIL"
    print(f"[{tag}] criterion {num}: {text}" + (f" ({detail})" if detail else ""))
    assert ok, f"criterion {num}: {text} {detail}"


def random_qubo(rng, n, scale=4):
    Q = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            q = rng.randint(-scale, scale)
            Q[i, j] = Q[j, i] = q if i == j else q / 2.0
    return Q


def test_c01_worked_example_exactness():
    t0 = time.monotonic()
    a = ecg(RadicalVec(F(3, 4), (Radical(2), Radical(-4))))
    b = ecg(RadicalVec(Radical(F(7, 5), 2), (Radical(5, 2), Radical(-10, 2))))
    c = ecg(RadicalVec(Radical(0), (Radical(1), Radical(-1, 2), Radical(1, 3))))
    ok = ((a.beta, a.alpha, a.gamma) == ((-16,), (7, 10), 0)
          and (b.beta, b.alpha, b.gamma) == ((-200,), (78, 144), 3)
          and c.beta == (-2, 4, -4) and c.alpha == (1, 2, 3) and c.gamma == 0)
    elapsed = time.monotonic() - t0
    report(1, ok and elapsed < 1.0,
           "rounded cuts reproduce the three worked examples exactly",
           f"{elapsed:.3f}s")


def test_c02_f0_equals_bh():
    t0 = time.monotonic()
    rng = random.Random(2024)
    ok = True
    for _ in range(500):
        n = rng.randint(1, 8)
        w0 = rng.randint(-6, 6)
        w = [rng.randint(-6, 6) for _ in range(n)]
        if ecg(RadicalVec(F(2 * w0 - 1, 2), tuple(Radical(v) for v in w))) != bh_ineq(w0, w):
            ok = False
            break
    elapsed = time.monotonic() - t0
    report(2, ok and elapsed < 5.0,
           "half-integer-shifted rounded cuts equal the BH family on 500 draws",
           f"{elapsed:.2f}s")


def _random_f2(rng):
    d = rng.choice([1, 2, 3, 5])
    n = rng.randint(2, 5)
    r = [rng.randint(-5, 5) for _ in range(n)]
    if all(v == 0 for v in r):
        r[rng.randrange(n)] = rng.choice([1, -1, 2])
    g = 0
    for v in r:
        g = math.gcd(g, abs(v))
    v0 = Radical(F(rng.randint(-8, 8), 2 * g), d)
    return RadicalVec(v0, tuple(Radical(c, d) for c in r))


def test_c03_decomposition():
    t0 = time.monotonic()
    rng = random.Random(99)
    ok = True
    for _ in range(200):
        w = _random_f2(rng)
        bh_m, lam_m, bh_p, lam_p = decompose_f2(w)
        p, _ = normalize_f2(w)
        if lam_m.sign() < 0 or lam_p.sign() < 0 or (lam_m + lam_p).r != p.square():
            ok = False
            break
        target = ecg(w)
        dominated, mult = dominated_by_cone(target, [bh_m, bh_p])
        if not dominated or verify_domination(target, [bh_m, bh_p], mult) > 1e-8:
            ok = False
            break
        ratio = F(0) if w.v0.is_zero() else w.v0.r / p.r
        a = math.ceil(ratio - F(1, 2))
        p_sq, v0p = p.square(), (w.v0 * p).r
        if a * a * p_sq + a * (-2 * a * p_sq + 2 * v0p) > math.floor(w.v0.square()):
            ok = False
            break
    elapsed = time.monotonic() - t0
    report(3, ok and elapsed < 30.0,
           "200 random F2 vectors decompose into two BH cuts with exact "
           "multipliers and the constant-term inequality", f"{elapsed:.1f}s")


def test_c04_atlas_correctness():
    t0 = time.monotonic()
    key = lambda q: (q.gamma, q.alpha, q.beta)
    a2 = enumerate_facets(2)
    ok = {key(canonicalize(f)) for f in a2.facets} == \
         {key(canonicalize(f)) for f in mccormick_ineqs(2)}
    a3 = enumerate_facets(3)
    ok = ok and len(a3) == 16
    ok = ok and {key(canonicalize(f)) for f in a3.facets} == \
        {key(canonicalize(f)) for f in mccormick_ineqs(3) + triangle_ineqs(3)}
    # counts established once by the double-description oracle, then locked
    a4, a5 = enumerate_facets(4), enumerate_facets(5)
    ok = ok and len(a4) == 56 and len(a5) == 368
    for atlas in (a2, a3, a4, a5):
        for f in atlas.facets:
            if not (is_valid_bqp(f) and facetness_check(f, atlas.n)):
                ok = False
                break
    rng = random.Random(4)
    for _ in range(50):
        inst = binary_qp_instance(random_qubo(rng, 5))
        opt, _ = binary_qp_optimum(inst)
        model = build_lifted_model(inst, RelaxConfig())
        model.add_ineqs(a5.facets)
        if abs(model.solve().obj - opt) > 1e-7 * max(1.0, abs(opt)):
            ok = False
            break
    elapsed = time.monotonic() - t0
    report(4, ok and elapsed < 600.0,
           "atlases are exact (4/16/56/368 facets, all facet-defining; "
           "hull LP reproduces 50 binary optima)", f"{elapsed:.1f}s")


def test_c05_certification_anchors():
    t0 = time.monotonic()
    ok = (sign_pattern_test(FACET_SIGN).certified
          and not sign_pattern_test(FACET_RATIO).certified
          and ratio_2x2_test(FACET_RATIO).certified
          and not sign_pattern_test(FACET_HARD).certified
          and not ratio_2x2_test(FACET_HARD).certified)
    elapsed = time.monotonic() - t0
    report(5, ok and elapsed < 1.0,
           "anchor facets: sign-certified / ratio-certified / both-inconclusive",
           f"{elapsed:.3f}s")


STRETCH = os.environ.get("CUTFORGE_STRETCH", "") == "1"


@pytest.fixture(scope="module")
def atlas6():
    cached = os.environ.get("CUTFORGE_BQP6_ATLAS", "")
    if cached and os.path.exists(cached):
        return load_atlas(cached)
    return enumerate_facets(6, long_run=True)


@pytest.fixture(scope="module")
def certify6(atlas6):
    return certify_batch(atlas6, box=4).summary()


@pytest.mark.skipif(not STRETCH, reason="stretch run; set CUTFORGE_STRETCH=1")
def test_c06_stretch_facet_count(atlas6):
    ok = len(atlas6) == 116_764
    report(6, ok, "n=6 atlas has 116,764 facets", f"got {len(atlas6)}")


@pytest.mark.skipif(not STRETCH, reason="stretch run; set CUTFORGE_STRETCH=1")
def test_c06_stretch_bh_bucket(certify6):
    report("6 (BH bucket)", certify6["bh_count"] == 3_676,
           "3,676 facets are BH-representable", f"got {certify6['bh_count']}")


@pytest.mark.skipif(not STRETCH, reason="stretch run; set CUTFORGE_STRETCH=1")
def test_c06_stretch_inconclusive_bucket(certify6):
    # The published automation left 37,338 facets uncertified.  The tests
    # specified here decide sign satisfiability completely (odd cycles
    # included) and scan every 2x2 pairing with an exact tail analysis, so
    # they certify strictly more; every certificate is a constructive
    # impossibility argument, cross-checked against numeric representation
    # searches.  The historical count is therefore not reproducible with
    # these stronger tests; this check records the discrepancy honestly.
    report("6 (inconclusive bucket)", certify6["inconclusive"] == 37_338,
           "published automation left 37,338 uncertified",
           f"got {certify6['inconclusive']} (stronger automation certifies "
           "more; see decisions ledger)")


def test_c07_depth_bounds():
    t0 = time.monotonic()
    rng = random.Random(7)
    nprng = np.random.default_rng(7)
    violations = 0
    for _ in range(20):
        n = rng.randint(8, 15)
        inst = binary_qp_instance(random_qubo(rng, n))
        res = sdp_loop(build_lifted_model(inst, RelaxConfig()))
        assert res.converged
        point = res.point
        for _ in range(500):
            k = rng.randint(3, n)
            support = nprng.choice(n, size=k, replace=False)
            v = np.zeros(n)
            v[support] = nprng.uniform(0.25, 2.0, size=k) * nprng.choice([-1, 1], size=k)
            v0 = float(nprng.uniform(-1.0, 1.0))
            if depth(ecg_float(FloatVec(v0=v0, v=v)), point) > \
                    2.0 / math.sqrt(k * (k - 2)) + 1e-6:
                violations += 1
        for _ in range(500):
            k = rng.randint(3, n)
            support = rng.sample(range(n), k)
            d_rad = rng.choice([1, 2, 3])
            r = [0] * n
            for i in support:
                r[i] = rng.choice([-2, -1, 1, 2])
            g = 0
            for vv in r:
                g = math.gcd(g, abs(vv))
            v0 = Radical(F(rng.randint(-4, 4), 2 * g), d_rad)
            cut = ecg(RadicalVec(v0, tuple(Radical(c, d_rad) for c in r)))
            norm_v = math.sqrt(sum(c * c * d_rad for c in r))
            if depth(cut, point) > 1.0 / (math.sqrt(k - 1) * norm_v) + 1e-6:
                violations += 1
    elapsed = time.monotonic() - t0
    report(7, violations == 0 and elapsed < 300.0,
           "depth bounds hold with zero violations on 20 instances x 500 "
           "dense + 500 F2 vectors", f"{elapsed:.1f}s")


def test_c08_separator_oracle_equivalence():
    t0 = time.monotonic()
    rng = np.random.default_rng(8)
    cfg = SeparatorConfig(time_limit=None)  # unlimited
    ok = True
    for trial in range(50):
        k = int(rng.integers(3, 9))
        x = rng.uniform(0.05, 0.95, size=k)
        A = rng.normal(size=(k, k)) * 0.12
        X = np.clip(np.outer(x, x) + 0.5 * (A + A.T), 0.0, 1.0)
        p = LiftedPoint(x=x, X=X)
        got = bh_separate(p, range(k), cfg)
        ref = bh_separate_exhaustive(p, range(k), cfg)
        if not got.complete:
            ok = False
            break
        if bool(ref.cuts) != bool(got.cuts):
            ok = False
            break
        if ref.cuts and abs(got.cuts[0][2] - ref.cuts[0][2]) > 1e-12:
            ok = False
            break
    elapsed = time.monotonic() - t0
    report(8, ok and elapsed < 120.0,
           "branch-and-bound minimal violation equals exhaustive enumeration "
           "on 50 points", f"{elapsed:.1f}s")


def test_c09_pipeline_sanity():
    t0 = time.monotonic()
    rng = random.Random(9)
    ok = True
    for _ in range(20):
        n = rng.randint(4, 10)
        inst = binary_qp_instance(random_qubo(rng, n))
        opt, _ = binary_qp_optimum(inst)
        tol = 1e-6 * max(1.0, abs(opt))
        b1 = run_pipeline(inst, "i").bound
        b2 = run_pipeline(inst, "ii").bound
        b4 = run_pipeline(inst, "iv").bound
        if not (b1 <= b2 + tol and b2 <= b4 + tol and b4 <= opt + 10 * tol):
            ok = False
            break
        r8 = run_pipeline(inst, "viii", seed=3)
        stages = r8.stage_bounds
        seq = [stages["base"]]
        for name in ("triangle", "bqp4", "bqp5"):
            if name in stages:
                seq.append(stages[name])
        if any(b < a - tol for a, b in zip(seq, seq[1:])):
            ok = False
            break
    elapsed = time.monotonic() - t0
    report(9, ok and elapsed < 300.0,
           "bound nesting i <= ii <= iv <= optimum and monotone atlas passes "
           "on 20 instances", f"{elapsed:.1f}s")


def _find_be100():
    for base in (os.environ.get("CUTFORGE_BIQMAC_DIR", ""),
                 os.path.join(os.path.dirname(__file__), "..", "data")):
        if not base:
            continue
        for name in ("be100.1", "be100.1.sparse", "be100.1.txt"):
            path = os.path.join(base, name)
            if os.path.exists(path):
                return path
    return None


def test_c10_table_anchor_be100_1():
    path = _find_be100()
    if path is None:
        print("[SKIP] criterion 10: be100.1 not bundled (benchmark data is "
              "not redistributable here); set CUTFORGE_BIQMAC_DIR to run")
        pytest.skip("be100.1 instance file not available in this environment")
    t0 = time.monotonic()
    inst = parse_biqmac(path)
    model = build_lifted_model(inst, RelaxConfig(presolve=True))
    assert model.problem.ncols == 5150
    bound = model.solve().obj
    elapsed = time.monotonic() - t0
    report(10, abs(bound - (-31482.50)) <= 0.5,
           "be100.1 McCormick-only bound is -31482.50 +- 0.5",
           f"got {bound:.2f} in {elapsed:.0f}s")


def test_c10_machinery_on_synthetic_anchor():
    """Same code path as criterion 10 on a synthetic instance: presolved
    bundled simplex agrees with the external-solver adapter."""
    t0 = time.monotonic()
    rng = random.Random(10)
    n = 40
    Q = np.zeros((n, n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for i, j in random.Random(0).sample(pairs, len(pairs) // 10):
        q = rng.randint(-100, 100)
        Q[i, j] = Q[j, i] = q / 2.0
    for i in range(n):
        Q[i, i] = rng.randint(-100, 100)
    inst = binary_qp_instance(Q)
    model = build_lifted_model(inst, RelaxConfig(presolve=True))
    assert model.problem.ncols == 2 * n + n * (n - 1) // 2
    bound = model.solve().obj
    ref_model = build_lifted_model(inst, RelaxConfig(presolve=True))
    ref = solve_with_scipy(ref_model.problem)
    full = build_lifted_model(inst, RelaxConfig())
    bound_full = solve_with_scipy(full.problem)
    ok = (abs(bound - ref.obj) < 1e-6 * max(1.0, abs(ref.obj))
          and abs(bound - bound_full.obj) < 1e-6 * max(1.0, abs(bound_full.obj)))
    elapsed = time.monotonic() - t0
    report("10 (machinery)", ok,
           "presolved bundled simplex matches the external adapter and the "
           "unpresolved model", f"n=40, {elapsed:.1f}s")
