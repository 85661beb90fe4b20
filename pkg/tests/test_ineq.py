import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from cutforge.ineq import (
    LiftedPoint,
    LinearIneq,
    QcqpInstance,
    binary_qp_optimum,
    depth,
    dominated_by_cone,
    evaluate,
    format_ineq,
    is_valid_bqp,
    iter_pairs,
    mccormick_ineqs,
    n_pairs,
    pair_index,
    parse_ineq,
    triangle_ineqs,
    verify_domination,
)

SHARP_CUT_2D = LinearIneq(2, 0, (7, 10), (-16,))


def test_pair_index_lex():
    n = 5
    flat = [pair_index(i, j, n) for i, j in iter_pairs(n)]
    assert flat == list(range(n_pairs(n)))


def test_evaluate_examples():
    mc = mccormick_ineqs(2)[0]  # X12 >= 0
    p = LiftedPoint.rank_one([1.0, 1.0])
    assert evaluate(mc, p) == pytest.approx(1.0)
    tri_d = triangle_ineqs(3)[3]
    zero = LiftedPoint(x=np.zeros(3), X=np.zeros((3, 3)))
    assert evaluate(tri_d, zero) == pytest.approx(1.0)
    p2 = LiftedPoint(x=np.array([1.0, 1.0]), X=np.array([[1.0, 1.0], [1.0, 1.0]]))
    assert evaluate(SHARP_CUT_2D, p2) == pytest.approx(-16 + 7 + 10)


def test_generator_counts_and_validity():
    assert len(mccormick_ineqs(2)) == 4
    assert len(mccormick_ineqs(10)) == 180
    assert len(triangle_ineqs(3)) == 4
    assert len(triangle_ineqs(6)) == 80
    for ineq in mccormick_ineqs(3) + triangle_ineqs(4):
        assert is_valid_bqp(ineq)


def test_generators_canonical_and_distinct():
    for fam in (mccormick_ineqs(4), triangle_ineqs(4)):
        seen = set()
        for ineq in fam:
            coeffs = [ineq.gamma] + list(ineq.alpha) + list(ineq.beta)
            assert all(c.denominator == 1 for c in coeffs)
            g = 0
            for c in coeffs:
                g = math.gcd(g, abs(c.numerator))
            assert g == 1
            key = (ineq.gamma, ineq.alpha, ineq.beta)
            assert key not in seen
            seen.add(key)


def test_is_valid_bqp_examples():
    assert is_valid_bqp(SHARP_CUT_2D)
    bad = LinearIneq(2, Fraction(-1, 2), (0, 0), (1,))  # X12 - 1/2, fails at x=0
    assert not is_valid_bqp(bad)
    with pytest.raises(ValueError):
        is_valid_bqp(LinearIneq(2, 0, (0, 0), (1,), diag=(1, 0)))


def test_valid_ineq_transfers_to_box_points():
    rng = np.random.default_rng(0)
    for ineq in [SHARP_CUT_2D] + mccormick_ineqs(3)[:4] + triangle_ineqs(3):
        n = ineq.n
        for _ in range(250):
            x = rng.uniform(size=n)
            assert evaluate(ineq, LiftedPoint.rank_one(x)) >= -1e-9


def test_binary_qp_optimum():
    inst = QcqpInstance(3, np.zeros((3, 3)), np.zeros(3))
    assert binary_qp_optimum(inst)[0] == 0.0
    n = 5
    inst = QcqpInstance(n, np.eye(n), -2 * np.ones(n))
    val, arg = binary_qp_optimum(inst)
    assert val == pytest.approx(-n)
    assert np.all(arg == 1)


def test_binary_qp_optimum_vs_exhaustive():
    rng = np.random.default_rng(4)
    for _ in range(5):
        Q = rng.integers(-4, 5, size=(8, 8)).astype(float)
        Q = 0.5 * (Q + Q.T)
        c = rng.integers(-4, 5, size=8).astype(float)
        inst = QcqpInstance(8, Q, c)
        val, arg = binary_qp_optimum(inst)
        brute = min(inst.objective_at(np.array(x))
                    for x in itertools.product((0, 1), repeat=8))
        assert val == pytest.approx(brute)
        assert inst.objective_at(arg) == pytest.approx(val)


def test_depth_examples():
    mc = mccormick_ineqs(2)[0]
    p = LiftedPoint(x=np.array([0.5, 0.5]), X=np.array([[0.25, -1.0], [-1.0, 0.25]]))
    assert depth(mc, p) == pytest.approx(1.0)
    assert depth(mc.scaled(2), p) == pytest.approx(depth(mc, p), abs=1e-12)
    p2 = LiftedPoint(x=np.zeros(2), X=np.array([[0.0, 0.5], [0.5, 0.0]]))
    assert depth(SHARP_CUT_2D, p2) == pytest.approx(8 / math.sqrt(256 + 49 + 100))
    assert depth(SHARP_CUT_2D.scaled(Fraction(7, 3)), p2) == pytest.approx(depth(SHARP_CUT_2D, p2), abs=1e-12)
    satisfied = LiftedPoint.rank_one([1.0, 1.0])
    assert depth(SHARP_CUT_2D, satisfied) == 0.0


def test_dominated_by_cone_basic():
    tri = triangle_ineqs(3)
    ok, lam = dominated_by_cone(tri[0], [tri[0], tri[1]])
    assert ok
    assert lam[0] == pytest.approx(1.0, abs=1e-9)
    mc = mccormick_ineqs(2)
    x1_pos = LinearIneq(2, 0, (1, 0), (0,))
    ok, _ = dominated_by_cone(mc[0], [x1_pos])
    assert not ok


def test_domination_implies_binary_dominance():
    # combination of two triangle forms: check LHS(t) >= sum lam*LHS(g) at vertices
    rng = random.Random(1)
    tri = triangle_ineqs(4)
    mc = mccormick_ineqs(4)
    for _ in range(10):
        gens = rng.sample(tri + mc, 4)
        lam = [Fraction(rng.randint(0, 3)) for _ in gens]
        n = 4
        gamma = sum(l * g.gamma for l, g in zip(lam, gens)) + rng.randint(0, 2)
        alpha = tuple(sum(l * g.alpha[i] for l, g in zip(lam, gens)) for i in range(n))
        beta = tuple(sum(l * g.beta[t] for l, g in zip(lam, gens))
                     for t in range(n_pairs(n)))
        target = LinearIneq(n, gamma, alpha, beta)
        ok, mult = dominated_by_cone(target, gens)
        assert ok
        assert verify_domination(target, gens, mult) <= 1e-8
        for bits in itertools.product((0, 1), repeat=n):
            lhs_t = target.eval_binary(bits)
            lhs_g = sum(float(m) * float(g.eval_binary(bits))
                        for m, g in zip(mult, gens))
            assert float(lhs_t) >= lhs_g - 1e-6


def test_text_roundtrip():
    for ineq in mccormick_ineqs(3) + triangle_ineqs(3) + [SHARP_CUT_2D]:
        back = parse_ineq(format_ineq(ineq))
        assert back == ineq
    scaled = LinearIneq(2, Fraction(1, 3), (Fraction(2, 7), 0), (Fraction(-5, 3),))
    assert parse_ineq(format_ineq(scaled)) == scaled
    with_diag = LinearIneq(2, 1, (0, 0), (2,), diag=(1, Fraction(1, 2)))
    assert parse_ineq(format_ineq(with_diag)) == with_diag
    # comments after '#' are ignored
    assert parse_ineq(format_ineq(SHARP_CUT_2D) + " # provenance") == SHARP_CUT_2D


def test_lifted_to():
    tri = triangle_ineqs(3)[0]
    lifted = tri.lifted_to(6, (1, 3, 5))
    assert lifted.n == 6
    assert lifted.beta_at(1, 3) == tri.beta_at(0, 1)
    assert lifted.beta_at(3, 5) == tri.beta_at(1, 2)
    assert lifted.alpha[5] == tri.alpha[2]
    p = LiftedPoint.rank_one(np.array([0.1, 0.2, 0.3, 0.4, 0.5, 0.6]))
    assert evaluate(lifted, p) == pytest.approx(
        evaluate(tri, p.restrict((1, 3, 5))))
