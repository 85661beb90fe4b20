"""Rounded eigenvector cuts, the nested families F0/F1/F2, and decomposition.

Given (v0, v), the positive-semidefiniteness of the moment matrix gives the
raw quadratic-form inequality ("eigen-cut"); rounding its coefficients up and
the constant down yields a cut valid for the binary polytope, which then
transfers to the continuous box.  With integer data the construction
reduces to the Boros-Hammer family; the F0/F1/F2 tags grade how much of the
integrality structure a vector has, and every F2 cut decomposes into a
nonnegative combination of two Boros-Hammer cuts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from .exactnum import Radical, ceil_shifted, radical_ceil, squarefree_decompose
from .ineq import LiftedPoint, LinearIneq, evaluate, iter_pairs, n_pairs, pair_index
from .numerics import sym_eigen

DEFAULT_FLOAT_ERR = 2.0 ** -40
EIG_CUT_TOL = 1e-8


class FamilyTag(Enum):
    F0 = 0
    F1 = 1
    F2 = 2
    GENERAL = 3

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class RadicalVec:
    """Exact vector (v0, v) with every coordinate of the form r*sqrt(d)."""

    v0: Radical
    v: tuple

    def __post_init__(self):
        object.__setattr__(self, "v0", _as_radical(self.v0))
        object.__setattr__(self, "v", tuple(_as_radical(c) for c in self.v))

    @property
    def n(self) -> int:
        return len(self.v)

    def __str__(self):
        return f"(v0={self.v0}; v=[{', '.join(str(c) for c in self.v)}])"


def _as_radical(value) -> Radical:
    return value if isinstance(value, Radical) else Radical(value)


@dataclass
class FloatVec:
    """Float vector (v0, v) with a per-term rounding bound for safe ceilings."""

    v0: float
    v: np.ndarray
    err: float = DEFAULT_FLOAT_ERR

    def __post_init__(self):
        self.v = np.asarray(self.v, dtype=float)
        if self.err < 0:
            raise ValueError("err must be nonnegative")

    @property
    def n(self) -> int:
        return self.v.size


# ---------------------------------------------------------------------------
# cut constructions
# ---------------------------------------------------------------------------

def eigen_cut(w) -> LinearIneq:
    """The unrounded quadratic-form inequality of (v0, v), diagonal included.

    Exact for a RadicalVec whose products are all rational; float inputs are
    converted coefficient-by-coefficient (floats are dyadic rationals, so the
    image is the exact float computation).
    """
    if isinstance(w, RadicalVec):
        n = w.n
        diag = []
        alpha = []
        for vi in w.v:
            diag.append(vi.square())
            ai = Radical(2) * vi * w.v0
            if not ai.is_rational():
                raise ValueError(
                    "eigen-cut coefficient 2*v_i*v0 is irrational; use ecg for rounded cuts")
            alpha.append(ai.r)
        beta = [Fraction(0)] * n_pairs(n)
        for i, j in iter_pairs(n):
            bij = Radical(2) * w.v[i] * w.v[j]
            if not bij.is_rational():
                raise ValueError(
                    "eigen-cut coefficient 2*v_i*v_j is irrational; use ecg for rounded cuts")
            beta[pair_index(i, j, n)] = bij.r
        return LinearIneq(n, w.v0.square(), tuple(alpha), tuple(beta), tuple(diag))
    n = w.n
    v, v0 = w.v, w.v0
    alpha = tuple(Fraction(2.0 * v[i] * v0) for i in range(n))
    diag = tuple(Fraction(float(v[i]) ** 2) for i in range(n))
    beta = [Fraction(0)] * n_pairs(n)
    for i, j in iter_pairs(n):
        beta[pair_index(i, j, n)] = Fraction(2.0 * v[i] * v[j])
    return LinearIneq(n, Fraction(v0 * v0), alpha, tuple(beta), diag)


def ecg(w: RadicalVec) -> LinearIneq:
    """Exact rounded cut: ceil the non-constant terms, floor the constant.

    Coordinates may carry different radicands (products like sqrt(2)*sqrt(3)
    are handled exactly); the output has integer coefficients and no
    diagonal terms.
    """
    n = w.n
    two = Radical(2)
    alpha = []
    for vi in w.v:
        # v_i^2 is rational; 2 v_i v0 may be irrational
        alpha.append(ceil_shifted(vi.square(), two * vi * w.v0))
    beta = [0] * n_pairs(n)
    for i, j in iter_pairs(n):
        beta[pair_index(i, j, n)] = radical_ceil(two * w.v[i] * w.v[j])
    gamma = math.floor(w.v0.square())
    return LinearIneq(n, gamma, tuple(alpha), tuple(beta))


def ecg_float(w: FloatVec) -> LinearIneq:
    """Directed-rounding cut from float data.

    Every non-constant term is computed as ceil(value + err) and the constant
    as floor(v0^2 - err), so the result dominates the true rounded cut on the
    nonnegative lifted variables: validity is preserved, the cut is at most
    one unit weaker per term.
    """
    n = w.n
    v, v0, err = w.v, w.v0, w.err
    alpha = tuple(math.ceil(v[i] * v[i] + 2.0 * v[i] * v0 + err) for i in range(n))
    beta = [0] * n_pairs(n)
    for i, j in iter_pairs(n):
        beta[pair_index(i, j, n)] = math.ceil(2.0 * v[i] * v[j] + err)
    gamma = math.floor(v0 * v0 - err)
    return LinearIneq(n, gamma, alpha, tuple(beta))


def bh_ineq(w0: int, w) -> LinearIneq:
    """Boros-Hammer inequality from integer data.

    Expansion of (w.x + w0 - 1)(w.x + w0) >= 0 over binary x with the
    products replaced by lifted variables.
    """
    w = [int(c) for c in w]
    n = len(w)
    alpha = tuple(wi * (wi + 2 * w0 - 1) for wi in w)
    beta = [0] * n_pairs(n)
    for i, j in iter_pairs(n):
        beta[pair_index(i, j, n)] = 2 * w[i] * w[j]
    return LinearIneq(n, w0 * (w0 - 1), alpha, tuple(beta))


# ---------------------------------------------------------------------------
# family classification
# ---------------------------------------------------------------------------

def _is_int(f: Fraction) -> bool:
    return f.denominator == 1


def classify_family(w: RadicalVec) -> FamilyTag:
    """Tightest integrality tag of (v0, v); tags are nested F0 < F1 < F2."""
    v_integer = all(c.is_integer() for c in w.v)
    cross_2v0 = all((Radical(2) * c * w.v0).is_rational()
                    and _is_int((Radical(2) * c * w.v0).r) for c in w.v)
    if v_integer:
        if w.v0.is_rational() and _is_int(w.v0.r + Fraction(1, 2)):
            return FamilyTag.F0
        if cross_2v0:
            return FamilyTag.F1
    squares_int = all(_is_int(c.square()) for c in w.v)
    cross_int = all((Radical(2) * w.v[i] * w.v[j]).is_rational()
                    and _is_int((Radical(2) * w.v[i] * w.v[j]).r)
                    for i, j in iter_pairs(w.n))
    if squares_int and cross_int and cross_2v0:
        return FamilyTag.F2
    return FamilyTag.GENERAL


def normalize_f2(w: RadicalVec):
    """Common-radical form of an F2 vector: p with v_i = r_i * p, r integer.

    p = g*sqrt(d) where d is the shared square-free radicand of the nonzero
    coordinates and g is the gcd of their integer multipliers; p^2 and 2*v0*p
    are integers by construction.
    """
    if all(c.is_zero() for c in w.v):
        raise ValueError("normalize_f2 requires v != 0")
    if classify_family(w) == FamilyTag.GENERAL:
        raise ValueError("normalize_f2 requires the F2 integrality conditions")
    s = []
    d_shared = None
    for c in w.v:
        if c.is_zero():
            s.append(0)
            continue
        sq = c.square()
        si, di = squarefree_decompose(sq.numerator)  # F2 forces sq integral
        if d_shared is None:
            d_shared = di
        elif d_shared != di:
            raise ValueError("mixed radicands cannot satisfy the F2 cross conditions")
        s.append(si if c.sign() > 0 else -si)
    g = 0
    for si in s:
        g = math.gcd(g, abs(si))
    p = Radical(g, d_shared)
    r = tuple(si // g for si in s)
    two_v0_p = Radical(2) * w.v0 * p
    if not (two_v0_p.is_rational() and _is_int(two_v0_p.r)):
        raise ValueError("2*v0*p failed integrality; input is not F2")
    return p, r


def decompose_f2(w: RadicalVec):
    """Write the rounded cut of an F2 vector as a combination of two BH cuts.

    Returns (bh_minus, lam_minus, bh_plus, lam_plus) with lam_{+,-} >= 0 and
    lam_plus + lam_minus = p^2; the combination matches the beta and alpha
    coefficients exactly and its constant is at most the cut's constant.
    """
    tag = classify_family(w)
    if tag == FamilyTag.GENERAL:
        raise ValueError("decompose_f2 requires an F0/F1/F2 vector")
    p, r = normalize_f2(w)
    # v0/p is rational: zero v0, or shared radicand forced by 2*v0*p integral
    if w.v0.is_zero():
        ratio = Fraction(0)
    else:
        if w.v0.d != p.d:
            raise ValueError("v0 radicand incompatible with p")
        ratio = w.v0.r / p.r
    # integer a with a - 1/2 <= v0/p <= a + 1/2, ties broken downward
    a = math.ceil(ratio - Fraction(1, 2))
    half = Fraction(1, 2)
    r_rad = tuple(Radical(c) for c in r)
    bh_minus = ecg(RadicalVec(Radical(a - half), r_rad))
    bh_plus = ecg(RadicalVec(Radical(a + half), r_rad))
    p_sq = p.square()
    v0_p = (w.v0 * p).r  # rational by the checks above
    lam_minus = half * p_sq + a * p_sq - v0_p
    lam_plus = half * p_sq - a * p_sq + v0_p
    return bh_minus, Radical(lam_minus), bh_plus, Radical(lam_plus)


# ---------------------------------------------------------------------------
# cuts from moment-matrix eigenvectors
# ---------------------------------------------------------------------------

def eigvec_cuts(p: LiftedPoint, max_cuts: int = 8, tol: float = EIG_CUT_TOL,
                err: float = DEFAULT_FLOAT_ERR) -> list:
    """Raw quadratic-form cuts for eigenvectors with eigenvalue below -tol.

    Most negative eigenvalues first; every returned cut is checked to be
    violated at ``p``.  A PSD moment matrix yields the empty list.
    """
    M = p.moment_matrix()
    vals, vecs = sym_eigen(M)
    cuts = []
    for k in range(vals.size):
        if vals[k] >= -tol or len(cuts) >= max_cuts:
            break
        fv = FloatVec(v0=float(vecs[0, k]), v=vecs[1:, k], err=err)
        cut = eigen_cut(fv)
        if evaluate(cut, p) < 0.0:
            cuts.append(cut)
    return cuts


# ---------------------------------------------------------------------------
# bounded Boros-Hammer pool (conjecture probes, representability search)
# ---------------------------------------------------------------------------

def bh_pool(n: int, wbox: int, w0box: int) -> list:
    """All distinct nontrivial BH inequalities with |w_i| <= wbox, |w0| <= w0box."""
    import itertools as it

    seen = {}
    for w0 in range(-w0box, w0box + 1):
        for w in it.product(range(-wbox, wbox + 1), repeat=n):
            q = bh_ineq(w0, w)
            if q.gamma == 0 and all(a == 0 for a in q.alpha) and all(b == 0 for b in q.beta):
                continue
            key = (q.gamma, q.alpha, q.beta)
            if key not in seen:
                seen[key] = q
    return list(seen.values())
