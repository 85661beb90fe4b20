"""Inequality and lifted-point data model, generators, and brute-force oracles.

Inequalities are stored in ">= 0" form with exact rational coefficients:

    sum_{i<j} beta_ij X_ij + sum_i diag_i X_ii + sum_i alpha_i x_i + gamma >= 0

The pair coefficients are kept in a flat tuple in lexicographic pair order.
Inequalities with ``diag == 0`` are the binary-polytope style used by the
facet atlas; diagonal terms only occur in raw eigenvector cuts.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .numerics import (
    LpNumericalError,
    LpProblem,
    LpStatus,
    LpSolution,
    RevisedSimplex,
    exact_standard_lp,
)

VIOLATION_EPS = 1e-9  # strict LHS below -eps counts as a violation
ENUM_CAP = 24         # 2^n enumeration guard


def n_pairs(n: int) -> int:
    return n * (n - 1) // 2


def pair_index(i: int, j: int, n: int) -> int:
    """Flat index of the (i, j) pair, 0-based, i < j, lexicographic order."""
    if not 0 <= i < j < n:
        raise IndexError(f"bad pair ({i}, {j}) for n={n}")
    return i * n - i * (i + 1) // 2 + (j - i - 1)


def iter_pairs(n: int):
    return itertools.combinations(range(n), 2)


def _fracs(seq, count, what):
    out = tuple(Fraction(v) for v in seq)
    if len(out) != count:
        raise ValueError(f"{what}: expected {count} entries, got {len(out)}")
    return out


@dataclass(frozen=True)
class LinearIneq:
    """One valid inequality over the lifted (x, X) space, in >= 0 form."""

    n: int
    gamma: Fraction
    alpha: tuple
    beta: tuple
    diag: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "gamma", Fraction(self.gamma))
        object.__setattr__(self, "alpha", _fracs(self.alpha, self.n, "alpha"))
        object.__setattr__(self, "beta", _fracs(self.beta, n_pairs(self.n), "beta"))
        d = self.diag if self.diag is not None else (0,) * self.n
        object.__setattr__(self, "diag", _fracs(d, self.n, "diag"))

    @property
    def is_bqp_style(self) -> bool:
        return all(v == 0 for v in self.diag)

    def beta_at(self, i: int, j: int) -> Fraction:
        if i > j:
            i, j = j, i
        return self.beta[pair_index(i, j, self.n)]

    def coeff_vector(self) -> np.ndarray:
        """Non-constant coefficients (beta, diag, alpha) as floats."""
        return np.array([float(v) for v in self.beta]
                        + [float(v) for v in self.diag]
                        + [float(v) for v in self.alpha])

    def scaled(self, factor) -> "LinearIneq":
        f = Fraction(factor)
        if f <= 0:
            raise ValueError("only positive rescaling preserves orientation")
        return LinearIneq(self.n, self.gamma * f,
                          tuple(a * f for a in self.alpha),
                          tuple(b * f for b in self.beta),
                          tuple(d * f for d in self.diag))

    def lifted_to(self, n: int, indices) -> "LinearIneq":
        """Embed this inequality into ambient dimension n via an index map."""
        idx = list(indices)
        if len(idx) != self.n or len(set(idx)) != self.n:
            raise ValueError("index map size mismatch")
        alpha = [Fraction(0)] * n
        diag = [Fraction(0)] * n
        beta = [Fraction(0)] * n_pairs(n)
        for a, g in enumerate(idx):
            alpha[g] = self.alpha[a]
            diag[g] = self.diag[a]
        for a, b in iter_pairs(self.n):
            ga, gb = idx[a], idx[b]
            if ga > gb:
                ga, gb = gb, ga
            beta[pair_index(ga, gb, n)] = self.beta[pair_index(a, b, self.n)]
        return LinearIneq(n, self.gamma, tuple(alpha), tuple(beta), tuple(diag))

    def eval_binary(self, x) -> Fraction:
        """Exact LHS at a binary point with X = x x^T (including diagonal)."""
        total = self.gamma
        for i, xv in enumerate(x):
            if xv:
                total += self.alpha[i] + self.diag[i]
        for (i, j), b in zip(iter_pairs(self.n), self.beta):
            if b and x[i] and x[j]:
                total += b
        return total

    def __str__(self):
        return format_ineq(self)


@dataclass
class LiftedPoint:
    """A pair (x, X) with x in [0,1]^n and X symmetric (diagonal included)."""

    x: np.ndarray
    X: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.X = np.asarray(self.X, dtype=float)
        n = self.x.size
        if self.X.shape != (n, n):
            raise ValueError("X must be n x n")
        self.X = 0.5 * (self.X + self.X.T)

    @property
    def n(self) -> int:
        return self.x.size

    @classmethod
    def rank_one(cls, x) -> "LiftedPoint":
        x = np.asarray(x, dtype=float)
        return cls(x=x, X=np.outer(x, x))

    def moment_matrix(self) -> np.ndarray:
        n = self.n
        M = np.empty((n + 1, n + 1))
        M[0, 0] = 1.0
        M[0, 1:] = self.x
        M[1:, 0] = self.x
        M[1:, 1:] = self.X
        return M

    def restrict(self, indices) -> "LiftedPoint":
        idx = np.asarray(list(indices), dtype=int)
        return LiftedPoint(x=self.x[idx], X=self.X[np.ix_(idx, idx)])


@dataclass
class QcqpInstance:
    """min x'Q0 x + c0'x  s.t.  x'Qi x + ci'x + di (<= or ==) 0,  x in [0,1]^n."""

    n: int
    Q0: np.ndarray
    c0: np.ndarray
    constraints: list = field(default_factory=list)  # (Qi, ci, di, sense)
    name: str = ""

    def __post_init__(self):
        self.Q0 = np.asarray(self.Q0, dtype=float)
        self.c0 = np.asarray(self.c0, dtype=float)
        if self.Q0.shape != (self.n, self.n) or self.c0.size != self.n:
            raise ValueError("objective dimensions do not match n")
        if not np.allclose(self.Q0, self.Q0.T, atol=1e-12):
            raise ValueError("Q0 must be symmetric")
        norm = []
        for entry in self.constraints:
            Qi, ci, di = entry[0], entry[1], entry[2]
            sense = entry[3] if len(entry) > 3 else "<="
            Qi = np.asarray(Qi, dtype=float)
            ci = np.asarray(ci, dtype=float)
            if Qi.shape != (self.n, self.n) or not np.allclose(Qi, Qi.T, atol=1e-12):
                raise ValueError("constraint matrix must be symmetric n x n")
            if sense not in ("<=", "=="):
                raise ValueError(f"bad constraint sense {sense!r}")
            norm.append((Qi, ci, float(di), sense))
        self.constraints = norm

    def objective_at(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(x @ self.Q0 @ x + self.c0 @ x)


# ---------------------------------------------------------------------------
# evaluation / depth
# ---------------------------------------------------------------------------

def evaluate(ineq: LinearIneq, p: LiftedPoint) -> float:
    """LHS of the >= 0 form at a lifted point."""
    if ineq.n != p.n:
        raise ValueError(f"dimension mismatch: ineq n={ineq.n}, point n={p.n}")
    total = float(ineq.gamma)
    total += float(np.dot([float(a) for a in ineq.alpha], p.x))
    d = [float(v) for v in ineq.diag]
    if any(d):
        total += float(np.dot(d, np.diag(p.X)))
    for (i, j), b in zip(iter_pairs(ineq.n), ineq.beta):
        if b:
            total += float(b) * p.X[i, j]
    return total


def depth(ineq: LinearIneq, p: LiftedPoint) -> float:
    """Violation magnitude over the Euclidean norm of the non-constant part.

    Non-violating points (LHS >= -1e-9) get depth 0; depth is invariant
    under positive rescaling of the inequality.
    """
    lhs = evaluate(ineq, p)
    if lhs >= -VIOLATION_EPS:
        return 0.0
    g = ineq.coeff_vector()
    nrm = float(np.linalg.norm(g))
    if nrm == 0.0:
        raise ValueError("constant inequality cannot be violated")
    return -lhs / nrm


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def _bqp_ineq(n, gamma, alpha_map, beta_map) -> LinearIneq:
    alpha = [Fraction(0)] * n
    beta = [Fraction(0)] * n_pairs(n)
    for i, v in alpha_map.items():
        alpha[i] = Fraction(v)
    for (i, j), v in beta_map.items():
        beta[pair_index(i, j, n)] = Fraction(v)
    return LinearIneq(n, Fraction(gamma), tuple(alpha), tuple(beta))


def mccormick_ineqs(n: int) -> list:
    """The four McCormick inequalities per pair, in >= 0 form."""
    if n < 2:
        raise ValueError("McCormick needs n >= 2")
    out = []
    for i, j in iter_pairs(n):
        out.append(_bqp_ineq(n, 0, {}, {(i, j): 1}))                       # X >= 0
        out.append(_bqp_ineq(n, 0, {i: 1}, {(i, j): -1}))                  # X <= x_i
        out.append(_bqp_ineq(n, 0, {j: 1}, {(i, j): -1}))                  # X <= x_j
        out.append(_bqp_ineq(n, 1, {i: -1, j: -1}, {(i, j): 1}))           # X >= x_i+x_j-1
    return out


def triangle_ineqs(n: int) -> list:
    """The four triangle inequalities per index triple, in >= 0 form."""
    if n < 3:
        raise ValueError("triangle needs n >= 3")
    out = []
    for i, j, k in itertools.combinations(range(n), 3):
        out.append(_bqp_ineq(n, 0, {k: 1}, {(i, j): 1, (i, k): -1, (j, k): -1}))
        out.append(_bqp_ineq(n, 0, {j: 1}, {(i, k): 1, (i, j): -1, (j, k): -1}))
        out.append(_bqp_ineq(n, 0, {i: 1}, {(j, k): 1, (i, j): -1, (i, k): -1}))
        out.append(_bqp_ineq(n, 1, {i: -1, j: -1, k: -1},
                             {(i, j): 1, (i, k): 1, (j, k): 1}))
    return out


# ---------------------------------------------------------------------------
# brute-force binary oracles
# ---------------------------------------------------------------------------

def _int_scaled(values) -> tuple[list[int], int]:
    """Common-denominator integer image of a list of Fractions."""
    denom = 1
    for v in values:
        denom = denom * v.denominator // math.gcd(denom, v.denominator)
    return [int(v * denom) for v in values], denom


def _binary_matrix(n: int, lo: int, hi: int) -> np.ndarray:
    idx = np.arange(lo, hi, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n)) & 1).astype(np.int64)


def is_valid_bqp(ineq: LinearIneq) -> bool:
    """Exact test over all binary points with X_ij = x_i x_j.

    Requires a BQP-style inequality (no diagonal terms) and n <= 24.
    """
    if not ineq.is_bqp_style:
        raise ValueError("is_valid_bqp requires diag == 0")
    n = ineq.n
    if n > ENUM_CAP:
        raise ValueError(f"enumeration capped at n <= {ENUM_CAP}")
    coeffs, _ = _int_scaled([ineq.gamma] + list(ineq.alpha) + list(ineq.beta))
    gamma, alpha = coeffs[0], coeffs[1:1 + n]
    beta = coeffs[1 + n:]
    B = np.zeros((n, n), dtype=np.int64)
    for (i, j), b in zip(iter_pairs(n), beta):
        B[i, j] = b
    bound = abs(gamma) + sum(abs(a) for a in alpha) + sum(abs(b) for b in beta)
    if bound >= 2**62:
        return all(ineq.eval_binary(x) >= 0
                   for x in itertools.product((0, 1), repeat=n))
    a = np.array(alpha, dtype=np.int64)
    chunk = 1 << min(n, 18)
    for lo in range(0, 1 << n, chunk):
        V = _binary_matrix(n, lo, min(lo + chunk, 1 << n))
        vals = ((V @ B) * V).sum(axis=1) + V @ a + gamma
        if vals.min() < 0:
            return False
    return True


def binary_qp_optimum(inst: QcqpInstance) -> tuple[float, np.ndarray]:
    """Exhaustive min of x'Q0 x + c0'x over binary x (n <= 24)."""
    n = inst.n
    if n > ENUM_CAP:
        raise ValueError(f"enumeration capped at n <= {ENUM_CAP}")
    best = math.inf
    arg = None
    chunk = 1 << min(n, 18)
    for lo in range(0, 1 << n, chunk):
        V = _binary_matrix(n, lo, min(lo + chunk, 1 << n)).astype(float)
        vals = ((V @ inst.Q0) * V).sum(axis=1) + V @ inst.c0
        k = int(np.argmin(vals))
        if vals[k] < best:
            best = float(vals[k])
            arg = V[k].copy()
    return best, arg


# ---------------------------------------------------------------------------
# cone domination (coefficient matching)
# ---------------------------------------------------------------------------

class DominationError(Exception):
    """LP machinery failed; distinct from a definite 'not dominated' answer."""


def _matching_system(target: LinearIneq, generators):
    """Rows: beta and alpha coefficient matching; last row is the gamma bound."""
    k = len(generators)
    rows = []
    rhs = []
    for t in range(n_pairs(target.n)):
        rows.append([g.beta[t] for g in generators])
        rhs.append(target.beta[t])
    for i in range(target.n):
        rows.append([g.alpha[i] for g in generators])
        rhs.append(target.alpha[i])
    grow = [g.gamma for g in generators]
    return rows, rhs, grow, k


def dominated_by_cone(target: LinearIneq, generators, exact: str = "auto"):
    """Does a nonnegative combination of the generators imply the target?

    Matching is exact on the beta and alpha coefficients with combined
    constant at most gamma_target.  Returns (True, multipliers) or
    (False, None).  ``exact`` controls the rational refinement pass:
    "auto" reruns in exact arithmetic near the feasibility boundary,
    "always"/"never" force the choice.
    """
    if not target.is_bqp_style or any(not g.is_bqp_style for g in generators):
        raise ValueError("cone domination is defined for diag == 0 inequalities")
    if any(g.n != target.n for g in generators):
        raise ValueError("generator dimension mismatch")
    if not generators:
        return False, None
    rows, rhs, grow, k = _matching_system(target, generators)

    def exact_pass():
        # standard form: equalities plus slack on the gamma row
        A = [[Fraction(v) for v in row] + [Fraction(0)] for row in rows]
        A.append([Fraction(v) for v in grow] + [Fraction(1)])
        b = [Fraction(v) for v in rhs] + [Fraction(target.gamma)]
        status, x, _ = exact_standard_lp([Fraction(0)] * (k + 1), A, b)
        if status == LpStatus.OPTIMAL:
            return True, x[:k]
        return False, None

    if exact == "always":
        return exact_pass()

    A = np.array([[float(v) for v in row] for row in rows]
                 + [[float(v) for v in grow]])
    b = np.array([float(v) for v in rhs] + [float(target.gamma)])
    senses = ["="] * len(rows) + ["<"]
    prob = LpProblem(c=np.zeros(k), A=A, senses=senses, b=b,
                     lb=np.zeros(k), ub=np.full(k, np.inf))
    try:
        sol = RevisedSimplex(prob).solve()
    except LpNumericalError as exc:
        raise DominationError(str(exc)) from exc
    if sol.status == LpStatus.ITER_LIMIT:
        raise DominationError("simplex iteration cap in domination test")
    if sol.status == LpStatus.OPTIMAL:
        lam = np.maximum(sol.x, 0.0)
        resid = float(np.abs(A[:-1] @ lam - b[:-1]).max(initial=0.0))
        slack = float(target.gamma) - float(A[-1] @ lam)
        if exact == "never" or (resid <= 1e-9 and slack >= -1e-9):
            return True, lam
        return exact_pass()
    if exact == "never":
        return False, None
    # float says infeasible: confirm exactly (borderline systems do occur)
    return exact_pass()


def verify_domination(target: LinearIneq, generators, multipliers) -> float:
    """Max residual of the coefficient matching for given multipliers."""
    rows, rhs, grow, _ = _matching_system(target, generators)
    worst = 0.0
    for row, r in zip(rows, rhs):
        worst = max(worst, abs(float(np.dot([float(v) for v in row], multipliers)) - float(r)))
    gap = float(np.dot([float(v) for v in grow], multipliers)) - float(target.gamma)
    return max(worst, gap)


# ---------------------------------------------------------------------------
# text form
# ---------------------------------------------------------------------------

def _fmt_frac(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def format_ineq(ineq: LinearIneq) -> str:
    """`n; gamma; alpha[...]; beta[(i,j)=v ...]` with 1-based pairs."""
    alpha = " ".join(_fmt_frac(a) for a in ineq.alpha)
    beta = " ".join(f"({i + 1},{j + 1})={_fmt_frac(b)}"
                    for (i, j), b in zip(iter_pairs(ineq.n), ineq.beta) if b)
    text = f"{ineq.n}; {_fmt_frac(ineq.gamma)}; alpha[{alpha}]; beta[{beta}]"
    if not ineq.is_bqp_style:
        text += "; diag[" + " ".join(_fmt_frac(d) for d in ineq.diag) + "]"
    return text


_PAIR_RE = re.compile(r"\((\d+),(\d+)\)=([^\s\]]+)")


def parse_ineq(text: str) -> LinearIneq:
    body = text.split("#", 1)[0].strip()
    parts = [p.strip() for p in body.split(";")]
    if len(parts) < 4:
        raise ValueError(f"malformed inequality line: {text!r}")
    n = int(parts[0])
    gamma = Fraction(parts[1])

    def bracket(payload, tag):
        if not payload.startswith(tag + "[") or not payload.endswith("]"):
            raise ValueError(f"expected {tag}[...] in {text!r}")
        return payload[len(tag) + 1:-1].strip()

    alpha_body = bracket(parts[2], "alpha")
    alpha = tuple(Fraction(v) for v in alpha_body.split()) if alpha_body else ()
    if len(alpha) != n:
        raise ValueError(f"alpha length {len(alpha)} != n={n}")
    beta = [Fraction(0)] * n_pairs(n)
    for i_s, j_s, v_s in _PAIR_RE.findall(bracket(parts[3], "beta")):
        i, j = int(i_s) - 1, int(j_s) - 1
        beta[pair_index(i, j, n)] = Fraction(v_s)
    diag = None
    if len(parts) > 4 and parts[4]:
        diag_body = bracket(parts[4], "diag")
        diag = tuple(Fraction(v) for v in diag_body.split())
    return LinearIneq(n, gamma, alpha, tuple(beta), diag)
