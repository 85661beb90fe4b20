"""Non-representability certificates for candidate facets.

Two automated arguments show that an integer inequality cannot be a positive
multiple of any rounded eigenvector cut:

* sign-pattern: the signs of the pair coefficients force sign(v_i) patterns
  that are jointly unsatisfiable (propagation over the +/- edge graph, with
  zero coefficients contributing "not both same nonzero sign" constraints);

* 2x2 ratio: for four indices, the two products beta_ij*beta_kl and
  beta_ik*beta_jl of the unrounded values must coincide, but the ceiling
  relations confine them to interval families (polynomials in the integer
  rescaling factor) that never intersect.

A bounded exhaustive search for a Boros-Hammer representation complements
the certificates; batch classification applies representation, sign, and
ratio in that order and buckets a whole atlas.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from .atlas import FacetAtlas, canonicalize
from .eigencg import bh_ineq
from .ineq import LinearIneq, iter_pairs, n_pairs, pair_index

DEFAULT_LAMBDA_MAX = 10**4
_GRID_HORIZON = 64  # explicit lambdas; the exact quadratic tail covers the rest


class CertStatus(Enum):
    CERTIFIED_NON_ECG = "CERTIFIED_NON_ECG"
    INCONCLUSIVE = "INCONCLUSIVE"

    def __str__(self):
        return self.value


@dataclass
class CertResult:
    status: CertStatus
    method: str = ""
    witness: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.status == CertStatus.CERTIFIED_NON_ECG


def _require_canonical_bqp(ineq: LinearIneq):
    if not ineq.is_bqp_style:
        raise ValueError("certification tests require diag == 0")
    coeffs = [ineq.gamma] + list(ineq.alpha) + list(ineq.beta)
    if any(v.denominator != 1 for v in coeffs):
        raise ValueError("certification tests require integer coefficients")


# ---------------------------------------------------------------------------
# sign-pattern test
# ---------------------------------------------------------------------------

class _ParityUF:
    """Union-find tracking relative sign parity (0 same, 1 opposite)."""

    def __init__(self, n):
        self.parent = list(range(n))
        self.par = [0] * n

    def find(self, i):
        path = []
        while self.parent[i] != i:
            path.append(i)
            i = self.parent[i]
        p = 0
        for node in reversed(path):
            p ^= self.par[node]
            self.parent[node] = i
            self.par[node] = p
        return i, self.par[path[0]] if path else 0

    def relation(self, i, j):
        ri, pi = self.find(i)
        rj, pj = self.find(j)
        if ri != rj:
            return None
        return pi ^ pj

    def union(self, i, j, parity) -> bool:
        """Returns False on contradiction."""
        ri, pi = self.find(i)
        rj, pj = self.find(j)
        if ri == rj:
            return (pi ^ pj) == parity
        self.parent[rj] = ri
        self.par[rj] = pi ^ pj ^ parity
        return True


def _sign_edge_path(adj, src, dst, skip=None):
    """BFS path of +/- edges from src to dst (used as a witness chain)."""
    prev = {src: None}
    queue = [src]
    while queue:
        u = queue.pop(0)
        if u == dst:
            break
        for v, sign in adj.get(u, []):
            if (u, v) == skip or (v, u) == skip:
                continue
            if v not in prev:
                prev[v] = (u, sign)
                queue.append(v)
    if dst not in prev:
        return []
    path = []
    node = dst
    while prev[node] is not None:
        u, sign = prev[node]
        path.append((u, node, sign))
        node = u
    return list(reversed(path))


def sign_pattern_test(ineq: LinearIneq) -> CertResult:
    """Decide satisfiability of the sign constraints implied by the betas.

    beta > 0 forces v_i v_j > 0, beta < 0 forces v_i v_j < 0, and beta = 0
    forces v_i v_j <= 0 (one of the pair zero, or opposite signs).  Vertices
    touching a nonzero edge are forced nonzero; everything else can be set
    to zero, so only those constraints matter.
    """
    _require_canonical_bqp(ineq)
    n = ineq.n
    uf = _ParityUF(n)
    adj = {}
    zero_pairs = []
    for (i, j), b in zip(iter_pairs(n), ineq.beta):
        if b == 0:
            zero_pairs.append((i, j))
            continue
        parity = 0 if b > 0 else 1
        adj.setdefault(i, []).append((j, parity))
        adj.setdefault(j, []).append((i, parity))
        if not uf.union(i, j, parity):
            cycle = _sign_edge_path(adj, i, j, skip=(i, j))
            return CertResult(CertStatus.CERTIFIED_NON_ECG, "sign-pattern",
                              {"kind": "odd-cycle", "closing_pair": (i + 1, j + 1),
                               "path": [(a + 1, b_ + 1, s) for a, b_, s in cycle]})
    forced = set(adj)
    meta = _ParityUF(n)  # flip parities of the +/- components, indexed by roots
    for i, j in zero_pairs:
        if i not in forced or j not in forced:
            continue  # a zero assignment satisfies v_i v_j <= 0
        rel = uf.relation(i, j)
        if rel is not None:
            if rel == 0:  # same component, propagation forces equal signs
                chain = _sign_edge_path(adj, i, j)
                return CertResult(CertStatus.CERTIFIED_NON_ECG, "sign-pattern",
                                  {"kind": "same-sign-chain",
                                   "zero_pair": (i + 1, j + 1),
                                   "path": [(a + 1, b_ + 1, s) for a, b_, s in chain]})
            continue
        ri, pi = uf.find(i)
        rj, pj = uf.find(j)
        # flips must make the endpoint signs differ
        if not meta.union(ri, rj, 1 ^ pi ^ pj):
            return CertResult(CertStatus.CERTIFIED_NON_ECG, "sign-pattern",
                              {"kind": "component-flip-conflict",
                               "zero_pair": (i + 1, j + 1)})
    return CertResult(CertStatus.INCONCLUSIVE, "sign-pattern")


# ---------------------------------------------------------------------------
# 2x2 multiplicative ratio test
# ---------------------------------------------------------------------------

def _product_hull(c1: int, c2: int, lam: np.ndarray):
    """Elementwise closed hull of (c1*l - 1, c1*l] * (c2*l - 1, c2*l]."""
    lo1, hi1 = c1 * lam - 1, c1 * lam
    lo2, hi2 = c2 * lam - 1, c2 * lam
    prods = np.stack([lo1 * lo2, lo1 * hi2, hi1 * lo2, hi1 * hi2])
    return prods.min(axis=0), prods.max(axis=0)


def _hull_poly(c1: int, c2: int):
    """Exact hull endpoints as quadratics a*l^2 + b*l + c for large l.

    For l beyond every crossing of the four endpoint products, the hull is
    spanned by a fixed pair of them; taking min/max of the coefficient
    triples lexicographically is valid once l is large enough, which the
    caller guarantees by checking small l on the explicit grid.
    """
    polys = [(c1 * c2, 0, 0), (c1 * c2, -c1, 0), (c1 * c2, -c2, 0),
             (c1 * c2, -c1 - c2, 1)]
    return min(polys), max(polys)


def _poly_positive_beyond(poly, start: int) -> bool:
    """Is a*l^2 + b*l + c > 0 for every integer l >= start (exact)?"""
    a, b, c = (Fraction(v) for v in poly)

    def val(t):
        return a * t * t + b * t + c

    if a > 0:
        cands = {start}
        vtx = -b / (2 * a)
        for t in (math.floor(vtx), math.ceil(vtx)):
            if t >= start:
                cands.add(t)
        return all(val(t) > 0 for t in cands)
    if a == 0:
        if b > 0:
            return val(start) > 0
        if b == 0:
            return c > 0
        return False
    return False


def ratio_2x2_test(ineq: LinearIneq, lambda_max: int = DEFAULT_LAMBDA_MAX) -> CertResult:
    """Interval-disjointness certificate over quadruples of indices.

    For each 4-set and each pair of its three perfect matchings, the two
    pair-products of the unrounded values must be equal; the ceiling
    relations put them in per-lambda intervals.  Certification requires the
    intervals to be disjoint for every integer rescaling lambda >= 1:
    explicitly on a finite grid and by exact quadratic sign analysis beyond
    it (the grid horizon never weakens the verdict).
    """
    _require_canonical_bqp(ineq)
    if lambda_max < 1:
        raise ValueError("lambda_max must be >= 1")
    n = ineq.n
    beta = {pq: int(ineq.beta[pair_index(*pq, n)]) for pq in iter_pairs(n)}
    horizon = min(lambda_max, _GRID_HORIZON)
    lam = np.arange(1, horizon + 1, dtype=np.int64)
    for quad in itertools.combinations(range(n), 4):
        a, b, c, d = quad
        matchings = [((a, b), (c, d)), ((a, c), (b, d)), ((a, d), (b, c))]
        for mA, mB in itertools.combinations(matchings, 2):
            cA = (beta[mA[0]], beta[mA[1]])
            cB = (beta[mB[0]], beta[mB[1]])
            loA, hiA = _product_hull(cA[0], cA[1], lam)
            loB, hiB = _product_hull(cB[0], cB[1], lam)
            grid_ok = bool(np.all((hiA < loB) | (hiB < loA)))
            if not grid_ok:
                continue
            # exact tail: one side must stay strictly above the other
            loA_p, hiA_p = _hull_poly(cA[0], cA[1])
            loB_p, hiB_p = _hull_poly(cB[0], cB[1])
            gap_ab = tuple(x - y for x, y in zip(loB_p, hiA_p))
            gap_ba = tuple(x - y for x, y in zip(loA_p, hiB_p))
            if (_poly_positive_beyond(gap_ab, horizon + 1)
                    or _poly_positive_beyond(gap_ba, horizon + 1)):
                return CertResult(
                    CertStatus.CERTIFIED_NON_ECG, "ratio-2x2",
                    {"quadruple": tuple(q + 1 for q in quad),
                     "pairing_a": tuple((p + 1, q + 1) for p, q in mA),
                     "pairing_b": tuple((p + 1, q + 1) for p, q in mB),
                     "leading": (cA[0] * cA[1], cB[0] * cB[1]),
                     "grid_checked": int(horizon)})
    return CertResult(CertStatus.INCONCLUSIVE, "ratio-2x2")


# ---------------------------------------------------------------------------
# bounded Boros-Hammer representability
# ---------------------------------------------------------------------------

def _bh_matches(target: LinearIneq, w0: int, w, lam: int) -> bool:
    q = bh_ineq(w0, w)
    return (q.gamma == lam * target.gamma
            and all(q.alpha[i] == lam * target.alpha[i] for i in range(target.n))
            and all(q.beta[t] == lam * target.beta[t] for t in range(n_pairs(target.n))))


def bh_representable(ineq: LinearIneq, box: int = 4):
    """Search integer (w0, w), |w_i| <= box, |w0| <= box+1, and integer
    lambda >= 1 with the BH inequality equal to lambda * ineq.

    The pair coefficients pin the component structure of w: within a
    connected component of the nonzero-beta graph, one anchor value
    determines everything by exact division, so the search is a small
    product of anchor choices instead of a full box scan.

    Returns (True, (w0, w, lam)) or (False, None).
    """
    _require_canonical_bqp(ineq)
    n = ineq.n
    beta = {pq: int(ineq.beta[pair_index(*pq, n)]) for pq in iter_pairs(n)}
    alpha = [int(v) for v in ineq.alpha]
    gamma = int(ineq.gamma)
    nz = [pq for pq, v in beta.items() if v]
    max_beta = max((abs(beta[pq]) for pq in nz), default=0)
    lam_cap = (2 * box * box) // max_beta if max_beta else 2 * box * box
    adj = {}
    for i, j in nz:
        adj.setdefault(i, []).append(j)
        adj.setdefault(j, []).append(i)
    comps = []
    seen = set()
    for i in sorted(adj):
        if i in seen:
            continue
        comp = []
        stack = [i]
        seen.add(i)
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        comps.append(sorted(comp))
    loose = [i for i in range(n) if i not in seen]

    def propagate(lam, anchor_vals):
        w = [None] * n
        for comp, aval in zip(comps, anchor_vals):
            w[comp[0]] = aval
            stack = [comp[0]]
            while stack:
                u = stack.pop()
                for v in adj[u]:
                    prod2 = lam * beta[(u, v) if u < v else (v, u)]
                    if prod2 % 2 or prod2 % (2 * w[u]):
                        return None
                    cand = prod2 // (2 * w[u])
                    if w[v] is None:
                        if abs(cand) > box or cand == 0:
                            return None
                        w[v] = cand
                        stack.append(v)
                    elif w[v] != cand:
                        return None
        # w0 from the first nonzero coordinate's alpha relation
        pivot = comps[0][0]
        num = lam * alpha[pivot]
        if num % w[pivot]:
            return None
        t = num // w[pivot] + 1 - w[pivot]
        if t % 2:
            return None
        w0 = t // 2
        if abs(w0) > box + 1:
            return None
        if w0 * (w0 - 1) != lam * gamma:
            return None
        # alphas of the remaining components and isolated indices
        for comp in comps[1:]:
            for i in comp:
                if w[i] * (w[i] + 2 * w0 - 1) != lam * alpha[i]:
                    return None
        for i in comps[0]:
            if w[i] * (w[i] + 2 * w0 - 1) != lam * alpha[i]:
                return None
        for i in loose:
            for cand in range(-box, box + 1):
                if cand * (cand + 2 * w0 - 1) == lam * alpha[i]:
                    w[i] = cand
                    break
            else:
                return None
        return w0, w

    if not comps:
        # no pair terms at all: w has at most one nonzero entry
        for lam in range(1, 2 * box * box + 1):
            for i in list(range(n)) + [None]:
                for val in (range(-box, box + 1) if i is not None else [0]):
                    if i is not None and val == 0:
                        continue
                    for w0 in range(-box - 1, box + 2):
                        w = [0] * n
                        if i is not None:
                            w[i] = val
                        if _bh_matches(ineq, w0, w, lam):
                            return True, (w0, tuple(w), lam)
        return False, None

    anchor_ranges = [[v for v in range(-box, box + 1) if v != 0] for _ in comps]
    for lam in range(1, max(lam_cap, 1) + 1):
        for anchor_vals in itertools.product(*anchor_ranges):
            got = propagate(lam, list(anchor_vals))
            if got is None:
                continue
            w0, w = got
            if _bh_matches(ineq, w0, w, lam):
                return True, (w0, tuple(w), lam)
    return False, None


# ---------------------------------------------------------------------------
# batch classification
# ---------------------------------------------------------------------------

@dataclass
class CertifyReport:
    n: int
    buckets: list            # per facet: (facet_id, bucket, witness)
    bh_count: int = 0
    sign_certified: int = 0
    ratio_certified: int = 0
    inconclusive: int = 0

    def summary(self) -> dict:
        return {"n": self.n, "total": len(self.buckets),
                "bh_count": self.bh_count, "sign_certified": self.sign_certified,
                "ratio_certified": self.ratio_certified,
                "inconclusive": self.inconclusive}


def certify_batch(atlas: FacetAtlas, box: int = 4,
                  lambda_max: int = DEFAULT_LAMBDA_MAX, progress=None) -> CertifyReport:
    """Bucket every atlas facet: BH-representable, sign-certified,
    ratio-certified, or inconclusive (tests applied in that order)."""
    report = CertifyReport(n=atlas.n, buckets=[])
    for fid, facet in enumerate(atlas.facets):
        facet = canonicalize(facet)
        ok, wit = bh_representable(facet, box=box)
        if ok:
            report.bh_count += 1
            w0, w, lam = wit
            report.buckets.append((fid, "bh", {"w0": w0, "w": list(w), "lambda": lam}))
        else:
            res = sign_pattern_test(facet)
            if res.certified:
                report.sign_certified += 1
                report.buckets.append((fid, "sign", res.witness))
            else:
                res = ratio_2x2_test(facet, lambda_max=lambda_max)
                if res.certified:
                    report.ratio_certified += 1
                    report.buckets.append((fid, "ratio", res.witness))
                else:
                    report.inconclusive += 1
                    report.buckets.append((fid, "inconclusive", {}))
        if progress and (fid + 1) % 500 == 0:
            progress(fid + 1, len(atlas.facets), report.summary())
    return report


def write_certify_report(report: CertifyReport, csv_path: str,
                         json_path: str | None = None) -> None:
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["facet_id", "bucket", "witness"])
        for fid, bucket, witness in report.buckets:
            writer.writerow([fid, bucket, json.dumps(witness, sort_keys=True)])
    if json_path:
        with open(json_path, "w") as fh:
            json.dump(report.summary(), fh, indent=2, sort_keys=True)
            fh.write("\n")
