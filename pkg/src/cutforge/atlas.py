"""Exact facet enumeration of the small binary quadric polytopes.

Facets of conv{(x, x_i x_j) : x binary} are computed by the double
description method applied to the polar cone of the homogenized vertex set:
extreme rays of {c : c . (1, v) >= 0 for all vertices v} are exactly the
facets.  All arithmetic is integer (rays are gcd-reduced after every
combination step), so the output is a complete and exact facet list, which
is then persisted as a canonical text atlas and used as a separation lookup
table over index subsets.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .ineq import (
    LiftedPoint,
    LinearIneq,
    format_ineq,
    iter_pairs,
    n_pairs,
    pair_index,
    parse_ineq,
)

ATLAS_MAGIC = "BQPATLAS"
ATLAS_VERSION = "v1"
VERTEX_CAP = 6


class AtlasError(Exception):
    pass


@dataclass
class FacetAtlas:
    n: int
    facets: list
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.facets)

    def matrix(self) -> np.ndarray:
        """Rows [gamma, alpha..., beta...] as floats, for bulk evaluation."""
        k = self.n
        m = np.empty((len(self.facets), 1 + k + n_pairs(k)))
        for r, f in enumerate(self.facets):
            m[r, 0] = float(f.gamma)
            m[r, 1:1 + k] = [float(a) for a in f.alpha]
            m[r, 1 + k:] = [float(b) for b in f.beta]
        return m

    def checksum(self) -> str:
        body = "\n".join(format_ineq(f) for f in self.facets) + "\n"
        return hashlib.sha256(body.encode()).hexdigest()


# ---------------------------------------------------------------------------
# vertices and homogenized rows
# ---------------------------------------------------------------------------

def bqp_vertices(n: int) -> list:
    """All 2^n binary points lifted to (x, X_pairs) coordinates."""
    if not 1 <= n <= VERTEX_CAP:
        raise ValueError(f"vertex enumeration supports 1 <= n <= {VERTEX_CAP}")
    out = []
    for bits in itertools.product((0, 1), repeat=n):
        coords = list(bits) + [bits[i] * bits[j] for i, j in iter_pairs(n)]
        out.append(np.array(coords, dtype=np.int64))
    return out


def _vertex_rows(n: int) -> np.ndarray:
    verts = bqp_vertices(n)
    return np.array([[1] + list(v) for v in verts], dtype=np.int64)


# ---------------------------------------------------------------------------
# exact linear algebra helpers
# ---------------------------------------------------------------------------

def _exact_rank(rows) -> int:
    """Rank over Q of a small integer matrix (fraction-free elimination)."""
    mat = [[Fraction(int(v)) for v in row] for row in rows]
    rank = 0
    ncols = len(mat[0]) if mat else 0
    for col in range(ncols):
        piv = None
        for r in range(rank, len(mat)):
            if mat[r][col] != 0:
                piv = r
                break
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        pr = mat[rank]
        for r in range(rank + 1, len(mat)):
            if mat[r][col] != 0:
                f = mat[r][col] / pr[col]
                mat[r] = [a - f * b for a, b in zip(mat[r], pr)]
        rank += 1
        if rank == min(len(mat), ncols):
            break
    return rank


def _independent_rows(rows: np.ndarray, d: int) -> list:
    """Greedy selection of d linearly independent rows (exact)."""
    chosen = []
    rank = 0
    for i in range(rows.shape[0]):
        cand = chosen + [i]
        if _exact_rank(rows[cand]) > rank:
            chosen = cand
            rank += 1
            if rank == d:
                return chosen
    raise AtlasError("vertex rows do not span; polytope is not full-dimensional")


def _invert_to_integer_columns(M: np.ndarray) -> list:
    """Columns of M^-1, scaled to integer vectors with positive pivot dots."""
    d = M.shape[0]
    A = [[Fraction(int(M[i, j])) for j in range(d)] + [Fraction(int(i == k)) for k in range(d)]
         for i in range(d)]
    # Gauss-Jordan over Fractions
    for col in range(d):
        piv = next(r for r in range(col, d) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        pv = A[col][col]
        A[col] = [v / pv for v in A[col]]
        for r in range(d):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
    cols = []
    for k in range(d):
        colvals = [A[i][d + k] for i in range(d)]
        denom = 1
        for v in colvals:
            denom = denom * v.denominator // math.gcd(denom, v.denominator)
        ints = [int(v * denom) for v in colvals]
        g = 0
        for v in ints:
            g = math.gcd(g, abs(v))
        cols.append(np.array([v // g for v in ints], dtype=np.int64))
    return cols


def _gcd_reduce(vec: np.ndarray) -> np.ndarray:
    g = 0
    for v in vec:
        g = math.gcd(g, abs(int(v)))
    if g > 1:
        return vec // g
    return vec


# ---------------------------------------------------------------------------
# double description
# ---------------------------------------------------------------------------

def _dd_rays(rows: np.ndarray, checkpoint: str | None = None,
             progress=None) -> list:
    """Extreme rays of {c : rows @ c >= 0} for a full-rank row set.

    Rays carry bitmasks of the rows they satisfy with equality; adjacency of
    a positive/negative pair is the standard combinatorial test (no third
    ray's tight set contains the pair's common tight set).
    """
    nrows, d = rows.shape
    if nrows > 64:
        raise AtlasError("row bitmasks limited to 64 rows")
    done = 0  # count of non-initial rows already inserted
    if checkpoint and os.path.exists(checkpoint):
        with open(checkpoint) as fh:
            state = json.load(fh)
        if state["d"] != d or state["nrows"] != nrows:
            raise AtlasError("checkpoint does not match this enumeration")
        R = [np.array(r, dtype=np.int64) for r in state["rays"]]
        init = list(state["init"])
        done = state["next_row"]
    else:
        init = _independent_rows(rows, d)
        R = _invert_to_integer_columns(rows[init])

    init_set = set(init)
    remaining = [i for i in range(nrows) if i not in init_set]
    processed = init + remaining[:done]

    def masks_for(rays):
        if not rays:
            return np.zeros(0, dtype=np.uint64)
        pm = rows[processed]
        dots = np.array(rays, dtype=np.int64) @ pm.T
        if (dots < 0).any():
            raise AtlasError("ray violates a processed row (arithmetic drift)")
        weights = np.array([np.uint64(1) << np.uint64(p) for p in processed],
                           dtype=np.uint64)
        return (dots == 0).astype(np.uint64) @ weights

    Z = masks_for(R)
    need = d - 2  # common tight rows required for adjacency

    for row_idx in remaining[done:]:
        h = rows[row_idx]
        Rm = np.array(R, dtype=np.int64)
        vals = Rm @ h
        plus = np.nonzero(vals > 0)[0]
        minus = np.nonzero(vals < 0)[0]
        zero = np.nonzero(vals == 0)[0]
        new_rays = []
        if minus.size:
            Zm = Z[minus]
            for r in plus:
                common = Z[r] & Zm
                counts = np.bitwise_count(common)
                for ci in np.nonzero(counts >= need)[0]:
                    s = minus[ci]
                    w = common[ci]
                    # adjacency: only r and s contain the common tight set
                    if int(np.count_nonzero((Z & w) == w)) != 2:
                        continue
                    combo = int(vals[r]) * Rm[s] - int(vals[s]) * Rm[r]
                    new_rays.append(_gcd_reduce(combo))
        keep = list(plus) + list(zero)
        R = [R[i] for i in keep] + new_rays
        processed.append(row_idx)
        done += 1
        Z = masks_for(R)
        if progress:
            progress(len(processed), nrows, len(R))
        if checkpoint:
            tmp = checkpoint + ".tmp"
            with open(tmp, "w") as fh:
                json.dump({"d": d, "nrows": nrows, "init": list(init),
                           "next_row": done,
                           "rays": [[int(v) for v in ray] for ray in R]}, fh)
            os.replace(tmp, checkpoint)
    return R


def _ray_to_ineq(ray: np.ndarray, n: int) -> LinearIneq:
    gamma = int(ray[0])
    alpha = tuple(int(v) for v in ray[1:1 + n])
    beta = tuple(int(v) for v in ray[1 + n:])
    return LinearIneq(n, gamma, alpha, beta)


def enumerate_facets(n: int, long_run: bool = False, checkpoint: str | None = None,
                     progress=None) -> FacetAtlas:
    """Complete facet list of the binary quadric polytope for small n.

    n <= 5 runs in seconds; n = 6 is a multi-hour enumeration and must be
    requested explicitly with ``long_run=True`` (checkpoint strongly
    recommended).
    """
    if n > VERTEX_CAP:
        raise ValueError(f"facet enumeration supports n <= {VERTEX_CAP}")
    if n == 6 and not long_run:
        raise AtlasError("n=6 enumeration is a long-running job; pass long_run=True")
    rows = _vertex_rows(n)
    rays = _dd_rays(rows, checkpoint=checkpoint, progress=progress)
    facets = sorted((canonicalize(_ray_to_ineq(r, n)) for r in rays),
                    key=lambda q: (q.gamma, q.alpha, q.beta))
    atlas = FacetAtlas(n=n, facets=facets,
                       meta={"method": "double-description", "count": len(facets)})
    atlas.meta["sha"] = atlas.checksum()
    return atlas


# ---------------------------------------------------------------------------
# canonical form / facet test
# ---------------------------------------------------------------------------

def canonicalize(ineq: LinearIneq) -> LinearIneq:
    """Integer, gcd-1 image of a rational inequality (orientation kept)."""
    coeffs = [ineq.gamma] + list(ineq.alpha) + list(ineq.beta) + list(ineq.diag)
    if all(v == 0 for v in coeffs):
        raise ValueError("zero inequality has no canonical form")
    denom = 1
    for v in coeffs:
        denom = denom * v.denominator // math.gcd(denom, v.denominator)
    ints = [int(v * denom) for v in coeffs]
    g = 0
    for v in ints:
        g = math.gcd(g, abs(v))
    ints = [v // g for v in ints]
    k = ineq.n
    return LinearIneq(k, ints[0], tuple(ints[1:1 + k]),
                      tuple(ints[1 + k:1 + k + n_pairs(k)]),
                      tuple(ints[1 + k + n_pairs(k):]))


def facetness_check(ineq: LinearIneq, n: int) -> bool:
    """Valid on every vertex and tight on an affinely (dim-1)-dimensional set."""
    if not ineq.is_bqp_style:
        raise ValueError("facetness is defined for diag == 0 inequalities")
    if ineq.n != n:
        raise ValueError("dimension mismatch")
    tight = []
    for v in bqp_vertices(n):
        x = v[:n]
        val = ineq.eval_binary(x)
        if val < 0:
            return False
        if val == 0:
            tight.append(v)
    dim = n + n_pairs(n)
    if len(tight) < dim:
        return False
    base = tight[0]
    diffs = [t - base for t in tight[1:]]
    return _exact_rank(diffs) == dim - 1


# ---------------------------------------------------------------------------
# separation over index subsets
# ---------------------------------------------------------------------------

def atlas_separate(p: LiftedPoint, atlas: FacetAtlas, tol: float = 1e-3,
                   cap: int = 10000, subsets=None, chunk: int = 65536) -> list:
    """Scan index subsets of size atlas.n and collect violated facets.

    Returns [(lifted inequality, violation)] sorted by decreasing violation,
    truncated to ``cap``.  ``subsets`` overrides the default full
    C(n, k) scan (used for the capped random subsampling passes).
    """
    n, k = p.n, atlas.n
    if n < k:
        return []
    fmat = atlas.matrix()
    pairs_k = list(iter_pairs(k))
    found = []  # (violation, subset, facet_row)

    def process(block):
        idx = np.array(block, dtype=np.int64)
        cols = [np.ones(len(block))]
        for a in range(k):
            cols.append(p.x[idx[:, a]])
        for a, b in pairs_k:
            cols.append(p.X[idx[:, a], idx[:, b]])
        P = np.column_stack(cols)
        vals = P @ fmat.T
        rows, facs = np.nonzero(vals < -tol)
        for r, f in zip(rows, facs):
            found.append((float(-vals[r, f]), tuple(int(v) for v in idx[r]), int(f)))

    source = subsets if subsets is not None else itertools.combinations(range(n), k)
    block = []
    for comb in source:
        block.append(comb)
        if len(block) >= chunk:
            process(block)
            block = []
    if block:
        process(block)
    found.sort(key=lambda t: (-t[0], t[1], t[2]))
    out = []
    for viol, subset, f in found[:cap]:
        out.append((atlas.facets[f].lifted_to(n, subset), viol))
    return out


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def save_atlas(atlas: FacetAtlas, path: str) -> None:
    body = "\n".join(format_ineq(f) for f in atlas.facets) + "\n"
    sha = hashlib.sha256(body.encode()).hexdigest()
    header = f"{ATLAS_MAGIC} {ATLAS_VERSION} n={atlas.n} count={len(atlas.facets)} sha={sha}\n"
    with open(path, "w") as fh:
        fh.write(header)
        fh.write(body)
    atlas.meta["sha"] = sha


def load_atlas(path: str) -> FacetAtlas:
    with open(path) as fh:
        header = fh.readline().strip()
        body = fh.read()
    parts = header.split()
    if len(parts) != 5 or parts[0] != ATLAS_MAGIC:
        raise AtlasError(f"not an atlas file: {path}")
    if parts[1] != ATLAS_VERSION:
        raise AtlasError(f"unsupported atlas version {parts[1]}")
    fields = dict(kv.split("=", 1) for kv in parts[2:])
    n = int(fields["n"])
    count = int(fields["count"])
    sha = fields["sha"]
    if hashlib.sha256(body.encode()).hexdigest() != sha:
        raise AtlasError("atlas checksum mismatch (truncated or edited file)")
    facets = [parse_ineq(line) for line in body.splitlines() if line.strip()]
    if len(facets) != count:
        raise AtlasError(f"atlas count mismatch: header {count}, body {len(facets)}")
    if any(f.n != n for f in facets):
        raise AtlasError("facet dimension mismatch inside atlas")
    return FacetAtlas(n=n, facets=facets,
                      meta={"method": "loaded", "count": count, "sha": sha})
