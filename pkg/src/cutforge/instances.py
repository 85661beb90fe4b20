"""Sparse QUBO instance ingestion (BiqMac / Beasley text format).

Files carry a header ``n m`` followed by m lines ``i j q`` with 1-based
indices, i <= j.  Off-diagonal entries are split q/2 per side so that
x'Qx reproduces the file's quadratic form with a symmetric Q.  The library
convention for these files is maximization; the default sense flag negates
Q on ingestion so the internal model minimizes, matching the reported
bounds.  Lines starting with '#' are skipped (some mirrors carry comment
headers).
"""

from __future__ import annotations

import os

import numpy as np

from .ineq import QcqpInstance


class InstanceFormatError(Exception):
    pass


def binary_qp_instance(Q, name: str = "") -> QcqpInstance:
    """min x'Qx over binaries, modeled as a box QCQP with x_i(1-x_i) = 0."""
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    constraints = []
    for i in range(n):
        Qi = np.zeros((n, n))
        Qi[i, i] = -1.0
        ci = np.zeros(n)
        ci[i] = 1.0
        constraints.append((Qi, ci, 0.0, "=="))
    return QcqpInstance(n=n, Q0=Q, c0=np.zeros(n), constraints=constraints, name=name)


def parse_biqmac(path: str, sense: str = "max-to-min") -> QcqpInstance:
    """Read a sparse QUBO file into the internal minimization model."""
    if sense not in ("max-to-min", "as-is"):
        raise ValueError(f"unknown sense flag {sense!r}")
    with open(path) as fh:
        lines = [ln.strip() for ln in fh]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise InstanceFormatError(f"{path}: empty instance file")
    head = lines[0].split()
    if len(head) != 2:
        raise InstanceFormatError(f"{path}: header must be 'n m', got {lines[0]!r}")
    n, m = int(head[0]), int(head[1])
    if len(lines) - 1 != m:
        raise InstanceFormatError(
            f"{path}: header promises {m} entries, file has {len(lines) - 1}")
    Q = np.zeros((n, n))
    seen = set()
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 3:
            raise InstanceFormatError(f"{path}: malformed entry line {ln!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
            q = float(parts[2])
        except ValueError as exc:
            raise InstanceFormatError(f"{path}: malformed entry line {ln!r}") from exc
        if not (1 <= i <= j <= n):
            raise InstanceFormatError(f"{path}: index pair ({i},{j}) out of range")
        if (i, j) in seen:
            raise InstanceFormatError(f"{path}: duplicate entry for ({i},{j})")
        seen.add((i, j))
        if i == j:
            Q[i - 1, i - 1] += q
        else:
            Q[i - 1, j - 1] += q / 2.0
            Q[j - 1, i - 1] += q / 2.0
    if sense == "max-to-min":
        Q = -Q
    return binary_qp_instance(Q, name=os.path.basename(path))


def serialize_biqmac(inst: QcqpInstance, path: str, sense: str = "max-to-min") -> None:
    """Inverse of :func:`parse_biqmac` (up to entry order)."""
    Q = -inst.Q0 if sense == "max-to-min" else inst.Q0
    n = inst.n
    entries = []
    for i in range(n):
        if Q[i, i] != 0.0:
            entries.append((i + 1, i + 1, Q[i, i]))
        for j in range(i + 1, n):
            if Q[i, j] != 0.0:
                entries.append((i + 1, j + 1, 2.0 * Q[i, j]))
    with open(path, "w") as fh:
        fh.write(f"{n} {len(entries)}\n")
        for i, j, q in entries:
            fh.write(f"{i} {j} {q:.17g}\n")
