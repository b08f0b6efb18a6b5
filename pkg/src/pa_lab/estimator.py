"""The snapshot-only preference estimator.

For a tree of n nodes, r_hat(k) = N_gt(k) / N(k): the number of nodes of
degree strictly above k over the number at exactly k. It estimates the
rescaled attachment preference of degree k from a single snapshot; no
attachment history is needed, which is the whole point. Where N(k) = 0
the estimate is absent (never 0/0).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import (
    DataError,
    NormalizationError,
    StructureError,
)
from .model import DegreeCensus, EvolutionLog

NORM_RAW = "raw"
NORM_BY_DEGREE_ONE = "by_degree_one"


@dataclass(frozen=True)
class EstimateEntry:
    k: int
    n_k: int
    n_gt_k: int
    r_hat: Optional[float]


@dataclass(frozen=True)
class EstimateTable:
    """Estimates per degree, 1..max observed degree."""

    entries: tuple[EstimateEntry, ...]
    n: int
    normalization: str = NORM_RAW

    def r_hat(self, k: int) -> Optional[float]:
        if 1 <= k <= len(self.entries):
            return self.entries[k - 1].r_hat
        return None

    def present(self) -> list[EstimateEntry]:
        return [e for e in self.entries if e.r_hat is not None]


def estimate(census: DegreeCensus) -> EstimateTable:
    """Build the estimate table from a degree census in one suffix pass."""
    if not census.counts or census.n < 2:
        raise DataError("estimation needs a census of at least two nodes")
    counts = census.count_array()
    tails = census.tail_counts()
    entries = []
    for k in range(1, len(counts)):
        n_k = int(counts[k])
        n_gt = int(tails[k])
        r = n_gt / n_k if n_k > 0 else None
        entries.append(EstimateEntry(k, n_k, n_gt, r))
    return EstimateTable(tuple(entries), census.n)


def normalize_by_degree_one(table: EstimateTable) -> EstimateTable:
    """Divide every present estimate by r_hat(1).

    Makes runs with different (scale-equivalent) attachment functions
    directly comparable. Idempotent.
    """
    if table.normalization == NORM_BY_DEGREE_ONE:
        return table
    r1 = table.r_hat(1)
    if r1 is None:
        raise NormalizationError("r_hat(1) is absent (no degree-1 nodes)")
    if r1 == 0:
        raise NormalizationError("r_hat(1) is zero; cannot normalize")
    entries = tuple(
        EstimateEntry(e.k, e.n_k, e.n_gt_k, None if e.r_hat is None else e.r_hat / r1)
        for e in table.entries
    )
    return EstimateTable(entries, table.n, NORM_BY_DEGREE_ONE)


def monotonize(table: EstimateTable) -> EstimateTable:
    """Replace present estimates by their nondecreasing rearrangement.

    The multiset of values is preserved; values are reassigned in sorted
    order over the present positions in increasing k. Absent entries stay
    absent.
    """
    present_idx = [i for i, e in enumerate(table.entries) if e.r_hat is not None]
    ordered = sorted(table.entries[i].r_hat for i in present_idx)
    entries = list(table.entries)
    for i, val in zip(present_idx, ordered):
        e = entries[i]
        entries[i] = EstimateEntry(e.k, e.n_k, e.n_gt_k, val)
    return EstimateTable(tuple(entries), table.n, table.normalization)


@dataclass(frozen=True)
class AttachmentCheckReport:
    """Comparison of historical attachment counts with snapshot tail counts.

    For single-edge attachment growth these agree exactly at every degree:
    a node of final degree above k was chosen exactly once while at degree
    k. Mismatches mean the snapshot/log pair did not come from such an
    evolution.
    """

    ok: bool
    mismatches: tuple[tuple[int, int, int], ...]  # (k, attached_at_k, n_gt_k)

    def summary(self) -> str:
        if self.ok:
            return "ok: attachment counts match tail counts at every degree"
        head = ", ".join(
            f"k={k}: {a} attachments vs {t} tail nodes"
            for k, a, t in self.mismatches[:5]
        )
        return f"{len(self.mismatches)} mismatches ({head}, ...)"


def attachment_count_check(
    census: DegreeCensus, log: EvolutionLog
) -> AttachmentCheckReport:
    """Check |{i: chosen_degree[i] = k}| == N_gt(k) for every k, exactly."""
    if len(log) != census.n - 2:
        raise StructureError(
            f"log has {len(log)} entries; census of n={census.n} implies {census.n - 2}"
        )
    attached = log.attachment_counts()
    tails = census.tail_counts()
    width = max(len(attached), len(tails))
    a = np.zeros(width, dtype=np.int64)
    t = np.zeros(width, dtype=np.int64)
    a[: len(attached)] = attached
    t[: len(tails)] = tails
    bad = np.nonzero(a != t)[0]
    bad = bad[bad >= 1]
    mismatches = tuple((int(k), int(a[k]), int(t[k])) for k in bad)
    return AttachmentCheckReport(len(mismatches) == 0, mismatches)


def census_from_edge_list(path) -> DegreeCensus:
    """Read whitespace-separated "u v" integer pairs and census the tree.

    Rejects self-loops, duplicate edges, cycles, and disconnected input
    with a structure error; accepts arbitrary integer node labels.
    """
    edges = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise StructureError(f"line {lineno}: expected 'u v', got {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise StructureError(f"line {lineno}: non-integer node id") from exc
            edges.append((u, v))
    if not edges:
        raise StructureError("edge list is empty")

    seen = set()
    parent: dict[int, int] = {}

    def find(x: int) -> int:
        root = x
        while parent.get(root, root) != root:
            root = parent[root]
        while parent.get(x, x) != x:
            parent[x], x = root, parent[x]
        return root

    degrees: dict[int, int] = {}
    for u, v in edges:
        if u == v:
            raise StructureError(f"self-loop at node {u}")
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise StructureError(f"duplicate edge {key}")
        seen.add(key)
        ru, rv = find(u), find(v)
        if ru == rv:
            raise StructureError(f"edge ({u}, {v}) closes a cycle")
        parent[ru] = rv
        degrees[u] = degrees.get(u, 0) + 1
        degrees[v] = degrees.get(v, 0) + 1

    n = len(degrees)
    if len(edges) != n - 1:
        raise StructureError(f"{len(edges)} edges on {n} nodes is not a tree")
    # union-find acyclicity + edge count implies connectedness
    return DegreeCensus.from_degrees(np.array(sorted(degrees.values()), dtype=np.int64))
