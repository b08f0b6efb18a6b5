"""Dynamic weighted sampling of nodes by degree class.

Attachment preference depends on a node only through its degree, so nodes
are bucketed per degree and a Fenwick (prefix-sum) tree over degree
classes stores N_k * f(k). Sampling picks a class by weighted prefix
search, then a uniform member within the class; insertions and degree
promotions touch O(log D) tree entries where D is the current maximum
degree. For sublinear f, D stays far below the node count, which is the
point of bucketing by degree rather than by node.

Single-owner mutable structure: not safe for concurrent mutation.
Distinct instances may run in parallel.
"""

from __future__ import annotations

import math

from .exceptions import SamplerLogicError, SamplerStateError
from .model import PAFunction, eval_f


class FenwickTree:
    """Fenwick tree over 1-based positions with float weights.

    Capacity is always a power of two so the prefix search is a clean
    binary descent and the root cell carries the full sum.
    """

    __slots__ = ("capacity", "data")

    def __init__(self, capacity: int):
        cap = 1
        while cap < capacity:
            cap <<= 1
        self.capacity = cap
        self.data = [0.0] * (cap + 1)

    def add(self, i: int, delta: float) -> None:
        data = self.data
        cap = self.capacity
        while i <= cap:
            data[i] += delta
            i += i & (-i)

    def prefix_sum(self, i: int) -> float:
        data = self.data
        s = 0.0
        while i > 0:
            s += data[i]
            i -= i & (-i)
        return s

    def total(self) -> float:
        # the root cell of a power-of-two tree covers the whole range
        return self.data[self.capacity]

    def find(self, target: float) -> int:
        """Smallest i with prefix_sum(i) > target; capacity + 1 if none."""
        data = self.data
        cap = self.capacity
        pos = 0
        bit = cap
        while bit:
            nxt = pos + bit
            if nxt <= cap:
                w = data[nxt]
                if w <= target:
                    target -= w
                    pos = nxt
            bit >>= 1
        return pos + 1

    def rebuild(self, leaf_weights: list[float]) -> None:
        """Reset to the given per-position weights (index 0 ignored)."""
        cap = self.capacity
        data = [0.0] * (cap + 1)
        for i in range(1, cap + 1):
            if i < len(leaf_weights):
                data[i] += leaf_weights[i]
            j = i + (i & (-i))
            if j <= cap:
                data[j] += data[i]
        self.data = data


class DegreeClassIndex:
    """Per-degree node buckets with a Fenwick tree of class weights.

    Maintains total_weight = sum over nodes of f(degree), the normalizer
    of the attachment distribution.
    """

    def __init__(self, f: PAFunction, initial_capacity: int = 16):
        self.f = f
        self._tree = FenwickTree(initial_capacity)
        cap = self._tree.capacity
        self.members: list[list] = [[] for _ in range(cap + 1)]
        self._fk = [0.0] + [eval_f(f, k) for k in range(1, cap + 1)]
        self._degree: dict = {}
        self._slot: dict = {}
        self.total_weight = 0.0
        self.max_degree = 0

    def __len__(self) -> int:
        return len(self._degree)

    def __contains__(self, node) -> bool:
        return node in self._degree

    def degree_of(self, node) -> int:
        return self._degree[node]

    @property
    def capacity(self) -> int:
        return self._tree.capacity

    def f_of_degree(self, k: int) -> float:
        return self._fk[k]

    def insert_leaf(self, node) -> None:
        """Add a new node at degree 1."""
        if node in self._degree:
            raise SamplerLogicError(f"node {node!r} already present")
        m = self.members[1]
        self._degree[node] = 1
        self._slot[node] = len(m)
        m.append(node)
        w = self._fk[1]
        self._tree.add(1, w)
        self.total_weight += w
        if self.max_degree < 1:
            self.max_degree = 1

    def promote(self, node) -> None:
        """Move a node from its class k to class k+1."""
        k = self._degree.get(node)
        if k is None:
            raise SamplerLogicError(f"node {node!r} not present")
        m = self.members[k]
        slot = self._slot[node]
        last = m[-1]
        if last is not node:            # swap-remove within the class
            m[slot] = last
            self._slot[last] = slot
        m.pop()
        k1 = k + 1
        if k1 > self._tree.capacity:
            self._grow(k1)
        m1 = self.members[k1]
        self._degree[node] = k1
        self._slot[node] = len(m1)
        m1.append(node)
        fk = self._fk
        self._tree.add(k, -fk[k])
        self._tree.add(k1, fk[k1])
        self.total_weight += fk[k1] - fk[k]
        if k1 > self.max_degree:
            self.max_degree = k1

    def sample(self, u1: float, u2: float):
        """Draw a node with probability f(deg) / total_weight.

        u1 selects the degree class by weighted prefix search, u2 the
        member within the class. Two independent uniforms avoid precision
        loss when class weights span many orders of magnitude.
        """
        if not self._degree:
            raise SamplerStateError("cannot sample from an empty index")
        k = self._tree.find(u1 * self.total_weight)
        members = self.members
        if k > self.max_degree or not members[k]:
            # float drift can push the target past the last occupied class
            k = self.max_degree
            while not members[k]:
                k -= 1
        m = members[k]
        return m[int(u2 * len(m))]

    def _grow(self, needed: int) -> None:
        old_cap = self._tree.capacity
        self._tree = FenwickTree(max(needed, old_cap * 2))
        cap = self._tree.capacity
        self.members.extend([] for _ in range(cap - old_cap))
        fk = self._fk
        for k in range(old_cap + 1, cap + 1):
            fk.append(eval_f(self.f, k))
        leaf = [0.0] * (cap + 1)
        for k in range(1, cap + 1):
            if self.members[k]:
                leaf[k] = len(self.members[k]) * fk[k]
        self._tree.rebuild(leaf)
        # resync so the incremental total and the tree root agree bit-for-bit
        self.total_weight = self._tree.total()

    # -- inspection helpers ---------------------------------------------------

    def class_weight(self, k: int) -> float:
        return len(self.members[k]) * self._fk[k]

    def recomputed_total(self) -> float:
        """total_weight summed from scratch (drift reference)."""
        return math.fsum(
            len(m) * self._fk[k] for k, m in enumerate(self.members) if k and m
        )

    def node_probabilities(self) -> dict:
        """Exact sampling distribution of the current state, node by node.

        Enumerates (class weight / total) * (1 / class size); the per-node
        mass equals f(deg(v)) / F(G) up to float rounding.
        """
        total = self.total_weight
        probs = {}
        for k, m in enumerate(self.members):
            if k == 0 or not m:
                continue
            class_p = self.class_weight(k) / total
            per = class_p / len(m)
            for node in m:
                probs[node] = per
        return probs
