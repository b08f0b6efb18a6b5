"""Shared oracles for the test suite.

Everything here is deliberately naive and independent of the library's
own algorithms: exact enumeration over attachment histories, direct
series summation, linear-scan sampling, and brute-force degree counting.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from pa_lab import PAFunction


def paper_functions():
    """The three reference functions used across studies."""
    return (
        ("f1", PAFunction.affine(0.5, scale=1.0 / 1.5)),
        ("f2", PAFunction.power(2.0 / 3.0)),
        ("f3", PAFunction.power(0.25, shift=2.0, scale=3.0 ** -0.25)),
    )


def shape_key(degrees) -> tuple:
    """Canonical unlabeled-tree key; degree sequences suffice for n <= 5."""
    return tuple(sorted(degrees))


def enumerate_shape_distribution(weight, n: int) -> dict[tuple, Fraction]:
    """Exact shape distribution of attachment growth to n nodes.

    Walks every attachment history, multiplying exact step probabilities
    weight(deg)/sum(weight). `weight` should return a Fraction for exact
    arithmetic (e.g. lambda k: Fraction(k)).
    """
    dist: dict[tuple, Fraction] = {}

    def rec(degrees: list[int], prob: Fraction):
        if len(degrees) == n:
            key = shape_key(degrees)
            dist[key] = dist.get(key, Fraction(0)) + prob
            return
        total = sum(weight(d) for d in degrees)
        for v in range(len(degrees)):
            step = weight(degrees[v]) / total
            nxt = list(degrees)
            nxt[v] += 1
            nxt.append(1)
            rec(nxt, prob * step)

    rec([1, 1], Fraction(1))
    assert sum(dist.values()) == 1
    return dist


def direct_rho_sum(f: PAFunction, lam: float, n_terms: int) -> float:
    """Plain partial sum of the rho series, no certificates involved."""
    ks = np.arange(1, n_terms + 1, dtype=np.int64)
    fk = f.values_at(ks)
    return float(np.cumprod(fk / (lam + fk)).sum())


def naive_linear_sampler(nodes, degrees, f: PAFunction, u: float):
    """O(n) scan over per-node weights; reference for the class sampler."""
    weights = [f(d) for d in degrees]
    target = u * sum(weights)
    acc = 0.0
    for node, w in zip(nodes, weights):
        acc += w
        if acc > target:
            return node
    return nodes[-1]


def naive_degree_count(parent) -> dict[int, int]:
    """Adjacency-list degree census, straight from the edges."""
    adj: dict[int, list[int]] = {i: [] for i in range(len(parent))}
    for child in range(1, len(parent)):
        p = int(parent[child])
        adj[p].append(child)
        adj[child].append(p)
    counts: dict[int, int] = {}
    for node, neigh in adj.items():
        counts[len(neigh)] = counts.get(len(neigh), 0) + 1
    return counts


def naive_rank_ratio(degrees, k: int):
    """Double-loop count of (strictly richer) / (same degree) nodes."""
    same = sum(1 for d in degrees if d == k)
    richer = sum(1 for d in degrees if d > k)
    if same == 0:
        return None
    return richer / same


def chi_square_p(observed_counts, expected_probs, n_draws: int) -> float:
    """Goodness-of-fit p-value against exact class probabilities."""
    from scipy import stats

    expected = np.asarray(expected_probs, dtype=float) * n_draws
    observed = np.asarray(observed_counts, dtype=float)
    assert abs(observed.sum() - n_draws) < 0.5
    return float(stats.chisquare(observed, expected).pvalue)
