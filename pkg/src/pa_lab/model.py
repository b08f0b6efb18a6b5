"""Attachment functions, degree censuses, tree snapshots, and evolution logs.

An attachment function f maps a node's degree k >= 1 to a positive weight;
an incoming node picks its parent v with probability f(deg v) / F(G) where
F(G) is the total weight over the current tree. All shipped function kinds
are non-decreasing. Each function carries a growth certificate: a
machine-checkable pointwise upper bound on f used downstream to truncate
infinite series with a certified error. Certificates are claims supplied
at construction time and validated up to a horizon; no algorithm can
verify an all-k bound for an opaque f.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .exceptions import FunctionDomainError, StructureError

KIND_AFFINE = "affine"
KIND_POWER = "power"
KIND_TABLE = "table"

TAIL_CONSTANT_LAST = "constant_last"
TAIL_AFFINE_EXTENSION = "affine_extension"


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AffineCert:
    """Claim f(k) <= scale * (k + delta) for all k >= 1."""

    delta: float
    scale: float = 1.0

    def bound(self, k) -> float:
        return self.scale * (k + self.delta)


@dataclass(frozen=True)
class PowerBoundedCert:
    """Claim f(k) <= c * (k + delta)^beta for all k >= 1, with beta in (0, 1)."""

    beta: float
    delta: float = 0.0
    c: float = 1.0

    def bound(self, k) -> float:
        return self.c * (k + self.delta) ** self.beta


@dataclass(frozen=True)
class BoundedCert:
    """Claim f(k) <= M for all k >= 1."""

    M: float

    def bound(self, k) -> float:
        return self.M if np.isscalar(k) else np.full(np.shape(k), self.M)


Certificate = Union[AffineCert, PowerBoundedCert, BoundedCert]


# ---------------------------------------------------------------------------
# attachment functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PAFunction:
    """An attachment function: scale * base(k) with a growth certificate.

    kind "affine": base(k) = k + delta.
    kind "power":  base(k) = (k + shift)^beta.
    kind "table":  base(k) = values[k-1] for stored k, then the tail rule
                   (constant_last holds the final value; affine_extension
                   continues as k + tail_delta).

    Immutable after construction; safe to share across threads.
    """

    kind: str
    delta: float = 0.0
    beta: float = 1.0
    shift: float = 0.0
    values: tuple[float, ...] = ()
    tail_rule: str = TAIL_CONSTANT_LAST
    tail_delta: float = 0.0
    scale: float = 1.0
    certificate: Optional[Certificate] = None

    def __post_init__(self):
        if self.kind not in (KIND_AFFINE, KIND_POWER, KIND_TABLE):
            raise ValueError(f"unknown function kind {self.kind!r}")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.kind == KIND_TABLE and not self.values:
            raise ValueError("table function needs at least one stored value")
        if self.certificate is None:
            object.__setattr__(self, "certificate", self._default_certificate())

    # -- construction helpers ------------------------------------------------

    @staticmethod
    def affine(delta: float, scale: float = 1.0) -> "PAFunction":
        """f(k) = scale * (k + delta), delta >= 0."""
        if delta < 0:
            raise ValueError("delta must be >= 0")
        return PAFunction(kind=KIND_AFFINE, delta=delta, scale=scale)

    @staticmethod
    def power(beta: float, shift: float = 0.0, scale: float = 1.0) -> "PAFunction":
        """f(k) = scale * (k + shift)^beta, beta in (0, 1]."""
        if not 0 < beta <= 1:
            raise ValueError("beta must lie in (0, 1]")
        if shift < 0:
            raise ValueError("shift must be >= 0")
        return PAFunction(kind=KIND_POWER, beta=beta, shift=shift, scale=scale)

    @staticmethod
    def table(
        values: Sequence[float],
        tail_rule: str = TAIL_CONSTANT_LAST,
        tail_delta: float = 0.0,
        scale: float = 1.0,
    ) -> "PAFunction":
        """f(k) = scale * values[k-1] on the stored range, then the tail rule."""
        vals = tuple(float(v) for v in values)
        if any(v <= 0 for v in vals):
            raise ValueError("table values must be positive")
        if tail_rule not in (TAIL_CONSTANT_LAST, TAIL_AFFINE_EXTENSION):
            raise ValueError(f"unknown tail rule {tail_rule!r}")
        return PAFunction(
            kind=KIND_TABLE,
            values=vals,
            tail_rule=tail_rule,
            tail_delta=tail_delta,
            scale=scale,
        )

    @staticmethod
    def constant(value: float) -> "PAFunction":
        """f identically equal to `value`."""
        return PAFunction.table([value])

    def scaled(self, c: float) -> "PAFunction":
        """The function c * f, with its certificate rescaled to match."""
        if c <= 0:
            raise ValueError("scale factor must be positive")
        cert = self.certificate
        if isinstance(cert, AffineCert):
            cert = AffineCert(cert.delta, cert.scale * c)
        elif isinstance(cert, PowerBoundedCert):
            cert = PowerBoundedCert(cert.beta, cert.delta, cert.c * c)
        elif isinstance(cert, BoundedCert):
            cert = BoundedCert(cert.M * c)
        return PAFunction(
            kind=self.kind,
            delta=self.delta,
            beta=self.beta,
            shift=self.shift,
            values=self.values,
            tail_rule=self.tail_rule,
            tail_delta=self.tail_delta,
            scale=self.scale * c,
            certificate=cert,
        )

    def _default_certificate(self) -> Certificate:
        if self.kind == KIND_AFFINE:
            return AffineCert(self.delta, self.scale)
        if self.kind == KIND_POWER:
            if self.beta == 1.0:
                return AffineCert(self.shift, self.scale)
            return PowerBoundedCert(self.beta, self.shift, self.scale)
        if self.tail_rule == TAIL_CONSTANT_LAST:
            return BoundedCert(self.scale * max(self.values))
        # affine tail: lift delta until the stored values are dominated too
        delta = self.tail_delta
        for i, v in enumerate(self.values):
            delta = max(delta, v - (i + 1))
        return AffineCert(delta, self.scale)

    # -- evaluation ----------------------------------------------------------

    def _base(self, k: int) -> float:
        if self.kind == KIND_AFFINE:
            return k + self.delta
        if self.kind == KIND_POWER:
            return (k + self.shift) ** self.beta
        if k <= len(self.values):
            return self.values[k - 1]
        if self.tail_rule == TAIL_CONSTANT_LAST:
            return self.values[-1]
        return k + self.tail_delta

    def __call__(self, k: int) -> float:
        return eval_f(self, k)

    def values_at(self, ks: np.ndarray) -> np.ndarray:
        """Vectorized evaluation at an integer array of degrees (all >= 1)."""
        ks = np.asarray(ks)
        if ks.size and ks.min() < 1:
            raise FunctionDomainError("attachment functions are defined for k >= 1")
        if self.kind == KIND_AFFINE:
            base = ks + self.delta
        elif self.kind == KIND_POWER:
            base = (ks + self.shift) ** self.beta
        else:
            vals = np.asarray(self.values)
            m = len(vals)
            clipped = np.minimum(ks, m) - 1
            base = vals[clipped].astype(float)
            if self.tail_rule == TAIL_AFFINE_EXTENSION:
                over = ks > m
                base = np.where(over, ks + self.tail_delta, base)
        return self.scale * base

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind, "scale": self.scale}
        if self.kind == KIND_AFFINE:
            d["delta"] = self.delta
        elif self.kind == KIND_POWER:
            d["beta"] = self.beta
            if self.shift:
                d["shift"] = self.shift
        else:
            d["values"] = list(self.values)
            d["tail_rule"] = self.tail_rule
            if self.tail_rule == TAIL_AFFINE_EXTENSION:
                d["tail_delta"] = self.tail_delta
        d["certificate"] = _cert_to_dict(self.certificate)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @staticmethod
    def from_dict(d: dict) -> "PAFunction":
        kind = d["kind"]
        scale = float(d.get("scale", 1.0))
        cert = _cert_from_dict(d["certificate"]) if "certificate" in d else None
        if kind == KIND_AFFINE:
            return PAFunction(kind=kind, delta=float(d["delta"]), scale=scale,
                              certificate=cert)
        if kind == KIND_POWER:
            return PAFunction(kind=kind, beta=float(d["beta"]),
                              shift=float(d.get("shift", 0.0)), scale=scale,
                              certificate=cert)
        if kind == KIND_TABLE:
            return PAFunction(
                kind=kind,
                values=tuple(float(v) for v in d["values"]),
                tail_rule=d.get("tail_rule", TAIL_CONSTANT_LAST),
                tail_delta=float(d.get("tail_delta", 0.0)),
                scale=scale,
                certificate=cert,
            )
        raise ValueError(f"unknown function kind {kind!r}")

    @staticmethod
    def from_json(s: str) -> "PAFunction":
        return PAFunction.from_dict(json.loads(s))


def _cert_to_dict(cert: Certificate) -> dict:
    if isinstance(cert, AffineCert):
        return {"kind": "affine", "delta": cert.delta, "scale": cert.scale}
    if isinstance(cert, PowerBoundedCert):
        return {"kind": "power_bounded", "beta": cert.beta, "delta": cert.delta,
                "c": cert.c}
    if isinstance(cert, BoundedCert):
        return {"kind": "bounded", "M": cert.M}
    raise TypeError(f"unknown certificate {cert!r}")


def _cert_from_dict(d: dict) -> Certificate:
    kind = d["kind"]
    if kind == "affine":
        return AffineCert(float(d["delta"]), float(d.get("scale", 1.0)))
    if kind == "power_bounded":
        return PowerBoundedCert(float(d["beta"]), float(d.get("delta", 0.0)),
                                float(d.get("c", 1.0)))
    if kind == "bounded":
        return BoundedCert(float(d["M"]))
    raise ValueError(f"unknown certificate kind {kind!r}")


def eval_f(f: PAFunction, k: int) -> float:
    """Evaluate f at degree k >= 1."""
    if k < 1:
        raise FunctionDomainError(f"attachment functions are defined for k >= 1, got {k}")
    return f.scale * f._base(k)


@dataclass(frozen=True)
class FunctionReport:
    """Findings from scanning a function up to a horizon."""

    ok: bool
    horizon: int
    positivity_violation: Optional[int] = None
    monotonicity_violation: Optional[int] = None
    certificate_violation: Optional[int] = None

    def summary(self) -> str:
        if self.ok:
            return f"ok up to k={self.horizon}"
        parts = []
        if self.positivity_violation is not None:
            parts.append(f"f(k) <= 0 at k={self.positivity_violation}")
        if self.monotonicity_violation is not None:
            parts.append(f"f decreases at k={self.monotonicity_violation}")
        if self.certificate_violation is not None:
            parts.append(f"certificate violated at k={self.certificate_violation}")
        return "; ".join(parts)


def validate_function(f: PAFunction, horizon: int = 1000) -> FunctionReport:
    """Scan positivity, monotonicity, and certificate domination for k <= horizon.

    Reports the first violation of each kind; never raises.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    ks = np.arange(1, horizon + 1)
    vals = f.values_at(ks)
    pos_bad = mono_bad = cert_bad = None
    nonpos = np.nonzero(vals <= 0)[0]
    if nonpos.size:
        pos_bad = int(ks[nonpos[0]])
    dec = np.nonzero(np.diff(vals) < 0)[0]
    if dec.size:
        mono_bad = int(ks[dec[0] + 1])
    bounds = f.certificate.bound(ks.astype(float))
    # tolerate last-ulp rounding in the bound evaluation
    over = np.nonzero(vals > bounds * (1 + 1e-12))[0]
    if over.size:
        cert_bad = int(ks[over[0]])
    ok = pos_bad is None and mono_bad is None and cert_bad is None
    return FunctionReport(ok, horizon, pos_bad, mono_bad, cert_bad)


# ---------------------------------------------------------------------------
# trees and censuses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TreeSnapshot:
    """A grown tree as a parent array.

    parent[i] is the node that node i attached to; nodes 0 and 1 form the
    seed edge (parent[1] = 0, parent[0] = -1 as a sentinel). Attachment
    order is topological: parent[i] < i for every i >= 1.
    """

    parent: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "parent", np.asarray(self.parent, dtype=np.int64))

    @property
    def n(self) -> int:
        return len(self.parent)

    def degrees(self) -> np.ndarray:
        """Plain graph degree of every node (children + 1 for non-root)."""
        deg = np.bincount(self.parent[1:], minlength=self.n).astype(np.int64)
        deg[1:] += 1
        return deg

    def validate(self) -> None:
        n = self.n
        if n < 2:
            raise StructureError("a snapshot needs at least the two seed nodes")
        if self.parent[1] != 0:
            raise StructureError("node 1 must attach to node 0 (seed edge)")
        idx = np.arange(n)
        bad = np.nonzero(self.parent[1:] >= idx[1:])[0]
        if bad.size:
            i = int(bad[0]) + 1
            raise StructureError(f"parent[{i}] = {int(self.parent[i])} is not < {i}")
        if (self.parent[1:] < 0).any():
            raise StructureError("negative parent entry")

    # parent-array text format: line i holds parent[i], starting at i = 1
    def write_text(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.writelines(f"{int(p)}\n" for p in self.parent[1:])

    @staticmethod
    def read_text(path) -> "TreeSnapshot":
        with open(path) as fh:
            parents = [int(line) for line in fh if line.strip()]
        snap = TreeSnapshot(np.concatenate(([-1], parents)))
        snap.validate()
        return snap


@dataclass(frozen=True)
class EvolutionLog:
    """Degrees of the chosen parents, in attachment order.

    chosen_degree[i - 2] is the degree the parent of node i had at the
    moment node i attached, for i = 2 .. n-1.
    """

    chosen_degree: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "chosen_degree", np.asarray(self.chosen_degree, dtype=np.int64)
        )

    def __len__(self) -> int:
        return len(self.chosen_degree)

    def attachment_counts(self) -> np.ndarray:
        """counts[k] = number of attachments made to a degree-k node."""
        if len(self.chosen_degree) == 0:
            return np.zeros(1, dtype=np.int64)
        return np.bincount(self.chosen_degree)

    def write_text(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.writelines(f"{int(d)}\n" for d in self.chosen_degree)

    @staticmethod
    def read_text(path) -> "EvolutionLog":
        with open(path) as fh:
            return EvolutionLog(np.array([int(line) for line in fh if line.strip()],
                                         dtype=np.int64))


@dataclass(frozen=True)
class DegreeCensus:
    """Counts of nodes per degree at a fixed network size."""

    counts: dict[int, int]
    n: int

    @staticmethod
    def from_degrees(degrees: np.ndarray) -> "DegreeCensus":
        deg = np.asarray(degrees, dtype=np.int64)
        binned = np.bincount(deg)
        counts = {int(k): int(c) for k, c in enumerate(binned) if c and k > 0}
        return DegreeCensus(counts, int(len(deg)))

    @property
    def max_degree(self) -> int:
        return max(self.counts) if self.counts else 0

    def count_array(self) -> np.ndarray:
        """counts as a dense array indexed by degree (index 0 unused)."""
        arr = np.zeros(self.max_degree + 1, dtype=np.int64)
        for k, c in self.counts.items():
            arr[k] = c
        return arr

    def tail_counts(self) -> np.ndarray:
        """tail[k] = number of nodes of degree strictly greater than k."""
        arr = self.count_array()
        tail = np.zeros_like(arr)
        tail[:-1] = arr[::-1].cumsum()[::-1][1:]
        return tail

    def validate(self) -> None:
        total = sum(self.counts.values())
        if total != self.n:
            raise StructureError(f"census counts sum to {total}, expected n={self.n}")
        edge_sum = sum(k * c for k, c in self.counts.items())
        if self.n >= 2 and edge_sum != 2 * (self.n - 1):
            raise StructureError(
                f"handshake identity violated: sum k*N_k = {edge_sum}, "
                f"expected {2 * (self.n - 1)}"
            )


def census_from_snapshot(t: TreeSnapshot) -> DegreeCensus:
    """Degree census of a snapshot; validates the parent array first."""
    t.validate()
    return DegreeCensus.from_degrees(t.degrees())
