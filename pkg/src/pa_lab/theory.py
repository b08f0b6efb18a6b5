"""Exact limit theory: rho transform, Malthusian parameter, limiting degree law.

rho(lambda) = sum over l >= 1 of the products prod_{k<=l} f(k)/(lambda+f(k))
is the Laplace transform of the reproduction measure of the embedded birth
process. Its unique root rho(lambda*) = 1 is the Malthusian parameter: the
exponential growth rate of the population, the normalizer satisfying
sum_k f(k) p_k = lambda*, and the scale behind the rescaled preferences
r_k = f(k)/lambda*.

The series has no usable generic tail bound (its term ratio tends to 1 for
unbounded f), so truncation is driven by each function's growth
certificate, which yields a certified enclosure of the tail:

* exactly affine tails: closed-form tail sum (L+1+delta)/(lambda/c - 1),
  exact, so the enclosure collapses;
* bounded f: geometric enclosure, exact in the constant-tail case;
* power-bounded f: an integral (incomplete-gamma style) upper bound paired
  with a geometric lower bound.

The limiting degree law follows from lambda* via p_1 = l*/(l* + f(1)) and
p_{k+1} = p_k f(k)/(l* + f(k+1)), carried out to a horizon K with
certified residual tail mass below tail_tol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    DivergenceError,
    HorizonError,
    NoMalthusianError,
    NumericError,
)
from .model import (
    KIND_AFFINE,
    KIND_TABLE,
    TAIL_AFFINE_EXTENSION,
    AffineCert,
    BoundedCert,
    PAFunction,
    PowerBoundedCert,
    eval_f,
)

_MAX_TERMS = 20_000_000


def _exact_affine_tail(f: PAFunction, L: int):
    """(delta, scale) if f(k) = scale * (k + delta) exactly for all k > L."""
    if f.kind == KIND_AFFINE:
        return f.delta, f.scale
    if (
        f.kind == KIND_TABLE
        and f.tail_rule == TAIL_AFFINE_EXTENSION
        and L >= len(f.values)
    ):
        return f.tail_delta, f.scale
    return None


def remainder_interval(f: PAFunction, lam: float, L: int) -> tuple[float, float]:
    """Certified enclosure [lo, hi] of R_L = sum_{m>=1} prod_{k=L+1}^{L+m} f/(lam+f).

    The tail of the rho series past L is t_L * R_L. `lo` uses only
    monotonicity of f (each factor is at least f(L+1)/(lam+f(L+1)), so the
    tail dominates a geometric series); `hi` comes from the certificate and
    is +inf where the certificate cannot bound the tail at this lambda.
    """
    exact = _exact_affine_tail(f, L)
    if exact is not None:
        delta, scale = exact
        nu = lam / scale
        if nu <= 1:
            raise DivergenceError(
                f"rho series diverges for lambda = {lam} <= scale {scale} of an "
                "affine-tailed function"
            )
        v = (L + 1 + delta) / (nu - 1)
        return v, v

    f_next = eval_f(f, L + 1)
    lo = f_next / lam
    cert = f.certificate
    if isinstance(cert, AffineCert):
        nu = lam / cert.scale
        hi = math.inf if nu <= 1 else (L + 1 + cert.delta) / (nu - 1)
    elif isinstance(cert, BoundedCert):
        hi = cert.M / lam
    elif isinstance(cert, PowerBoundedCert):
        hi = _power_tail_bound(cert, lam, L)
    else:  # pragma: no cover - unreachable with shipped certificates
        raise TypeError(f"unknown certificate {cert!r}")
    return lo, max(hi, lo)


def _power_tail_bound(cert: PowerBoundedCert, lam: float, L: int) -> float:
    """Upper bound on R_L for f <= c (k+delta)^beta; inf while not yet valid.

    Bounds each factor by exp(-lam/(2 f)) (valid once f >= lam), compares
    the exponent sum with an integral, and bounds the resulting
    incomplete-gamma integral by its leading term. Everything stays in
    ordinary float range.
    """
    beta, delta, c = cert.beta, cert.delta, cert.c
    if c * (L + 1 + delta) ** beta < lam:
        return math.inf
    one_m_b = 1.0 - beta
    s = 1.0 / one_m_b
    a = lam / (2.0 * c * one_m_b)
    w1 = (L + 1 + delta) ** one_m_b
    w2 = (L + 2 + delta) ** one_m_b
    z = a * w2
    if z <= (s - 1.0) * (1.0 + 1e-12):
        return math.inf
    decay = math.exp(-a * (w2 - w1))
    return decay * (1.0 + (s / a) * w2 ** (s - 1.0) / (1.0 - (s - 1.0) / z))


@dataclass(frozen=True)
class RhoResult:
    value: float
    error_bound: float
    terms: int


def rho(
    f: PAFunction,
    lam: float,
    rel_tol: float = 1e-12,
    max_terms: int = _MAX_TERMS,
) -> RhoResult:
    """Evaluate rho(lambda) with a certified relative error bound.

    Sums the series in vectorized chunks until the certificate encloses
    the remaining tail within rel_tol of the partial sum; the midpoint of
    the enclosure is folded into the returned value.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    cert = f.certificate
    if isinstance(cert, AffineCert) and lam <= cert.scale:
        raise DivergenceError(
            f"certificate cannot bound the rho tail at lambda = {lam} "
            f"(affine bound with scale {cert.scale})"
        )
    partial = 0.0
    t_last = 1.0
    terms = 0
    chunk = 256
    while terms < max_terms:
        m = min(chunk, max_terms - terms)
        ks = np.arange(terms + 1, terms + m + 1, dtype=np.int64)
        fk = f.values_at(ks)
        tl = t_last * np.cumprod(fk / (lam + fk))
        partial += float(tl.sum())
        t_last = float(tl[-1])
        terms += m
        lo, hi = remainder_interval(f, lam, terms)
        if math.isfinite(hi):
            mid = 0.5 * t_last * (lo + hi)
            half = 0.5 * t_last * (hi - lo)
            value = partial + mid
            err = half + 8e-16 * value
            if err <= rel_tol * value:
                return RhoResult(value, err, terms)
        if t_last == 0.0:
            raise NumericError("rho series underflowed before certification")
        chunk = min(chunk * 2, 1 << 17)
    raise HorizonError(
        f"rho series not certified within {max_terms} terms at lambda = {lam}"
    )


def _partial_sum_exceeds_one(f: PAFunction, lam: float, max_terms: int) -> bool:
    """Certified check that rho(lam) > 1 using only lower bounds."""
    partial = 0.0
    t_last = 1.0
    terms = 0
    chunk = 1024
    while terms < max_terms:
        m = min(chunk, max_terms - terms)
        ks = np.arange(terms + 1, terms + m + 1, dtype=np.int64)
        fk = f.values_at(ks)
        tl = t_last * np.cumprod(fk / (lam + fk))
        partial += float(tl.sum())
        t_last = float(tl[-1])
        terms += m
        if partial + t_last * eval_f(f, terms + 1) / lam > 1.0:
            return True
        if t_last == 0.0:
            return False
        chunk = min(chunk * 2, 1 << 17)
    return False


@dataclass(frozen=True)
class MalthusianSolution:
    """Root of rho and the limiting degree law it induces.

    Arrays are indexed by degree: p[k-1] is the limiting proportion of
    degree-k nodes for k = 1..K, p_tail[k-1] the strict-tail mass beyond
    degree k, r[k-1] = f(k)/lambda_star the rescaled preference. K is the
    horizon at which the certified residual tail mass drops below tail_tol.
    """

    f: PAFunction
    lambda_star: float
    truncation_error: float
    K: int
    p: np.ndarray
    p_tail: np.ndarray
    r: np.ndarray
    rho_at_root: float
    solver_tol: float
    tail_tol: float

    def p_of(self, k: int) -> float:
        if not 1 <= k <= self.K:
            raise ValueError(f"degree {k} outside the computed horizon 1..{self.K}")
        return float(self.p[k - 1])

    def p_tail_of(self, k: int) -> float:
        if not 1 <= k <= self.K:
            raise ValueError(f"degree {k} outside the computed horizon 1..{self.K}")
        return float(self.p_tail[k - 1])


def solve_malthusian(
    f: PAFunction,
    tol: float = 1e-11,
    tail_tol: float = 1e-12,
    max_terms: int = _MAX_TERMS,
) -> MalthusianSolution:
    """Find lambda* with |rho(lambda*) - 1| < tol and build the limit law.

    Brackets the root by doubling/halving from lambda = f(1) (rho is
    strictly decreasing), then bisects. Points where the certificate
    cannot bound the tail are kept on the high-rho side only after the
    partial sums certify rho > 1 there.
    """
    rho_tol = tol / 10.0

    def rho_or_divergent(lam: float):
        try:
            return rho(f, lam, rel_tol=rho_tol, max_terms=max_terms)
        except DivergenceError:
            return None

    f1 = eval_f(f, 1)
    lo = hi = None
    lo_divergent = False

    x = f1
    r = rho_or_divergent(x)
    for _ in range(130):
        if r is not None and r.value < 1.0:
            hi = x
            break
        lo = x
        lo_divergent = r is None
        x *= 2.0
        r = rho_or_divergent(x)
    if hi is None:
        raise NoMalthusianError("rho stayed above 1 during bracket expansion")

    if lo is None:
        y = f1 / 2.0
        for _ in range(130):
            ry = rho_or_divergent(y)
            if ry is None or ry.value >= 1.0:
                lo = y
                lo_divergent = ry is None
                break
            hi = y
            y /= 2.0
        if lo is None:
            raise NoMalthusianError("rho stayed below 1 during bracket expansion")

    if lo_divergent and not _partial_sum_exceeds_one(f, lo, max_terms):
        raise NoMalthusianError(
            f"cannot certify rho > 1 at the lower bracket lambda = {lo}"
        )

    root = None
    root_rho = None
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        rm = rho_or_divergent(mid)
        if rm is not None and abs(rm.value - 1.0) < tol:
            root = mid
            root_rho = rm
            break
        if rm is None or rm.value >= 1.0:
            lo = mid
        else:
            hi = mid
    if root is None:
        raise NumericError("bisection failed to reach the requested tolerance")

    p, p_tail, fk, K, trunc = _limit_law(f, root, tail_tol, max_terms)
    return MalthusianSolution(
        f=f,
        lambda_star=root,
        truncation_error=root_rho.error_bound + trunc,
        K=K,
        p=p,
        p_tail=p_tail,
        r=fk / root,
        rho_at_root=root_rho.value,
        solver_tol=tol,
        tail_tol=tail_tol,
    )


def _limit_law(f: PAFunction, lam: float, tail_tol: float, max_terms: int):
    """p, p_tail, f(k) arrays out to a horizon with certified tail < tail_tol.

    p follows the degree recursion (cumulative products preserve its exact
    evaluation order); the mass beyond the horizon is evaluated by an
    independent ratio series so every stored tail keeps full relative
    precision, then suffix sums run backward (small terms first).
    """
    f1 = eval_f(f, 1)
    p_blocks: list[np.ndarray] = []
    fk_blocks: list[np.ndarray] = []
    K = 0
    chunk = 64          # small start so fast-decaying laws certify before underflow
    p_last = None
    f_last = None       # f(K), last value inside the built blocks
    while K < max_terms:
        m = min(chunk, max_terms - K)
        # need f at degrees K+1 .. K+m+1 to form recursion factors
        fk_ext = f.values_at(np.arange(K + 1, K + m + 2, dtype=np.int64))
        if K == 0:
            seed = lam / (lam + f1)
            factors = np.concatenate(([seed], fk_ext[:-2] / (lam + fk_ext[1:-1])))
        else:
            factors = np.concatenate(
                ([p_last * f_last / (lam + fk_ext[0])],
                 fk_ext[:-2] / (lam + fk_ext[1:-1]))
            )
        block = np.cumprod(factors)
        p_blocks.append(block)
        fk_blocks.append(fk_ext[:-1])
        K += m
        p_last = float(block[-1])
        f_last = float(fk_ext[-2])
        f_next = float(fk_ext[-1])
        if p_last == 0.0:
            raise NumericError("limit law underflowed before tail certification")
        t_last = p_last * f_last / lam
        _, hi = remainder_interval(f, lam, K)
        if math.isfinite(hi) and (lam / f_next) * t_last * hi <= tail_tol:
            break
        chunk = min(chunk * 2, 1 << 20)
    else:
        raise HorizonError(
            f"certified tail mass did not fall below {tail_tol} within {max_terms} terms"
        )

    p = np.concatenate(p_blocks)
    fk = np.concatenate(fk_blocks)
    t_K = p_last * f_last / lam

    s_ratio, s_err = _tail_ratio(f, lam, K, t_K)
    p_gt_K = t_K * s_ratio

    suffix = np.concatenate((np.cumsum(p[:0:-1])[::-1], [0.0]))
    p_tail = suffix + p_gt_K
    trunc = t_K * s_err
    return p, p_tail, fk, K, trunc


def _tail_ratio(f: PAFunction, lam: float, K: int, t_K: float, rel_tol: float = 1e-11):
    """(S, err): certified evaluation of p_{>K} / t_K via its own series.

    S = sum_{m>=1} (lam / f(K+m)) prod_{i=K+1}^{K+m} f(i)/(lam+f(i)).
    Independent of the p recursion, so it pins the stored tail mass
    without assuming the preference identity it is later tested against.
    For exactly affine tails the remainder telescopes to P_m exactly.
    """
    S = 0.0
    P = 1.0
    m = 0
    exact = _exact_affine_tail(f, K)
    while m < 1_000_000:
        m += 1
        fv = eval_f(f, K + m)
        P *= fv / (lam + fv)
        S += lam * P / fv
        if exact is not None:
            # telescoping remainder: sum_{j>m} nu P_j/(K+j+delta) = P_m
            rem_lo = rem_hi = P
        else:
            _, hi = remainder_interval(f, lam, K + m)
            if not math.isfinite(hi):
                continue
            rem_lo = 0.0
            rem_hi = (lam / eval_f(f, K + m + 1)) * P * hi
        mid = 0.5 * (rem_lo + rem_hi)
        half = 0.5 * (rem_hi - rem_lo)
        if half <= rel_tol * (S + mid):
            return S + mid, half + 8e-16 * (S + mid)
    raise HorizonError("tail ratio series did not certify")


def rescaled_preference(f: PAFunction, sol: MalthusianSolution, k: int) -> float:
    """True rescaled preference r_k = f(k) / lambda*."""
    return eval_f(f, k) / sol.lambda_star


@dataclass(frozen=True)
class IdentityReport:
    """Numerical consistency of a solution against the limit identities.

    ratio check:  r_k = p_{>k} / p_k for every k up to the horizon;
    sum check:    sum_k f(k) p_k (plus certified tail) equals lambda*.
    Violations indicate a solver or truncation fault.
    """

    ok: bool
    max_ratio_deviation: float
    worst_k: int
    sum_deviation: float
    ratio_rtol: float
    sum_rtol: float

    def summary(self) -> str:
        status = "ok" if self.ok else "VIOLATION"
        return (
            f"{status}: max |r_k - p_gt_k/p_k| / r_k = {self.max_ratio_deviation:.3e} "
            f"at k={self.worst_k}; |sum f p - lambda*|/lambda* = {self.sum_deviation:.3e}"
        )


def identity_report(
    sol: MalthusianSolution,
    ratio_rtol: float = 1e-8,
    sum_rtol: float = 1e-8,
) -> IdentityReport:
    """Check the preference identities of a solution at the stored horizon."""
    f = sol.f
    lam = sol.lambda_star
    ks = np.arange(1, sol.K + 1, dtype=np.int64)
    fk = f.values_at(ks)
    r = fk / lam
    dev = np.abs(r - sol.p_tail / sol.p) / r
    worst = int(np.argmax(dev))

    weighted = math.fsum((fk * sol.p).tolist())
    t_K = float(sol.p[-1] * fk[-1] / lam)
    lo, hi = remainder_interval(f, lam, sol.K)
    tail_mid = lam * t_K * 0.5 * (lo + hi)
    tail_half = lam * t_K * 0.5 * (hi - lo)
    sum_dev = (abs(weighted + tail_mid - lam) + tail_half) / lam

    ok = bool(dev[worst] <= ratio_rtol and sum_dev <= sum_rtol)
    return IdentityReport(
        ok=ok,
        max_ratio_deviation=float(dev[worst]),
        worst_k=int(ks[worst]),
        sum_deviation=float(sum_dev),
        ratio_rtol=ratio_rtol,
        sum_rtol=sum_rtol,
    )
