"""Recover the multiset {alpha_i} from a_n = prod_i floor(n*alpha_i).

When the largest floor floor(n*alpha_1) is prime it shows up as a prime
factor q of a_n with q**d >= |a_n|, pinning alpha_1 to [q/n, (q+1)/n).
Intersecting these intervals locates alpha_1; dividing it out reduces d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import EmptyIntersection, InsufficientDetections
from .primes import DEFAULT_CONFIG, FactorizationBudgetExceeded, PrimalityConfig, factorint, is_probable_prime
from .reals import LinearFloor, RealExpr, snap_to_rational
from .result import Estimate, RecoveryResult
from .seqgen import IntegerSequence

AMBIGUITY_NOTE = (
    "The multiset of parameters is determined, not their order; the report "
    "lists them in descending order. Signs are assumed positive."
)

MIN_DETECTIONS = 3


@dataclass(frozen=True)
class FactorDetection:
    n: int
    P_n: int
    q: int
    lo: Fraction
    hi: Fraction  # implied interval is [lo, hi)

    @property
    def implied_interval(self) -> tuple[Fraction, Fraction]:
        return (self.lo, self.hi)


def detect_leading_floor(P_n: int, n: int, d: int, cfg: PrimalityConfig = DEFAULT_CONFIG) -> FactorDetection | None:
    """Detection from one term, or None; raises FactorizationBudgetExceeded."""
    if P_n == 0:
        raise ValueError("P_n must be nonzero")
    if n <= 0 or d <= 0:
        raise ValueError("n and d must be positive")
    m = abs(P_n)
    if m == 1:
        return None
    if d == 1:
        q = m if is_probable_prime(m, cfg.miller_rabin_rounds, cfg.seed) else None
    else:
        q = max(factorint(m, cfg))
    if q is None or q**d < m:
        return None
    return FactorDetection(n, P_n, q, Fraction(q, n), Fraction(q + 1, n))


def _max_coverage(dets):
    """Intervals sharing the most-covered point: (subset, covered_count)."""
    events = []
    for i, det in enumerate(dets):
        events.append((det.lo, 1, i))
        events.append((det.hi, 0, i))  # half-open: close before open at ties
    events.sort(key=lambda e: (e[0], e[1]))
    best, cur, best_at = 0, 0, None
    for x, kind, _ in events:
        cur += 1 if kind else -1
        if kind and cur > best:
            best, best_at = cur, x
    chosen = [det for det in dets if det.lo <= best_at < det.hi]
    return chosen, best


def _intersect(dets):
    lo = max(det.lo for det in dets)
    hi = min(det.hi for det in dets)
    return lo, hi


def _floors_if_certain(ns: np.ndarray, lo: Fraction, hi: Fraction) -> tuple[np.ndarray, np.ndarray]:
    """floor(n*x) for x in [lo, hi), with a mask of n where it is constant."""
    out = np.empty(ns.size, dtype=object)
    ok = np.zeros(ns.size, dtype=bool)
    for j, n in enumerate(ns.tolist()):
        a = math.floor(n * lo)
        # constant on [lo, hi) iff n*hi <= a + 1
        out[j] = a
        ok[j] = n * hi <= a + 1
    return out, ok


def _snap(lo: Fraction, hi: Fraction, ns, vals, N, last: bool):
    """A small rational in [lo, hi) consistent with every term, or None.

    Consistent means its floors divide every nonzero term, or equal the
    terms outright when it is the last parameter.
    """
    if hi <= lo:
        return None
    r = snap_to_rational((lo, hi - (hi - lo) / 1024))
    if r.denominator**2 > N:
        return None
    for n, v in zip(ns.tolist(), vals.tolist()):
        f = math.floor(n * r)
        if last:
            if f != v:
                return None
        elif v != 0 and (f == 0 or v % f):
            return None
    return r


@dataclass
class _Stage:
    estimate: Estimate
    detections: int
    used: int
    skipped: int
    outliers: int


def _recover_leading(ns, vals, d, N, cfg, diag):
    """Interval for the largest remaining parameter."""
    if d == 1:
        # the remaining terms are the floors themselves
        dets = [FactorDetection(n, v, v, Fraction(v, n), Fraction(v + 1, n))
                for n, v in zip(ns.tolist(), vals.tolist())]
    else:
        dets = []
        for n, v in zip(ns.tolist(), vals.tolist()):
            if v == 0:
                continue
            try:
                det = detect_leading_floor(int(v), int(n), d, cfg)
            except FactorizationBudgetExceeded:
                diag["budget_exceeded"] = diag.get("budget_exceeded", 0) + 1
                continue
            if det is not None:
                dets.append(det)
    if len(dets) < MIN_DETECTIONS:
        raise InsufficientDetections(
            f"only {len(dets)} usable detections at depth d={d}; increase N"
        )
    lo, hi = _intersect(dets)
    outliers = 0
    if lo >= hi:
        chosen, _ = _max_coverage(dets)
        outliers = len(dets) - len(chosen)
        if len(chosen) < max(MIN_DETECTIONS, len(dets) // 2 + 1):
            raise EmptyIntersection(
                f"detections at d={d} do not share a common parameter value "
                f"(best point covered by {len(chosen)} of {len(dets)}); wrong d or hypothesis violated"
            )
        lo, hi = _intersect(chosen)
    return lo, hi, len(dets), outliers


def recover_product(seq: IntegerSequence, d: int, cfg: PrimalityConfig = DEFAULT_CONFIG) -> RecoveryResult:
    """Peel the parameters off one at a time, largest first."""
    if d < 1:
        raise ValueError("d must be positive")
    N = len(seq)
    vals = seq.values.astype(object)
    ns = np.arange(1, N + 1, dtype=np.int64)
    flags, stages = [], []
    if any(v < 0 for v in vals.tolist()):
        vals = np.array([abs(v) for v in vals.tolist()], dtype=object)
        flags.append("negative-terms-magnitudes-used")
    diag = {}
    estimates = []
    for depth in range(d, 0, -1):
        lo, hi, ndet, outliers = _recover_leading(ns, vals, depth, N, cfg, diag)
        if outliers:
            flags.append(f"outlier-detections-d{depth}")
        r = _snap(lo, hi, ns, vals, N, last=depth == 1)
        if r is not None:
            est = Estimate(float(r), 0.0, exact=r)
            floors = np.array([math.floor(n * r) for n in ns.tolist()], dtype=object)
            ok = np.ones(ns.size, dtype=bool)
        else:
            est = Estimate(float((lo + hi) / 2), float(hi - lo) / 2)
            floors, ok = _floors_if_certain(ns, lo, hi)
        estimates.append(est)
        if depth == 1:
            stages.append(_Stage(est, ndet, int(ns.size), 0, outliers))
            break
        nz = np.array([f != 0 for f in floors.tolist()], dtype=bool)
        ok &= nz
        divisible = np.array([ok[j] and vals[j] % floors[j] == 0 for j in range(ns.size)], dtype=bool)
        bad = int(ok.sum() - divisible.sum())
        if bad:
            flags.append(f"non-divisible-terms-d{depth}")
        skipped = int(ns.size - divisible.sum())
        stages.append(_Stage(est, ndet, int(divisible.sum()), skipped, outliers))
        ns = ns[divisible]
        vals = np.array([v // f for v, f in zip(vals[divisible].tolist(), floors[divisible].tolist())], dtype=object)
        if ns.size == 0:
            raise InsufficientDetections("every index was ambiguous after division")
    diagnostics = {
        "stages": [
            {"detections": s.detections, "used": s.used, "skipped": s.skipped, "outliers": s.outliers}
            for s in stages
        ],
        **diag,
    }
    return RecoveryResult(
        family="product",
        d=d,
        N=N,
        recovered=estimates,
        ambiguity_note=AMBIGUITY_NOTE,
        flags=flags,
        diagnostics=diagnostics,
    )


def beatty_prime_scan(alpha, gamma=0, N: int = 100, start: int = 1,
                      cfg: PrimalityConfig = DEFAULT_CONFIG) -> list[tuple[int, int]]:
    """All (n, |floor(n*alpha + gamma)|) with start <= n <= N and the value prime."""
    alpha = RealExpr.coerce(alpha)
    f = LinearFloor(alpha, gamma)
    vals = f.array(np.arange(start, N + 1, dtype=np.int64))
    out = []
    for n, v in zip(range(start, N + 1), vals.tolist()):
        v = abs(int(v))
        if v > 1 and is_probable_prime(v, cfg.miller_rabin_rounds, cfg.seed):
            out.append((n, v))
    return out
