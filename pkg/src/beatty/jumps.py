"""Recover fractional parts and shifts from a_n = sum_i floor(n*alpha_i + gamma_i).

Each summand jumps by one between n and n+1 with asymptotic frequency
{alpha_i}, independently across i when the parameter vector is irrational.
The jump distribution is therefore the coefficient list of

    P(z) = prod_i ((1 - {alpha_i}) + {alpha_i} z),

and the substitution z = (t - 1)/t turns t**d * P(z) into prod_i (t - {alpha_i}),
whose roots in [0, 1] are read off directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import brentq

from .errors import (
    ComplexRoots,
    NoFullJumps,
    RationalCase,
    RootOutOfRange,
    TrendMismatch,
)
from .reals import LinearFloor, RealExpr, snap_to_rational
from .result import Estimate, RecoveryResult
from .seqgen import IntegerSequence

AMBIGUITY_NOTE = (
    "Only the multiset of fractional parts is identified: any permutation of "
    "the alphas, integer shifts of the alphas summing to zero, and integer "
    "shifts of the gammas summing to zero generate the same sequence. The "
    "integer parts enter only through the total slope."
)


@dataclass(frozen=True)
class FrequencyConfig:
    cluster_gap: float = 0.5
    root_tolerance: float = 1e-6
    grid: int = 4096
    N_used: int | None = None

    def __post_init__(self):
        if self.cluster_gap <= 0 or self.root_tolerance <= 0 or self.grid <= 0:
            raise ValueError("FrequencyConfig fields must be positive")
        if self.N_used is not None and self.N_used <= 0:
            raise ValueError("N_used must be positive")


DEFAULT_FREQ = FrequencyConfig()


@dataclass
class JumpHistogram:
    counts: dict[int, int]
    N: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.N - 1:
            raise ValueError("histogram counts must sum to N - 1")

    @property
    def offset(self) -> int:
        return min(self.counts)

    def detrended(self) -> JumpHistogram:
        m = self.offset
        return JumpHistogram({r - m: c for r, c in self.counts.items()}, self.N)

    def merge(self, other: JumpHistogram) -> JumpHistogram:
        """Combine histograms of adjacent blocks (N counts samples, not jumps)."""
        counts = dict(self.counts)
        for r, c in other.counts.items():
            counts[r] = counts.get(r, 0) + c
        return JumpHistogram(counts, self.N + other.N - 1)


def jump_histogram(seq: IntegerSequence) -> JumpHistogram:
    if len(seq) < 2:
        raise ValueError("need at least two terms")
    vals, cnt = np.unique(seq.diffs(), return_counts=True)
    return JumpHistogram({int(v): int(c) for v, c in zip(vals, cnt)}, len(seq))


@dataclass
class JumpPolynomial:
    """Coefficients V_r, r = 0..d, of the jump distribution."""

    coefficients: list
    stderr: list = field(default=None)
    tolerance: float = 1e-9

    def __post_init__(self):
        if any(c < 0 for c in self.coefficients):
            raise ValueError("coefficients must be nonnegative")
        total = sum(self.coefficients)
        if abs(total - 1) > self.tolerance:
            raise ValueError(f"coefficients sum to {float(total)}, not 1")
        if self.stderr is None:
            self.stderr = [0.0] * len(self.coefficients)

    @property
    def d(self) -> int:
        return len(self.coefficients) - 1

    @property
    def exact(self) -> bool:
        return all(isinstance(c, (int, Fraction)) for c in self.coefficients)

    @classmethod
    def from_alphas(cls, alphas) -> JumpPolynomial:
        """Exact expansion of prod((1 - a) + a z) for rational a in [0, 1]."""
        coeffs = [Fraction(1)]
        for a in alphas:
            a = Fraction(a)
            nxt = [Fraction(0)] * (len(coeffs) + 1)
            for r, c in enumerate(coeffs):
                nxt[r] += c * (1 - a)
                nxt[r + 1] += c * a
            coeffs = nxt
        return cls(coeffs)


def fit_jump_polynomial(h: JumpHistogram, d: int) -> JumpPolynomial:
    """Normalised detrended frequencies; TrendMismatch if support exceeds [0, d]."""
    h = h.detrended()
    top = max(h.counts)
    if top > d:
        raise TrendMismatch(
            f"detrended jumps reach {top} > d = {d} (wrong d, or rational parameters)"
        )
    m = h.N - 1
    coeffs = [h.counts.get(r, 0) / m for r in range(d + 1)]
    # binomial standard error plus one count of slack
    stderr = [math.sqrt(v * (1 - v) / m) + 1 / m for v in coeffs]
    return JumpPolynomial(coeffs, stderr, tolerance=1e-9)


def _t_coefficients(coeffs):
    """Ascending coefficients of sum_r V_r (t-1)**r t**(d-r), which is prod (t - a_i)."""
    d = len(coeffs) - 1
    exact = all(isinstance(c, (int, Fraction)) for c in coeffs)
    zero = Fraction(0) if exact else 0.0
    out = [zero] * (d + 1)
    for r, v in enumerate(coeffs):
        # (t - 1)**r = sum_j C(r, j) t**j (-1)**(r - j); shifted by t**(d - r)
        for j in range(r + 1):
            out[j + d - r] += v * math.comb(r, j) * (-1) ** (r - j)
    return out


def _horner(c, t):
    acc = 0
    for v in reversed(c):
        acc = acc * t + v
    return acc


def _real_roots_unit(c, cfg: FrequencyConfig):
    """Real roots of the (ascending) float polynomial c on a neighbourhood of [0, 1]."""
    d = len(c) - 1
    tol = cfg.root_tolerance
    lo, hi = -1e-3, 1 + 1e-3
    grid = np.linspace(lo, hi, cfg.grid + 1)
    vals = npoly.polyval(grid, c)
    roots = []
    for i in range(cfg.grid):
        a, b = vals[i], vals[i + 1]
        if a == 0:
            roots.append(float(grid[i]))
        elif a * b < 0:
            roots.append(brentq(lambda t: npoly.polyval(t, c), grid[i], grid[i + 1], xtol=1e-15))
    if vals[-1] == 0:
        roots.append(float(grid[-1]))
    if len(roots) == d:
        return sorted(roots), "bisection"
    # tangential or clustered roots: companion-matrix eigenvalues
    eig = npoly.polyroots(c)
    scale = max(1.0, max(abs(e) for e in eig)) if len(eig) else 1.0
    bad = [e for e in eig if abs(e.imag) > math.sqrt(tol) * scale]
    if bad:
        raise ComplexRoots(
            f"jump polynomial has non-real roots {bad}; sample too small or hypothesis violated"
        )
    return sorted(float(e.real) for e in eig), "companion"


def roots_to_alphas(p: JumpPolynomial, cfg: FrequencyConfig = DEFAULT_FREQ, clip: bool = False) -> list[Estimate]:
    """Fractional parts {alpha_i} from the jump distribution, with error radii.

    The roots z_i of sum_r V_r z**r are -(1-a_i)/a_i, so a_i = 1/(1 - z_i);
    numerically we solve the equivalent monic polynomial in t = a directly.
    """
    d = p.d
    if d == 0:
        return []
    c = _t_coefficients(p.coefficients)
    cf = [float(v) for v in c]
    roots, method = _real_roots_unit(cf, cfg)
    if p.exact:
        exact = _exact_roots(c, roots)
        if exact is not None:
            return [Estimate(float(r), max(abs(float(r)), 1.0) * 2.0**-52, exact=r) for r in exact]
    slack = 1e-3
    for r in roots:
        if not (-slack <= r <= 1 + slack) and not clip:
            raise RootOutOfRange(f"root {r} outside [0, 1]")
    dc = npoly.polyder(cf)
    out = []
    for r in roots:
        t = min(max(r, 0.0), 1.0)
        # coefficient perturbation bound mapped through the root sensitivity
        dq = sum(e * abs(t - 1) ** k * abs(t) ** (d - k) for k, e in enumerate(p.stderr))
        deriv = abs(npoly.polyval(t, dc))
        rad = dq / deriv if deriv > 0 else 1.0
        rad = max(rad, 1e-15)
        out.append(Estimate(t, min(rad, 1.0)))
    return out


def _exact_roots(c, approx):
    """Verify rational candidates near the float roots by exact deflation."""
    poly = list(c)
    found = []
    for r in approx:
        cand = snap_to_rational((Fraction(r) - Fraction(1, 10**9), Fraction(r) + Fraction(1, 10**9)))
        if _horner(poly, cand) != 0:
            return None
        # synthetic division by (t - cand), coefficients ascending
        desc = poly[::-1]
        q = [desc[0]]
        for v in desc[1:-1]:
            q.append(v + q[-1] * cand)
        poly = q[::-1]
        found.append(cand)
    return sorted(found)


# --------------------------------------------------------------------------
# shifts


def _frac_bits(alpha: RealExpr, P: int = 96) -> int:
    """floor({alpha} * 2**P) as an int, so {i*alpha} ~ (i*A mod 2**P) / 2**P."""
    from .reals import refine

    iv = refine(alpha - LinearFloor(alpha)(1), P + 2)
    return math.floor(iv.lo * (1 << P))


def recover_gammas(seq: IntegerSequence, alphas, d: int | None = None, N: int | None = None,
                   alpha_radius: float = 0.0) -> list[Estimate]:
    """Shift estimates from the indices of full (d-)jumps.

    At a full jump every {i*alpha_j} lies on the arc of length {alpha_j} that
    ends at 1 - gamma_j (mod 1). The arc end is bracketed by the last point
    before the largest empty gap and the first point after it plus the arc
    length, which gives both the estimate and its radius.
    """
    alphas = [RealExpr.coerce(a) for a in alphas]
    d = d or len(alphas)
    if d != len(alphas):
        raise ValueError("d must equal the number of alphas")
    N = N or len(seq)
    seq = seq.head(N)
    offset = sum(LinearFloor(a)(1) for a in alphas)
    jumps = seq.diffs() - offset
    idx = np.nonzero(jumps == d)[0] + 1  # Delta(i) uses a_{i+1} - a_i
    if alpha_radius > 0:
        idx = idx[idx <= 1 / (10 * alpha_radius)]
    if idx.size == 0:
        raise NoFullJumps("no full jumps observed; increase N")
    P = 96
    out = []
    for a in alphas:
        A = _frac_bits(a, P)
        mask = (1 << P) - 1
        pts = np.array([((int(i) * A) & mask) / 2.0**P for i in idx])
        L = float(a - LinearFloor(a)(1))
        pts.sort()
        gaps = np.diff(np.concatenate([pts, [pts[0] + 1.0]]))
        g = int(np.argmax(gaps))
        last = pts[g]
        first = pts[(g + 1) % pts.size] + (1.0 if g + 1 == pts.size else 0.0)
        # first point after the gap is the arc start; the start plus the arc
        # length, taken back one turn, bounds the arc end from above
        upper = max(first + L - 1.0, last)
        end = 0.5 * (last + upper)
        radius = 0.5 * (upper - last) + float(idx.max()) * alpha_radius + 2.0**-50
        gamma = (1.0 - end) % 1.0
        out.append(Estimate(gamma, radius))
    return out


# --------------------------------------------------------------------------
# orchestration


def recover_linear(seq: IntegerSequence, d: int, gammas: bool = False, alphas=None,
                   cfg: FrequencyConfig = DEFAULT_FREQ) -> RecoveryResult:
    """Fractional-part multiset, total slope and (optionally) shifts."""
    if cfg.N_used:
        seq = seq.head(cfg.N_used)
    N = len(seq)
    hist = jump_histogram(seq)
    flags = []
    try:
        poly = fit_jump_polynomial(hist, d)
    except TrendMismatch as exc:
        raise RationalCase(f"rational case, outside the irrational-vector hypothesis: {exc}") from exc
    floor_v = 3 / (N - 1)
    degenerate = poly.coefficients[0] < floor_v or poly.coefficients[d] < floor_v
    if degenerate:
        flags.append("degenerate")
    try:
        est = roots_to_alphas(poly, cfg, clip=degenerate)
    except (ComplexRoots, RootOutOfRange) as exc:
        raise RationalCase(
            f"rational case, outside the irrational-vector hypothesis: {exc}"
        ) from exc
    a1, aN = int(seq.values[0]), int(seq.values[-1])
    slope = Estimate((aN - a1) / (N - 1), (d + 1) / (N - 1), exact=Fraction(aN - a1, N - 1))
    int_parts = round(slope.value - sum(e.value for e in est))
    if int_parts != hist.offset:
        flags.append("offset-slope-mismatch")
    result = RecoveryResult(
        family="linear",
        d=d,
        N=N,
        recovered=est,
        ambiguity_note=AMBIGUITY_NOTE,
        slope=slope,
        flags=flags,
        diagnostics={
            "jump_offset": hist.offset,
            "frequencies": poly.coefficients,
            "integer_part_sum": int_parts,
        },
    )
    if gammas:
        if alphas is not None:
            result.gammas = recover_gammas(seq, alphas, d)
        else:
            radius = max(e.radius for e in est)
            trial = [RealExpr.rational(Fraction(e.value).limit_denominator(10**12)) for e in est]
            result.gammas = recover_gammas(seq, trial, d, alpha_radius=radius)
            result.flags.append("gammas-from-estimated-alphas")
    return result


def jump_volumes(alphas) -> list[float]:
    """Closed-form jump frequencies for fractional parts ``alphas`` (floats)."""
    coeffs = [1.0]
    for a in alphas:
        nxt = [0.0] * (len(coeffs) + 1)
        for r, c in enumerate(coeffs):
            nxt[r] += c * (1 - a)
            nxt[r + 1] += c * a
        coeffs = nxt
    return coeffs
