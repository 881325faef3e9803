"""Recover {alpha_i} from a_n = K(floor(n*alpha)) with K = S + R, S symmetric.

For large n, Delta(n) = (a_{n+1} - a_n) / n**(D-1) sits near one of the 2**d
corners sum_i (floor(alpha_i) + eps_i) * dS/dx_i(alpha), eps in {0,1}**d.  The
cube's edges are the gradient entries; a form-specific inversion then returns
the alphas.
"""

from __future__ import annotations

import bisect
import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import NegativeIntermediate, PairingFailure, WrongClusterCount
from .result import Estimate, RecoveryResult
from .seqgen import IntegerSequence

SHAPES = ("product", "powersum", "quadratic")
MIN_CLUSTER_SAMPLES = 10

AMBIGUITY_NOTE = "Only the multiset of parameters is determined; any R of lower degree is invisible."


@dataclass(frozen=True)
class SymmetricForm:
    shape: str
    d: int
    r: int | None = None

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"shape must be one of {SHAPES}")
        if self.d < 2:
            raise ValueError("d must be at least 2")
        if self.shape == "powersum":
            if self.r is None or self.r < 2:
                raise ValueError("powersum needs r >= 2")
        elif self.r is not None:
            raise ValueError(f"{self.shape} takes no r")

    @property
    def D(self) -> int:
        return {"product": self.d, "powersum": self.r, "quadratic": 2}[self.shape]

    @classmethod
    def parse(cls, text: str) -> SymmetricForm:
        """``product:d``, ``powersum:d:r`` or ``quadratic:d``."""
        parts = text.strip().split(":")
        try:
            nums = [int(p) for p in parts[1:]]
        except ValueError:
            raise ValueError(f"bad form {text!r}") from None
        if parts[0] == "powersum" and len(nums) == 2:
            return cls("powersum", nums[0], nums[1])
        if parts[0] in ("product", "quadratic") and len(nums) == 1:
            return cls(parts[0], nums[0])
        raise ValueError(f"bad form {text!r}")

    def __str__(self):
        return f"{self.shape}:{self.d}" + (f":{self.r}" if self.r is not None else "")

    def polynomial(self) -> str:
        """S as text accepted by the polynomial parser."""
        xs = [f"x{i}" for i in range(1, self.d + 1)]
        if self.shape == "product":
            return "*".join(xs)
        if self.shape == "powersum":
            return "+".join(f"{x}^{self.r}" for x in xs)
        return "+".join(f"{a}*{b}" for a, b in itertools.combinations_with_replacement(xs, 2))

    def gradient(self, alphas) -> list[float]:
        a = [float(x) for x in alphas]
        if len(a) != self.d:
            raise ValueError("wrong number of parameters")
        if self.shape == "product":
            return [math.prod(a[:i] + a[i + 1:]) for i in range(self.d)]
        if self.shape == "powersum":
            return [self.r * x ** (self.r - 1) for x in a]
        s = sum(a)
        return [x + s for x in a]


@dataclass
class CubeCorners:
    corners: list
    radii: list = field(default=None)
    counts: list = field(default=None)

    def __post_init__(self):
        n = len(self.corners)
        if n == 0 or n & (n - 1):
            raise ValueError("a cube has 2**d corners")
        self.corners = sorted(self.corners)
        if self.radii is None:
            self.radii = [0] * n

    @property
    def d(self) -> int:
        return len(self.corners).bit_length() - 1

    @property
    def base(self):
        return self.corners[0]


@dataclass
class GradientSet:
    values: list
    radii: list = field(default=None)

    def __post_init__(self):
        if any(v <= 0 for v in self.values):
            raise ValueError("gradient entries must be positive")
        if self.radii is None:
            self.radii = [0.0] * len(self.values)


def construct_cube(edges, base=0) -> list:
    """All 2**d subset sums of ``edges`` shifted by ``base``, sorted."""
    sums = [base]
    for e in edges:
        sums = sums + [s + e for s in sums]
    return sorted(sums)


def normalized_jumps(seq: IntegerSequence, D: int, window=None) -> tuple[np.ndarray, np.ndarray]:
    """(n, Delta(n)) for n in the window, default [N/2, N-1]."""
    N = len(seq)
    lo, hi = window if window is not None else (N // 2, N - 1)
    if not 1 <= lo <= hi <= N - 1:
        raise ValueError(f"window [{lo}, {hi}] outside 1..{N - 1}")
    ns = np.arange(lo, hi + 1, dtype=np.int64)
    diffs = seq.diffs()[lo - 1: hi]
    d = np.array([float(x) for x in diffs]) if diffs.dtype == object else diffs.astype(np.float64)
    return ns, d / ns.astype(np.float64) ** (D - 1)


def cluster_limit_points(values, expected: int, gap: float | None = None,
                         min_samples: int = MIN_CLUSTER_SAMPLES) -> CubeCorners:
    """Split sorted values at gaps wider than ``gap`` and return the cluster means.

    The default gap is span / (16 * expected), fine enough to separate any
    pair of corners further apart than a sixteenth of the mean spacing.
    """
    v = np.sort(np.asarray(values, dtype=np.float64))
    if v.size == 0:
        raise ValueError("no values to cluster")
    span = float(v[-1] - v[0])
    if gap is None:
        gap = span / (16 * expected)
    if span == 0 or gap <= 0:
        raise WrongClusterCount("all values coincide", found=1, expected=expected)
    cuts = np.nonzero(np.diff(v) > gap)[0] + 1
    groups = np.split(v, cuts)
    if len(groups) != expected:
        raise WrongClusterCount(
            f"found {len(groups)} clusters, expected {expected} "
            "(adjust window/gap, or parameters violate the independence hypothesis)",
            found=len(groups), expected=expected,
        )
    sizes = [g.size for g in groups]
    if min(sizes) < min_samples:
        raise WrongClusterCount(
            f"a cluster has only {min(sizes)} samples (< {min_samples}); raise N",
            found=len(groups), expected=expected,
        )
    means = [float(g.mean()) for g in groups]
    radii = [float(np.abs(g - g.mean()).max()) for g in groups]
    return CubeCorners(means, radii, sizes)


def _peel_exact(corners, d, require_distinct):
    counts = Counter(x - corners[0] for x in corners)
    if require_distinct and max(counts.values()) > 1:
        raise PairingFailure("corner multiset has repeated subset sums")
    edges = []
    for _ in range(d):
        pos = [x for x in counts if x > 0 and counts[x] > 0]
        if not pos:
            raise PairingFailure("no positive corner left to peel")
        e = min(pos)
        keep = Counter()
        for x in sorted(counts):
            c = counts[x]
            if c <= 0:
                continue
            if counts[x + e] < c:
                raise PairingFailure(f"corner {x} has no partner at distance {e}")
            counts[x + e] -= c
            counts[x] = 0
            keep[x] = c
        counts = +keep
        edges.append(e)
    if set(counts) != {0} or counts[0] != 1:
        raise PairingFailure("peeling did not terminate at a single corner")
    return edges


def _peel_tolerant(corners, d, tol):
    rest = [x - corners[0] for x in corners]
    if any(b - a <= tol for a, b in zip(rest, rest[1:])):
        raise PairingFailure("corners are not distinct at the working tolerance")
    edges = []
    for _ in range(d):
        e = rest[1]
        keep, left = [], list(rest)
        while left:
            x = left.pop(0)
            j = bisect.bisect_left(left, x + e - tol)
            if j >= len(left) or abs(left[j] - (x + e)) > tol:
                raise PairingFailure(f"corner {x:.6g} has no partner at distance {e:.6g}")
            left.pop(j)
            keep.append(x)
        rest = keep
        edges.append(e)
    return edges


def peel_cube_edges(c, tol: float | None = None, require_distinct: bool = True) -> GradientSet:
    """Edge multiset of a cube given all of its corners.

    The smallest positive corner above the base is an edge e; pairing every
    corner with its partner at distance e and dropping the upper member
    leaves the cube on the remaining edges.  Exact inputs (ints, Fractions)
    are paired exactly; floats use ``tol``, three times the largest corner
    radius by default.
    """
    if not isinstance(c, CubeCorners):
        c = CubeCorners(list(c))
    d = c.d
    if d == 0:
        return GradientSet([])
    exact = all(not isinstance(x, float) for x in c.corners)
    if exact and tol is None:
        # peel over a common denominator; Fraction arithmetic is the bottleneck
        q = math.lcm(*(Fraction(x).denominator for x in c.corners))
        ints = [int(x * q) for x in c.corners]
        edges = _peel_exact(ints, d, require_distinct)
        if construct_cube(edges, ints[0]) != ints:
            raise PairingFailure("peeled edges do not rebuild the corner multiset")
        if any(isinstance(x, Fraction) for x in c.corners):
            edges = [Fraction(e, q) for e in edges]
        return GradientSet(sorted(edges), [0.0] * d)
    tol = 3 * max(c.radii) if tol is None else tol
    tol = max(tol, 1e-12 * max(1.0, abs(c.corners[-1])))
    edges = _peel_tolerant([float(x) for x in c.corners], d, tol)
    radii = [2 * max(c.radii)] * d
    rebuilt = construct_cube(edges, c.corners[0])
    if any(abs(a - b) > d * tol for a, b in zip(rebuilt, c.corners)):
        raise PairingFailure("peeled edges do not rebuild the corner multiset")
    return GradientSet(sorted(edges), radii)


def _invert(values, form):
    L = list(values)
    d = form.d
    if form.shape == "product":
        P = math.exp(sum(math.log(x) for x in L) / (d - 1))
        return [P / x for x in L]
    if form.shape == "powersum":
        r = form.r
        return [(x / r) ** (1 / (r - 1)) for x in L]
    s = sum(L) / (d + 1)
    out = [x - s for x in L]
    if min(out) <= 0:
        raise NegativeIntermediate(
            f"gradient set gives a non-positive parameter ({min(out):.4g}); data inconsistent with {form}"
        )
    return out


def invert_gradient_set(L, form: SymmetricForm) -> list[Estimate]:
    """Form-specific inversion of the gradient multiset, with propagated radii."""
    if not isinstance(L, GradientSet):
        L = GradientSet(list(L))
    if len(L.values) != form.d:
        raise ValueError(f"{form} needs {form.d} gradient entries, got {len(L.values)}")
    vals = [float(x) for x in L.values]
    centre = _invert(vals, form)
    rad = [0.0] * form.d
    for j, rj in enumerate(L.radii):
        if rj <= 0:
            continue
        h = vals[:]
        h[j] += rj
        bumped = _invert(h, form)
        for i in range(form.d):
            rad[i] += abs(bumped[i] - centre[i])
    order = np.argsort(centre)
    return [Estimate(centre[i], rad[i]) for i in order]


def recover_symmetric(seq: IntegerSequence, form: SymmetricForm, window=None,
                      gap: float | None = None, min_samples: int = MIN_CLUSTER_SAMPLES) -> RecoveryResult:
    ns, delta = normalized_jumps(seq, form.D, window)
    corners = cluster_limit_points(delta, 2**form.d, gap, min_samples)
    L = peel_cube_edges(corners)
    est = invert_gradient_set(L, form)
    return RecoveryResult(
        family="symmetric",
        d=form.d,
        N=len(seq),
        recovered=est,
        ambiguity_note=AMBIGUITY_NOTE,
        diagnostics={
            "form": str(form),
            "window": [int(ns[0]), int(ns[-1])],
            "corners": corners.corners,
            "cluster_sizes": corners.counts,
            "gradient_set": L.values,
        },
    )
