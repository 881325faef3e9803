"""Range checks of generalized-polynomial identities and exact decisions for rational nested floors.

For rationals p_i/q_i in lowest terms, a(n) = floor(...floor(n*p_1/q_1)...*p_d/q_d)
satisfies a(n + Q) = a(n) + P with Q = prod q_i and P = prod p_i: shifting
n by Q shifts the first floor by p_1 * (Q/q_1), an integer multiple of the
next denominator, and so on down the nest. Two such sequences with equal
slopes P/Q therefore agree everywhere once they agree on any lcm(Q_a, Q_b)
consecutive integers.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import AmbiguityError
from .genpoly import GenPoly, eval_many, parse, to_string
from .reals import DEFAULT_PRECISION_CAP

HOLDS = "holds-on-range"
COUNTEREXAMPLE = "counterexample"
PROVED = "proved-equal"

SPORADIC_PAIR = ((Fraction(3, 7), Fraction(2, 9)), (Fraction(1, 3), Fraction(2, 7)))
KNUTSON = "floor(floor(sqrt(2)*n)*2*sqrt(2)*n) - floor(sqrt(2)*n)^2 - 2*n^2 + 1"


@dataclass
class IdentityReport:
    lhs: object
    rhs: object
    range: tuple
    verdict: str
    counterexample: tuple | None = None  # (n, lhs value, rhs value)
    certificate: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.verdict in (HOLDS, PROVED)

    def to_json(self) -> dict:
        out = {
            "lhs": _describe(self.lhs),
            "rhs": _describe(self.rhs),
            "range": list(self.range),
            "verdict": self.verdict,
        }
        if self.counterexample is not None:
            n, a, b = self.counterexample
            out["counterexample"] = {"n": n, "lhs": a, "rhs": b}
        if self.certificate:
            out["certificate"] = {k: str(v) if isinstance(v, Fraction) else v for k, v in self.certificate.items()}
        return out


def _describe(side) -> str:
    if isinstance(side, GenPoly):
        return to_string(side)
    if isinstance(side, tuple):
        return "(" + ", ".join(str(x) for x in side) + ")"
    return getattr(side, "__name__", str(side))


def _side_values(side, ns, max_p=DEFAULT_PRECISION_CAP):
    if isinstance(side, GenPoly):
        return eval_many(side, ns, max_p=max_p)
    return np.asarray(side(ns), dtype=object)


def _locate_ambiguity(side, ns, max_p):
    for n in ns.tolist():
        try:
            _side_values(side, np.array([n], dtype=np.int64), max_p)
        except AmbiguityError as exc:
            raise AmbiguityError(f"ambiguous floor at n = {n}: {exc}", exc.report) from exc


def verify_range(lhs, rhs, lo: int, hi: int, chunk: int = 1 << 17,
                 max_p: int = DEFAULT_PRECISION_CAP) -> IdentityReport:
    """Compare two one-variable expressions at every integer in [lo, hi].

    Either side may be expression text, a GenPoly, or a callable taking an
    int64 array. Returns at the first disagreement.
    """
    lhs = parse(lhs) if isinstance(lhs, str) else lhs
    rhs = parse(rhs) if isinstance(rhs, str) else rhs
    if lo > hi:
        raise ValueError("empty range")
    for start in range(lo, hi + 1, chunk):
        ns = np.arange(start, min(start + chunk, hi + 1), dtype=np.int64)
        try:
            a = _side_values(lhs, ns, max_p)
            b = _side_values(rhs, ns, max_p)
        except AmbiguityError:
            _locate_ambiguity(lhs, ns, max_p)
            _locate_ambiguity(rhs, ns, max_p)
            raise
        bad = np.nonzero(a != b)[0]
        if bad.size:
            j = int(bad[0])
            return IdentityReport(lhs, rhs, (lo, hi), COUNTEREXAMPLE, (int(ns[j]), int(a[j]), int(b[j])))
    return IdentityReport(lhs, rhs, (lo, hi), HOLDS)


def nested_rational(params, ns) -> np.ndarray:
    """Exact nested floors for rational parameters over an integer array."""
    m = np.asarray(ns, dtype=object)
    for p in params:
        p = Fraction(p)
        m = (m * p.numerator) // p.denominator
    return m


def _period(params) -> tuple[int, int]:
    Q = math.prod(Fraction(p).denominator for p in params)
    P = math.prod(Fraction(p).numerator for p in params)
    return Q, P


def rational_nested_equiv(a, b) -> IdentityReport:
    """Decide whether two rational nested-floor sequences agree on all of Z."""
    a = tuple(Fraction(x) for x in a)
    b = tuple(Fraction(x) for x in b)
    Qa, Pa = _period(a)
    Qb, Pb = _period(b)
    slope_a, slope_b = Fraction(Pa, Qa), Fraction(Pb, Qb)
    L = math.lcm(Qa, Qb)
    cert = {"slope_a": slope_a, "slope_b": slope_b, "period": L}
    if slope_a != slope_b:
        # the sequences must separate once |slope_a - slope_b| * n exceeds
        # both deficit bounds
        reach = math.floor((_deficit_bound(a) + _deficit_bound(b)) / abs(slope_a - slope_b)) + 1
        ns = np.arange(1, reach + 1, dtype=np.int64)
    else:
        ns = np.arange(1, L + 1, dtype=np.int64)
    va, vb = nested_rational(a, ns), nested_rational(b, ns)
    bad = np.nonzero(va != vb)[0]
    if bad.size:
        j = int(bad[0])
        return IdentityReport(a, b, (1, int(ns[-1])), COUNTEREXAMPLE, (int(ns[j]), int(va[j]), int(vb[j])), cert)
    if slope_a != slope_b:
        raise AssertionError(f"no separation found up to n = {int(ns[-1])} despite unequal slopes")
    return IdentityReport(a, b, (1, L), PROVED, certificate=cert)


def _deficit_bound(params) -> Fraction:
    """Bound on |n*prod(params) - a(n)|: the floor at level k loses less than
    one, which the later factors then scale."""
    total, tail = Fraction(0), Fraction(1)
    for p in reversed(params):
        total += tail
        tail *= abs(p)
    return total


@dataclass(frozen=True)
class CollisionPair:
    params_a: tuple
    params_b: tuple
    slope: Fraction
    period: int
    trivial: bool = False

    @property
    def d(self) -> int:
        return len(self.params_a)

    def to_json(self) -> dict:
        return {
            "params_a": [str(x) for x in self.params_a],
            "params_b": [str(x) for x in self.params_b],
            "d": self.d,
            "certificate": {"slope": str(self.slope), "period": self.period},
            "trivial": self.trivial,
        }


def _fractions(max_den: int, include_zero: bool):
    out = {Fraction(p, q) for q in range(1, max_den + 1) for p in range(1, q)}
    if include_zero:
        out.add(Fraction(0))
    return sorted(out)


def search_collisions(max_den: int, d: int = 2, include_trivial: bool = False) -> list[CollisionPair]:
    """All unordered pairs of distinct parameter vectors in [0, 1)**d, denominators
    <= max_den, whose nested floors coincide on Z.

    Pairs with equal multisets of parameters and pairs of identically-zero
    sequences are trivial and returned only with ``include_trivial``.
    """
    if max_den < 2:
        raise ValueError("max_den must be at least 2")
    fr = _fractions(max_den, include_zero=include_trivial)
    groups = defaultdict(list)
    for vec in itertools.product(fr, repeat=d):
        groups[math.prod(vec, start=Fraction(1))].append(vec)
    out = []
    for slope in sorted(groups):
        vecs = groups[slope]
        # equality is transitive, so one comparison per class representative suffices
        classes: list[list] = []
        for v in vecs:
            for members in classes:
                if rational_nested_equiv(members[0], v).verdict == PROVED:
                    members.append(v)
                    break
            else:
                classes.append([v])
        for members in classes:
            for va, vb in itertools.combinations(members, 2):
                trivial = sorted(va) == sorted(vb) or slope == 0
                if trivial and not include_trivial:
                    continue
                period = math.lcm(_period(va)[0], _period(vb)[0])
                out.append(CollisionPair(va, vb, slope, period, trivial))
    return out


def builtin_examples(n_linear: int = 10**4, n_sporadic: int = 10**5, n_knutson: int = 10**4) -> list[IdentityReport]:
    """The n - 1 example, the sporadic rational pair, and Haland Knutson's identity."""
    linear = verify_range("floor(n*(sqrt(2)-1)) + floor(n*(2-sqrt(2)))", "n - 1", 1, n_linear)
    (a1, a2), (b1, b2) = SPORADIC_PAIR
    sporadic = verify_range(f"floor(floor(n*{a1})*{a2})", f"floor(floor(n*{b1})*{b2})", -n_sporadic, n_sporadic)

    def delta0(ns):
        return (ns == 0).astype(np.int64)

    knutson = verify_range(KNUTSON, delta0, -n_knutson, n_knutson)
    return [linear, sporadic, knutson]
