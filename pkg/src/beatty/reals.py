"""Exact constant reals and certified enclosures.

A :class:`RealExpr` is an element of a multiquadratic field, stored in the
canonical form ``sum(c_k * sqrt(k))`` with rational ``c_k`` and distinct
squarefree radicands ``k`` (``k == 1`` is the rational part). The surds
``sqrt(k)`` are linearly independent over Q, so the form is unique: a value
is rational exactly when only ``k == 1`` survives, and a non-rational value
can never be an integer. Floors therefore always resolve given enough bits;
the precision cap is what turns a pathological case into a reportable
:class:`Ambiguous` value instead of a hang.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

import numpy as np

from . import primes
from ._lexer import TokenStream
from .errors import AmbiguityError, ParseError, PrecisionLimitExceeded

START_PRECISION = 64
DEFAULT_PRECISION_CAP = 4096


@lru_cache(maxsize=4096)
def _isqrt_scaled(k: int, w: int) -> int:
    """floor(sqrt(k) * 2**w)."""
    return math.isqrt(k << (2 * w))


@lru_cache(maxsize=1024)
def _radicand_primes(k: int) -> tuple[int, ...]:
    return tuple(primes.prime_divisors(k))


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


class RealExpr:
    """An exact real of the form ``c_1 + c_2*sqrt(k_2) + ...``; immutable."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms=()):
        if isinstance(terms, dict):
            items = terms.items()
        else:
            items = terms
        clean = {}
        for k, c in items:
            c = _as_fraction(c)
            if c:
                clean[k] = clean.get(k, 0) + c
        self.terms: tuple[tuple[int, Fraction], ...] = tuple(
            (k, c) for k, c in sorted(clean.items()) if c
        )
        self._hash = None

    # construction -----------------------------------------------------------

    @classmethod
    def rational(cls, value) -> RealExpr:
        return cls(((1, _as_fraction(value)),))

    @classmethod
    def sqrt(cls, value) -> RealExpr:
        """sqrt of a nonnegative rational; perfect squares come back rational."""
        r = _as_fraction(value)
        if r < 0:
            raise ValueError("square root of a negative rational")
        if r == 0:
            return cls()
        # sqrt(p/q) = sqrt(p*q)/q
        s, k = primes.squarefree_decomposition(r.numerator * r.denominator)
        return cls(((k, Fraction(s, r.denominator)),))

    @classmethod
    def coerce(cls, x) -> RealExpr:
        if isinstance(x, RealExpr):
            return x
        if isinstance(x, (int, Fraction, Rational)):
            return cls.rational(x)
        if isinstance(x, str):
            return parse_real(x)
        raise TypeError(f"cannot use {type(x).__name__} as an exact real")

    # queries ------------------------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return all(k == 1 for k, _ in self.terms)

    def as_fraction(self) -> Fraction | None:
        if not self.terms:
            return Fraction(0)
        if self.is_rational:
            return self.terms[0][1]
        return None

    @property
    def surd_count(self) -> int:
        return sum(1 for k, _ in self.terms if k != 1)

    def rational_part(self) -> Fraction:
        return dict(self.terms).get(1, Fraction(0))

    # arithmetic ---------------------------------------------------------------

    def __add__(self, other):
        try:
            other = RealExpr.coerce(other)
        except TypeError:
            return NotImplemented
        d = dict(self.terms)
        for k, c in other.terms:
            d[k] = d.get(k, 0) + c
        return RealExpr(d)

    __radd__ = __add__

    def __neg__(self):
        return RealExpr(tuple((k, -c) for k, c in self.terms))

    def __sub__(self, other):
        try:
            other = RealExpr.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return RealExpr.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, int):
            return RealExpr(tuple((k, c * other) for k, c in self.terms))
        try:
            other = RealExpr.coerce(other)
        except TypeError:
            return NotImplemented
        d: dict[int, Fraction] = {}
        for k1, c1 in self.terms:
            for k2, c2 in other.terms:
                # sqrt(k1)*sqrt(k2) = g*sqrt(k1*k2/g**2); squarefree stays squarefree
                g = math.gcd(k1, k2)
                k = (k1 // g) * (k2 // g)
                d[k] = d.get(k, 0) + c1 * c2 * g
        return RealExpr(d)

    __rmul__ = __mul__

    def _conjugate(self, p: int) -> RealExpr:
        # field automorphism sqrt(p) -> -sqrt(p)
        return RealExpr(tuple((k, -c if k % p == 0 else c) for k, c in self.terms))

    def reciprocal(self) -> RealExpr:
        if not self.terms:
            raise ZeroDivisionError("reciprocal of zero")
        num = RealExpr.rational(1)
        den = self
        while not den.is_rational:
            k = next(k for k, _ in den.terms if k != 1)
            p = _radicand_primes(k)[0]
            conj = den._conjugate(p)
            num = num * conj
            den = den * conj
        return num * (1 / den.as_fraction())

    def __truediv__(self, other):
        try:
            other = RealExpr.coerce(other)
        except TypeError:
            return NotImplemented
        q = other.as_fraction()
        if q is not None:
            if q == 0:
                raise ZeroDivisionError("division by zero")
            return RealExpr(tuple((k, c / q) for k, c in self.terms))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return RealExpr.coerce(other) / self

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            return NotImplemented
        out = RealExpr.rational(1)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    # comparison ---------------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = RealExpr.rational(other)
        if not isinstance(other, RealExpr):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.terms)
        return self._hash

    def sign(self, cap: int = DEFAULT_PRECISION_CAP) -> int:
        q = self.as_fraction()
        if q is not None:
            return (q > 0) - (q < 0)
        w = START_PRECISION
        while True:
            lo, hi = _scaled_bounds(self.terms, w)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            if w >= cap:
                raise PrecisionLimitExceeded(f"sign of {self} unresolved at {cap} bits")
            w = min(2 * w, cap)

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __float__(self):
        q = self.as_fraction()
        if q is not None:
            return float(q)
        iv = refine(self, 60)
        return float((iv.lo + iv.hi) / 2)

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return f"RealExpr({str(self)!r})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for k, c in self.terms:
            mag = abs(c)
            if k == 1:
                body = _fmt_fraction(mag)
            elif mag == 1:
                body = f"sqrt({k})"
            elif mag.numerator == 1:
                body = f"sqrt({k})/{mag.denominator}"
            else:
                body = f"{_fmt_fraction(mag)}*sqrt({k})"
            parts.append((c < 0, body))
        neg, body = parts[0]
        out = ("-" if neg else "") + body
        for neg, body in parts[1:]:
            out += (" - " if neg else " + ") + body
        return out


def _fmt_fraction(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def sqrt(value) -> RealExpr:
    return RealExpr.sqrt(value)


def rational(value) -> RealExpr:
    return RealExpr.rational(value)


# --------------------------------------------------------------------------
# enclosures


@dataclass(frozen=True)
class CertifiedInterval:
    """Closed interval [lo, hi] with exact rational endpoints."""

    lo: Fraction
    hi: Fraction
    precision_bits: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return float((self.lo + self.hi) / 2)

    @property
    def radius(self) -> float:
        return float(self.hi - self.lo) / 2

    def __contains__(self, x) -> bool:
        if isinstance(x, RealExpr):
            return (x - self.lo).sign() >= 0 and (x - self.hi).sign() <= 0
        x = _as_fraction(x) if not isinstance(x, float) else x
        return self.lo <= x <= self.hi

    def contains_interval(self, other: CertifiedInterval) -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def shift(self, k) -> CertifiedInterval:
        return CertifiedInterval(self.lo + k, self.hi + k, self.precision_bits)

    def __str__(self):
        return f"[{float(self.lo)!r}, {float(self.hi)!r}]"


@dataclass(frozen=True)
class Ambiguous:
    """Report returned when a floor stays uncertified at ``max_p`` bits."""

    expr: RealExpr
    interval: CertifiedInterval
    max_p: int

    def __str__(self):
        return f"floor of {self.expr} ambiguous at {self.max_p} bits: {self.interval}"


def _scaled_bounds(terms, w):
    """Integers (lo, hi) with lo <= value * 2**w <= hi."""
    lo = hi = 0
    for k, c in terms:
        p, q = c.numerator, c.denominator
        if k == 1:
            lo += (p << w) // q
            hi += -((-p << w) // q)
            continue
        s = _isqrt_scaled(k, w)
        if p > 0:
            lo += (p * s) // q
            hi += -((-p * (s + 1)) // q)
        else:
            lo += (p * (s + 1)) // q
            hi += -((-p * s) // q)
    return lo, hi


def _guard_bits(terms) -> int:
    total = sum(abs(c) + 2 for _, c in terms)
    return max(1, math.ceil(math.log2(total + 1))) + 2


def refine(expr, p: int, cap: int = DEFAULT_PRECISION_CAP) -> CertifiedInterval:
    """Enclosure of ``expr`` of width at most 2**-p."""
    expr = RealExpr.coerce(expr)
    if p <= 0:
        raise ValueError("precision must be positive")
    q = expr.as_fraction()
    if q is not None:
        return CertifiedInterval(q, q, p)
    w = p + _guard_bits(expr.terms)
    if w > cap:
        raise PrecisionLimitExceeded(f"{w} working bits needed, cap is {cap}")
    lo, hi = _scaled_bounds(expr.terms, w)
    return CertifiedInterval(Fraction(lo, 1 << w), Fraction(hi, 1 << w), p)



def _floor_single_surd(c0: Fraction, c1: Fraction, k: int) -> int:
    """floor(c0 + c1*sqrt(k)) exactly, for squarefree k > 1."""
    Q = c0.denominator * c1.denominator // math.gcd(c0.denominator, c1.denominator)
    A = c0.numerator * (Q // c0.denominator)
    B = c1.numerator * (Q // c1.denominator)
    # floor((A + y)/Q) == floor((A + floor(y))/Q) for positive integer Q
    r = math.isqrt(B * B * k)
    fb = r if B >= 0 else -r - 1
    return (A + fb) // Q


def floor_certified(expr, max_p: int = DEFAULT_PRECISION_CAP):
    """Certified floor: an ``int``, or an :class:`Ambiguous` report."""
    expr = RealExpr.coerce(expr)
    q = expr.as_fraction()
    if q is not None:
        return math.floor(q)
    if expr.surd_count == 1:
        k, c1 = next((k, c) for k, c in expr.terms if k != 1)
        return _floor_single_surd(expr.rational_part(), c1, k)
    w = START_PRECISION
    while True:
        lo, hi = _scaled_bounds(expr.terms, w)
        m = lo >> w
        if (hi >> w) == m:
            return m
        if w >= max_p:
            iv = CertifiedInterval(Fraction(lo, 1 << w), Fraction(hi, 1 << w), w)
            return Ambiguous(expr, iv, max_p)
        w = min(2 * w, max_p)


def floor_exact(expr, max_p: int = DEFAULT_PRECISION_CAP) -> int:
    """Like :func:`floor_certified` but raises :class:`AmbiguityError`."""
    m = floor_certified(expr, max_p)
    if isinstance(m, Ambiguous):
        raise AmbiguityError(str(m), m)
    return m


def frac_certified(expr, max_p: int = DEFAULT_PRECISION_CAP):
    """Enclosure of the fractional part, or the :class:`Ambiguous` from the floor."""
    expr = RealExpr.coerce(expr)
    m = floor_certified(expr, max_p)
    if isinstance(m, Ambiguous):
        return m
    return refine(expr - m, max_p, cap=max_p + 64)


def snap_to_rational(iv) -> Fraction:
    """Smallest-denominator rational in the closed interval ``[lo, hi]``."""
    if isinstance(iv, CertifiedInterval):
        lo, hi = iv.lo, iv.hi
    else:
        lo, hi = (_as_fraction(x) if not isinstance(x, float) else Fraction(x) for x in iv)
    if lo > hi:
        raise ValueError("empty interval")
    return _simplest_between(Fraction(lo), Fraction(hi))


def _simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    if lo <= 0 <= hi:
        return Fraction(0)
    if hi < 0:
        return -_simplest_between(-hi, -lo)
    fl = math.floor(lo)
    if fl == lo:
        return Fraction(fl)
    if fl + 1 <= hi:
        return Fraction(fl + 1)
    # lo, hi both in (fl, fl+1): continued-fraction step
    return fl + 1 / _simplest_between(1 / (hi - fl), 1 / (lo - fl))


# --------------------------------------------------------------------------
# bulk floors of n*alpha + gamma

_INT64_SAFE = 1 << 62


def _isqrt_int64(x: np.ndarray) -> np.ndarray:
    r = np.floor(np.sqrt(x.astype(np.float64))).astype(np.int64)
    for _ in range(2):
        r -= (r * r > x).astype(np.int64)
        r += ((r + 1) * (r + 1) <= x).astype(np.int64)
    return r


class LinearFloor:
    """Compiled evaluator of ``floor(n*alpha + gamma)`` for integer ``n``.

    Rational and single-surd parameters are floored exactly with integer
    arithmetic (vectorised through ``int64`` when magnitudes allow); anything
    else goes through :func:`floor_certified`.
    """

    def __init__(self, alpha, gamma=0, max_p: int = DEFAULT_PRECISION_CAP):
        self.alpha = RealExpr.coerce(alpha)
        self.gamma = RealExpr.coerce(gamma)
        self.max_p = max_p
        coeffs = list(self.alpha.terms) + list(self.gamma.terms)
        Q = 1
        for _, c in coeffs:
            Q = Q * c.denominator // math.gcd(Q, c.denominator)
        self.Q = Q
        self.A = {k: int(c * Q) for k, c in self.alpha.terms}
        self.G = {k: int(c * Q) for k, c in self.gamma.terms}
        self.surds = sorted((set(self.A) | set(self.G)) - {1})

    @property
    def exact_fast(self) -> bool:
        return len(self.surds) <= 1

    def __call__(self, n: int) -> int:
        Q = self.Q
        base = n * self.A.get(1, 0) + self.G.get(1, 0)
        if not self.surds:
            return base // Q
        if len(self.surds) == 1:
            k = self.surds[0]
            B = n * self.A.get(k, 0) + self.G.get(k, 0)
            r = math.isqrt(B * B * k)
            return (base + (r if B >= 0 else -r - 1)) // Q
        return floor_exact(self.alpha * n + self.gamma, self.max_p)

    def array(self, ns) -> np.ndarray:
        """Vectorised floors; int64 result when it fits, else object dtype."""
        ns = np.asarray(ns)
        if ns.size == 0:
            return np.zeros(0, dtype=np.int64)
        nmax = max(abs(int(ns.min())), abs(int(ns.max())))
        if self.exact_fast and ns.dtype != object:
            a0, g0 = self.A.get(1, 0), self.G.get(1, 0)
            ok = abs(a0) * nmax + abs(g0) < _INT64_SAFE // 4
            if self.surds:
                k = self.surds[0]
                ak, gk = self.A.get(k, 0), self.G.get(k, 0)
                bmax = abs(ak) * nmax + abs(gk)
                ok = ok and bmax * bmax * k < _INT64_SAFE
            if ok:
                n64 = ns.astype(np.int64)
                base = n64 * a0 + g0
                if self.surds:
                    B = n64 * ak + gk
                    r = _isqrt_int64(B * B * k)
                    base = base + np.where(B >= 0, r, -r - 1)
                return base // self.Q
        out = np.array([self(int(n)) for n in ns.ravel()], dtype=object).reshape(ns.shape)
        return _narrow(out)


def _narrow(arr: np.ndarray) -> np.ndarray:
    """Convert an object array of ints to int64 when every entry fits."""
    if arr.dtype != object or arr.size == 0:
        return arr
    lo, hi = min(arr.flat), max(arr.flat)
    if -_INT64_SAFE < lo and hi < _INT64_SAFE:
        return arr.astype(np.int64)
    return arr


# --------------------------------------------------------------------------
# textual syntax


def parse_real(text: str) -> RealExpr:
    """Parse ``3/7``, ``0.25``, ``sqrt(2)-1``, ``(1+sqrt(5))/2`` and the like."""
    ts = TokenStream(text)
    value = _real_expr(ts)
    if ts.peek.kind != "end":
        ts.error(f"unexpected {ts.peek.text!r}")
    return value


def parse_real_list(text: str) -> list[RealExpr]:
    """Comma-separated RealExprs, commas inside parentheses respected."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur.append(ch)
    parts.append("".join(cur))
    return [parse_real(p) for p in parts if p.strip()]


def _real_expr(ts):
    value = _real_term(ts)
    while ts.peek.text in ("+", "-") and ts.peek.kind == "op":
        op = ts.next().text
        rhs = _real_term(ts)
        value = value + rhs if op == "+" else value - rhs
    return value


def _real_term(ts):
    value = _real_unary(ts)
    while ts.peek.text in ("*", "/") and ts.peek.kind == "op":
        op = ts.next().text
        rhs = _real_unary(ts)
        if op == "*":
            value = value * rhs
        else:
            if not rhs:
                raise ParseError("division by zero", ts.peek.pos)
            value = value / rhs
    return value


def _real_unary(ts):
    if ts.accept("-"):
        return -_real_unary(ts)
    if ts.accept("+"):
        return _real_unary(ts)
    return _real_atom(ts)


def _real_atom(ts):
    tok = ts.peek
    if tok.kind == "num":
        ts.next()
        return RealExpr.rational(Fraction(tok.text))
    if tok.kind == "name" and tok.text == "sqrt":
        ts.next()
        ts.expect("(")
        arg = _real_expr(ts)
        ts.expect(")")
        q = arg.as_fraction()
        if q is None:
            raise ParseError("sqrt argument must be rational", tok.pos)
        if q < 0:
            raise ParseError("sqrt of a negative number", tok.pos)
        return RealExpr.sqrt(q)
    if ts.accept("("):
        value = _real_expr(ts)
        ts.expect(")")
        return value
    ts.error(f"unexpected {tok.text or 'end of input'!r}")
