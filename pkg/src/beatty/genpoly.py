"""Generalized polynomials: variables, real constants, +, * and floor.

Grammar accepted by :func:`parse` (whitespace insignificant)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*        # '/' only by a constant
    factor := '-' factor | atom ('^' nat)?
    atom   := 'floor(' expr ')' | 'ceil(' expr ')' | 'sqrt(' rational ')'
            | rational | decimal | var | '(' expr ')'
    var    := 'n' | 'x' nat

``n`` and ``x1`` both denote variable 1. ``a^k`` expands to a k-fold product,
``ceil(e)`` to ``-floor(-e)``, and a parenthesised group with no variables
and no floors is folded into a single :class:`Const`, which is what lets
:func:`to_string` round-trip arbitrary constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from ._lexer import TokenStream
from .errors import NonIntegerResult, ParseError
from .reals import DEFAULT_PRECISION_CAP, RealExpr, floor_exact


class GenPoly:
    """Base class of the immutable AST nodes."""

    def __add__(self, other):
        return add(self, _lift(other))

    def __radd__(self, other):
        return add(_lift(other), self)

    def __mul__(self, other):
        return mul(self, _lift(other))

    def __rmul__(self, other):
        return mul(_lift(other), self)

    def __neg__(self):
        return neg(self)

    def __sub__(self, other):
        return add(self, neg(_lift(other)))

    def __rsub__(self, other):
        return add(_lift(other), neg(self))

    def __pow__(self, k: int):
        if k == 0:
            return Const(RealExpr.rational(1))
        return mul(*([self] * k))

    def __str__(self):
        return to_string(self)

    def walk(self):
        yield self
        for c in getattr(self, "children", ()):
            yield from c.walk()
        if isinstance(self, Floor):
            yield from self.child.walk()

    @cached_property
    def variables(self) -> frozenset[int]:
        return frozenset(node.index for node in self.walk() if isinstance(node, Var))

    @property
    def has_floor(self) -> bool:
        return any(isinstance(node, Floor) for node in self.walk())


@dataclass(frozen=True, eq=True)
class Var(GenPoly):
    index: int

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("variable indices start at 1")


@dataclass(frozen=True, eq=True)
class Const(GenPoly):
    value: RealExpr


@dataclass(frozen=True, eq=True)
class Sum(GenPoly):
    children: tuple


@dataclass(frozen=True, eq=True)
class Product(GenPoly):
    children: tuple


@dataclass(frozen=True, eq=True)
class Floor(GenPoly):
    child: GenPoly


def _lift(x) -> GenPoly:
    if isinstance(x, GenPoly):
        return x
    return Const(RealExpr.coerce(x))


def const(x) -> Const:
    return Const(RealExpr.coerce(x))


def var(i: int = 1) -> Var:
    return Var(i)


def floor(x) -> Floor:
    return Floor(_lift(x))


def ceil(x) -> GenPoly:
    return neg(Floor(neg(_lift(x))))


def add(*xs) -> GenPoly:
    flat = []
    for x in xs:
        flat.extend(x.children if isinstance(x, Sum) else (x,))
    return flat[0] if len(flat) == 1 else Sum(tuple(flat))


def mul(*xs) -> GenPoly:
    flat = []
    for x in xs:
        flat.extend(x.children if isinstance(x, Product) else (x,))
    return flat[0] if len(flat) == 1 else Product(tuple(flat))


def neg(x: GenPoly) -> GenPoly:
    if isinstance(x, Const):
        return Const(-x.value)
    return mul(Const(RealExpr.rational(-1)), x)


# --------------------------------------------------------------------------
# parsing


def parse(text: str) -> GenPoly:
    ts = TokenStream(text)
    g = _expr(ts)
    if ts.peek.kind != "end":
        ts.error(f"unexpected {ts.peek.text!r}")
    idx = sorted(g.variables)
    if idx and idx != list(range(1, len(idx) + 1)):
        raise ParseError(f"variable indices {idx} are not contiguous from 1", 0)
    return g


def _expr(ts):
    parts = [_term(ts)]
    while ts.peek.kind == "op" and ts.peek.text in "+-":
        op = ts.next().text
        t = _term(ts)
        parts.append(t if op == "+" else neg(t))
    return add(*parts)


def _term(ts):
    parts = [_factor(ts)]
    while ts.peek.kind == "op" and ts.peek.text in "*/":
        op = ts.next().text
        pos = ts.peek.pos
        f = _factor(ts)
        if op == "/":
            if f.variables or f.has_floor:
                raise ParseError("division only by a constant", pos)
            c = _fold(f)
            if not c:
                raise ParseError("division by zero", pos)
            f = Const(1 / c)
        parts.append(f)
    return mul(*parts)


def _factor(ts):
    if ts.accept("-"):
        return neg(_factor(ts))
    base = _atom(ts)
    if ts.accept("^"):
        tok = ts.next()
        if tok.kind != "num" or not tok.text.isdigit():
            raise ParseError("exponent must be a nonnegative integer", tok.pos)
        base = base ** int(tok.text)
    return base


def _rational_literal(ts) -> Fraction:
    tok = ts.next()
    value = Fraction(tok.text)
    nxt = ts.tokens[ts.i]
    after = ts.tokens[ts.i + 1] if ts.i + 1 < len(ts.tokens) else nxt
    if (
        tok.text.isdigit()
        and nxt.text == "/"
        and after.kind == "num"
        and after.text.isdigit()
    ):
        ts.i += 2
        if int(after.text) == 0:
            raise ParseError("zero denominator", after.pos)
        value = Fraction(int(tok.text), int(after.text))
    return value


def _atom(ts):
    tok = ts.peek
    if tok.kind == "num":
        return Const(RealExpr.rational(_rational_literal(ts)))
    if tok.kind == "name":
        ts.next()
        name = tok.text
        if name in ("floor", "ceil"):
            ts.expect("(")
            inner = _expr(ts)
            ts.expect(")")
            return Floor(inner) if name == "floor" else ceil(inner)
        if name == "sqrt":
            ts.expect("(")
            neg_arg = ts.accept("-")
            if ts.peek.kind != "num":
                ts.error("sqrt takes a rational literal")
            r = _rational_literal(ts)
            ts.expect(")")
            if neg_arg and r:
                raise ParseError("sqrt of a negative number", tok.pos)
            return Const(RealExpr.sqrt(r))
        if name == "n":
            return Var(1)
        if name[0] == "x" and name[1:].isdigit() and int(name[1:]) >= 1:
            return Var(int(name[1:]))
        raise ParseError(f"unknown name {name!r}", tok.pos)
    if ts.accept("("):
        inner = _expr(ts)
        ts.expect(")")
        if not inner.variables and not inner.has_floor:
            return Const(_fold(inner))
        return inner
    ts.error(f"unexpected {tok.text or 'end of input'!r}")


def _fold(g: GenPoly) -> RealExpr:
    if isinstance(g, Const):
        return g.value
    if isinstance(g, Sum):
        out = RealExpr()
        for c in g.children:
            out = out + _fold(c)
        return out
    if isinstance(g, Product):
        out = RealExpr.rational(1)
        for c in g.children:
            out = out * _fold(c)
        return out
    raise TypeError("not a constant expression")


# --------------------------------------------------------------------------
# printing


def _const_str(c: RealExpr) -> str:
    q = c.as_fraction()
    if q is not None:
        s = str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
        return s if q >= 0 else f"({s})"
    if len(c.terms) == 1 and c.terms[0][1] == 1:
        return f"sqrt({c.terms[0][0]})"
    return f"({c})"


def to_string(g: GenPoly, var_style: str = "auto") -> str:
    """Printer whose output :func:`parse` maps back to an equal AST."""
    if var_style == "auto":
        var_style = "n" if g.variables <= {1} else "x"

    def go(node, in_product=False):
        if isinstance(node, Var):
            return "n" if var_style == "n" and node.index == 1 else f"x{node.index}"
        if isinstance(node, Const):
            return _const_str(node.value)
        if isinstance(node, Floor):
            return f"floor({go(node.child)})"
        if isinstance(node, Sum):
            s = " + ".join(go(c) for c in node.children)
            return f"({s})" if in_product else s
        if isinstance(node, Product):
            out, i, ch = [], 0, node.children
            while i < len(ch):
                j = i
                while j + 1 < len(ch) and ch[j + 1] == ch[i]:
                    j += 1
                s = go(ch[i], in_product=True)
                k = j - i + 1
                if k > 1 and not isinstance(ch[i], Const):
                    out.append(f"{s}^{k}")
                else:
                    out.extend([s] * k)
                i = j + 1
            return "*".join(out)
        raise TypeError(node)

    return go(g)


# --------------------------------------------------------------------------
# evaluation


def evaluate(g: GenPoly, assignment, max_p: int = DEFAULT_PRECISION_CAP) -> RealExpr:
    """Exact value of ``g`` as a :class:`RealExpr`."""
    env = _normalize_assignment(assignment)

    def go(node):
        if isinstance(node, Var):
            try:
                return env[node.index]
            except KeyError:
                raise KeyError(f"no value for variable x{node.index}") from None
        if isinstance(node, Const):
            return node.value
        if isinstance(node, Sum):
            out = RealExpr()
            for c in node.children:
                out = out + go(c)
            return out
        if isinstance(node, Product):
            out = RealExpr.rational(1)
            for c in node.children:
                out = out * go(c)
            return out
        return RealExpr.rational(floor_exact(go(node.child), max_p))

    return go(g)


def eval_int(g: GenPoly, assignment, max_p: int = DEFAULT_PRECISION_CAP) -> int:
    """Exact integer value of ``g``; raises :class:`NonIntegerResult` otherwise."""
    v = evaluate(g, assignment, max_p).as_fraction()
    if v is None or v.denominator != 1:
        raise NonIntegerResult(f"{to_string(g)} is not integer-valued at {assignment}")
    return v.numerator


def _normalize_assignment(assignment):
    if isinstance(assignment, (int, Fraction, RealExpr)):
        return {1: RealExpr.coerce(assignment)}
    env = {}
    for key, value in assignment.items():
        if isinstance(key, str):
            key = 1 if key == "n" else int(key.lstrip("x"))
        env[key] = RealExpr.coerce(value)
    return env


class _Vec:
    """Vectorised normal form: sum over k of terms[k] * sqrt(k) / den."""

    __slots__ = ("terms", "den")

    def __init__(self, terms, den=1):
        self.terms = terms
        self.den = den

    @classmethod
    def const(cls, c: RealExpr):
        den = 1
        for _, q in c.terms:
            den = den * q.denominator // math.gcd(den, q.denominator)
        return cls({k: int(q * den) for k, q in c.terms}, den)

    def scaled(self, factor):
        return {k: v * factor for k, v in self.terms.items()}


_isqrt_obj = np.frompyfunc(math.isqrt, 1, 1)


def _vec_add(vals):
    den = 1
    for v in vals:
        den = den * v.den // math.gcd(den, v.den)
    terms = {}
    for v in vals:
        for k, a in v.scaled(den // v.den).items():
            terms[k] = terms[k] + a if k in terms else a
    return _Vec(terms, den)


def _vec_mul(x, y):
    terms = {}
    for k1, a in x.terms.items():
        for k2, b in y.terms.items():
            g = math.gcd(k1, k2)
            k = (k1 // g) * (k2 // g)
            t = a * b * g if g != 1 else a * b
            terms[k] = terms[k] + t if k in terms else t
    return _Vec(terms, x.den * y.den)


def _vec_floor(x, size, max_p):
    surds = [k for k in x.terms if k != 1]
    A = x.terms.get(1, 0)
    if not surds:
        return _Vec({1: _as_obj(A, size) // x.den})
    if len(surds) == 1:
        k = surds[0]
        B = _as_obj(x.terms[k], size)
        r = _isqrt_obj(B * B * k)
        fb = np.where(B >= 0, r, -r - 1)
        return _Vec({1: (A + fb) // x.den})
    cols = {k: _as_obj(v, size) for k, v in x.terms.items()}
    out = np.empty(size, dtype=object)
    for i in range(size):
        e = RealExpr({k: Fraction(int(col[i]), x.den) for k, col in cols.items()})
        out[i] = floor_exact(e, max_p)
    return _Vec({1: out})


def _as_obj(a, size):
    if isinstance(a, np.ndarray):
        return a if a.dtype == object else a.astype(object)
    return np.full(size, int(a), dtype=object)


def eval_vector(g: GenPoly, env: dict, size: int, max_p: int = DEFAULT_PRECISION_CAP) -> np.ndarray:
    """Evaluate ``g`` exactly for every row of the integer arrays in ``env``.

    ``env`` maps variable index to an integer array (or a scalar RealExpr)
    of length ``size``. Returns an object array of Python ints.
    """
    cache: dict[int, _Vec] = {}

    def go(node):
        key = id(node)
        if key in cache:
            return cache[key]
        if isinstance(node, Var):
            value = env[node.index]
            if isinstance(value, RealExpr):
                out = _Vec.const(value)
            else:
                out = _Vec({1: _as_obj(np.asarray(value), size)})
        elif isinstance(node, Const):
            out = _Vec.const(node.value)
        elif isinstance(node, Sum):
            out = _vec_add([go(c) for c in node.children])
        elif isinstance(node, Product):
            out = go(node.children[0])
            for c in node.children[1:]:
                out = _vec_mul(out, go(c))
        else:
            out = _vec_floor(go(node.child), size, max_p)
        cache[key] = out
        return out

    res = go(g)
    if any(k != 1 for k in res.terms) or not _all_zero_mod(res):
        raise NonIntegerResult(f"{to_string(g)} is not integer-valued")
    return _as_obj(res.terms.get(1, 0), size) // res.den


def _all_zero_mod(v: _Vec) -> bool:
    if v.den == 1:
        return True
    a = v.terms.get(1, 0)
    return bool(np.all(np.asarray(a, dtype=object) % v.den == 0))


def eval_many(g: GenPoly, ns, chunk: int = 1 << 17, max_p: int = DEFAULT_PRECISION_CAP) -> np.ndarray:
    """Values of a one-variable ``g`` at each integer in ``ns`` (object array)."""
    ns = np.asarray(ns)
    out = np.empty(ns.size, dtype=object)
    for start in range(0, ns.size, chunk):
        block = ns[start : start + chunk].astype(object)
        out[start : start + block.size] = eval_vector(g, {1: block}, block.size, max_p)
    return out


# --------------------------------------------------------------------------
# floor-free polynomials


def monomials(g: GenPoly) -> dict[tuple[int, ...], RealExpr]:
    """Expand a floor-free GenPoly into {exponent vector: coefficient}."""
    if g.has_floor:
        raise ValueError("expression contains floor")
    nvars = max(g.variables, default=0)

    def go(node):
        if isinstance(node, Var):
            e = [0] * nvars
            e[node.index - 1] = 1
            return {tuple(e): RealExpr.rational(1)}
        if isinstance(node, Const):
            return {(0,) * nvars: node.value} if node.value else {}
        if isinstance(node, Sum):
            out = {}
            for c in node.children:
                for e, v in go(c).items():
                    out[e] = out.get(e, RealExpr()) + v
            return {e: v for e, v in out.items() if v}
        out = {(0,) * nvars: RealExpr.rational(1)}
        for c in node.children:
            nxt = {}
            for e1, v1 in out.items():
                for e2, v2 in go(c).items():
                    e = tuple(a + b for a, b in zip(e1, e2))
                    nxt[e] = nxt.get(e, RealExpr()) + v1 * v2
            out = {e: v for e, v in nxt.items() if v}
        return out

    return go(g)


class ClassicalPoly:
    """A floor-free generalized polynomial in ``x1..xd``."""

    def __init__(self, g):
        if isinstance(g, str):
            g = parse(g)
        if g.has_floor:
            raise ValueError("ClassicalPoly must be floor-free")
        self.expr = g
        self.monomials = monomials(g)
        self.nvars = max(g.variables, default=0)
        self.degree = max((sum(e) for e in self.monomials), default=0)

    def __str__(self):
        return to_string(self.expr, var_style="x")

    def __repr__(self):
        return f"ClassicalPoly({str(self)!r})"

    def __call__(self, *xs):
        return evaluate(self.expr, {i + 1: x for i, x in enumerate(xs)})

    def on_arrays(self, arrays) -> np.ndarray:
        """K evaluated row-wise on integer arrays (one array per variable)."""
        size = len(arrays[0])
        env = {i + 1: np.asarray(a) for i, a in enumerate(arrays)}
        return eval_vector(self.expr, env, size)

    def gradient(self, point) -> list[RealExpr]:
        """Exact partial derivatives at ``point`` (sequence of RealExpr)."""
        point = [RealExpr.coerce(p) for p in point]
        out = []
        for i in range(self.nvars):
            acc = RealExpr()
            for e, c in self.monomials.items():
                if e[i] == 0:
                    continue
                term = c * e[i]
                for j, p in enumerate(e):
                    term = term * point[j] ** (p - 1 if j == i else p)
                acc = acc + term
            out.append(acc)
        return out
