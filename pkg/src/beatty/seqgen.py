"""Sequence families built from Beatty floors, and the sequence file format.

File format: UTF-8, optional ``# key: value`` header lines, then one decimal
integer per line, line k holding a_k.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .genpoly import ClassicalPoly
from .reals import LinearFloor, RealExpr, _narrow, parse_real_list

MAX_MATERIALIZED = 10**7
BLOCK = 1 << 18


@dataclass(frozen=True)
class ParameterVector:
    alphas: tuple
    gammas: tuple = ()

    def __post_init__(self):
        alphas = tuple(RealExpr.coerce(a) for a in self.alphas)
        if not alphas:
            raise ValueError("need at least one alpha")
        gammas = tuple(RealExpr.coerce(g) for g in self.gammas) or (RealExpr(),) * len(alphas)
        if len(gammas) != len(alphas):
            raise ValueError("alphas and gammas must have the same length")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "gammas", gammas)

    @property
    def d(self) -> int:
        return len(self.alphas)


@dataclass
class IntegerSequence:
    """Observed values a_1..a_N; ``values[0]`` holds a_1."""

    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.dtype != object:
            self.values = self.values.astype(np.int64)
        else:
            self.values = _narrow(self.values)
        if self.values.ndim != 1 or self.values.size == 0:
            raise ValueError("IntegerSequence must be a nonempty 1-d array")

    def __len__(self):
        return int(self.values.size)

    @property
    def N(self) -> int:
        return len(self)

    def term(self, n: int) -> int:
        if not 1 <= n <= len(self):
            raise IndexError(f"index {n} outside 1..{len(self)}")
        return int(self.values[n - 1])

    def diffs(self) -> np.ndarray:
        """Delta(i) = a_{i+1} - a_i for i = 1..N-1."""
        return np.diff(self.values)

    def head(self, N: int) -> IntegerSequence:
        return IntegerSequence(self.values[:N], dict(self.meta))

    # file format -------------------------------------------------------------

    def write(self, path) -> None:
        lines = [f"# {k}: {v}" for k, v in self.meta.items()]
        lines.extend(str(int(v)) for v in self.values)
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def read(cls, path) -> IntegerSequence:
        meta, values = {}, []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    key, _, value = line[1:].partition(":")
                    meta[key.strip()] = value.strip()
                else:
                    values.append(int(line))
        return cls(np.array(values, dtype=object), meta)

    def parameters(self) -> ParameterVector | None:
        if "alphas" not in self.meta:
            return None
        gammas = parse_real_list(self.meta["gammas"]) if "gammas" in self.meta else ()
        return ParameterVector(tuple(parse_real_list(self.meta["alphas"])), tuple(gammas))


@dataclass(frozen=True)
class FloorWord:
    """Floor (0) / ceiling (1) choice per nesting level."""

    bits: tuple

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if not bits or any(b not in (0, 1) for b in bits):
            raise ValueError("a FloorWord is a nonempty 0/1 tuple")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_str(cls, s: str) -> FloorWord:
        return cls(tuple(int(c) for c in s))

    @classmethod
    def all(cls, d: int) -> list[FloorWord]:
        """Every word of length d in lexicographic order."""
        return [cls(b) for b in itertools.product((0, 1), repeat=d)]

    @property
    def hamming_weight(self) -> int:
        return sum(self.bits)

    def __len__(self):
        return len(self.bits)

    def __lt__(self, other):
        return self.bits < other.bits

    def __str__(self):
        return "".join(map(str, self.bits))


def _fmt_list(xs) -> str:
    return ", ".join(str(x) for x in xs)


def _run_blocks(fn, args, N, workers):
    starts = list(range(1, N + 1, BLOCK))
    spans = [(s, min(s + BLOCK, N + 1)) for s in starts]
    if workers > 1 and len(spans) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, *zip(*[(args, a, b) for a, b in spans])))
    else:
        parts = [fn(args, a, b) for a, b in spans]
    if any(p.dtype == object for p in parts):
        parts = [p.astype(object) for p in parts]
    return np.concatenate(parts)


def _check_N(N):
    if N < 1:
        raise ValueError("N must be at least 1")
    if N > MAX_MATERIALIZED:
        raise ValueError(f"N > {MAX_MATERIALIZED}; use the iter_* generators")


def _linear_block(p: ParameterVector, a: int, b: int) -> np.ndarray:
    ns = np.arange(a, b, dtype=np.int64)
    total = None
    for alpha, gamma in zip(p.alphas, p.gammas):
        f = LinearFloor(alpha, gamma).array(ns)
        total = f if total is None else _add(total, f)
    return _narrow(total)


def _add(x, y):
    if x.dtype == object or y.dtype == object:
        return x.astype(object) + y.astype(object)
    return x + y


def gen_linear_sum(p: ParameterVector, N: int, workers: int = 1) -> IntegerSequence:
    """a_n = sum_i floor(n*alpha_i + gamma_i)."""
    _check_N(N)
    values = _run_blocks(_linear_block, p, N, workers)
    meta = {"family": "linear", "alphas": _fmt_list(p.alphas), "gammas": _fmt_list(p.gammas)}
    return IntegerSequence(values, meta)


def _poly_block(args, a, b):
    K, alphas = args
    ns = np.arange(a, b, dtype=np.int64)
    floors = [LinearFloor(al).array(ns) for al in alphas]
    return _narrow(K.on_arrays(floors))


def gen_poly_of_floors(K, alphas, N: int, workers: int = 1) -> IntegerSequence:
    """a_n = K(floor(n*alpha_1), ..., floor(n*alpha_d))."""
    _check_N(N)
    if not isinstance(K, ClassicalPoly):
        K = ClassicalPoly(K)
    alphas = tuple(RealExpr.coerce(a) for a in alphas)
    if K.nvars != len(alphas):
        raise ValueError(f"K has {K.nvars} variables but {len(alphas)} alphas given")
    values = _run_blocks(_poly_block, (K, alphas), N, workers)
    meta = {"family": "poly", "poly": str(K), "alphas": _fmt_list(alphas)}
    return IntegerSequence(values, meta)


def _nested_block(alphas, a, b):
    m = np.arange(a, b, dtype=np.int64)
    for al in alphas:
        m = LinearFloor(al).array(m)
    return _narrow(m)


def gen_nested(alphas, N: int, workers: int = 1) -> IntegerSequence:
    """a_n = floor(...floor(floor(n*alpha_1)*alpha_2)...*alpha_d)."""
    _check_N(N)
    alphas = tuple(RealExpr.coerce(a) for a in alphas)
    values = _run_blocks(_nested_block, alphas, N, workers)
    return IntegerSequence(values, {"family": "nested", "alphas": _fmt_list(alphas)})


def eval_T_word(W, alphas, n: int) -> int:
    """Nested rounding of n: floor at levels where W has 0, ceiling where 1."""
    if not isinstance(W, FloorWord):
        W = FloorWord(tuple(W))
    alphas = [RealExpr.coerce(a) for a in alphas]
    if len(W) != len(alphas):
        raise ValueError("word length must equal number of alphas")
    m = n
    for bit, al in zip(W.bits, alphas):
        m = LinearFloor(al)(m) if bit == 0 else -LinearFloor(-al)(m)
    return m


def iter_sequence(family: str, N: int, **kwargs):
    """Stream a_1..a_N block by block, for N beyond the in-memory cap."""
    if family == "linear":
        fn, args = _linear_block, kwargs["params"]
    elif family == "nested":
        fn, args = _nested_block, tuple(RealExpr.coerce(a) for a in kwargs["alphas"])
    elif family == "poly":
        K = kwargs["K"]
        K = K if isinstance(K, ClassicalPoly) else ClassicalPoly(K)
        fn, args = _poly_block, (K, tuple(RealExpr.coerce(a) for a in kwargs["alphas"]))
    else:
        raise ValueError(f"unknown family {family!r}")
    for a in range(1, N + 1, BLOCK):
        yield from (int(v) for v in fn(args, a, min(a + BLOCK, N + 1)))
