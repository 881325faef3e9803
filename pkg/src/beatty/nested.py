"""Parameter recovery for nested floors a_n = floor(...floor(n*alpha_1)*alpha_2...*alpha_d).

Two routes:

* moments, for alphas in [0, 1): the deficit e_n = n*prod(alpha) - a_n obeys
  e = alpha_d * e' + U with U uniform and independent of the inner deficit e',
  so its moments are polynomials in the alphas that can be inverted for d = 2, 3;
* jump levels, for alpha_1 > 1 and alpha_i > 2 otherwise: the 2**d values of
  a_{n+1} - a_n correspond to floor/ceiling words, ordered lexicographically,
  and their densities encode the fractional parts.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    DegenerateInput,
    DenominatorNearZero,
    DiscriminantNegative,
    OutOfRange,
    WrongLevelCount,
)
from .jumps import FrequencyConfig, JumpPolynomial, roots_to_alphas
from .reals import RealExpr
from .result import Estimate, RecoveryResult
from .seqgen import FloorWord, IntegerSequence

FORMS = ((2, 1), (3, 1), (3, 2), (3, 3))


# --------------------------------------------------------------------------
# moments


@dataclass
class MomentTable:
    T: dict
    P_d: float
    M_used: int
    N_slope: int
    d: int
    stderr: dict = field(default_factory=dict)
    method: str = "lsq"
    drift: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.M_used > self.N_slope:
            raise ValueError("M_used cannot exceed N_slope")
        if not all(math.isfinite(v) for v in self.T.values()):
            raise ValueError("moment values must be finite")

    def __getitem__(self, key):
        return self.T[key]

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "P_d": self.P_d,
            "M_used": self.M_used,
            "N_slope": self.N_slope,
            "method": self.method,
            "T": {f"{d},{k}": v for (d, k), v in sorted(self.T.items())},
            "stderr": {f"{d},{k}": v for (d, k), v in sorted(self.stderr.items())},
            "drift": {f"{d},{k}": v for (d, k), v in sorted(self.drift.items())},
        }


def _batch_stderr(x: np.ndarray, batches: int = 32) -> float:
    """Standard error of the mean from batch means (the terms are correlated)."""
    if x.size < 2 * batches:
        return float(x.std() / math.sqrt(max(x.size, 1)))
    means = np.array([b.mean() for b in np.array_split(x, batches)])
    return float(means.std(ddof=1) / math.sqrt(batches))


def empirical_moments(seq: IntegerSequence, d: int, ks=(1, 2, 3), method: str = "lsq",
                      M: int | None = None) -> MomentTable:
    """Cesaro moments of the deficit n*P - a_n.

    ``method="lsq"`` fits the slope by least squares over every term and
    averages over all of them. ``method="endpoint"`` uses P = a_N/N with the
    first floor(sqrt(N)) terms, which keeps the slope error's amplification
    bounded but leaves O(N**-1/4) sampling noise.
    """
    N = len(seq)
    if N < 100:
        raise ValueError("need at least 100 terms")
    a = seq.values.astype(np.float64)
    n = np.arange(1, N + 1, dtype=np.float64)
    if method == "lsq":
        nc = n - n.mean()
        P = float(np.dot(nc, a - a.mean()) / np.dot(nc, nc))
        M = N if M is None else M
    elif method == "endpoint":
        P = float(a[-1]) / N
        M = math.isqrt(N) if M is None else M
    else:
        raise ValueError(f"unknown method {method!r}")
    e = n[:M] * P - a[:M]
    T, se, drift = {}, {}, {}
    half = M // 2
    for k in ks:
        ek = e**k
        T[(d, k)] = float(ek.mean())
        se[(d, k)] = _batch_stderr(ek)
        drift[(d, k)] = float(ek[half:].mean() - ek[:half].mean())
    return MomentTable(T, P, M, N, d, se, method, drift)


def moment_formula(form, alphas):
    """Closed-form limit T_{d,k} for the four supported (d, k); exact for exact inputs."""
    d, k = form
    if (d, k) not in FORMS:
        raise ValueError(f"no closed form for T_{{{d},{k}}}")
    a = [RealExpr.coerce(x) if isinstance(x, (str, int)) else x for x in alphas]
    if len(a) != d:
        raise ValueError(f"T_{{{d},{k}}} takes {d} parameters")
    if d == 2:
        return (1 + a[1]) / 2
    a2, a3 = a[1], a[2]
    t31 = (1 + a3 + a2 * a3) / 2
    if k == 1:
        return t31
    if k == 2:
        return (1 + a2) / 2 * a3 + (2 + 3 * a2 + 2 * a2 * a2) / 6 * a3 * a3 + Fraction(1, 3)
    return t31 / 2 * ((1 + a3 + a3 * a3) + (a3 + a3 * a3) * a2 + a3 * a3 * a2 * a2)


def moment_recursion(alphas, k: int):
    """E[e_d**k] from e_1 = U_1, e_i = alpha_i * e_{i-1} + U_i, U_i iid uniform.

    Works in any d; inputs may be RealExpr, Fraction or float.
    """
    if any(isinstance(x, RealExpr) for x in alphas):
        one = RealExpr.rational(1)
    elif any(isinstance(x, float) for x in alphas):
        one = 1.0
    else:
        one = Fraction(1)
    u = [one / (t + 1) for t in range(k + 1)]  # E[U**t]
    m = list(u)  # moments of e_1
    for al in alphas[1:]:
        m = [sum(math.comb(j, i) * al**i * m[i] * u[j - i] for i in range(j + 1)) for j in range(k + 1)]
    return m[k]


def _check_range(name, v, lo=0.0, hi=1.0):
    if not lo < v < hi:
        raise OutOfRange(f"{name} = {v:.6g} outside ({lo}, {hi}); hypothesis violated or N too small")


def invert_moments_d2(m: MomentTable) -> list[Estimate]:
    T = m.T[(2, 1)]
    a2 = 2 * T - 1
    _check_range("alpha_2", a2)
    if m.P_d <= 0:
        raise OutOfRange("slope must be positive")
    a1 = m.P_d / a2
    r2 = 2 * (m.stderr.get((2, 1), 0.0) * 3 + abs(m.drift.get((2, 1), 0.0)))
    r1 = abs(a1) * (r2 / a2) + 1.0 / m.N_slope
    return [Estimate(a1, r1), Estimate(a2, r2)]


def _d3_solution(T1, T3, s=None):
    den = 4 * T1**3 - 2 * T1**2 + T1 - 2 * T3
    disc = -12 * T1**4 + 4 * T1**3 - 3 * T1**2 + 8 * T3 * T1
    if s is None:
        s = 1 if den >= 0 else -1
    if abs(den) < 1e-9:
        raise DenominatorNearZero(f"denominator {den:.3g} too close to 0")
    if disc < 0:
        if disc < -1e-6:
            raise DiscriminantNegative(f"discriminant {disc:.3g} < 0")
        disc = 0.0
    a2 = (-4 * T1**3 - T1 + 4 * T3 + s * (1 - 2 * T1) * math.sqrt(disc)) / (2 * den)
    a3 = (2 * T1 - 1) / (1 + a2)
    return a2, a3, s, den, disc


def invert_moments_d3(m: MomentTable, branch: int | None = None) -> tuple[list[Estimate], dict]:
    """(alpha_1, alpha_2, alpha_3) from T_{3,1}, T_{3,3} and the slope.

    ``branch`` forces the sign s of the square root; by default it is the
    sign of the denominator. T_{3,2}, if present, is used only as a check.
    """
    T1, T3 = m.T[(3, 1)], m.T[(3, 3)]
    a2, a3, s, den, disc = _d3_solution(T1, T3, branch)
    if a2 == 0 or a3 == 0:
        raise DenominatorNearZero("alpha_2 * alpha_3 vanishes")
    a1 = m.P_d / (a2 * a3)
    # radius by perturbing the inputs by three standard errors plus drift
    eps = {k: 3 * m.stderr.get(k, 0.0) + abs(m.drift.get(k, 0.0)) for k in ((3, 1), (3, 3))}
    rad = [0.0, 0.0, 0.0]
    for key in eps:
        if eps[key] == 0:
            continue
        T1p = T1 + eps[key] if key == (3, 1) else T1
        T3p = T3 + eps[key] if key == (3, 3) else T3
        try:
            b2, b3, *_ = _d3_solution(T1p, T3p, s)
        except (DenominatorNearZero, DiscriminantNegative):
            rad = [math.inf] * 3
            break
        b1 = m.P_d / (b2 * b3)
        rad = [r + abs(x - y) for r, x, y in zip(rad, (b1, b2, b3), (a1, a2, a3))]
    # the other branch maps (a1, a2, a3) to (a1*a2, 1/a2, a2*a3), which fits
    # T_{3,1} and T_{3,2} equally well; only the unit-cube range separates them
    diag = {"branch_sign": s, "denominator": den, "discriminant": disc,
            "in_unit_cube": all(0 < x < 1 for x in (a1, a2, a3))}
    if (3, 2) in m.T:
        diag["T32_residual"] = abs(float(moment_formula((3, 2), [a1, a2, a3])) - m.T[(3, 2)])
    return [Estimate(a1, rad[0]), Estimate(a2, rad[1]), Estimate(a3, rad[2])], diag


# --------------------------------------------------------------------------
# jump levels


@dataclass
class JumpSpectrum:
    levels: list  # (jump value, density), ascending
    d: int
    N: int = 0

    def __post_init__(self):
        if len(self.levels) != 2**self.d:
            raise WrongLevelCount(
                f"{len(self.levels)} jump levels, expected {2**self.d}",
                found=len(self.levels), expected=2**self.d,
            )
        self.levels = sorted(self.levels)
        if any(v < 0 for _, v in self.levels):
            raise ValueError("densities must be nonnegative")
        if abs(sum(v for _, v in self.levels) - 1) > 1e-9:
            raise ValueError("densities must sum to 1")

    def by_word(self) -> dict:
        """Density per word, ascending levels matched to lexicographic words."""
        return {w.bits: v for w, (_, v) in zip(FloorWord.all(self.d), self.levels)}


def jump_spectrum(seq: IntegerSequence, d: int) -> JumpSpectrum:
    vals, cnt = np.unique(seq.diffs(), return_counts=True)
    total = int(cnt.sum())
    return JumpSpectrum([(int(v), c / total) for v, c in zip(vals, cnt)], d, len(seq))


def _prefix_mass(dens, prefix):
    k = len(prefix)
    return sum(v for w, v in dens.items() if w[:k] == prefix)


def _conditional_fracs(sp: JumpSpectrum) -> list[Estimate]:
    """Fractional parts from conditional ceiling probabilities.

    P(w_1 = 1) = {alpha_1}; for i >= 2, P(w_i = 1 | prefix) = {m * alpha_i}
    where m is the nested rounding of 1 along the prefix. Flipping the last
    prefix bit from floor to ceiling raises m by exactly one, so the
    difference of the two conditionals is {alpha_i} modulo 1.
    """
    dens = sp.by_word()
    d, N = sp.d, max(sp.N, 2)
    out = []

    def cond(prefix):
        mass = _prefix_mass(dens, prefix)
        if mass <= 0:
            return None, 0.0
        return _prefix_mass(dens, prefix + (1,)) / mass, mass

    p1 = _prefix_mass(dens, (1,))
    out.append(Estimate(p1, 3 * math.sqrt(p1 * (1 - p1) / N) + 1 / N))
    for i in range(2, d + 1):
        acc, wsum, rad = 0j, 0.0, 0.0
        for u in FloorWord.all(i - 2) if i > 2 else [None]:
            base = u.bits if u is not None else ()
            hi, m_hi = cond(base + (1,))
            lo, m_lo = cond(base + (0,))
            if hi is None or lo is None:
                continue
            w = min(m_hi, m_lo)
            acc += w * cmath.exp(2j * math.pi * (hi - lo))
            wsum += w
            rad = max(rad, 3 * (math.sqrt(0.25 / (m_hi * N)) + math.sqrt(0.25 / (m_lo * N))))
        if wsum == 0:
            raise DegenerateInput(f"no prefix supports level {i}")
        frac = (cmath.phase(acc) / (2 * math.pi)) % 1.0
        out.append(Estimate(frac, rad))
    return out


def _hamming_fracs(sp: JumpSpectrum, cfg: FrequencyConfig) -> list[Estimate]:
    """Weight-grouped densities read as coefficients of prod(a + (1 - a) z)."""
    d = sp.d
    coeffs = [0.0] * (d + 1)
    for w, v in sp.by_word().items():
        coeffs[sum(w)] += v
    if coeffs[0] >= 1 - 1e-12:
        raise DegenerateInput("all density at Hamming weight 0")
    N = max(sp.N, 2)
    se = [math.sqrt(c * (1 - c) / N) + 1 / N for c in coeffs]
    est = roots_to_alphas(JumpPolynomial(coeffs, se, tolerance=1e-6), cfg, clip=True)
    return [Estimate(1 - e.value, e.radius) for e in est]


def recover_nested_jumps(sp: JumpSpectrum, method: str = "conditional",
                         cfg: FrequencyConfig = FrequencyConfig()) -> list[Estimate]:
    """Fractional parts, level by level for ``conditional``, sorted for ``hamming``."""
    if method == "conditional":
        return _conditional_fracs(sp)
    if method == "hamming":
        return sorted(_hamming_fracs(sp, cfg), key=lambda e: e.value)
    raise ValueError(f"unknown method {method!r}")


def word_densities(alphas) -> dict:
    """Limit density of each word for exact alphas (floats returned)."""
    from .seqgen import eval_T_word

    alphas = [RealExpr.coerce(a) for a in alphas]
    out = {}
    for w in FloorWord.all(len(alphas)):
        p, m = 1.0, 1
        for i, bit in enumerate(w.bits):
            x = float(m * alphas[i]) % 1.0
            p *= x if bit else 1 - x
            m = eval_T_word(FloorWord(w.bits[: i + 1]), alphas[: i + 1], 1)
        out[w.bits] = p
    return out


def recover_nested(seq: IntegerSequence, d: int, method: str = "jumps", **kw) -> RecoveryResult:
    """Dispatch to the moment or jump-level route and package a report."""
    N = len(seq)
    flags = []
    if method == "moments":
        if d == 2:
            m = empirical_moments(seq, 2, (1,), kw.get("moment_method", "lsq"))
            est, diag = invert_moments_d2(m), {}
        elif d == 3:
            m = empirical_moments(seq, 3, (1, 2, 3), kw.get("moment_method", "lsq"))
            est, diag = invert_moments_d3(m, kw.get("branch"))
            if not diag["in_unit_cube"]:
                flags.append("outside-unit-cube")
        else:
            raise ValueError("moment inversion is available for d = 2, 3 only")
        diag["moments"] = m.to_json()
        note = "Parameters in [0, 1) are determined in order, alpha_1 first."
        return RecoveryResult("nested", d, N, est, note, Estimate(m.P_d, 1.0 / N), flags=flags, diagnostics=diag)
    if method in ("jumps", "conditional", "hamming"):
        sp = jump_spectrum(seq, d)
        sub = "hamming" if method == "hamming" else "conditional"
        est = recover_nested_jumps(sp, sub)
        a1, aN = int(seq.values[0]), int(seq.values[-1])
        note = ("Only fractional parts are determined; integer parts enter "
                "through the jump values and the slope.")
        return RecoveryResult(
            "nested", d, N, est, note, Estimate((aN - a1) / (N - 1), 2.0 ** d / (N - 1)),
            diagnostics={"levels": [list(x) for x in sp.levels], "method": sub},
        )
    raise ValueError(f"unknown method {method!r}")
