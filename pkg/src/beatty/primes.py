"""Primality testing and integer factorization, delegated to sympy.

``is_probable_prime`` runs sympy's BPSW test (exact below 2**64) and adds
``rounds`` Miller-Rabin bases drawn from a seeded generator. ``factorint``
trial-divides up to a bound, then splits surviving composites with sympy's
step-limited Pollard rho, so a hard cofactor surfaces as an error instead
of an unbounded stall.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import sympy
from sympy.ntheory.factor_ import pollard_rho
from sympy.ntheory.primetest import mr


@dataclass(frozen=True)
class PrimalityConfig:
    miller_rabin_rounds: int = 40
    trial_division_bound: int = 10_000
    pollard_rho_budget: int = 200_000
    seed: int = 0

    def __post_init__(self):
        if min(self.miller_rabin_rounds, self.trial_division_bound, self.pollard_rho_budget) <= 0:
            raise ValueError("PrimalityConfig fields must be positive")


DEFAULT_CONFIG = PrimalityConfig()


class FactorizationBudgetExceeded(Exception):
    """Pollard rho ran out of iterations; ``partial`` holds the factors found so far."""

    def __init__(self, partial, remaining):
        super().__init__(f"could not split {remaining}")
        self.partial = partial
        self.remaining = remaining


def is_probable_prime(n: int, rounds: int = 40, seed: int = 0) -> bool:
    if not sympy.isprime(n):
        return False
    if n < 2**64:
        return True
    rng = random.Random(seed ^ (n & 0xFFFFFFFF))
    return mr(n, [rng.randrange(2, n - 1) for _ in range(rounds)])


def factorint(n: int, cfg: PrimalityConfig = DEFAULT_CONFIG) -> dict[int, int]:
    """Prime factorization of |n| as {prime: exponent}.

    Raises FactorizationBudgetExceeded when a composite cofactor survives
    ``cfg.pollard_rho_budget`` rho steps.
    """
    n = abs(n)
    if n == 0:
        raise ValueError("cannot factor 0")
    factors: dict[int, int] = {}
    for p in sympy.primerange(2, cfg.trial_division_bound + 1):
        if p * p > n:
            break
        while n % p == 0:
            factors[p] = factors.get(p, 0) + 1
            n //= p
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if is_probable_prime(m, cfg.miller_rabin_rounds, cfg.seed):
            factors[m] = factors.get(m, 0) + 1
            continue
        r = sympy.integer_nthroot(m, 2)
        if r[1]:
            stack += [r[0], r[0]]
            continue
        f = pollard_rho(m, seed=cfg.seed, max_steps=cfg.pollard_rho_budget)
        if f is None:
            raise FactorizationBudgetExceeded(factors, m)
        stack += [f, m // f]
    return dict(sorted(factors.items()))


def largest_prime_factor(n: int, cfg: PrimalityConfig = DEFAULT_CONFIG) -> int:
    return max(factorint(n, cfg))


def squarefree_decomposition(n: int) -> tuple[int, int]:
    """Write n > 0 as s**2 * k with k squarefree; returns (s, k)."""
    if n <= 0:
        raise ValueError("n must be positive")
    s = k = 1
    for p, e in factorint(n).items():
        s *= p ** (e // 2)
        if e % 2:
            k *= p
    return s, k


def prime_divisors(n: int) -> list[int]:
    return list(factorint(n)) if abs(n) > 1 else []
