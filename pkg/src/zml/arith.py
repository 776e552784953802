"""Sieved multiplicative-function tables: primes, mu, Lambda, Omega, nu.

One construction pass fills every table up to `limit` with flat numpy
arrays (a few bytes per integer, so the memory footprint is proportional
to the limit and checked against a configurable budget up front).
Lambda is stored symbolically as (prime, exponent) so downstream
identity checks can be exact; the float value log p is derived on
demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, List, Tuple

import numpy as np

_LIMIT_MAX = 100_000_000
# construction keeps ~8 byte-wide arrays of length `limit` alive at once
_BYTES_PER_N = 8


class ResourceLimitError(RuntimeError):
    """The requested sieve does not fit the configured memory budget."""


@dataclass(frozen=True)
class ArithmeticTables:
    """Immutable sieve output; shareable across threads.

    mu[n], omega_big[n] index directly by n (entry 0 unused).  Lambda is
    the pair (lam_p[n], lam_a[n]), zero when n is not a prime power.
    """

    limit: int
    primes: np.ndarray
    mu: np.ndarray
    lam_p: np.ndarray
    lam_a: np.ndarray
    omega_big: np.ndarray

    def lambda_value(self, n: int) -> float:
        """von Mangoldt Lambda(n) as a float (log p, or 0.0)."""
        self._check(n)
        p = int(self.lam_p[n])
        return math.log(p) if p else 0.0

    def lambda_symbol(self, n: int) -> Tuple[int, int] | None:
        """(p, a) with n = p**a, or None when Lambda(n) = 0."""
        self._check(n)
        p = int(self.lam_p[n])
        return (p, int(self.lam_a[n])) if p else None

    def is_prime(self, n: int) -> bool:
        self._check(n)
        return self.lam_p[n] == n

    def factorize(self, n: int) -> List[Tuple[int, int]]:
        """Prime factorization [(p, a), ...] by trial division over the
        sieved primes; n <= limit so primes <= sqrt(limit) suffice."""
        self._check(n)
        out: List[Tuple[int, int]] = []
        rest = n
        for p in self.primes:
            p = int(p)
            if p * p > rest:
                break
            if rest % p == 0:
                a = 0
                while rest % p == 0:
                    rest //= p
                    a += 1
                out.append((p, a))
        if rest > 1:
            out.append((rest, 1))
        return out

    def _check(self, n: int) -> None:
        if not (1 <= n <= self.limit):
            raise ValueError(f"n={n} outside table range [1, {self.limit}]")


def sieve_tables(limit: int, memory_budget_mb: int = 512) -> ArithmeticTables:
    """Fill all tables up to `limit` (inclusive).

    2 <= limit <= 1e8.  Raises ResourceLimitError when the ~8*limit byte
    working set exceeds `memory_budget_mb`.
    """
    if not (2 <= limit <= _LIMIT_MAX):
        raise ValueError(f"limit must be in [2, {_LIMIT_MAX}], got {limit}")
    need_mb = (_BYTES_PER_N * (limit + 1)) // (1 << 20) + 1
    if need_mb > memory_budget_mb:
        raise ResourceLimitError(
            f"sieve to {limit} needs ~{need_mb} MB, budget is "
            f"{memory_budget_mb} MB")

    n1 = limit + 1
    composite = np.zeros(n1, dtype=bool)
    composite[:2] = True
    for p in range(2, int(math.isqrt(limit)) + 1):
        if not composite[p]:
            composite[p * p::p] = True
    primes = np.nonzero(~composite)[0].astype(np.int64)
    del composite

    mu = np.ones(n1, dtype=np.int8)
    mu[0] = 0
    omega = np.zeros(n1, dtype=np.int8)
    for p in primes:
        p = int(p)
        mu[p::p] *= -1
        pk = p
        while pk <= limit:
            omega[pk::pk] += 1
            pk *= p
    for p in primes:
        p = int(p)
        if p * p > limit:
            break
        mu[p * p::p * p] = 0

    lam_p = np.zeros(n1, dtype=np.int32)
    lam_a = np.zeros(n1, dtype=np.int8)
    lam_p[primes] = primes
    lam_a[primes] = 1
    for p in primes:
        p = int(p)
        if p * p > limit:
            break
        pk = p * p
        a = 2
        while pk <= limit:
            lam_p[pk] = p
            lam_a[pk] = a
            pk *= p
            a += 1

    return ArithmeticTables(limit=limit, primes=primes, mu=mu, lam_p=lam_p,
                            lam_a=lam_a, omega_big=omega)


def nu(n: int, tables: ArithmeticTables) -> Fraction:
    """nu(p1^a1 ... pk^ak) = 1/(a1! ... ak!), exact."""
    if n < 1:
        raise ValueError("nu requires n >= 1")
    tables._check(n)
    denom = 1
    for _, a in tables.factorize(n):
        denom *= math.factorial(a)
    return Fraction(1, denom)


def prime_powers_up_to(x: int, tables: ArithmeticTables
                       ) -> Iterator[Tuple[int, int, int]]:
    """Yield (p^a, p, a) for every prime power p^a <= x, ascending in p
    then a."""
    if x > tables.limit:
        raise ValueError("x exceeds table limit")
    for p in tables.primes:
        p = int(p)
        if p > x:
            break
        pk = p
        a = 1
        while pk <= x:
            yield pk, p, a
            pk *= p
            a += 1
