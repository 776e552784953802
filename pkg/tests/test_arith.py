"""Contract tests for the sieve tables and nu."""

import math
from fractions import Fraction

import numpy as np
import pytest

from zml.arith import (ArithmeticTables, ResourceLimitError, nu,
                       prime_powers_up_to, sieve_tables)


@pytest.fixture(scope="module")
def tables() -> ArithmeticTables:
    return sieve_tables(1_000_000)


@pytest.fixture(scope="module")
def small() -> ArithmeticTables:
    return sieve_tables(10_000)


def test_mu_examples(tables):
    assert tables.mu[1] == 1
    assert tables.mu[4] == 0
    assert tables.mu[6] == 1
    assert tables.mu[30] == -1


def test_mu_range(tables):
    assert set(np.unique(tables.mu[1:])) <= {-1, 0, 1}


def test_lambda_examples(tables):
    assert tables.lambda_value(8) == math.log(2)
    assert tables.lambda_value(7) == math.log(7)
    assert tables.lambda_value(12) == 0.0
    assert tables.lambda_symbol(8) == (2, 3)
    assert tables.lambda_symbol(12) is None


def test_lambda_iff_prime_power(tables):
    # Lambda(n) != 0 exactly on prime powers; verify against a direct
    # reconstruction p**a == n
    idx = np.nonzero(tables.lam_p[:100_000])[0]
    for n in idx[::97]:
        p, a = int(tables.lam_p[n]), int(tables.lam_a[n])
        assert p ** a == n
    zeros = np.nonzero(tables.lam_p[2:100_000] == 0)[0] + 2
    for n in zeros[::997]:
        fac = tables.factorize(int(n))
        assert len(fac) > 1


def test_prime_count_against_trial_division(tables):
    """pi(1e6) = 78498, cross-checked by brute-force divisibility
    (independent of any sieve logic)."""
    ns = np.arange(2, 1_000_001, dtype=np.int64)
    has_divisor = np.zeros(len(ns), dtype=bool)
    for d in range(2, 1001):
        has_divisor |= (ns % d == 0) & (ns != d)
    count = int(np.sum(~has_divisor))
    assert count == 78498
    assert len(tables.primes) == 78498


def test_squarefree_count_cross_check(tables):
    # sum mu^2 equals the count of squarefree n, with squarefree decided
    # by marking multiples of d^2 (no shared logic with the mu sieve)
    N = tables.limit
    squareful = np.zeros(N + 1, dtype=bool)
    for d in range(2, int(math.isqrt(N)) + 1):
        squareful[d * d::d * d] = True
    assert int(np.sum(tables.mu[1:] ** 2)) == int(np.sum(~squareful[1:]))


def test_psi_matches_prime_power_enumeration(tables):
    """The nonzero-Lambda support up to 1e5 equals the enumerated set of
    prime powers, symbolically; hence psi(x) matches exactly."""
    x = 100_000
    from_table = {(int(n), int(tables.lam_p[n]), int(tables.lam_a[n]))
                  for n in np.nonzero(tables.lam_p[:x + 1])[0]}
    enumerated = set(prime_powers_up_to(x, tables))
    assert from_table == enumerated
    psi_table = sum(math.log(p) for _, p, _ in sorted(from_table))
    psi_enum = sum(math.log(p) for _, p, _ in sorted(enumerated))
    assert psi_table == psi_enum


def test_omega_examples(tables):
    assert tables.omega_big[1] == 0
    assert tables.omega_big[2] == 1
    assert tables.omega_big[12] == 3
    assert tables.omega_big[360] == 6  # 2^3 3^2 5


def test_nu_examples(small):
    assert nu(1, small) == Fraction(1)
    assert nu(12, small) == Fraction(1, 2)
    assert nu(2 ** 3 * 3 ** 2 * 5, small) == Fraction(1, 12)
    assert isinstance(nu(30, small), Fraction)


def test_nu_omega_multiplicative_exhaustive(small):
    """nu(mn) = nu(m)nu(n) and Omega(mn) = Omega(m)+Omega(n) for every
    coprime pair with mn <= 1e4."""
    N = 10_000
    nus = [None] * (N + 1)
    for n in range(1, N + 1):
        nus[n] = nu(n, small)
    om = small.omega_big
    checked = 0
    for m in range(2, N + 1):
        for n in range(m, N // m + 1):
            if math.gcd(m, n) != 1:
                continue
            assert nus[m * n] == nus[m] * nus[n]
            assert om[m * n] == om[m] + om[n]
            checked += 1
    assert checked > 10_000


def test_sieve_domain_errors():
    with pytest.raises(ValueError):
        sieve_tables(1)
    with pytest.raises(ValueError):
        sieve_tables(200_000_000)
    with pytest.raises(ResourceLimitError):
        sieve_tables(50_000_000, memory_budget_mb=64)


def test_nu_domain_errors(small):
    with pytest.raises(ValueError):
        nu(0, small)
    with pytest.raises(ValueError):
        nu(10_001, small)


def test_small_primes(small):
    assert list(small.primes[:10]) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert small.is_prime(9973)
    assert not small.is_prime(9999)


def test_factorize(small):
    assert small.factorize(9973) == [(9973, 1)]
    assert small.factorize(9800) == [(2, 3), (5, 2), (7, 2)]
    assert small.factorize(1) == []
