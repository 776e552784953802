"""Mertens sums M(x) and the running integral of (M(x)/x)^2.

Layered over the arithmetic sieve: one cumulative pass turns the mu
table into all partial sums, and the integral exploits that M is
constant on [n, n+1), so each unit interval contributes the exact
rational M(n)^2/(n(n+1)).
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .arith import ArithmeticTables

# beyond this the exact-rational path is pointless and slow
_EXACT_LIMIT = 10_000


class MertensTables:
    """Cumulative Mertens sums, indexed directly by n."""

    __slots__ = ("limit", "mertens")

    def __init__(self, tables: ArithmeticTables):
        self.limit = tables.limit
        self.mertens = np.cumsum(tables.mu, dtype=np.int64)


def mertens_M(x: int, tables: MertensTables) -> int:
    """M(x) = sum of mu(n) for n <= x, exact."""
    x = int(x)
    if not 0 <= x <= tables.limit:
        raise ValueError(f"x={x} outside table range [0, {tables.limit}]")
    return int(tables.mertens[x])


@dataclass(frozen=True)
class WmcReport:
    X: int
    integral: Union[float, Fraction]
    ratio: Optional[float]  # integral / log X; None at X = 1


def wmc_integral(X: int, tables: MertensTables,
                 exact: bool = False) -> WmcReport:
    """Integral of (M(x)/x)^2 over [1, X] and its ratio to log X.

    M is constant on unit intervals, so the integral is the finite sum
    of M(n)^2 (1/n - 1/(n+1)); `exact` keeps it as one Fraction.
    """
    X = int(X)
    if not 1 <= X <= tables.limit:
        raise ValueError(f"X={X} outside table range [1, {tables.limit}]")
    if exact:
        if X > _EXACT_LIMIT:
            raise ValueError(f"exact path capped at X <= {_EXACT_LIMIT}")
        total = sum((Fraction(int(tables.mertens[n]) ** 2, n * (n + 1))
                     for n in range(1, X)), Fraction(0))
        integral: Union[float, Fraction] = total
    else:
        ns = np.arange(1, X, dtype=np.float64)
        m2 = tables.mertens[1:X].astype(np.float64) ** 2
        integral = math.fsum(m2 / (ns * (ns + 1.0)))
    ratio = None if X == 1 else float(integral) / math.log(X)
    return WmcReport(X, integral, ratio)
