"""Numerical laboratory for moments of the Riemann zeta function at its zeros.

The package is organised in layers:

* :mod:`zml.ddmath` - double-word (pair of native floats) arithmetic used
  everywhere a plain double would lose too many digits.
* :mod:`zml.special` - the Riemann-Siegel phase, Hardy's function, its
  derivative, and zeta near the critical line.
* :mod:`zml.arith` - sieved arithmetic tables (mu, Lambda, Omega, primes).
* :mod:`zml.zeros` / :mod:`zml.cache` - isolation, certification and
  storage of ordinates of the nontrivial zeros.
* :mod:`zml.stats` / :mod:`zml.mertens` - counting functions, gap-filtered
  zero families, discrete moments, and the Mertens-sum diagnostics.
* :mod:`zml.formulas` - numerical checks of two classical identities for
  sums over zeros (a Landau-type prime-power formula and a mean value
  theorem for Dirichlet polynomials).
* :mod:`zml.ladder` - the multi-scale "ladder" of Dirichlet-polynomial
  scales used to bound negative moments, with its attendant inequalities.
* :mod:`zml.cli` - command line front end emitting JSON/CSV reports.
"""

__version__ = "0.1.0"

from .cache import ZeroCache, ZeroRecord, cache_io
from .ddmath import ExtComplex, ExtReal, SaturationError
from .zeros import build_cache, gram_point, isolate_zeros, turing_certify

__all__ = ["ExtReal", "ExtComplex", "SaturationError", "ZeroCache",
           "ZeroRecord", "cache_io", "build_cache", "gram_point",
           "isolate_zeros", "turing_certify", "__version__"]
