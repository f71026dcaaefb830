"""Tools for critically coupled fractional p-Laplacian systems.

The package splits into four layers:

* :mod:`critcouple.exponents` — parameter validation, the critical exponent,
  and regime classification;
* :mod:`critcouple.coupling` — the scalar coupling ratio h, its derivative
  factorization, root finding and the synchronized pair;
* :mod:`critcouple.algebraic` — the gamma-coupled scale system, existence
  thresholds, branch continuation and least-energy bookkeeping;
* :mod:`critcouple.gagliardo` — a one-dimensional lattice discretization of
  the Gagliardo quotient with scalar and coupled minimizers.

``critcouple verify`` exercises the whole stack against analytic identities.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ConvergenceError,
    CritcoupleError,
    ParameterError,
    RegimeError,
    SolveError,
    UnsupportedDimensionError,
)
from .exponents import (
    EnergyWindow,
    GroundStateCase,
    ParamSet,
    Regime,
    critical_exponent,
    regime_classify,
    validate_params,
)

__all__ = [
    "__version__",
    "ConfigError",
    "ConvergenceError",
    "CritcoupleError",
    "ParameterError",
    "RegimeError",
    "SolveError",
    "UnsupportedDimensionError",
    "EnergyWindow",
    "GroundStateCase",
    "ParamSet",
    "Regime",
    "critical_exponent",
    "regime_classify",
    "validate_params",
]
