"""Exponent arithmetic and admissibility for the doubly critical coupled system.

Everything in this package is parameterized by a tuple (N, s, p, alpha, beta):
spatial dimension N, fractional order s in (0, 1), integrability exponent
p > 1, and coupling powers alpha, beta > 1 tied together by

    alpha + beta = p_star,        p_star = N * p / (N - s * p),

where p_star is the critical embedding exponent (finite and above p exactly
when N > s * p).  This module validates raw tuples, derives p_star, and
classifies the structural regime of a tuple:

* the ground-state case, which decides whether the coupling ratio h attains
  an interior minimum (and hence whether a synchronized ground state with
  both components nonzero exists), and
* the energy window, which decides whether the gamma-coupled algebraic
  system carries the least-energy formula.

Useful identities, both consequences of the definition of p_star::

    1/p - 1/p_star = s/N
    (s/N) * p * p_star = p_star - p
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import ParameterError

__all__ = [
    "EXPONENT_EQ_RTOL",
    "SUM_CONSTRAINT_ATOL",
    "ParamSet",
    "GroundStateCase",
    "EnergyWindow",
    "Regime",
    "critical_exponent",
    "validate_params",
    "regime_classify",
    "exponent_cmp",
]

#: relative tolerance used when deciding whether alpha or beta equals p
EXPONENT_EQ_RTOL = 1e-12

#: absolute tolerance on the constraint alpha + beta = p_star
SUM_CONSTRAINT_ATOL = 1e-9


def critical_exponent(N: int, s: float, p: float) -> float:
    """Critical embedding exponent N*p/(N - s*p).

    Raises :class:`ParameterError` unless 0 < s < 1, p > 1 and N > s*p
    (the last condition keeps the exponent finite and above p).
    """
    violations = []
    if not (isinstance(N, int) or float(N).is_integer()) or N < 1:
        violations.append(f"N={N!r} must be a positive integer")
    if not 0.0 < s < 1.0:
        violations.append(f"s={s!r} must lie in (0, 1)")
    if not p > 1.0:
        violations.append(f"p={p!r} must exceed 1")
    if not violations and not N > s * p:
        violations.append(f"N={N} must exceed s*p={s * p}")
    if violations:
        raise ParameterError(violations)
    return N * p / (N - s * p)


def exponent_cmp(value: float, ref: float) -> int:
    """Sign of value - ref with an equality band of EXPONENT_EQ_RTOL (relative).

    Used wherever the theory branches on alpha or beta being equal to,
    below, or above p.  Exact constructions (beta = p) compare equal; the
    band is far below any meaningful parameter separation.
    """
    if math.isclose(value, ref, rel_tol=EXPONENT_EQ_RTOL, abs_tol=0.0):
        return 0
    return -1 if value < ref else 1


@dataclass(frozen=True)
class ParamSet:
    """Validated parameter tuple of the coupled critical system.

    Instances always satisfy: N a positive integer, 0 < s < 1, p > 1,
    N > s*p, alpha > 1, beta > 1, and |alpha + beta - p_star| below
    :data:`SUM_CONSTRAINT_ATOL`.  Prefer :meth:`from_alpha`, which derives
    beta = p_star - alpha so the sum constraint holds exactly.
    """

    N: int
    s: float
    p: float
    alpha: float
    beta: float
    p_star: float

    def __post_init__(self):
        violations = []
        try:
            p_star = critical_exponent(self.N, self.s, self.p)
        except ParameterError as exc:
            violations.extend(exc.violations)
            p_star = None
        if not self.alpha > 1.0:
            violations.append(f"alpha={self.alpha!r} must exceed 1")
        if not self.beta > 1.0:
            violations.append(f"beta={self.beta!r} must exceed 1")
        if p_star is not None:
            if abs(self.p_star - p_star) > SUM_CONSTRAINT_ATOL:
                violations.append(
                    f"p_star={self.p_star!r} disagrees with N*p/(N-s*p)={p_star!r}"
                )
            gap = abs(self.alpha + self.beta - p_star)
            if gap > SUM_CONSTRAINT_ATOL:
                violations.append(
                    f"alpha+beta={self.alpha + self.beta!r} must equal "
                    f"p_star={p_star!r} (|gap|={gap:.3e})"
                )
        if violations:
            raise ParameterError(violations)

    @classmethod
    def from_alpha(cls, N: int, s: float, p: float, alpha: float) -> "ParamSet":
        """Build a ParamSet deriving beta = p_star - alpha exactly."""
        p_star = critical_exponent(N, s, p)
        return cls(int(N), float(s), float(p), float(alpha), p_star - alpha, p_star)

    @classmethod
    def from_beta(cls, N: int, s: float, p: float, beta: float) -> "ParamSet":
        """Build a ParamSet deriving alpha = p_star - beta exactly."""
        p_star = critical_exponent(N, s, p)
        return cls(int(N), float(s), float(p), p_star - beta, float(beta), p_star)

    def swapped(self) -> "ParamSet":
        """The tuple with alpha and beta exchanged (the system is symmetric)."""
        return ParamSet(self.N, self.s, self.p, self.beta, self.alpha, self.p_star)


def validate_params(raw) -> ParamSet:
    """Validate a raw (N, s, p, alpha, beta) tuple and return a ParamSet.

    Every violated constraint is reported (collected in
    ``ParameterError.violations``), not just the first one found.
    """
    try:
        N, s, p, alpha, beta = raw
    except (TypeError, ValueError):
        raise ParameterError([f"expected (N, s, p, alpha, beta), got {raw!r}"])
    violations = []
    if not (isinstance(N, int) or float(N).is_integer()) or not N >= 1:
        violations.append(f"N={N!r} must be a positive integer")
    if not 0.0 < s < 1.0:
        violations.append(f"s={s!r} must lie in (0, 1)")
    if not p > 1.0:
        violations.append(f"p={p!r} must exceed 1")
    if not alpha > 1.0:
        violations.append(f"alpha={alpha!r} must exceed 1")
    if not beta > 1.0:
        violations.append(f"beta={beta!r} must exceed 1")
    p_star = None
    if not violations:
        if not N > s * p:
            violations.append(f"N={N} must exceed s*p={s * p}")
        else:
            p_star = N * p / (N - s * p)
            gap = abs(alpha + beta - p_star)
            if gap > SUM_CONSTRAINT_ATOL:
                violations.append(
                    f"alpha+beta={alpha + beta!r} must equal p_star={p_star!r} "
                    f"(|gap|={gap:.3e})"
                )
    if violations:
        raise ParameterError(violations)
    return ParamSet(int(N), float(s), float(p), float(alpha), float(beta), p_star)


class GroundStateCase(Enum):
    """Coarse trichotomy governing the interior minimum of the coupling ratio.

    The ratio h dips below 1 at some tau > 0 exactly when min(alpha, beta) < p;
    the three non-degenerate values split that region by the position of beta.
    """

    BETA_BELOW_P = "beta<p"
    BETA_EQ_P_ALPHA_BELOW_P = "beta=p,alpha<p"
    BETA_ABOVE_P_ALPHA_BELOW_P = "beta>p,alpha<p"
    DEGENERATE = "alpha>=p,beta>=p"

    @property
    def interior_minimum(self) -> bool:
        return self is not GroundStateCase.DEGENERATE


class EnergyWindow(Enum):
    """Exponent windows in which the least-energy formula is available.

    HIGH: N/(2s) < p < N/s with alpha, beta both above p.
    LOW:  2N/(N+2s) < p < N/(2s) with alpha, beta both below p.
    Boundaries are excluded: a tuple sitting exactly on one classifies
    as NEITHER.
    """

    HIGH = "alpha,beta>p"
    LOW = "alpha,beta<p"
    NEITHER = "neither"


@dataclass(frozen=True)
class Regime:
    ground_state_case: GroundStateCase
    energy_window: EnergyWindow


def regime_classify(params: ParamSet) -> Regime:
    """Classify a validated tuple into its ground-state case and energy window."""
    a_cmp = exponent_cmp(params.alpha, params.p)
    b_cmp = exponent_cmp(params.beta, params.p)

    if b_cmp < 0:
        case = GroundStateCase.BETA_BELOW_P
    elif b_cmp == 0:
        case = (
            GroundStateCase.BETA_EQ_P_ALPHA_BELOW_P
            if a_cmp < 0
            else GroundStateCase.DEGENERATE
        )
    else:
        case = (
            GroundStateCase.BETA_ABOVE_P_ALPHA_BELOW_P
            if a_cmp < 0
            else GroundStateCase.DEGENERATE
        )

    N, s, p = params.N, params.s, params.p
    window = EnergyWindow.NEITHER
    if a_cmp > 0 and b_cmp > 0 and N / (2.0 * s) < p < N / s:
        window = EnergyWindow.HIGH
    elif a_cmp < 0 and b_cmp < 0 and 2.0 * N / (N + 2.0 * s) < p < N / (2.0 * s):
        window = EnergyWindow.LOW
    return Regime(case, window)
