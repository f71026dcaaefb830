"""Stratified random parameter tuples for sweeps and property tests.

Tuples are built from the ratio r = p_star / p rather than from (N, s)
directly: draw N in {1, 2, 3, 4}, p in a sign-case-dependent range, then
s = (N / p) * (1 - 1 / r), which keeps N > s * p automatically; draws with
s outside (0, 1) are rejected and retried.  alpha is then placed inside
(1, p_star - 1) according to the requested sign case and beta = p_star -
alpha.

Margins: sampled exponents keep |alpha - p| and |beta - p| either exactly 0
(the equality cases) or at least MARGIN.  Near-tangent configurations with
alpha or beta approaching p create derivative-root pileups and quotient
dips below double-precision resolution; they are out of scope for the
bundled numerics and excluded here rather than silently mishandled.
"""

from __future__ import annotations

import random

from .coupling import CouplingCase, coupling_case
from .errors import ParameterError
from .exponents import (
    EnergyWindow,
    GroundStateCase,
    ParamSet,
    critical_exponent,
    regime_classify,
)

__all__ = [
    "MARGIN",
    "sample_params",
    "sample_case",
    "sample_coupling_case",
    "sample_window",
    "sample_lattice_params",
]

MARGIN = 0.1

_ATTEMPTS = 2000


def _build(N: int, p: float, r: float, alpha: float) -> ParamSet:
    s = (N / p) * (1.0 - 1.0 / r)
    return ParamSet.from_alpha(N, s, p, alpha)


def _uniform_away(rng: random.Random, lo: float, hi: float, avoid: float) -> float:
    """Uniform draw from (lo, hi) at distance >= MARGIN from ``avoid``."""
    for _ in range(1000):
        x = rng.uniform(lo, hi)
        if abs(x - avoid) >= MARGIN and lo < x < hi:
            return x
    raise RuntimeError("interval too tight for the configured margin")


def _case_attempt(case: GroundStateCase, rng: random.Random) -> ParamSet:
    N = rng.choice([1, 2, 3, 4])
    if case is GroundStateCase.BETA_BELOW_P:
        p = rng.uniform(2.0, 4.0)
        r = rng.uniform(1.2, 1.9)
        ps = r * p
        # alpha > ps - p + MARGIN makes beta = ps - alpha < p - MARGIN
        lo = max(1.0 + MARGIN, ps - p + MARGIN)
        alpha = _uniform_away(rng, lo, ps - 1.0 - MARGIN, p)
    elif case is GroundStateCase.BETA_EQ_P_ALPHA_BELOW_P:
        p = rng.uniform(1.5, 3.0)
        # beta = p exactly; alpha = ps - p needs 1 + MARGIN < alpha < p - MARGIN
        r = rng.uniform(1.0 + (1.0 + MARGIN) / p, 2.0 - MARGIN / p)
        alpha = r * p - p
    elif case is GroundStateCase.BETA_ABOVE_P_ALPHA_BELOW_P:
        p = rng.uniform(1.25, 3.0)
        r = rng.uniform(2.0 + MARGIN / p, 3.5)
        ps = r * p
        alpha = rng.uniform(1.0 + MARGIN, min(p - MARGIN, ps - p - MARGIN))
    else:
        # both alpha, beta >= p; subdivide at random among >,= combinations
        p = rng.uniform(1.25, 2.5)
        r = rng.uniform(2.0 + (2.0 * MARGIN) / p, 4.0)
        ps = r * p
        pick = rng.random()
        if pick < 0.2:
            alpha = p  # alpha = p, beta > p
        elif pick < 0.4:
            alpha = ps - p  # beta = p, alpha > p
        else:
            alpha = _uniform_away(rng, p + MARGIN, ps - p - MARGIN, p)
    return _build(N, p, r, alpha)


def sample_case(case: GroundStateCase, rng: random.Random) -> ParamSet:
    """One tuple in the requested sign case of (alpha - p, beta - p)."""
    for _ in range(_ATTEMPTS):
        try:
            params = _case_attempt(case, rng)
        except (ParameterError, RuntimeError):
            continue
        if regime_classify(params).ground_state_case is case:
            return params
    raise RuntimeError(f"could not sample parameters for case {case}")


_GROUND_EQUIVALENT = {
    CouplingCase.BETA_BELOW_P: GroundStateCase.BETA_BELOW_P,
    CouplingCase.BETA_EQ_P_ALPHA_BELOW_P: GroundStateCase.BETA_EQ_P_ALPHA_BELOW_P,
    CouplingCase.BETA_ABOVE_P_ALPHA_BELOW_P: GroundStateCase.BETA_ABOVE_P_ALPHA_BELOW_P,
}


def _coupling_attempt(case: CouplingCase, rng: random.Random) -> ParamSet:
    N = rng.choice([1, 2, 3, 4])
    if case is CouplingCase.BETA_EQ_P_ALPHA_EQ_P:
        # alpha = beta = p forces p_star = 2p, i.e. s = N / (2p)
        p = rng.uniform(max(1.25, N / 2.0 + MARGIN), 4.0)
        return ParamSet.from_alpha(N, N / (2.0 * p), p, p)
    p = rng.uniform(1.25, 2.5)
    r = rng.uniform(2.0 + (2.0 * MARGIN) / p, 4.0)
    ps = r * p
    if case is CouplingCase.BETA_EQ_P_ALPHA_ABOVE_P:
        alpha = ps - p
    elif case is CouplingCase.BETA_ABOVE_P_ALPHA_EQ_P:
        alpha = p
    else:
        alpha = _uniform_away(rng, p + MARGIN, ps - p - MARGIN, p)
    return _build(N, p, r, alpha)


def sample_coupling_case(case: CouplingCase, rng: random.Random) -> ParamSet:
    """One tuple in the requested seven-way coupling case."""
    ground = _GROUND_EQUIVALENT.get(case)
    if ground is not None:
        return sample_case(ground, rng)
    for _ in range(_ATTEMPTS):
        try:
            params = _coupling_attempt(case, rng)
        except (ParameterError, RuntimeError):
            continue
        if coupling_case(params) is case:
            return params
    raise RuntimeError(f"could not sample parameters for case {case}")


def _window_attempt(window: EnergyWindow, rng: random.Random) -> ParamSet:
    N = rng.choice([1, 2, 3, 4])
    if window is EnergyWindow.HIGH:
        # N/(2s) < p < N/s is equivalent to p_star > 2p
        p = rng.uniform(1.25, 2.5)
        r = rng.uniform(2.0 + (2.0 * MARGIN) / p, 4.0)
        ps = r * p
        alpha = _uniform_away(rng, p + MARGIN, ps - p - MARGIN, p)
    elif window is EnergyWindow.LOW:
        # 2N/(N+2s) < p < N/(2s) is equivalent to 2 < p_star < 2p
        p = rng.uniform(2.0, 4.0)
        r_lo = max(1.0 + (1.0 + MARGIN) / p, 2.0 / p) + 0.05
        r = rng.uniform(r_lo, 2.0 - (2.0 * MARGIN) / p)
        ps = r * p
        lo = max(1.0 + MARGIN, ps - p + MARGIN)
        alpha = rng.uniform(lo, p - MARGIN)
    else:
        raise ValueError("only the HIGH and LOW windows are sampleable")
    return _build(N, p, r, alpha)


def sample_window(window: EnergyWindow, rng: random.Random) -> ParamSet:
    """One tuple inside the requested energy window."""
    for _ in range(_ATTEMPTS):
        try:
            params = _window_attempt(window, rng)
        except (ParameterError, RuntimeError):
            continue
        if regime_classify(params).energy_window is window:
            return params
    raise RuntimeError(f"could not sample parameters for window {window}")


def sample_params(rng: random.Random) -> ParamSet:
    """One tuple stratified uniformly over the four sign cases."""
    case = rng.choice(list(GroundStateCase))
    return sample_case(case, rng)


def sample_lattice_params(rng: random.Random, alpha_below_p: bool = True) -> ParamSet:
    """A tuple usable by the N = 1, s*p < 1 lattice (interior-minimum cases)."""
    for _ in range(_ATTEMPTS):
        p = rng.uniform(1.3, 2.2)
        s = rng.uniform(0.2, min(0.9 / p, 0.8))
        ps = critical_exponent(1, s, p)
        if alpha_below_p:
            hi = min(p - MARGIN, ps - p - MARGIN)
            if hi <= 1.0 + MARGIN:
                continue
            alpha = rng.uniform(1.0 + MARGIN, hi)
        else:
            if ps - p + MARGIN >= p - MARGIN:
                continue
            alpha = rng.uniform(ps - p + MARGIN, p - MARGIN)
        return ParamSet.from_alpha(1, s, p, alpha)
    raise RuntimeError("could not sample lattice-compatible parameters")
