"""Coupling-ratio analysis: the scalar reduction of the coupled quotient.

For a parameter tuple (N, s, p, alpha, beta) the pair quotient restricted to
proportional pairs (w, tau*w) collapses to h(tau) times the scalar quotient,
where

    h(tau) = (1 + tau^p) / (1 + tau^beta + tau^p_star)^(p/p_star),

so the coupled best constant equals min_{tau >= 0} h(tau) times the scalar
one.  h(0) = 1 = lim_{tau->inf} h(tau), and the interior critical points of
h are exactly the positive roots of

    g(tau) = p_star + alpha*tau^beta - beta*tau^(beta-p) - p_star*tau^(p_star-p),

through the factorization h'(tau) = f(tau) * g(tau) with a strictly positive
prefactor f.  This module evaluates h, g and the factorization, finds all
sign changes of g, and selects the minimizing tau together with the
synchronized amplitude pair (lambda, mu = tau_min * lambda).

Numerical notes.  For tau >= 1 both h and f are evaluated in the equivalent
form with non-positive powers only (divide through by tau^p_star), which
stays finite for arbitrarily large tau.  The limit g -> -inf as tau -> 0+
(present when beta < p) is treated as a boundary sign, never as a float:
if g is already positive at the left end of the scan grid, the bracket is
extended downward until the sign of the limit is realized.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ParameterError
from .exponents import ParamSet, exponent_cmp

__all__ = [
    "CouplingCase",
    "TauClassification",
    "RootCountWarning",
    "coupling_case",
    "h_eval",
    "g_eval",
    "g_term_scale",
    "g_prime",
    "h_prime",
    "h_prime_prefactor",
    "f_eta_eval",
    "g_eta_eval",
    "default_tau_max",
    "find_g_roots",
    "classify",
    "verify_sync_relations",
    "s_alpha_beta_from_scalar",
]

#: left end of the root-scan grid; roots below it are caught by the
#: boundary-sign bracket
TAU_GRID_FLOOR = 1e-8

#: ties between root values of h within this absolute band pick the largest root
TIE_TOL = 1e-12


class RootCountWarning(UserWarning):
    """The number of located roots disagrees with the case prediction."""


class CouplingCase(Enum):
    """The seven-way split of parameter tuples by the positions of alpha, beta
    relative to p.  Exactly one case applies to every admissible tuple."""

    BETA_BELOW_P = "beta<p"
    BETA_EQ_P_ALPHA_EQ_P = "beta=p,alpha=p"
    BETA_EQ_P_ALPHA_BELOW_P = "beta=p,alpha<p"
    BETA_EQ_P_ALPHA_ABOVE_P = "beta=p,alpha>p"
    BETA_ABOVE_P_ALPHA_ABOVE_P = "beta>p,alpha>p"
    BETA_ABOVE_P_ALPHA_BELOW_P = "beta>p,alpha<p"
    BETA_ABOVE_P_ALPHA_EQ_P = "beta>p,alpha=p"

    @property
    def interior_minimum(self) -> bool:
        """True when h dips below 1 at some tau > 0 (iff min(alpha, beta) < p)."""
        return self in (
            CouplingCase.BETA_BELOW_P,
            CouplingCase.BETA_EQ_P_ALPHA_BELOW_P,
            CouplingCase.BETA_ABOVE_P_ALPHA_BELOW_P,
        )

    @property
    def predicted_root_count(self) -> tuple[int, bool]:
        """(count, exact) for the roots of g.

        The equality/above-p cases pin the count exactly (one root, or two
        in the two interior-minimum cases with beta >= p).  For beta < p the
        theory guarantees existence only, so the count is a lower bound:
        the alpha >= p subcase provably carries two roots, and shallow extra
        critical points can appear for alpha < p.
        """
        if self is CouplingCase.BETA_BELOW_P:
            return (1, False)
        if self in (
            CouplingCase.BETA_EQ_P_ALPHA_BELOW_P,
            CouplingCase.BETA_ABOVE_P_ALPHA_BELOW_P,
        ):
            return (2, True)
        return (1, True)


def coupling_case(params: ParamSet) -> CouplingCase:
    a_cmp = exponent_cmp(params.alpha, params.p)
    b_cmp = exponent_cmp(params.beta, params.p)
    if b_cmp < 0:
        return CouplingCase.BETA_BELOW_P
    if b_cmp == 0:
        if a_cmp == 0:
            return CouplingCase.BETA_EQ_P_ALPHA_EQ_P
        return (
            CouplingCase.BETA_EQ_P_ALPHA_BELOW_P
            if a_cmp < 0
            else CouplingCase.BETA_EQ_P_ALPHA_ABOVE_P
        )
    if a_cmp == 0:
        return CouplingCase.BETA_ABOVE_P_ALPHA_EQ_P
    return (
        CouplingCase.BETA_ABOVE_P_ALPHA_BELOW_P
        if a_cmp < 0
        else CouplingCase.BETA_ABOVE_P_ALPHA_ABOVE_P
    )


def _as_positive_array(tau, allow_zero=False):
    t = np.asarray(tau, dtype=float)
    if allow_zero:
        if np.any(t < 0.0):
            raise ValueError("tau must be >= 0")
    elif np.any(t <= 0.0):
        raise ValueError("tau must be > 0")
    return t


def _maybe_scalar(arr, tau):
    return float(arr) if np.isscalar(tau) or np.ndim(tau) == 0 else arr


def h_eval(tau, params: ParamSet):
    """Coupling ratio h(tau) for tau >= 0; accepts scalars or arrays."""
    t = _as_positive_array(tau, allow_zero=True)
    p, al, be, ps = params.p, params.alpha, params.beta, params.p_star
    out = np.empty_like(t)
    small = t < 1.0
    ts = t[small]
    out[small] = (1.0 + ts**p) / (1.0 + ts**be + ts**ps) ** (p / ps)
    # for tau >= 1 divide numerator and denominator by tau^p resp. tau^p_star
    r = 1.0 / t[~small]
    out[~small] = (1.0 + r**p) / (1.0 + r**al + r**ps) ** (p / ps)
    return _maybe_scalar(out, tau)


def g_eval(tau, params: ParamSet):
    """Critical-point function g(tau) for tau > 0; roots are critical points of h."""
    t = _as_positive_array(tau)
    p, al, be, ps = params.p, params.alpha, params.beta, params.p_star
    return _maybe_scalar(ps + al * t**be - be * t ** (be - p) - ps * t ** (ps - p), tau)


def g_term_scale(tau, params: ParamSet):
    """Sum of the magnitudes of g's four terms; |g(root)| is meaningful only
    relative to this, since the terms cancel to rounding at a root."""
    t = _as_positive_array(tau)
    p, al, be, ps = params.p, params.alpha, params.beta, params.p_star
    with np.errstate(over="ignore"):
        scale = ps + al * t**be + be * t ** (be - p) + ps * t ** (ps - p)
    return _maybe_scalar(scale, tau)


def g_prime(tau, params: ParamSet):
    """Analytic derivative of g; used for Newton polishing and shape checks."""
    t = _as_positive_array(tau)
    p, al, be, ps = params.p, params.alpha, params.beta, params.p_star
    bracket = al * be * t**p - ps * (ps - p) * t**al - be * (be - p)
    return _maybe_scalar(t ** (be - p - 1.0) * bracket, tau)


def h_prime_prefactor(tau, params: ParamSet):
    """The strictly positive prefactor f in the factorization h' = f * g."""
    t = _as_positive_array(tau)
    p, al, be, ps = params.p, params.alpha, params.beta, params.p_star
    out = np.empty_like(t)
    small = t < 1.0
    ts = t[small]
    out[small] = p * ts ** (p - 1.0) / (ps * (1.0 + ts**be + ts**ps) ** (p / ps + 1.0))
    r = 1.0 / t[~small]
    out[~small] = (
        (p / ps) * r ** (1.0 + ps) / (1.0 + r**al + r**ps) ** (p / ps + 1.0)
    )
    return _maybe_scalar(out, tau)


def h_prime(tau, params: ParamSet):
    """Derivative of h, computed through the factorization h' = f * g."""
    t = _as_positive_array(tau)
    return _maybe_scalar(h_prime_prefactor(t, params) * g_eval(t, params), tau)


def f_eta_eval(tau, eta: float, params: ParamSet):
    """Perturbed ratio (1 + tau^p) / (eta + tau^beta + tau^p_star)^(p/p_star)."""
    if not eta > 0.0:
        raise ValueError("eta must be > 0")
    t = _as_positive_array(tau, allow_zero=True)
    p, al, be, ps = params.p, params.alpha, params.beta, params.p_star
    out = np.empty_like(t)
    small = t < 1.0
    ts = t[small]
    out[small] = (1.0 + ts**p) / (eta + ts**be + ts**ps) ** (p / ps)
    r = 1.0 / t[~small]
    out[~small] = (1.0 + r**p) / (eta * r**ps + r**al + 1.0) ** (p / ps)
    return _maybe_scalar(out, tau)


def g_eta_eval(tau, eta: float, params: ParamSet):
    """Critical-point function of the eta-perturbed ratio; eta = 1 recovers g."""
    if not eta > 0.0:
        raise ValueError("eta must be > 0")
    t = _as_positive_array(tau)
    p, al, be, ps = params.p, params.alpha, params.beta, params.p_star
    return _maybe_scalar(
        eta * ps + al * t**be - be * t ** (be - p) - ps * t ** (ps - p), tau
    )


def _sign_at_infinity(params: ParamSet) -> float:
    # alpha < p: the +alpha*tau^beta term dominates; otherwise the
    # -p_star*tau^(p_star-p) term does (for alpha == p their difference).
    return 1.0 if exponent_cmp(params.alpha, params.p) < 0 else -1.0


def _sign_at_zero(params: ParamSet) -> float:
    # beta < p: -beta*tau^(beta-p) -> -inf; otherwise g(0+) = p_star (or alpha) > 0.
    return -1.0 if exponent_cmp(params.beta, params.p) < 0 else 1.0


def default_tau_max(params: ParamSet) -> float:
    """Smallest scan ceiling at which the asymptotically dominant term of g
    exceeds ten times the competing ones, so no sign change can hide beyond it.

    Never below 1e4; capped before tau^p_star overflows.
    """
    p, al, be, ps = params.p, params.alpha, params.beta, params.p_star
    a_cmp = exponent_cmp(al, p)
    cap = 10.0 ** (280.0 / max(ps, be, ps - p, 1.0))

    def dominated(t: float) -> bool:
        if a_cmp < 0:
            return al * t**be > 10.0 * (ps + be * t ** (be - p) + ps * t ** (ps - p))
        if a_cmp > 0:
            # the -beta*tau^(beta-p) term only helps push g negative
            return ps * t ** (ps - p) > 10.0 * (ps + al * t**be)
        # alpha == p: g = p_star - beta*(tau^beta + tau^(beta-p)) with beta = p_star - p
        return be * t**be > 10.0 * ps

    t = 10.0
    while t < cap and not dominated(t):
        t *= 2.0
    return max(t, 1e4)


def _bisect(fn, lo: float, hi: float, f_lo: float, f_hi: float) -> tuple[float, float]:
    # interval bisection down to 1e-12 absolute (or a few ulps for large roots)
    for _ in range(200):
        if hi - lo <= max(1e-12, 4.0 * np.finfo(float).eps * abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if f_mid == 0.0:
            return mid, mid
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    return lo, hi


def _refine_root(params: ParamSet, lo: float, hi: float) -> float:
    fn = lambda t: g_eval(t, params)
    f_lo, f_hi = fn(lo), fn(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    a, b = _bisect(fn, lo, hi, f_lo, f_hi)
    x = 0.5 * (a + b)
    best, best_val = x, abs(fn(x))
    # Newton polish with the analytic derivative; fall back to the bisection
    # midpoint whenever an iterate leaves the bracket or stops improving
    for _ in range(50):
        d = g_prime(x, params)
        if d == 0.0 or not math.isfinite(d):
            break
        step = fn(x) / d
        x_new = x - step
        if not (lo <= x_new <= hi):
            break
        val = abs(fn(x_new))
        if val < best_val:
            best, best_val = x_new, val
        if abs(step) <= 4.0 * np.finfo(float).eps * abs(x_new):
            x = x_new
            break
        x = x_new
    return best


def _extend_left_bracket(params: ParamSet, hi: float) -> float | None:
    # realize the tau -> 0+ sign of g at an actual float below hi
    target = _sign_at_zero(params)
    t = hi / 10.0
    while t > 1e-290:
        val = g_eval(t, params)
        if val == 0.0 or (val > 0.0) == (target > 0.0):
            return t
        t /= 10.0
    return None


def find_g_roots(
    params: ParamSet, tau_max: float | None = None, grid_n: int | None = None
) -> list[float]:
    """All sign changes of g on (0, tau_max], refined to roots.

    Brackets come from a log-uniform grid on [1e-8, tau_max]; the boundary
    signs of g at 0+ and at infinity guard against roots outside the grid.
    Each bracket is bisected to 1e-12 and polished by Newton steps with the
    analytic derivative.  A :class:`RootCountWarning` (never a failure) is
    emitted when the count disagrees with the case prediction.
    """
    if tau_max is None:
        tau_max = default_tau_max(params)
    if not tau_max > TAU_GRID_FLOOR:
        raise ValueError(f"tau_max={tau_max} must exceed {TAU_GRID_FLOOR}")
    if grid_n is None:
        decades = math.log10(tau_max) - math.log10(TAU_GRID_FLOOR)
        grid_n = max(4000, int(400 * decades))
    if grid_n < 100:
        raise ValueError("grid_n must be at least 100")

    taus = np.geomspace(TAU_GRID_FLOOR, tau_max, grid_n)
    vals = g_eval(taus, params)
    signs = np.sign(vals)

    roots: list[float] = []
    roots.extend(taus[signs == 0.0].tolist())

    left_sign = _sign_at_zero(params)
    if signs[0] != 0.0 and signs[0] != left_sign:
        lo = _extend_left_bracket(params, taus[0])
        if lo is None:
            warnings.warn(
                "could not realize the tau->0+ sign of g above 1e-290; "
                "a root below the representable range was skipped",
                RootCountWarning,
            )
        else:
            roots.append(_refine_root(params, lo, taus[0]))

    nz = np.flatnonzero((signs[:-1] != 0.0) & (signs[1:] != 0.0) & (signs[:-1] != signs[1:]))
    for i in nz:
        roots.append(_refine_root(params, taus[i], taus[i + 1]))

    if signs[-1] != 0.0 and signs[-1] != _sign_at_infinity(params):
        warnings.warn(
            f"sign of g at tau_max={tau_max:g} differs from its asymptotic sign; "
            "increase tau_max to bracket the remaining root",
            RootCountWarning,
        )

    roots.sort()
    deduped: list[float] = []
    for r in roots:
        if not deduped or r - deduped[-1] > 1e-11 * max(1.0, r):
            deduped.append(r)

    expected, exact = coupling_case(params).predicted_root_count
    if (exact and len(deduped) != expected) or len(deduped) < expected:
        warnings.warn(
            f"found {len(deduped)} root(s) of g but the case "
            f"{coupling_case(params).value!r} predicts "
            f"{'exactly' if exact else 'at least'} {expected}",
            RootCountWarning,
        )
    return deduped


@dataclass(frozen=True)
class TauClassification:
    """Outcome of the interior-minimum search for the coupling ratio.

    ``tau_min`` is 0 with ``h_at_tau_min`` = 1 in the degenerate cases;
    otherwise it is the g-root at which h attains its global minimum
    (ties within 1e-12 resolve to the largest root).  ``lam`` and ``mu``
    are the synchronized amplitudes: lam^(p_star-p) = p_star /
    (p_star + alpha*tau_min^beta) and mu = tau_min * lam.
    """

    case: CouplingCase
    g_roots: tuple[float, ...]
    tau_min: float
    h_at_tau_min: float
    lam: float
    mu: float


def classify(
    params: ParamSet, tau_max: float | None = None, grid_n: int | None = None
) -> TauClassification:
    """Locate the global minimum of h over [0, inf) and the synchronized pair."""
    case = coupling_case(params)
    roots = find_g_roots(params, tau_max=tau_max, grid_n=grid_n)

    tau_min, h_min = 0.0, 1.0
    if roots:
        h_at = [h_eval(r, params) for r in roots]
        best = min(h_at)
        if best < 1.0:
            tau_min = max(r for r, v in zip(roots, h_at) if v <= best + TIE_TOL)
            h_min = h_eval(tau_min, params)

    if (tau_min > 0.0) != case.interior_minimum:
        warnings.warn(
            f"case {case.value!r} predicts interior_minimum="
            f"{case.interior_minimum} but tau_min={tau_min}",
            RootCountWarning,
        )

    p, al, be, ps = params.p, params.alpha, params.beta, params.p_star
    lam = (ps / (ps + al * tau_min**be)) ** (1.0 / (ps - p))
    mu = tau_min * lam
    return TauClassification(case, tuple(roots), tau_min, h_min, lam, mu)


def verify_sync_relations(
    classification: TauClassification, params: ParamSet
) -> tuple[float, float]:
    """Residuals of the two synchronized-amplitude relations.

    Returns (|lam^(p_star-p) + (alpha/p_star)*mu^beta*lam^(alpha-p) - 1|,
    |mu^(p_star-p) + (beta/p_star)*mu^(beta-p)*lam^alpha - 1|); both vanish
    (below 1e-9) when (lam, mu) come from :func:`classify` at an interior
    minimum.  Raises :class:`ParameterError` when tau_min = 0, where the
    second relation degenerates.
    """
    if not classification.tau_min > 0.0:
        raise ParameterError(
            "synchronized relations require tau_min > 0 (interior minimum)"
        )
    p, al, be, ps = params.p, params.alpha, params.beta, params.p_star
    lam, mu = classification.lam, classification.mu
    r1 = abs(lam ** (ps - p) + (al / ps) * mu**be * lam ** (al - p) - 1.0)
    r2 = abs(mu ** (ps - p) + (be / ps) * mu ** (be - p) * lam**al - 1.0)
    return (r1, r2)


def s_alpha_beta_from_scalar(scalar_constant: float, classification: TauClassification) -> float:
    """Coupled best constant from the scalar one: h(tau_min) * scalar_constant."""
    if not scalar_constant > 0.0:
        raise ValueError("scalar constant must be positive")
    return classification.h_at_tau_min * scalar_constant
