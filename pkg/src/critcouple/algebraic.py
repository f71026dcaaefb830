"""The gamma-coupled algebraic system behind the least-energy formula.

A nonnegative pair (k, l) scales the shared extremal profile into a solution
of the coupled system exactly when

    F1(k, l) = k^((p*-p)/p) + (alpha*gamma/p*) * k^((alpha-p)/p) * l^(beta/p) - 1 = 0
    F2(k, l) = l^((p*-p)/p) + (beta*gamma/p*)  * l^((beta-p)/p)  * k^(alpha/p) - 1 = 0

(writing p* for p_star).  Solving F1 = 0 for l on 0 < k <= 1 gives the
explicit curve ell_of_k; the symmetric curve k_of_ell resolves F2.  All
simultaneous roots lie in the unit square: k > 1 forces F1 > 0 and l > 1
forces F2 > 0.

In the HIGH window (alpha, beta > p) the least-energy formula holds for
gamma below an explicit threshold; in the LOW window (alpha, beta < p) for
gamma above one.  The change of variables y = c + d, x = c/d turns the
system into the scalar profiles f1, f2 (y^((p*-p)/p) = f1(x) = f2(x) at
solutions); their monotonicity under the HIGH-window threshold is governed
by the auxiliary functions g1, g2 whose extrema sit at explicit points
x1, x2.  These drive the minimal-sum property: any (c, d) with F1 >= 0 and
F2 >= 0 has c + d at least k0 + l0.

The trivial branch: at gamma = 0 the system has the decoupled solution
(1, 1) with diagonal Jacobian (p*-p)/p * I, so a branch (k(gamma), l(gamma))
continues out of (1, 1, 0); k + l starts at 2 and, in the LOW window, drops
below 1 for gamma past the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, RegimeError, SolveError
from .exponents import EnergyWindow, ParamSet, regime_classify

__all__ = [
    "GammaSystem",
    "AlgebraicSolution",
    "BranchResult",
    "SumRatioProfiles",
    "F1",
    "F2",
    "ell_of_k",
    "k_of_ell",
    "ell_prime",
    "gamma_upper_threshold",
    "gamma_lower_threshold",
    "solve_all",
    "least_energy",
    "jacobian",
    "continue_branch",
    "sum_ratio_profiles",
    "profile_critical_points",
]

# below this distance in (k, l) the corrector is trusted to have stayed on
# its branch; collisions between distinct branches happen well above it
_TRUST_RADIUS = 0.1


@dataclass(frozen=True)
class GammaSystem:
    """A parameter tuple together with a positive coupling strength gamma."""

    params: ParamSet
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0.0:
            raise ValueError(f"gamma={self.gamma!r} must be positive")


def _exps(params: ParamSet):
    return params.p, params.alpha, params.beta, params.p_star


def _f1_raw(k, l, gamma, params: ParamSet):
    p, al, be, ps = _exps(params)
    return k ** ((ps - p) / p) + (al * gamma / ps) * k ** ((al - p) / p) * l ** (be / p) - 1.0


def _f2_raw(k, l, gamma, params: ParamSet):
    p, al, be, ps = _exps(params)
    return l ** ((ps - p) / p) + (be * gamma / ps) * l ** ((be - p) / p) * k ** (al / p) - 1.0


def F1(k, l, sys: GammaSystem):
    """First system residual; domain k > 0, l >= 0."""
    k_arr, l_arr = np.asarray(k, float), np.asarray(l, float)
    if np.any(k_arr <= 0.0) or np.any(l_arr < 0.0):
        raise ValueError("F1 requires k > 0 and l >= 0")
    out = _f1_raw(k_arr, l_arr, sys.gamma, sys.params)
    return float(out) if np.ndim(k) == 0 and np.ndim(l) == 0 else out


def F2(k, l, sys: GammaSystem):
    """Second system residual; domain k >= 0, l > 0."""
    k_arr, l_arr = np.asarray(k, float), np.asarray(l, float)
    if np.any(l_arr <= 0.0) or np.any(k_arr < 0.0):
        raise ValueError("F2 requires l > 0 and k >= 0")
    out = _f2_raw(k_arr, l_arr, sys.gamma, sys.params)
    return float(out) if np.ndim(k) == 0 and np.ndim(l) == 0 else out


def _ell_of_k_raw(k, gamma, params: ParamSet):
    p, al, be, ps = _exps(params)
    return (
        (ps / (al * gamma)) ** (p / be)
        * k ** ((p - al) / be)
        * (1.0 - k ** ((ps - p) / p)) ** (p / be)
    )


def ell_of_k(k, sys: GammaSystem):
    """The l >= 0 resolving F1(k, l) = 0, defined for 0 < k <= 1."""
    k_arr = np.asarray(k, float)
    if np.any(k_arr <= 0.0) or np.any(k_arr > 1.0):
        raise ValueError("ell_of_k requires 0 < k <= 1")
    out = _ell_of_k_raw(k_arr, sys.gamma, sys.params)
    return float(out) if np.ndim(k) == 0 else out


def k_of_ell(l, sys: GammaSystem):
    """The k >= 0 resolving F2(k, l) = 0, defined for 0 < l <= 1."""
    l_arr = np.asarray(l, float)
    if np.any(l_arr <= 0.0) or np.any(l_arr > 1.0):
        raise ValueError("k_of_ell requires 0 < l <= 1")
    p, al, be, ps = _exps(sys.params)
    out = (
        (ps / (be * sys.gamma)) ** (p / al)
        * l_arr ** ((p - be) / al)
        * (1.0 - l_arr ** ((ps - p) / p)) ** (p / al)
    )
    return float(out) if np.ndim(l) == 0 else out


def ell_prime(k, sys: GammaSystem):
    """Analytic derivative of ell_of_k on (0, 1]:

        (p*/(alpha*gamma))^(p/beta) * k^((p-p*)/beta)
          * (1 - k^((p*-p)/p))^((p-beta)/beta) * ((p-alpha)/beta - k^((p*-p)/p)).

    Finite up to k = 1 when beta < p (the LOW window, where the slope bound
    min ell_prime >= -1 lives); for beta > p it diverges as k -> 1-.
    """
    k_arr = np.asarray(k, float)
    if np.any(k_arr <= 0.0) or np.any(k_arr > 1.0):
        raise ValueError("ell_prime requires 0 < k <= 1")
    p, al, be, ps = _exps(sys.params)
    out = (
        (ps / (al * sys.gamma)) ** (p / be)
        * k_arr ** ((p - ps) / be)
        * (1.0 - k_arr ** ((ps - p) / p)) ** ((p - be) / be)
        * ((p - al) / be - k_arr ** ((ps - p) / p))
    )
    return float(out) if np.ndim(k) == 0 else out


def gamma_upper_threshold(params: ParamSet) -> float:
    """HIGH-window gamma ceiling for the least-energy formula:

        (p*(p*-p)/p) * min{ (1/alpha)*((alpha-p)/(beta-p))^((beta-p)/p),
                            (1/beta) *((beta-p)/(alpha-p))^((alpha-p)/p) }.

    Raises :class:`RegimeError` outside the HIGH window.
    """
    if regime_classify(params).energy_window is not EnergyWindow.HIGH:
        raise RegimeError("gamma_upper_threshold is defined in the HIGH window only")
    p, al, be, ps = _exps(params)
    lead = ps * (ps - p) / p
    a1 = (1.0 / al) * ((al - p) / (be - p)) ** ((be - p) / p)
    a2 = (1.0 / be) * ((be - p) / (al - p)) ** ((al - p) / p)
    return lead * min(a1, a2)


def gamma_lower_threshold(params: ParamSet) -> float:
    """LOW-window gamma floor for the least-energy formula:

        (p*(p*-p)/p) * max{ (1/alpha)*((p-beta)/(p-alpha))^((p-beta)/p),
                            (1/beta) *((p-alpha)/(p-beta))^((p-alpha)/p) }.

    Raises :class:`RegimeError` outside the LOW window.
    """
    if regime_classify(params).energy_window is not EnergyWindow.LOW:
        raise RegimeError("gamma_lower_threshold is defined in the LOW window only")
    p, al, be, ps = _exps(params)
    lead = ps * (ps - p) / p
    a1 = (1.0 / al) * ((p - be) / (p - al)) ** ((p - be) / p)
    a2 = (1.0 / be) * ((p - al) / (p - be)) ** ((p - al) / p)
    return lead * max(a1, a2)


@dataclass(frozen=True)
class AlgebraicSolution:
    """A simultaneous root of (F1, F2) with its residuals and ranking flags.

    ``is_k0`` marks the root of minimal k (whose sum k + l enters the
    least-energy value); ``is_l1`` marks the root of minimal l.  They may
    or may not coincide.  ``in_unit_square`` records membership in
    (0, 1]^2 (always true for genuine roots; kept for reporting).
    """

    k: float
    l: float
    residual_f1: float
    residual_f2: float
    is_k0: bool = False
    is_l1: bool = False
    in_unit_square: bool = True


def jacobian(k: float, l: float, sys: GammaSystem) -> np.ndarray:
    """Analytic 2x2 Jacobian of (F1, F2) at (k, l), k, l > 0."""
    if not (k > 0.0 and l > 0.0):
        raise ValueError("jacobian requires k > 0 and l > 0")
    p, al, be, ps = _exps(sys.params)
    g = sys.gamma
    j11 = ((ps - p) / p) * k ** ((ps - 2 * p) / p) + (al * g / ps) * (
        (al - p) / p
    ) * k ** ((al - 2 * p) / p) * l ** (be / p)
    j12 = (al * g / ps) * (be / p) * k ** ((al - p) / p) * l ** ((be - p) / p)
    j21 = (be * g / ps) * (al / p) * l ** ((be - p) / p) * k ** ((al - p) / p)
    j22 = ((ps - p) / p) * l ** ((ps - 2 * p) / p) + (be * g / ps) * (
        (be - p) / p
    ) * l ** ((be - 2 * p) / p) * k ** (al / p)
    return np.array([[j11, j12], [j21, j22]])


def _dF_dgamma(k: float, l: float, params: ParamSet) -> np.ndarray:
    p, al, be, ps = _exps(params)
    return np.array(
        [
            (al / ps) * k ** ((al - p) / p) * l ** (be / p),
            (be / ps) * l ** ((be - p) / p) * k ** (al / p),
        ]
    )


def _newton_polish(k: float, l: float, gamma: float, params: ParamSet, iters: int = 12):
    best = (k, l)
    best_res = max(
        abs(_f1_raw(k, l, gamma, params)), abs(_f2_raw(k, l, gamma, params))
    )
    for _ in range(iters):
        f = np.array([_f1_raw(k, l, gamma, params), _f2_raw(k, l, gamma, params)])
        jac = jacobian(k, l, GammaSystem(params, gamma)) if gamma > 0 else None
        if jac is None:
            p, al, be, ps = _exps(params)
            jac = np.array(
                [
                    [((ps - p) / p) * k ** ((ps - 2 * p) / p), 0.0],
                    [0.0, ((ps - p) / p) * l ** ((ps - 2 * p) / p)],
                ]
            )
        det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
        if not math.isfinite(det) or abs(det) < 1e-300:
            break
        dk = (jac[1, 1] * f[0] - jac[0, 1] * f[1]) / det
        dl = (jac[0, 0] * f[1] - jac[1, 0] * f[0]) / det
        k_new, l_new = k - dk, l - dl
        if not (k_new > 0.0 and l_new > 0.0):
            break
        res = max(
            abs(_f1_raw(k_new, l_new, gamma, params)),
            abs(_f2_raw(k_new, l_new, gamma, params)),
        )
        if res < best_res:
            best, best_res = (k_new, l_new), res
        if res < 1e-15 or (abs(dk) + abs(dl)) < 1e-16 * (abs(k) + abs(l)):
            k, l = k_new, l_new
            break
        k, l = k_new, l_new
    return best[0], best[1], best_res


def _scan_roots(fn, grid: np.ndarray, vals: np.ndarray) -> list[float]:
    roots = []
    signs = np.sign(vals)
    finite_pairs = np.isfinite(vals[:-1]) | np.isinf(vals[:-1])
    change = (signs[:-1] != 0.0) & (signs[1:] != 0.0) & (signs[:-1] != signs[1:])
    change &= ~np.isnan(vals[:-1]) & ~np.isnan(vals[1:]) & finite_pairs
    for i in np.flatnonzero(change):
        lo, hi = grid[i], grid[i + 1]
        f_lo, f_hi = vals[i], vals[i + 1]
        for _ in range(200):
            if hi - lo <= 2.0 * np.finfo(float).eps * max(1.0, hi):
                break
            mid = 0.5 * (lo + hi)
            f_mid = fn(mid)
            if f_mid == 0.0 or not math.isfinite(f_mid):
                if not math.isfinite(f_mid):
                    # land on the finite side of the bracket
                    if math.isfinite(f_lo):
                        hi = mid
                    else:
                        lo = mid
                    continue
                lo = hi = mid
                break
            if (f_mid > 0.0) == (f_lo > 0.0):
                lo, f_lo = mid, f_mid
            else:
                hi, f_hi = mid, f_mid
        roots.append(0.5 * (lo + hi))
    for i in np.flatnonzero(signs == 0.0):
        roots.append(float(grid[i]))
    return roots


def solve_all(sys: GammaSystem, scan_n: int = 100_000) -> list[AlgebraicSolution]:
    """All simultaneous roots of (F1, F2), sorted by k.

    Scans the curve k -> F2(k, ell_of_k(k)) on a uniform grid over (0, 1]
    (and symmetrically l -> F1(k_of_ell(l), l)), refines each sign change by
    bisection, then polishes with full two-dimensional Newton steps so both
    residuals land at machine precision.  Raises :class:`SolveError` with
    scan diagnostics when no sign change is found.
    """
    if scan_n < 1000:
        raise ValueError("scan_n must be at least 1000")
    params, gamma = sys.params, sys.gamma

    ks = np.arange(1, scan_n + 1, dtype=float) / scan_n
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        lk = _ell_of_k_raw(ks, gamma, params)
        phi = _f2_raw(ks, np.maximum(lk, 0.0), gamma, params)

    def phi_scalar(k):
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            return float(_f2_raw(k, max(_ell_of_k_raw(k, gamma, params), 0.0), gamma, params))

    candidates = [
        (k, max(_ell_of_k_raw(k, gamma, params), 0.0)) for k in _scan_roots(phi_scalar, ks, phi)
    ]

    ls = ks
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        kl = np.asarray(k_of_ell(ls, sys))
        psi = _f1_raw(np.maximum(kl, 1e-300), ls, gamma, params)

    def psi_scalar(l):
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            return float(_f1_raw(max(k_of_ell(l, sys), 1e-300), l, gamma, params))

    candidates += [
        (max(k_of_ell(l, sys), 0.0), l) for l in _scan_roots(psi_scalar, ls, psi)
    ]

    polished = []
    for k, l in candidates:
        if not (k > 0.0 and l > 0.0):
            continue
        k_p, l_p, res = _newton_polish(k, l, gamma, params)
        if res < 1e-9:
            polished.append((k_p, l_p))

    polished.sort()
    unique: list[tuple[float, float]] = []
    for k, l in polished:
        if not unique or max(abs(k - unique[-1][0]), abs(l - unique[-1][1])) > 1e-9:
            unique.append((k, l))

    if not unique:
        raise SolveError(
            "no simultaneous root of (F1, F2) located",
            diagnostics={
                "gamma": gamma,
                "window": regime_classify(params).energy_window.value,
                "phi_min": float(np.nanmin(phi)),
                "phi_max": float(np.nanmax(phi)),
                "scan_n": scan_n,
            },
        )

    i_k0 = min(range(len(unique)), key=lambda i: unique[i][0])
    i_l1 = min(range(len(unique)), key=lambda i: unique[i][1])
    out = []
    for i, (k, l) in enumerate(unique):
        out.append(
            AlgebraicSolution(
                k=k,
                l=l,
                residual_f1=abs(_f1_raw(k, l, gamma, params)),
                residual_f2=abs(_f2_raw(k, l, gamma, params)),
                is_k0=(i == i_k0),
                is_l1=(i == i_l1),
                in_unit_square=(0.0 < k <= 1.0 and 0.0 < l <= 1.0),
            )
        )
    return out


def least_energy(k0: float, l0: float, scalar_constant: float, params: ParamSet) -> float:
    """Least-energy value (s/N) * (k0 + l0) * S^(N/(s*p)) for scalar constant S."""
    if not (k0 >= 0.0 and l0 >= 0.0 and k0 + l0 > 0.0):
        raise ValueError("k0 and l0 must be nonnegative with positive sum")
    if not scalar_constant > 0.0:
        raise ValueError("scalar constant must be positive")
    N, s, p = params.N, params.s, params.p
    return (s / N) * (k0 + l0) * scalar_constant ** (N / (s * p))


@dataclass(frozen=True)
class BranchResult:
    """Continuation output: (gamma, k, l) samples plus the largest gamma at
    which k + l still exceeds 1 (None when the branch never does)."""

    points: tuple[tuple[float, float, float], ...]
    gamma_one: float | None


def continue_branch(
    params: ParamSet,
    gamma_grid,
    newton_tol: float = 1e-9,
    min_step: float = 1e-10,
) -> BranchResult:
    """Predictor-corrector continuation of the branch through (1, 1) at gamma = 0.

    Walks the increasing gamma grid with Euler prediction and Newton
    correction, halving the internal step on corrector failure; below
    ``min_step`` a :class:`ConvergenceError` carrying the partial branch is
    raised.  The corrector usually lands far below ``newton_tol``; the
    default matches the residual acceptance of :func:`solve_all` because
    rounding in F1/F2 puts the reachable floor above 1e-12 at
    ill-conditioned points.  LOW-window tuples only.
    """
    if regime_classify(params).energy_window is not EnergyWindow.LOW:
        raise RegimeError("continuation is defined in the LOW window only")
    grid = [float(g) for g in gamma_grid]
    if not grid:
        raise ValueError("gamma_grid must not be empty")
    if any(g <= 0.0 for g in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("gamma_grid must be strictly increasing and positive")

    k, l = 1.0, 1.0
    gamma_cur = 0.0
    points: list[tuple[float, float, float]] = []

    for gamma_target in grid:
        step = gamma_target - gamma_cur
        while gamma_cur < gamma_target:
            step = min(step, gamma_target - gamma_cur)
            gamma_next = gamma_cur + step
            jac = (
                jacobian(k, l, GammaSystem(params, gamma_cur))
                if gamma_cur > 0.0
                else jacobian(k, l, GammaSystem(params, 1e-300))
            )
            rhs = _dF_dgamma(k, l, params)
            det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
            if abs(det) > 1e-300:
                dk = -(jac[1, 1] * rhs[0] - jac[0, 1] * rhs[1]) / det * step
                dl = -(jac[0, 0] * rhs[1] - jac[1, 0] * rhs[0]) / det * step
            else:
                dk = dl = 0.0
            # trust region: a blown-up tangent near a fold must not teleport
            # the predictor onto a different branch
            shift = math.hypot(dk, dl)
            if shift > _TRUST_RADIUS:
                dk *= _TRUST_RADIUS / shift
                dl *= _TRUST_RADIUS / shift
            k_pred, l_pred = max(k + dk, 1e-12), max(l + dl, 1e-12)
            k_new, l_new, res = _newton_polish(
                k_pred, l_pred, gamma_next, params, iters=30
            )
            drift = math.hypot(k_new - k_pred, l_new - l_pred)
            if (
                res <= newton_tol
                and k_new > 0.0
                and l_new > 0.0
                and drift <= _TRUST_RADIUS
            ):
                k, l, gamma_cur = k_new, l_new, gamma_next
                step *= 2.0
            else:
                step *= 0.5
                if step < min_step:
                    raise ConvergenceError(
                        f"continuation stalled at gamma={gamma_cur:.6g} "
                        f"(corrector residual {res:.3e})",
                        partial=BranchResult(tuple(points), _largest_above_one(points)),
                    )
        points.append((gamma_cur, k, l))

    return BranchResult(tuple(points), _largest_above_one(points))


def _largest_above_one(points) -> float | None:
    good = [g for g, k, l in points if k + l > 1.0]
    return max(good) if good else None


@dataclass(frozen=True)
class SumRatioProfiles:
    """Values of the four reduced profiles at one x = c/d (HIGH window)."""

    f1: float
    f2: float
    g1: float
    g2: float


def _require_high(sys: GammaSystem):
    if regime_classify(sys.params).energy_window is not EnergyWindow.HIGH:
        raise RegimeError("sum-ratio profiles are defined in the HIGH window only")


def sum_ratio_profiles(x, sys: GammaSystem) -> SumRatioProfiles:
    """Evaluate the reduced profiles at x = c/d > 0.

    f1 and f2 express y^((p*-p)/p) (y = c + d) along the curves F1 = 0 and
    F2 = 0; g1 and g2 are the factors deciding their monotonicity (f1 is
    nonincreasing when g1 <= 0 everywhere, f2 nondecreasing when g2 >= 0).
    """
    _require_high(sys)
    if not x > 0.0:
        raise ValueError("x must be positive")
    p, al, be, ps = _exps(sys.params)
    g = sys.gamma
    e = (ps - p) / p
    f1 = (x + 1.0) ** e / (x**e + (al * g / ps) * x ** ((al - p) / p))
    f2 = (x + 1.0) ** e / (1.0 + (be * g / ps) * x ** (al / p))
    g1 = -(ps * (ps - p) / (al * g)) * x ** (be / p) + be * x - al + p
    g2 = ps * (ps - p) / (be * g) + (be - p) * x ** (al / p) - al * x ** ((al - p) / p)
    return SumRatioProfiles(f1=f1, f2=f2, g1=g1, g2=g2)


def profile_critical_points(sys: GammaSystem) -> tuple[float, float]:
    """(x1, x2): the argmax of g1 and the argmin of g2.

        x1 = (p*alpha*gamma / (p*(p*-p)))^(p/(beta-p)),   x2 = (alpha-p)/(beta-p).

    Under the HIGH-window threshold g1(x1) <= 0 and g2(x2) >= 0.
    """
    _require_high(sys)
    p, al, be, ps = _exps(sys.params)
    x1 = (p * al * sys.gamma / (ps * (ps - p))) ** (p / (be - p))
    x2 = (al - p) / (be - p)
    return (x1, x2)
