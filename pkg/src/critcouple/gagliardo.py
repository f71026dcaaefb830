"""Desk-scale lattice discretization of the Gagliardo quotient (N = 1).

A function supported on [-L, L] is represented by its values at the n cell
centers x_i = -L + (i + 1/2) * delta, delta = 2L/n.  The Gagliardo seminorm
to the p-th power becomes

    sum_{i != j} |u_i - u_j|^p / |x_i - x_j|^(1 + s p) * delta^2
      + 2 * delta * sum_i |u_i|^p * w_i,

where the closed-form tail weights w_i = integral over |y| > L of
|x_i - y|^(-1-s p) dy = ((L - x_i)^(-s p) + (L + x_i)^(-s p)) / (s p)
account for the prescribed zero values outside the box (valid for s p < 1,
which also keeps the diagonal-excluded double sum consistent).  The discrete
operator is the gradient of (1/p) times this expression divided by the cell
measure, so the Euler identity <apply(u), u> * delta = seminorm_p(u) holds
to rounding.

Minimization of the scalar quotient seminorm_p(u) / ||u||_{p_star}^p and of
its two-component coupled variant runs normalized gradient descent with an
Armijo backtracking line search (shrink factor 0.5, initial step 1.0) and
projection to the unit constraint sphere after every step, optionally
composed with a decreasing-rearrangement projection.  The quotient sequence
is nonincreasing by construction.

Pair sums over i are taken row-by-row in index order and then summed again
in index order (numpy's pairwise tree), so results are bit-reproducible
regardless of how many worker threads the CRITCOUPLE_THREADS environment
variable allows for the row blocks.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, UnsupportedDimensionError
from .exponents import ParamSet

__all__ = [
    "Grid1D",
    "DiscreteFunction",
    "MinimizeOptions",
    "RayleighResult",
    "seminorm_p",
    "frac_p_laplacian_apply",
    "lattice_norm",
    "scalar_quotient",
    "vector_quotient",
    "minimize_scalar",
    "minimize_vector",
    "el_residual_system",
    "normalize_to_solution",
    "j_energy",
    "nehari_project",
    "power_profile",
    "gaussian_bump",
    "decreasing_rearrangement",
    "worker_count",
]


def worker_count() -> int:
    """Row-block worker cap from CRITCOUPLE_THREADS (default 1, minimum 1)."""
    raw = os.environ.get("CRITCOUPLE_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass
class Grid1D:
    """Uniform cell-centered lattice on [-half_width, half_width].

    ``mask`` flags free cells (True); pinned cells (False) hold the value 0
    and stay fixed under minimization, shrinking the admissible set the way
    a smaller domain would.  ``mask=None`` means every cell is free.
    """

    half_width: float
    n: int
    mask: np.ndarray | None = None

    def __post_init__(self):
        if not self.half_width > 0.0:
            raise ValueError(f"half_width={self.half_width!r} must be positive")
        if self.n < 16:
            raise ValueError(f"n={self.n!r} must be at least 16")
        if self.mask is not None:
            self.mask = np.asarray(self.mask, dtype=bool)
            if self.mask.shape != (self.n,):
                raise ValueError("mask must have shape (n,)")
            if not self.mask.any():
                raise ValueError("mask pins every cell; nothing to minimize over")

    @property
    def delta(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def x(self) -> np.ndarray:
        return -self.half_width + (np.arange(self.n) + 0.5) * self.delta

    @property
    def free(self) -> np.ndarray:
        if self.mask is None:
            return np.ones(self.n, dtype=bool)
        return self.mask

    @classmethod
    def ball(cls, half_width: float, n: int, radius: float) -> "Grid1D":
        """Grid whose free cells are those with |x_i| <= radius."""
        base = cls(half_width, n)
        if not radius >= base.delta:
            raise ValueError(
                f"ball radius {radius!r} is below one cell width {base.delta!r}"
            )
        return cls(half_width, n, np.abs(base.x) <= radius)

    def same_layout(self, other: "Grid1D") -> bool:
        return (
            self.n == other.n
            and self.half_width == other.half_width
            and bool(np.array_equal(self.free, other.free))
        )


@dataclass
class DiscreteFunction:
    """Cell values on a :class:`Grid1D`; pinned cells are forced to zero."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, copy=True)
        if vals.shape != (self.grid.n,):
            raise ValueError(f"values must have shape ({self.grid.n},)")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        vals[~self.grid.free] = 0.0
        self.values = vals

    @classmethod
    def zeros(cls, grid: Grid1D) -> "DiscreteFunction":
        return cls(grid, np.zeros(grid.n))

    @classmethod
    def from_samples(cls, grid: Grid1D, fn) -> "DiscreteFunction":
        return cls(grid, np.asarray(fn(grid.x), dtype=float))

    def scaled(self, c: float) -> "DiscreteFunction":
        return DiscreteFunction(self.grid, c * self.values)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "value"])
            for xi, vi in zip(self.grid.x, self.values):
                writer.writerow([f"{xi:.17g}", f"{vi:.17g}"])

    @classmethod
    def from_csv(cls, path, mask: np.ndarray | None = None) -> "DiscreteFunction":
        xs, vs = [], []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if [c.strip() for c in header[:2]] != ["x", "value"]:
                raise ValueError(f"expected header x,value in {path}")
            for row in reader:
                xs.append(float(row[0]))
                vs.append(float(row[1]))
        x = np.asarray(xs)
        if len(x) < 2:
            raise ValueError("need at least two rows to infer the grid")
        delta = x[1] - x[0]
        half_width = -x[0] + 0.5 * delta
        grid = Grid1D(half_width, len(x), mask)
        return cls(grid, np.asarray(vs))


def _signed_pow(v: np.ndarray, expo: float) -> np.ndarray:
    # |v|^expo * sign(v) with 0 -> 0; expo > 0 always holds here (p > 1)
    return np.sign(v) * np.abs(v) ** expo


def _row_sums(mat: np.ndarray, workers: int) -> np.ndarray:
    if workers <= 1 or mat.shape[0] < 64:
        return mat.sum(axis=1)
    n = mat.shape[0]
    out = np.empty(n)
    bounds = np.linspace(0, n, workers + 1, dtype=int)

    def run(a, b):
        out[a:b] = mat[a:b].sum(axis=1)

    with ThreadPoolExecutor(max_workers=workers) as ex:
        futures = [
            ex.submit(run, a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a
        ]
        for f in futures:
            f.result()
    return out


class _Lattice:
    """Precomputed kernel, tail weights and measure for one grid/parameter pair."""

    def __init__(self, grid: Grid1D, params: ParamSet):
        if params.N != 1:
            raise UnsupportedDimensionError(
                f"lattice operations support N=1 only, got N={params.N}"
            )
        sp = params.s * params.p
        if not sp < 1.0:
            raise ParameterError(
                [f"lattice operations require s*p < 1, got s*p={sp}"]
            )
        self.grid = grid
        self.params = params
        self.delta = grid.delta
        self.free = grid.free
        x = grid.x
        diff = np.abs(x[:, None] - x[None, :])
        np.fill_diagonal(diff, 1.0)
        self.kernel = diff ** (-(1.0 + sp))
        np.fill_diagonal(self.kernel, 0.0)
        L = grid.half_width
        self.tail = ((L - x) ** (-sp) + (L + x) ** (-sp)) / sp
        self.workers = worker_count()

    def seminorm(self, v: np.ndarray) -> float:
        p = self.params.p
        pair = np.abs(v[:, None] - v[None, :]) ** p * self.kernel
        rows = _row_sums(pair, self.workers)
        interior = float(rows.sum()) * self.delta**2
        exterior = 2.0 * self.delta * float((np.abs(v) ** p * self.tail).sum())
        return interior + exterior

    def apply(self, v: np.ndarray) -> np.ndarray:
        p = self.params.p
        dmat = v[:, None] - v[None, :]
        rows = _row_sums(_signed_pow(dmat, p - 1.0) * self.kernel, self.workers)
        return 2.0 * self.delta * rows + 2.0 * _signed_pow(v, p - 1.0) * self.tail

    def integral(self, integrand: np.ndarray) -> float:
        return float(integrand.sum()) * self.delta

    def norm_q(self, v: np.ndarray, q: float) -> float:
        return self.integral(np.abs(v) ** q) ** (1.0 / q)


def seminorm_p(u: DiscreteFunction, params: ParamSet) -> float:
    """Gagliardo seminorm to the p-th power, tail-corrected; N = 1, s*p < 1."""
    return _Lattice(u.grid, params).seminorm(u.values)


def frac_p_laplacian_apply(u: DiscreteFunction, params: ParamSet) -> DiscreteFunction:
    """Discrete operator: gradient of (1/p)*seminorm_p w.r.t. the values,
    divided by the cell measure.  Satisfies <apply(u), u> * delta = seminorm_p(u)."""
    lat = _Lattice(u.grid, params)
    out = DiscreteFunction.zeros(u.grid)
    # operator values are meaningful on every cell; bypass the pin-to-zero reset
    out.values = lat.apply(u.values)
    return out


def lattice_norm(u: DiscreteFunction, q: float) -> float:
    """Discrete L^q norm (sum |u_i|^q * delta)^(1/q)."""
    if not q > 0.0:
        raise ValueError("q must be positive")
    return float((np.abs(u.values) ** q).sum() * u.grid.delta) ** (1.0 / q)


def scalar_quotient(u: DiscreteFunction, params: ParamSet) -> float:
    """seminorm_p(u) / ||u||_{p_star}^p; requires u not identically zero."""
    lat = _Lattice(u.grid, params)
    den = lat.integral(np.abs(u.values) ** params.p_star)
    if den <= 0.0:
        raise ValueError("quotient undefined for the zero function")
    return lat.seminorm(u.values) / den ** (params.p / params.p_star)


def _mixed_density(u: np.ndarray, v: np.ndarray, gamma: float, a: float, b: float, q: float):
    return np.abs(u) ** q + np.abs(v) ** q + gamma * np.abs(u) ** a * np.abs(v) ** b


def _check_eps(eps_shift: float, params: ParamSet):
    if eps_shift < 0.0 or eps_shift >= min(params.alpha, params.beta) - 1.0:
        raise ValueError(
            f"eps_shift={eps_shift!r} must lie in [0, min(alpha, beta) - 1)"
        )


def vector_quotient(
    u: DiscreteFunction,
    v: DiscreteFunction,
    gamma: float,
    params: ParamSet,
    eps_shift: float = 0.0,
) -> float:
    """Coupled quotient (seminorm_p(u) + seminorm_p(v)) / I^(p/q) with
    I = integral of |u|^q + |v|^q + gamma*|u|^(alpha-eps)*|v|^(beta-eps)
    and q = p_star - 2*eps_shift."""
    if gamma < 0.0:
        raise ValueError("gamma must be nonnegative")
    _check_eps(eps_shift, params)
    if not u.grid.same_layout(v.grid):
        raise ValueError("u and v must share one grid")
    lat = _Lattice(u.grid, params)
    q = params.p_star - 2.0 * eps_shift
    a, b = params.alpha - eps_shift, params.beta - eps_shift
    den = lat.integral(_mixed_density(u.values, v.values, gamma, a, b, q))
    if den <= 0.0:
        raise ValueError("quotient undefined for the zero pair")
    num = lat.seminorm(u.values) + lat.seminorm(v.values)
    return num / den ** (params.p / q)


def j_energy(
    u: DiscreteFunction,
    v: DiscreteFunction,
    gamma: float,
    params: ParamSet,
    eps_shift: float = 0.0,
) -> float:
    """Energy (1/p)(seminorms) - (1/q) * integral of the coupled density,
    q = p_star - 2*eps_shift."""
    if gamma < 0.0:
        raise ValueError("gamma must be nonnegative")
    _check_eps(eps_shift, params)
    if not u.grid.same_layout(v.grid):
        raise ValueError("u and v must share one grid")
    lat = _Lattice(u.grid, params)
    q = params.p_star - 2.0 * eps_shift
    a, b = params.alpha - eps_shift, params.beta - eps_shift
    num = lat.seminorm(u.values) + lat.seminorm(v.values)
    den = lat.integral(_mixed_density(u.values, v.values, gamma, a, b, q))
    return num / params.p - den / q


def nehari_project(
    u: DiscreteFunction, v: DiscreteFunction, gamma: float, params: ParamSet
) -> tuple[float, tuple[DiscreteFunction, DiscreteFunction]]:
    """Scale factor t and pair (t*u, t*v) on the combined constraint set
    where the p-norm sum equals the coupled integral:

        t = (norm_sum / integral)^(1/(p_star - p)).

    Raises on a vanishing integral (e.g. the zero pair)."""
    if gamma < 0.0:
        raise ValueError("gamma must be nonnegative")
    if not u.grid.same_layout(v.grid):
        raise ValueError("u and v must share one grid")
    lat = _Lattice(u.grid, params)
    ps = params.p_star
    integral = lat.integral(
        _mixed_density(u.values, v.values, gamma, params.alpha, params.beta, ps)
    )
    if integral <= 0.0:
        raise ValueError("projection undefined: coupled integral vanishes")
    norms = lat.seminorm(u.values) + lat.seminorm(v.values)
    if norms <= 0.0:
        raise ValueError("projection undefined: seminorm sum vanishes")
    t = (norms / integral) ** (1.0 / (ps - params.p))
    return t, (u.scaled(t), v.scaled(t))


def el_residual_system(
    u: DiscreteFunction,
    v: DiscreteFunction,
    gamma: float,
    params: ParamSet,
    eps_shift: float = 0.0,
) -> float:
    """Relative Euler-Lagrange defect of the coupled system on free cells:

        apply(u) - |u|^(q-2)u - ((alpha-eps)*gamma/q)*|u|^(alpha-2-eps)u*|v|^(beta-eps)

    (and symmetrically for v), measured in the stacked 2-norm against the
    stacked operator values.  Pass v = 0 and gamma = 0 for the scalar case."""
    if gamma < 0.0:
        raise ValueError("gamma must be nonnegative")
    _check_eps(eps_shift, params)
    if not u.grid.same_layout(v.grid):
        raise ValueError("u and v must share one grid")
    if not (np.any(u.values != 0.0) or np.any(v.values != 0.0)):
        raise ValueError("residual undefined for the zero pair")
    lat = _Lattice(u.grid, params)
    q = params.p_star - 2.0 * eps_shift
    a, b = params.alpha - eps_shift, params.beta - eps_shift
    au = lat.apply(u.values)
    av = lat.apply(v.values)
    ru = (
        au
        - _signed_pow(u.values, q - 1.0)
        - (a * gamma / q) * _signed_pow(u.values, a - 1.0) * np.abs(v.values) ** b
    )
    rv = (
        av
        - _signed_pow(v.values, q - 1.0)
        - (b * gamma / q) * _signed_pow(v.values, b - 1.0) * np.abs(u.values) ** a
    )
    free = lat.free
    num = math.sqrt(float((ru[free] ** 2).sum() + (rv[free] ** 2).sum()))
    den = math.sqrt(float((au[free] ** 2).sum() + (av[free] ** 2).sum()))
    if den == 0.0:
        raise ValueError("operator vanishes on free cells; residual undefined")
    return num / den


def normalize_to_solution(u: DiscreteFunction, params: ParamSet) -> DiscreteFunction:
    """Rescale u so the fitted multiplier of apply(u) against |u|^(p_star-2)u
    becomes 1, using the homogeneity c^(p_star-p) = multiplier.

    The least-squares fit runs over free cells.  Idempotent, and invariant
    under positive rescaling of the input."""
    lat = _Lattice(u.grid, params)
    free = lat.free
    phi = _signed_pow(u.values, params.p_star - 1.0)[free]
    denom = float((phi**2).sum())
    if denom <= 0.0:
        raise ValueError("cannot normalize the zero function")
    lam = float((lat.apply(u.values)[free] * phi).sum()) / denom
    if not (lam > 0.0 and math.isfinite(lam)):
        raise ValueError(f"fitted multiplier {lam!r} must be positive and finite")
    c = lam ** (1.0 / (params.p_star - params.p))
    return u.scaled(c)


def power_profile(grid: Grid1D, params: ParamSet, t: float) -> DiscreteFunction:
    """Algebraically decaying profile (1 + |x/t|^(p/(p-1)))^((s*p - N)/p).

    For p = 2 this is the known extremal shape of the scalar quotient; for
    other p it is a plausible trial function only, and nothing here asserts
    its optimality."""
    if not t > 0.0:
        raise ValueError("t must be positive")
    p, s, N = params.p, params.s, params.N
    vals = (1.0 + np.abs(grid.x / t) ** (p / (p - 1.0))) ** ((s * p - N) / p)
    return DiscreteFunction(grid, vals)


def gaussian_bump(grid: Grid1D, width: float | None = None) -> DiscreteFunction:
    """Smooth positive initializer exp(-x^2 / (2*width^2)); default width L/6."""
    w = width if width is not None else grid.half_width / 6.0
    if not w > 0.0:
        raise ValueError("width must be positive")
    return DiscreteFunction(grid, np.exp(-0.5 * (grid.x / w) ** 2))


def decreasing_rearrangement(u: DiscreteFunction) -> DiscreteFunction:
    """Equimeasurable projection: |values| of free cells sorted onto the
    free cells ordered by |x| (ties broken toward positive x).  Preserves
    every discrete L^q norm; pinned cells stay zero."""
    free_idx = np.flatnonzero(u.grid.free)
    x_free = u.grid.x[free_idx]
    order = np.lexsort((-x_free, np.abs(x_free)))
    vals = np.sort(np.abs(u.values[free_idx]))[::-1]
    out = np.zeros(u.grid.n)
    out[free_idx[order]] = vals
    return DiscreteFunction(u.grid, out)


@dataclass
class MinimizeOptions:
    """Knobs for the projected descent; defaults match the package-wide ones."""

    tol: float = 1e-10
    max_iter: int = 10000
    symmetrize: bool = False
    step0: float = 1.0
    armijo: float = 1e-4
    shrink: float = 0.5
    grow: float = 2.0
    max_backtracks: int = 45
    step_cap: float = 1e6


@dataclass
class RayleighResult:
    """Outcome of a quotient minimization.

    ``value`` is the final quotient, ``minimizer`` the final iterate with a
    unit constraint integral (a pair for the coupled problem), ``el_residual``
    the post-hoc Euler-Lagrange defect of the multiplier-normalized iterate
    (reported, not asserted), and ``history`` the monotone quotient log.
    """

    value: float
    minimizer: DiscreteFunction | tuple[DiscreteFunction, DiscreteFunction]
    iterations: int
    grad_norm: float
    el_residual: float
    converged: bool
    message: str
    history: list[float] = field(default_factory=list)


def _project_scalar(vals: np.ndarray, lat: _Lattice, sym: bool) -> np.ndarray | None:
    v = np.where(lat.free, vals, 0.0)
    if sym:
        v = np.abs(v)
        free_idx = np.flatnonzero(lat.free)
        x_free = lat.grid.x[free_idx]
        order = np.lexsort((-x_free, np.abs(x_free)))
        sorted_vals = np.sort(v[free_idx])[::-1]
        v = np.zeros(lat.grid.n)
        v[free_idx[order]] = sorted_vals
    ps = lat.params.p_star
    norm = (float((np.abs(v) ** ps).sum()) * lat.delta) ** (1.0 / ps)
    if norm <= 0.0 or not math.isfinite(norm):
        return None
    return v / norm


def minimize_scalar(
    init: DiscreteFunction, params: ParamSet, opts: MinimizeOptions | None = None
) -> RayleighResult:
    """Minimize the scalar quotient by projected normalized-gradient descent.

    The iterate lives on the unit discrete L^(p_star) sphere, so the
    quotient equals the seminorm there; the recorded quotient values are
    nonincreasing.  With ``opts.symmetrize`` every candidate first passes
    through the decreasing-rearrangement projection.
    """
    opts = opts or MinimizeOptions()
    lat = _Lattice(init.grid, params)
    p, ps = params.p, params.p_star

    u = _project_scalar(init.values, lat, opts.symmetrize)
    if u is None:
        raise ValueError("initial function vanishes after projection")
    q_val = lat.seminorm(u)
    history = [q_val]
    step = opts.step0
    grad_norm = math.inf
    converged = False
    message = "max_iter reached"
    it = 0

    for it in range(1, opts.max_iter + 1):
        grad = p * lat.delta * (lat.apply(u) - q_val * _signed_pow(u, ps - 1.0))
        grad[~lat.free] = 0.0
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm == 0.0:
            converged, message = True, "vanishing projected gradient"
            break
        direction = -grad / grad_norm

        accepted = False
        trial = min(step, opts.step_cap)
        best = None
        for bt in range(opts.max_backtracks):
            cand = _project_scalar(u + trial * direction, lat, opts.symmetrize)
            if cand is not None:
                q_cand = lat.seminorm(cand)
                if q_cand <= q_val - opts.armijo * trial * grad_norm:
                    accepted = True
                    break
                if q_cand < q_val and (best is None or q_cand < best[1]):
                    best = (cand, q_cand)
            trial *= opts.shrink
        if not accepted:
            if best is None:
                converged, message = True, "no descent direction left"
                break
            cand, q_cand = best

        rel_drop = (q_val - q_cand) / q_val
        u, q_val = cand, q_cand
        history.append(q_val)
        step = min(trial * opts.grow, opts.step_cap) if accepted else trial
        if rel_drop < opts.tol:
            converged, message = True, f"relative decrease below {opts.tol:g}"
            break

    minimizer = DiscreteFunction(init.grid, u)
    scale = q_val ** (1.0 / (ps - p))
    residual = el_residual_system(
        minimizer.scaled(scale), DiscreteFunction.zeros(init.grid), 0.0, params
    )
    return RayleighResult(
        value=q_val,
        minimizer=minimizer,
        iterations=it,
        grad_norm=grad_norm,
        el_residual=residual,
        converged=converged,
        message=message,
        history=history,
    )


def _project_pair(
    uv: np.ndarray, lat: _Lattice, sym: bool, gamma: float, a: float, b: float, q: float
) -> np.ndarray | None:
    n = lat.grid.n
    u = np.where(lat.free, uv[:n], 0.0)
    v = np.where(lat.free, uv[n:], 0.0)
    if sym:
        free_idx = np.flatnonzero(lat.free)
        x_free = lat.grid.x[free_idx]
        order = np.lexsort((-x_free, np.abs(x_free)))
        for w in (u, v):
            sorted_vals = np.sort(np.abs(w[free_idx]))[::-1]
            w[:] = 0.0
            w[free_idx[order]] = sorted_vals
    m = float(_mixed_density(u, v, gamma, a, b, q).sum()) * lat.delta
    if m <= 0.0 or not math.isfinite(m):
        return None
    c = m ** (-1.0 / q)
    return np.concatenate([c * u, c * v])


def minimize_vector(
    init_u: DiscreteFunction,
    init_v: DiscreteFunction,
    gamma: float,
    params: ParamSet,
    eps_shift: float = 0.0,
    opts: MinimizeOptions | None = None,
) -> RayleighResult:
    """Minimize the coupled quotient over pairs by the same projected descent.

    The pair is normalized so the coupled integral (with exponent
    q = p_star - 2*eps_shift) equals 1 after every step.  A zero component
    stays zero (its gradient vanishes), so passing init_v = 0 reproduces the
    scalar descent on the first component.
    """
    if gamma < 0.0:
        raise ValueError("gamma must be nonnegative")
    _check_eps(eps_shift, params)
    if not init_u.grid.same_layout(init_v.grid):
        raise ValueError("init_u and init_v must share one grid")
    opts = opts or MinimizeOptions()
    lat = _Lattice(init_u.grid, params)
    p, ps = params.p, params.p_star
    q = ps - 2.0 * eps_shift
    a, b = params.alpha - eps_shift, params.beta - eps_shift
    n = lat.grid.n

    uv = _project_pair(
        np.concatenate([init_u.values, init_v.values]), lat, opts.symmetrize, gamma, a, b, q
    )
    if uv is None:
        raise ValueError("initial pair vanishes after projection")

    def objective(z: np.ndarray) -> float:
        return lat.seminorm(z[:n]) + lat.seminorm(z[n:])

    q_val = objective(uv)
    history = [q_val]
    step = opts.step0
    grad_norm = math.inf
    converged = False
    message = "max_iter reached"
    it = 0

    for it in range(1, opts.max_iter + 1):
        u, v = uv[:n], uv[n:]
        gu = p * lat.delta * (
            lat.apply(u)
            - q_val
            * (
                _signed_pow(u, q - 1.0)
                + (gamma * a / q) * _signed_pow(u, a - 1.0) * np.abs(v) ** b
            )
        )
        gv = p * lat.delta * (
            lat.apply(v)
            - q_val
            * (
                _signed_pow(v, q - 1.0)
                + (gamma * b / q) * _signed_pow(v, b - 1.0) * np.abs(u) ** a
            )
        )
        gu[~lat.free] = 0.0
        gv[~lat.free] = 0.0
        grad = np.concatenate([gu, gv])
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm == 0.0:
            converged, message = True, "vanishing projected gradient"
            break
        direction = -grad / grad_norm

        accepted = False
        trial = min(step, opts.step_cap)
        best = None
        for bt in range(opts.max_backtracks):
            cand = _project_pair(
                uv + trial * direction, lat, opts.symmetrize, gamma, a, b, q
            )
            if cand is not None:
                q_cand = objective(cand)
                if q_cand <= q_val - opts.armijo * trial * grad_norm:
                    accepted = True
                    break
                if q_cand < q_val and (best is None or q_cand < best[1]):
                    best = (cand, q_cand)
            trial *= opts.shrink
        if not accepted:
            if best is None:
                converged, message = True, "no descent direction left"
                break
            cand, q_cand = best

        rel_drop = (q_val - q_cand) / q_val
        uv, q_val = cand, q_cand
        history.append(q_val)
        step = min(trial * opts.grow, opts.step_cap) if accepted else trial
        if rel_drop < opts.tol:
            converged, message = True, f"relative decrease below {opts.tol:g}"
            break

    u_fun = DiscreteFunction(init_u.grid, uv[:n])
    v_fun = DiscreteFunction(init_u.grid, uv[n:])
    scale = q_val ** (1.0 / (q - p))
    residual = el_residual_system(
        u_fun.scaled(scale), v_fun.scaled(scale), gamma, params, eps_shift=eps_shift
    )
    return RayleighResult(
        value=q_val,
        minimizer=(u_fun, v_fun),
        iterations=it,
        grad_norm=grad_norm,
        el_residual=residual,
        converged=converged,
        message=message,
        history=history,
    )
