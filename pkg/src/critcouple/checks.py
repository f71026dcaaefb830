"""Named self-checks behind the ``verify`` subcommand.

Each check re-derives a published identity or cross-validates two
independent code paths on randomly sampled parameters, so a green run means
the installed build reproduces the analytic structure, not just that it
imports.  Checks draw their randomness from a per-check stream seeded by
crc32(name) xor the run seed, so results are reproducible for a given seed
regardless of execution order or filtering.
"""

from __future__ import annotations

import json
import math
import random
import time
import zlib
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import algebraic, coupling, gagliardo
from .exponents import (
    EnergyWindow,
    GroundStateCase,
    ParamSet,
    critical_exponent,
    regime_classify,
)
from .errors import ParameterError
from .sampling import sample_case, sample_lattice_params, sample_params, sample_window

__all__ = ["CheckResult", "check_names", "run_checks", "load_golden"]

_REGISTRY: dict[str, callable] = {}


def _check(name: str):
    def register(fn):
        _REGISTRY[name] = fn
        return fn

    return register


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def check_names() -> tuple[str, ...]:
    return tuple(_REGISTRY)


def load_golden(path: str | None = None) -> dict:
    """Reference values: bundled data/golden.json unless a path overrides it."""
    if path is not None:
        with open(path) as fh:
            return json.load(fh)
    ref = resources.files("critcouple").joinpath("data/golden.json")
    return json.loads(ref.read_text())


def run_checks(
    name_filter: str | None = None, seed: int = 0, golden_path: str | None = None
) -> list[CheckResult]:
    """Run all (or substring-filtered) checks; never raises on check failure."""
    results = []
    for name, fn in _REGISTRY.items():
        if name_filter and name_filter not in name:
            continue
        rng = random.Random(zlib.crc32(name.encode()) ^ (seed & 0xFFFFFFFF))
        start = time.perf_counter()
        try:
            fn(rng, golden_path)
            results.append(
                CheckResult(name, True, "", time.perf_counter() - start)
            )
        except Exception as exc:  # report, don't abort the sweep
            results.append(
                CheckResult(
                    name,
                    False,
                    f"{type(exc).__name__}: {exc}",
                    time.perf_counter() - start,
                )
            )
    return results


def _require(cond: bool, msg: str):
    if not cond:
        raise AssertionError(msg)


# -- exponent layer ---------------------------------------------------------


@_check("exponents.identities")
def _chk_exponent_identities(rng, golden_path):
    for _ in range(200):
        params = sample_params(rng)
        N, s, p, ps = params.N, params.s, params.p, params.p_star
        _require(
            math.isclose(1.0 / p - 1.0 / ps, s / N, rel_tol=1e-12),
            f"reciprocal identity fails for {params}",
        )
        _require(
            math.isclose((s / N) * p * ps, ps - p, rel_tol=1e-12),
            f"product identity fails for {params}",
        )
        _require(
            math.isclose(params.alpha + params.beta, ps, rel_tol=0, abs_tol=1e-9),
            f"exponent sum off for {params}",
        )


@_check("exponents.rejects-invalid")
def _chk_exponent_rejects(rng, golden_path):
    bad = [
        (0, 0.5, 2.0),
        (3, 0.0, 2.0),
        (3, 1.0, 2.0),
        (3, 0.5, 1.0),
        (1, 0.9, 2.0),
        (2, 0.5, 4.0),
    ]
    for N, s, p in bad:
        try:
            critical_exponent(N, s, p)
        except ParameterError:
            continue
        raise AssertionError(f"({N}, {s}, {p}) accepted but invalid")


# -- coupling layer ----------------------------------------------------------


@_check("coupling.endpoint-values")
def _chk_coupling_endpoints(rng, golden_path):
    for _ in range(50):
        params = sample_params(rng)
        h0 = coupling.h_eval(0.0, params)
        _require(abs(h0 - 1.0) < 1e-14, f"h(0)={h0} for {params}")
        big = coupling.default_tau_max(params)
        h_inf = coupling.h_eval(big * 0.999, params)
        _require(
            abs(h_inf - 1.0) < 0.2,
            f"h near tau_max={big:g} is {h_inf}, not approaching 1 ({params})",
        )


@_check("coupling.derivative-factorization")
def _chk_h_prime_fd(rng, golden_path):
    for _ in range(30):
        params = sample_params(rng)
        for _ in range(20):
            tau = 10.0 ** rng.uniform(-3, 3)
            step = 1e-6 * max(1.0, tau)
            fd = (
                coupling.h_eval(tau + step, params)
                - coupling.h_eval(tau - step, params)
            ) / (2.0 * step)
            an = coupling.h_prime(tau, params)
            # difference normalized by max(1, |h'|): h' decays to 0 at both
            # ends where a pure ratio would amplify cancellation noise
            _require(
                abs(fd - an) / max(1.0, abs(an)) < 1e-6,
                f"h' mismatch at tau={tau}: fd={fd}, analytic={an} ({params})",
            )


@_check("coupling.classification-consistency")
def _chk_classification(rng, golden_path):
    for case in GroundStateCase:
        for _ in range(15):
            params = sample_case(case, rng)
            cls = coupling.classify(params)
            _require(
                (cls.tau_min > 0.0) == case.interior_minimum,
                f"interior-minimum flag wrong for {params}: {cls}",
            )
            if cls.tau_min > 0.0:
                g_res = abs(coupling.g_eval(cls.tau_min, params))
                _require(
                    g_res < 1e-9 * coupling.g_term_scale(cls.tau_min, params),
                    f"g(tau_min)={g_res} too large for {params}",
                )
                _require(
                    cls.h_at_tau_min < 1.0,
                    f"h(tau_min)={cls.h_at_tau_min} not below 1 for {params}",
                )
                r1, r2 = coupling.verify_sync_relations(cls, params)
                _require(
                    max(r1, r2) < 1e-9,
                    f"synchronization residuals ({r1}, {r2}) for {params}",
                )


@_check("coupling.grid-minimum-agrees")
def _chk_grid_minimum(rng, golden_path):
    for _ in range(25):
        params = sample_params(rng)
        cls = coupling.classify(params)
        taus = np.geomspace(1e-6, coupling.default_tau_max(params), 20000)
        h_grid = float(np.min(coupling.h_eval(taus, params)))
        h_min = cls.h_at_tau_min
        _require(
            h_min <= h_grid + 1e-9,
            f"classified minimum {h_min} above grid minimum {h_grid} for {params}",
        )
        if cls.tau_min > 0.0:
            _require(
                h_grid < 1.0 - 1e-12 or h_min > 1.0 - 1e-6,
                f"grid sees no dip but classification does for {params}",
            )


# -- algebraic layer ---------------------------------------------------------


@_check("algebraic.substitution-identity")
def _chk_substitution(rng, golden_path):
    for window, factor in ((EnergyWindow.HIGH, 0.5), (EnergyWindow.LOW, 2.0)):
        for _ in range(20):
            params = sample_window(window, rng)
            if window is EnergyWindow.HIGH:
                gamma = factor * algebraic.gamma_upper_threshold(params)
            else:
                gamma = factor * algebraic.gamma_lower_threshold(params)
            sys = algebraic.GammaSystem(params, gamma)
            for _ in range(20):
                k = rng.uniform(1e-3, 1.0)
                resid = algebraic.F1(k, algebraic.ell_of_k(k, sys), sys)
                _require(
                    abs(resid) < 1e-10,
                    f"F1(k, ell(k))={resid} at k={k} for {params}, gamma={gamma}",
                )


@_check("algebraic.solver-residuals")
def _chk_solver(rng, golden_path):
    for window, factor, fn in (
        (EnergyWindow.HIGH, 0.5, algebraic.gamma_upper_threshold),
        (EnergyWindow.LOW, 2.0, algebraic.gamma_lower_threshold),
    ):
        for _ in range(8):
            params = sample_window(window, rng)
            gamma = factor * fn(params)
            sys = algebraic.GammaSystem(params, gamma)
            sols = algebraic.solve_all(sys, scan_n=20000)
            _require(bool(sols), f"no roots found for {params}, gamma={gamma}")
            for sol in sols:
                _require(
                    max(abs(sol.residual_f1), abs(sol.residual_f2)) < 1e-9,
                    f"stale residuals {sol} for {params}",
                )
                _require(
                    0.0 < sol.k <= 1.0 + 1e-12 and 0.0 < sol.l <= 1.0 + 1e-12,
                    f"root outside unit square: {sol}",
                )
            if window is EnergyWindow.LOW:
                least = min(sols, key=lambda t: t.k + t.l)
                _require(
                    least.k + least.l < 1.0,
                    f"k0+l0={least.k + least.l} not below 1 for {params}",
                )


@_check("algebraic.jacobian-vs-differences")
def _chk_jacobian(rng, golden_path):
    for _ in range(20):
        params = sample_window(EnergyWindow.HIGH, rng)
        gamma = 0.5 * algebraic.gamma_upper_threshold(params)
        sys = algebraic.GammaSystem(params, gamma)
        k, l = rng.uniform(0.2, 0.95), rng.uniform(0.2, 0.95)
        jac = algebraic.jacobian(k, l, sys)
        step = 1e-7
        fd = np.empty((2, 2))
        fd[0, 0] = (algebraic.F1(k + step, l, sys) - algebraic.F1(k - step, l, sys)) / (2 * step)
        fd[0, 1] = (algebraic.F1(k, l + step, sys) - algebraic.F1(k, l - step, sys)) / (2 * step)
        fd[1, 0] = (algebraic.F2(k + step, l, sys) - algebraic.F2(k - step, l, sys)) / (2 * step)
        fd[1, 1] = (algebraic.F2(k, l + step, sys) - algebraic.F2(k, l - step, sys)) / (2 * step)
        scale = np.maximum(np.abs(jac), 1.0)
        _require(
            float(np.max(np.abs(jac - fd) / scale)) < 1e-5,
            f"jacobian mismatch at ({k}, {l}) for {params}: {jac} vs {fd}",
        )


@_check("algebraic.decoupling-limit")
def _chk_decoupling(rng, golden_path):
    for _ in range(5):
        params = sample_window(EnergyWindow.LOW, rng)
        grid = tuple(np.geomspace(1e-6, 1e-3, 8))
        branch = algebraic.continue_branch(params, grid)
        g0, k0, l0 = branch.points[0]
        _require(
            abs(k0 + l0 - 2.0) < 1e-4,
            f"k+l={k0 + l0} at gamma={g0} not near 2 for {params}",
        )


# -- lattice layer -----------------------------------------------------------


@_check("gagliardo.euler-identity")
def _chk_euler(rng, golden_path):
    for _ in range(6):
        params = sample_lattice_params(rng)
        grid = gagliardo.Grid1D(5.0, 48)
        vals = np.array([rng.gauss(0.0, 1.0) for _ in range(48)])
        u = gagliardo.DiscreteFunction(grid, vals)
        lhs = float(
            (gagliardo.frac_p_laplacian_apply(u, params).values * u.values).sum()
        ) * grid.delta
        rhs = gagliardo.seminorm_p(u, params)
        _require(
            abs(lhs - rhs) <= 1e-11 * max(1.0, abs(rhs)),
            f"euler identity off: {lhs} vs {rhs} for {params}",
        )


@_check("gagliardo.gradient-vs-differences")
def _chk_lattice_gradient(rng, golden_path):
    params = sample_lattice_params(rng)
    grid = gagliardo.Grid1D(4.0, 32)
    vals = np.array([rng.gauss(0.0, 1.0) for _ in range(32)])
    u = gagliardo.DiscreteFunction(grid, vals)
    applied = gagliardo.frac_p_laplacian_apply(u, params).values
    p = params.p
    step = 1e-6
    for i in rng.sample(range(32), 8):
        bumped = vals.copy()
        bumped[i] += step
        dipped = vals.copy()
        dipped[i] -= step
        fd = (
            gagliardo.seminorm_p(gagliardo.DiscreteFunction(grid, bumped), params)
            - gagliardo.seminorm_p(gagliardo.DiscreteFunction(grid, dipped), params)
        ) / (2.0 * step)
        an = p * grid.delta * applied[i]
        scale = max(abs(an), abs(fd), 1e-8)
        _require(
            abs(fd - an) / scale < 1e-4,
            f"gradient mismatch at cell {i}: fd={fd}, analytic={an} for {params}",
        )


@_check("gagliardo.rearrangement-preserves-norms")
def _chk_rearrangement(rng, golden_path):
    grid = gagliardo.Grid1D(6.0, 40, np.arange(40) % 5 != 0)
    vals = np.array([rng.gauss(0.0, 2.0) for _ in range(40)])
    u = gagliardo.DiscreteFunction(grid, vals)
    ru = gagliardo.decreasing_rearrangement(u)
    for q in (1.5, 2.0, 3.7):
        a, b = gagliardo.lattice_norm(u, q), gagliardo.lattice_norm(ru, q)
        _require(abs(a - b) <= 1e-12 * max(a, 1.0), f"L^{q} norm changed: {a} vs {b}")
    _require(
        bool(np.all(ru.values[~grid.free] == 0.0)), "pinned cells must stay zero"
    )


@_check("gagliardo.proportional-pair-identity")
def _chk_proportional_pair(rng, golden_path):
    for _ in range(5):
        params = sample_lattice_params(rng)
        grid = gagliardo.Grid1D(5.0, 48)
        w = gagliardo.gaussian_bump(grid, width=rng.uniform(0.5, 1.5))
        tau = 10.0 ** rng.uniform(-1.5, 1.5)
        pair = gagliardo.vector_quotient(w, w.scaled(tau), 1.0, params)
        expected = coupling.h_eval(tau, params) * gagliardo.scalar_quotient(w, params)
        _require(
            abs(pair - expected) <= 1e-10 * max(1.0, abs(expected)),
            f"pair quotient {pair} vs h(tau)*scalar {expected} for {params}",
        )


# -- golden regression -------------------------------------------------------


@_check("golden.reference-values")
def _chk_golden(rng, golden_path):
    data = load_golden(golden_path)
    for entry in data["classifications"]:
        N, s, p, alpha = entry["params"]
        params = ParamSet.from_alpha(int(N), s, p, alpha)
        _require(
            regime_classify(params).ground_state_case.value == entry["case"],
            f"case changed for {entry['params']}",
        )
        cls = coupling.classify(params)
        for key, got in (
            ("tau_min", cls.tau_min),
            ("h_min", cls.h_at_tau_min),
            ("lam", cls.lam),
            ("mu", cls.mu),
        ):
            want = entry[key]
            _require(
                abs(got - want) <= 1e-9 * max(1.0, abs(want)),
                f"{key} drifted for {entry['params']}: {got} vs {want}",
            )
    for entry in data["thresholds"]:
        N, s, p, alpha = entry["params"]
        params = ParamSet.from_alpha(int(N), s, p, alpha)
        if entry["window"] == "high":
            got = algebraic.gamma_upper_threshold(params)
        else:
            got = algebraic.gamma_lower_threshold(params)
        want = entry["value"]
        _require(
            abs(got - want) <= 1e-9 * max(1.0, abs(want)),
            f"threshold drifted for {entry['params']}: {got} vs {want}",
        )
