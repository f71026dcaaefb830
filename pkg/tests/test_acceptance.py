"""Acceptance gate: one test per package-level contract.

Every test asserts its stated numeric tolerance and its wall-clock budget,
and prints one summary line.  Oracles come from tests/oracles.py and are
independent of the library code paths they judge.
"""

from __future__ import annotations

import time
from collections import Counter
from contextlib import contextmanager

import numpy as np
import pytest

import oracles
from conftest import GROUND_OPTS, SEED
from critcouple.algebraic import (
    GammaSystem,
    continue_branch,
    gamma_lower_threshold,
    gamma_upper_threshold,
    jacobian,
    solve_all,
)
from critcouple.coupling import (
    CouplingCase,
    classify,
    h_eval,
    h_prime,
    verify_sync_relations,
)
from critcouple.exponents import EnergyWindow, ParamSet
from critcouple.gagliardo import (
    DiscreteFunction,
    Grid1D,
    el_residual_system,
    gaussian_bump,
    j_energy,
    minimize_vector,
    nehari_project,
    normalize_to_solution,
    scalar_quotient,
    seminorm_p,
    vector_quotient,
)
from critcouple.sampling import (
    sample_coupling_case,
    sample_lattice_params,
    sample_params,
    sample_window,
)

# tau-ratio case table: derivative root count (None = "at least one") and
# whether the minimum is interior (tau_min > 0, h(tau_min) < 1)
CASE_TABLE = {
    CouplingCase.BETA_BELOW_P: (None, True),
    CouplingCase.BETA_EQ_P_ALPHA_EQ_P: (1, False),
    CouplingCase.BETA_EQ_P_ALPHA_BELOW_P: (2, True),
    CouplingCase.BETA_EQ_P_ALPHA_ABOVE_P: (1, False),
    CouplingCase.BETA_ABOVE_P_ALPHA_ABOVE_P: (1, False),
    CouplingCase.BETA_ABOVE_P_ALPHA_BELOW_P: (2, True),
    CouplingCase.BETA_ABOVE_P_ALPHA_EQ_P: (1, False),
}


@contextmanager
def budget(seconds: float, label: str):
    start = time.perf_counter()
    holder = {"extra": 0.0}
    yield holder
    elapsed = time.perf_counter() - start + holder["extra"]
    print(f"[acceptance] {label}: {elapsed:.2f}s of {seconds:g}s budget")
    assert elapsed < seconds, f"{label} took {elapsed:.2f}s, budget {seconds:g}s"


def _noise_function(grid: Grid1D, np_rng: np.random.Generator) -> DiscreteFunction:
    envelope = np.exp(-0.5 * (grid.x / 5.0) ** 2)
    return DiscreteFunction(grid, np_rng.normal(size=grid.n) * envelope)


def test_classification_sweep_against_scan_oracle(rng):
    """>= 500 tuples across all seven ratio cases: root count, tau_min
    placement, and the sign of h(tau_min) - 1 match the case table, with a
    dense sign-scan of g and a 1e5-point grid minimization of h as oracle."""
    with budget(30.0, "classification sweep"):
        counts: Counter = Counter()
        cases = list(CouplingCase)
        for i in range(504):
            case = cases[i % len(cases)]
            params = sample_coupling_case(case, rng)
            counts[case] += 1
            cls = classify(params)
            expected_roots, interior = CASE_TABLE[case]
            flips, _, h_grid = oracles.scan_crossings(params)
            if expected_roots is None:
                assert len(cls.g_roots) >= 1
            else:
                assert len(cls.g_roots) == expected_roots
            assert len(cls.g_roots) == flips, (params, cls.g_roots, flips)
            grid_min = float(h_grid.min())
            if interior:
                assert cls.tau_min > 0.0
                # sign of h(tau_min) - 1 is negative; the dip can be as
                # shallow as ~1e-11 for near-critical exponents, so no margin
                assert cls.h_at_tau_min < 1.0
            else:
                assert cls.tau_min == 0.0
                assert cls.h_at_tau_min == 1.0
                assert grid_min >= 1.0 - 1e-12
            # the classified minimum must not sit above the grid minimum
            assert cls.h_at_tau_min <= grid_min + 1e-12 * max(1.0, grid_min)
        assert sum(counts.values()) >= 500
        assert all(counts[c] >= 70 for c in cases)


def test_derivative_matches_finite_differences(rng):
    """h' agrees with central differences at 100 points on each of 50 tuples,
    relative to max(1, |h'|)."""
    with budget(5.0, "derivative identity"):
        taus = np.logspace(-3.0, 3.0, 100, endpoint=False) * 1.0000037
        worst = 0.0
        for _ in range(50):
            params = sample_params(rng)
            analytic = h_prime(taus, params)
            fd = oracles.fd_h_prime(taus, params)
            err = np.abs(analytic - fd) / np.maximum(1.0, np.abs(analytic))
            worst = max(worst, float(err.max()))
        assert worst < 1e-6, worst


def test_synchronization_residuals_at_interior_minima(rng):
    """Both coefficient relations hold to 1e-9 at (lam, mu) whenever the
    minimum is interior."""
    with budget(1.0, "synchronized relations"):
        checked = 0
        for case, (_, interior) in CASE_TABLE.items():
            if not interior:
                continue
            for _ in range(30):
                params = sample_coupling_case(case, rng)
                cls = classify(params)
                assert cls.tau_min > 0.0
                r1, r2 = verify_sync_relations(cls, params)
                assert abs(r1) < 1e-9 and abs(r2) < 1e-9, (params, r1, r2)
                checked += 1
        assert checked == 90


def test_scale_system_roots_and_minimal_sum(rng):
    """50 high-window configurations at half the upper threshold and 50
    low-window ones at twice the lower threshold: root residuals below 1e-10,
    no feasible (c, d) beats k0 + l0 on a 1e4-point boundary scan, and
    k0 + l0 < 1 in the low window."""
    with budget(60.0, "scale system roots"):
        for window, scale, threshold in (
            (EnergyWindow.HIGH, 0.5, gamma_upper_threshold),
            (EnergyWindow.LOW, 2.0, gamma_lower_threshold),
        ):
            for _ in range(50):
                params = sample_window(window, rng)
                gamma = scale * threshold(params)
                sols = solve_all(GammaSystem(params, gamma))
                assert sols
                for sol in sols:
                    assert abs(sol.residual_f1) < 1e-10
                    assert abs(sol.residual_f2) < 1e-10
                k0 = next(s for s in sols if s.is_k0)
                s0 = k0.k + k0.l
                found = oracles.feasible_boundary_min_sum(gamma, params, n=10_000)
                assert found >= s0 - 1e-9, (params, gamma, found, s0)
                if window is EnergyWindow.LOW:
                    assert s0 < 1.0


def test_decoupled_branch_point_jacobian_and_limit(rng):
    """At (k, l) = (1, 1) with gamma -> 0 the Jacobian is diagonal with
    entries (p* - p)/p; continuation from gamma = 1e-6 returns k + l within
    1e-4 of 2."""
    with budget(5.0, "decoupled branch point"):
        for window in (EnergyWindow.HIGH, EnergyWindow.LOW):
            for _ in range(10):
                params = sample_window(window, rng)
                jac = jacobian(1.0, 1.0, GammaSystem(params, 1e-300))
                target = (params.p_star - params.p) / params.p
                assert abs(jac[0, 0] - target) <= 1e-10
                assert abs(jac[1, 1] - target) <= 1e-10
                assert abs(jac[0, 1]) <= 1e-10
                assert abs(jac[1, 0]) <= 1e-10
        for _ in range(10):
            params = sample_window(EnergyWindow.LOW, rng)
            _, k, l = continue_branch(params, [1e-6]).points[0]
            assert abs(k + l - 2.0) < 1e-4, (params, k, l)


def test_coupled_minimum_tracks_scalar_minimum(
    moderate_params, heavy_tail_params, scalar_ground_state
):
    """Headline identity on the two reference tuples at n = 128: the coupled
    quotient minimum equals h(tau_min) times the scalar minimum to 1e-3
    relative, from independent minimizations."""
    with budget(300.0, "discrete ratio identity") as held:
        for params in (moderate_params, heavy_tail_params):
            cls = classify(params)
            scalar, seconds = scalar_ground_state.entry(params, n=128)
            held["extra"] += seconds
            grid = scalar.minimizer.grid
            bump = gaussian_bump(grid)
            pair = minimize_vector(
                bump, bump.scaled(cls.tau_min), 1.0, params, opts=GROUND_OPTS
            )
            gap = abs(pair.value - cls.h_at_tau_min * scalar.value) / scalar.value
            print(
                f"[acceptance]   ({params.N},{params.s},{params.p},{params.alpha}): "
                f"pair={pair.value:.10g} h*scalar={cls.h_at_tau_min * scalar.value:.10g} "
                f"gap={gap:.3e}"
            )
            assert gap < 1e-3, (params, gap)


def test_proportional_pair_identity_hundred_draws():
    """Coupled quotient at (w, tau*w) with gamma = 1 equals h(tau) times the
    scalar quotient at w, to 1e-10 relative, over 100 random draws."""
    with budget(10.0, "proportional-pair identity"):
        import random

        rng = random.Random(SEED)
        np_rng = np.random.default_rng(SEED)
        grid = Grid1D(20.0, 64)
        for _ in range(100):
            params = sample_lattice_params(rng)
            w = _noise_function(grid, np_rng)
            tau = 10.0 ** np_rng.uniform(-2.0, 2.0)
            pair = vector_quotient(w, w.scaled(tau), 1.0, params)
            expected = h_eval(tau, params) * scalar_quotient(w, params)
            assert abs(pair - expected) <= 1e-10 * max(1.0, abs(expected))


def test_synchronized_pair_solves_coupled_system(
    moderate_params, heavy_tail_params, scalar_ground_state
):
    """Pipeline scalar-minimize -> multiplier-normalize -> coefficient pair
    (lam*U, mu*U): the coupled Euler-Lagrange residual stays below 1e-5 at
    n = 128."""
    with budget(120.0, "synchronized discrete solution") as held:
        for params in (moderate_params, heavy_tail_params):
            scalar, seconds = scalar_ground_state.entry(params, n=128)
            held["extra"] += seconds
            u = normalize_to_solution(scalar.minimizer, params)
            cls = classify(params)
            res = el_residual_system(
                u.scaled(cls.lam), u.scaled(cls.mu), 1.0, params
            )
            print(f"[acceptance]   pair residual n=128: {res:.3e}")
            assert res < 1e-5, (params, res)


def test_projected_pairs_satisfy_energy_identity():
    """For 100 random pairs pushed onto the constraint set, the energy equals
    (s/N) times the seminorm sum to 1e-10 * (1 + |J|)."""
    with budget(5.0, "energy identity on the constraint set"):
        import random

        rng = random.Random(SEED + 1)
        np_rng = np.random.default_rng(SEED + 1)
        grid = Grid1D(20.0, 64)
        for _ in range(100):
            params = sample_lattice_params(rng)
            gamma = np_rng.uniform(0.1, 2.0)
            u = DiscreteFunction(grid, np.abs(_noise_function(grid, np_rng).values))
            v = DiscreteFunction(grid, np.abs(_noise_function(grid, np_rng).values))
            _, (pu, pv) = nehari_project(u, v, gamma, params)
            J = j_energy(pu, pv, gamma, params)
            norms = seminorm_p(pu, params) + seminorm_p(pv, params)
            assert abs(J - (params.s / params.N) * norms) < 1e-10 * (1.0 + abs(J))
