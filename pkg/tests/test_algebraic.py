"""The gamma-coupled algebraic system: thresholds, roots, jacobian,
continuation, and the sum-ratio profile functions."""

from __future__ import annotations

import math

import numpy as np
import pytest

import oracles
from critcouple.algebraic import (
    F1,
    F2,
    GammaSystem,
    continue_branch,
    ell_of_k,
    ell_prime,
    gamma_lower_threshold,
    gamma_upper_threshold,
    jacobian,
    k_of_ell,
    least_energy,
    profile_critical_points,
    solve_all,
    sum_ratio_profiles,
)
from critcouple.errors import ConvergenceError, RegimeError, SolveError
from critcouple.exponents import EnergyWindow, ParamSet, validate_params
from critcouple.sampling import sample_window

HIGH_EXAMPLE = validate_params((1, 0.5, 1.5, 3.0, 3.0))
LOW_EXAMPLE = ParamSet.from_alpha(4, 0.5, 2.0, 1.2)


def test_upper_threshold_reference_value():
    assert gamma_upper_threshold(HIGH_EXAMPLE) == pytest.approx(6.0, rel=1e-13)


def test_thresholds_swap_symmetric(rng):
    for _ in range(10):
        high = sample_window(EnergyWindow.HIGH, rng)
        assert gamma_upper_threshold(high) == pytest.approx(
            gamma_upper_threshold(high.swapped()), rel=1e-12
        )
        low = sample_window(EnergyWindow.LOW, rng)
        assert gamma_lower_threshold(low) == pytest.approx(
            gamma_lower_threshold(low.swapped()), rel=1e-12
        )


def test_equal_exponent_threshold_closed_form(rng):
    for _ in range(5):
        high = sample_window(EnergyWindow.HIGH, rng)
        # rebuild with alpha = beta = p_star/2 (stays in the window)
        sym = ParamSet.from_alpha(high.N, high.s, high.p, high.p_star / 2.0)
        if sym.alpha <= sym.p:
            continue
        ps, p = sym.p_star, sym.p
        assert gamma_upper_threshold(sym) == pytest.approx(
            ps * (ps - p) / (p * sym.alpha), rel=1e-13
        )


def test_threshold_regime_gates():
    with pytest.raises(RegimeError):
        gamma_upper_threshold(LOW_EXAMPLE)
    with pytest.raises(RegimeError):
        gamma_lower_threshold(HIGH_EXAMPLE)


def test_f1_f2_basic_identities(rng):
    sys = GammaSystem(LOW_EXAMPLE, 0.8)
    assert F1(1.0, 0.0, sys) == 0.0
    swapped = GammaSystem(LOW_EXAMPLE.swapped(), 0.8)
    for _ in range(25):
        k, l = rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0)
        assert F1(k, l, sys) == F2(l, k, swapped)
    tiny = GammaSystem(LOW_EXAMPLE, 1e-14)
    assert abs(F1(1.0, 1.0, tiny)) < 1e-13
    assert abs(F2(1.0, 1.0, tiny)) < 1e-13


def test_f1_f2_domain_errors():
    sys = GammaSystem(LOW_EXAMPLE, 0.8)
    with pytest.raises(ValueError):
        F1(0.0, 0.5, sys)
    with pytest.raises(ValueError):
        F2(0.5, 0.0, sys)
    with pytest.raises(ValueError):
        ell_of_k(1.5, sys)
    with pytest.raises(ValueError):
        GammaSystem(LOW_EXAMPLE, 0.0)


def test_substitution_identities(rng):
    for window in (EnergyWindow.HIGH, EnergyWindow.LOW):
        for _ in range(5):
            params = sample_window(window, rng)
            gamma = rng.uniform(0.2, 3.0)
            sys = GammaSystem(params, gamma)
            grid = np.linspace(1e-4, 1.0, 200)
            assert np.max(np.abs(F1(grid, ell_of_k(grid, sys), sys))) < 1e-10
            assert np.max(np.abs(F2(k_of_ell(grid, sys), grid, sys))) < 1e-10
            assert ell_of_k(1.0, sys) == 0.0


def test_parametrizations_coincide_for_symmetric_exponents():
    params = ParamSet.from_alpha(1, 0.5, 1.5, 3.0)
    sys = GammaSystem(params, 2.0)
    grid = np.linspace(0.01, 1.0, 50)
    np.testing.assert_allclose(ell_of_k(grid, sys), k_of_ell(grid, sys), rtol=1e-12)


def test_ell_prime_matches_finite_differences(rng):
    for _ in range(8):
        params = sample_window(EnergyWindow.LOW, rng)
        sys = GammaSystem(params, rng.uniform(0.3, 2.0))
        ks = np.linspace(0.05, 0.95, 40)
        h = 1e-6
        fd = (ell_of_k(ks + h, sys) - ell_of_k(ks - h, sys)) / (2.0 * h)
        an = ell_prime(ks, sys)
        assert np.max(np.abs(an - fd) / np.maximum(1.0, np.abs(an))) < 1e-5


def test_jacobian_at_decoupled_point():
    sys = GammaSystem(LOW_EXAMPLE, 1e-300)
    target = (LOW_EXAMPLE.p_star - LOW_EXAMPLE.p) / LOW_EXAMPLE.p
    jac = jacobian(1.0, 1.0, sys)
    assert abs(jac[0, 0] - target) <= 1e-10
    assert abs(jac[1, 1] - target) <= 1e-10
    assert abs(jac[0, 1]) <= 1e-10
    assert abs(jac[1, 0]) <= 1e-10


def test_jacobian_matches_finite_differences(rng):
    for _ in range(10):
        params = sample_window(EnergyWindow.LOW, rng)
        sys = GammaSystem(params, rng.uniform(0.3, 2.0))
        k, l = rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0)
        jac = jacobian(k, l, sys)
        h = 1e-6
        fd = np.array(
            [
                [
                    (F1(k + h, l, sys) - F1(k - h, l, sys)) / (2 * h),
                    (F1(k, l + h, sys) - F1(k, l - h, sys)) / (2 * h),
                ],
                [
                    (F2(k + h, l, sys) - F2(k - h, l, sys)) / (2 * h),
                    (F2(k, l + h, sys) - F2(k, l - h, sys)) / (2 * h),
                ],
            ]
        )
        assert np.max(np.abs(jac - fd) / np.maximum(1.0, np.abs(jac))) < 1e-6


def test_solve_all_residuals_and_flags(rng):
    for window, scale_fn in (
        (EnergyWindow.HIGH, lambda p: 0.5 * gamma_upper_threshold(p)),
        (EnergyWindow.LOW, lambda p: 2.0 * gamma_lower_threshold(p)),
    ):
        for _ in range(6):
            params = sample_window(window, rng)
            sys = GammaSystem(params, scale_fn(params))
            sols = solve_all(sys)
            assert sols
            for sol in sols:
                assert abs(sol.residual_f1) < 1e-10 and abs(sol.residual_f2) < 1e-10
                assert abs(oracles.algebraic_f1(sol.k, sol.l, sys.gamma, params)) < 1e-9
                assert 0.0 < sol.k <= 1.0 + 1e-12 and 0.0 < sol.l <= 1.0 + 1e-12
            k0 = [s for s in sols if s.is_k0]
            l1 = [s for s in sols if s.is_l1]
            assert len(k0) == 1 and len(l1) == 1
            assert k0[0].k == min(s.k for s in sols)
            assert l1[0].l == min(s.l for s in sols)


def test_solve_all_decoupling_limit(rng):
    """The scan-based solver resolves the near-decoupled root down to
    gamma ~ 1e-4; below that continue_branch takes over."""
    for _ in range(5):
        params = sample_window(EnergyWindow.LOW, rng)
        sols = solve_all(GammaSystem(params, 1e-4))
        assert len(sols) == 1
        assert sols[0].k == pytest.approx(1.0, abs=1e-3)
        assert sols[0].l == pytest.approx(1.0, abs=1e-3)


def test_solve_all_symmetric_root(rng):
    for _ in range(5):
        params = sample_window(EnergyWindow.LOW, rng)
        sym = ParamSet.from_alpha(params.N, params.s, params.p, params.p_star / 2.0)
        if not sym.alpha < sym.p:
            continue
        sols = solve_all(GammaSystem(sym, 2.0 * gamma_lower_threshold(sym)))
        assert any(abs(s.k - s.l) < 1e-9 for s in sols)


def test_minimal_root_ordering(rng):
    """Below the minimal-k root, the curve parametrized by F1 = 0 stays on the
    F2 < 0 side."""
    for _ in range(6):
        params = sample_window(EnergyWindow.LOW, rng)
        sys = GammaSystem(params, 2.0 * gamma_lower_threshold(params))
        k0 = [s for s in solve_all(sys) if s.is_k0][0]
        ks = np.linspace(1e-6, k0.k * (1.0 - 1e-6), 2000)
        assert np.all(F2(ks, ell_of_k(ks, sys), sys) < 0.0)


def test_low_window_uniqueness_grid(rng):
    """At twice the lower threshold no grid point with k + l <= k0 + l0 other
    than (k0, l0) itself satisfies both constraints (resolution 1e-3)."""
    for _ in range(4):
        params = sample_window(EnergyWindow.LOW, rng)
        sys = GammaSystem(params, 2.0 * gamma_lower_threshold(params))
        k0 = [s for s in solve_all(sys) if s.is_k0][0]
        s0 = k0.k + k0.l
        axis = np.arange(1e-3, s0 + 1e-3, 1e-3)
        kk, ll = np.meshgrid(axis, axis)
        away = (np.abs(kk - k0.k) > 2e-3) | (np.abs(ll - k0.l) > 2e-3)
        sel = (kk + ll <= s0) & away
        feas = (oracles.algebraic_f1(kk[sel], ll[sel], sys.gamma, params) >= -1e-9) & (
            oracles.algebraic_f2(kk[sel], ll[sel], sys.gamma, params) >= -1e-9
        )
        assert not feas.any()


def test_slope_bound_in_low_window(rng):
    for _ in range(8):
        params = sample_window(EnergyWindow.LOW, rng)
        sys = GammaSystem(params, 2.0 * gamma_lower_threshold(params))
        ks = np.linspace(1e-6, 1.0, 20001)
        assert float(np.min(ell_prime(ks, sys))) >= -1.0 - 1e-9


def test_least_energy_formula():
    params = HIGH_EXAMPLE
    assert least_energy(1.0, 1.0, 1.0, params) == pytest.approx(
        2.0 * params.s / params.N, rel=1e-15
    )
    base = least_energy(0.4, 0.7, 2.0, params)
    doubled = least_energy(0.4, 0.7, 4.0, params)
    assert doubled / base == pytest.approx(
        2.0 ** (params.N / (params.s * params.p)), rel=1e-12
    )


def test_solve_error_carries_diagnostics():
    err = SolveError("no sign change", diagnostics={"scan_n": 1000})
    assert err.diagnostics["scan_n"] == 1000


def test_continuation_decoupling_and_residuals(rng):
    for _ in range(3):
        params = sample_window(EnergyWindow.LOW, rng)
        grid = np.geomspace(1e-6, 0.05, 12)
        branch = continue_branch(params, grid)
        assert len(branch.points) == len(grid)
        g0, k0, l0 = branch.points[0]
        assert abs(k0 + l0 - 2.0) < 1e-4
        for g, k, l in branch.points:
            assert abs(oracles.algebraic_f1(k, l, g, params)) < 1e-9
            assert abs(oracles.algebraic_f2(k, l, g, params)) < 1e-9


def test_continuation_symmetric_branch():
    params = ParamSet.from_alpha(4, 0.5, 2.0, LOW_EXAMPLE.p_star / 2.0)
    branch = continue_branch(params, np.geomspace(1e-6, 0.2, 10))
    for _, k, l in branch.points:
        assert abs(k - l) < 1e-9


def test_continuation_matches_solver_at_small_gamma(heavy_tail_params, rng):
    params = sample_window(EnergyWindow.LOW, rng)
    branch = continue_branch(params, [1e-4])
    _, k, l = branch.points[0]
    sols = solve_all(GammaSystem(params, 1e-4))
    best = min(sols, key=lambda s: (s.k - k) ** 2 + (s.l - l) ** 2)
    assert best.k == pytest.approx(k, abs=1e-8)
    assert best.l == pytest.approx(l, abs=1e-8)


def test_continuation_validation():
    with pytest.raises(RegimeError):
        continue_branch(HIGH_EXAMPLE, [1e-6])
    with pytest.raises(ValueError):
        continue_branch(LOW_EXAMPLE, [])
    with pytest.raises(ValueError):
        continue_branch(LOW_EXAMPLE, [0.2, 0.1])


def test_continuation_stops_at_fold_with_partial_branch():
    """Past the fold where two roots collide the corrector cannot stay on the
    branch; the error must carry the valid prefix."""
    grid = np.geomspace(1e-6, 1.4, 25)
    with pytest.raises(ConvergenceError) as exc:
        continue_branch(LOW_EXAMPLE, grid)
    partial = exc.value.partial
    assert partial is not None and len(partial.points) >= 1
    for g, k, l in partial.points:
        assert abs(oracles.algebraic_f1(k, l, g, LOW_EXAMPLE)) < 1e-9
    assert partial.points[-1][0] < 1.4


def test_profile_critical_points_and_bounds(rng):
    for _ in range(8):
        params = sample_window(EnergyWindow.HIGH, rng)
        gamma = 0.5 * gamma_upper_threshold(params)
        sys = GammaSystem(params, gamma)
        x1, x2 = profile_critical_points(sys)
        assert x2 == pytest.approx(
            (params.alpha - params.p) / (params.beta - params.p), rel=1e-14
        )
        xs = np.logspace(-4, 4, 400)
        prof = [sum_ratio_profiles(float(x), sys) for x in xs]
        g1s = np.array([q.g1 for q in prof])
        g2s = np.array([q.g2 for q in prof])
        f1s = np.array([q.f1 for q in prof])
        f2s = np.array([q.f2 for q in prof])
        at_x1 = sum_ratio_profiles(x1, sys)
        at_x2 = sum_ratio_profiles(x2, sys)
        assert at_x1.g1 <= 1e-12
        assert np.all(g1s <= at_x1.g1 + 1e-9 * max(1.0, abs(at_x1.g1)))
        assert at_x2.g2 >= -1e-12
        assert np.all(g2s >= at_x2.g2 - 1e-9 * max(1.0, abs(at_x2.g2)))
        # the profile bounds make f1 nonincreasing and f2 nondecreasing
        assert np.all(np.diff(f1s) <= 1e-12)
        assert np.all(np.diff(f2s) >= -1e-12)


def test_profiles_symmetric_exponents():
    params = ParamSet.from_alpha(1, 0.5, 1.5, 3.0)
    sys = GammaSystem(params, 3.0)
    _, x2 = profile_critical_points(sys)
    assert x2 == 1.0


def test_profiles_require_high_window():
    with pytest.raises(RegimeError):
        sum_ratio_profiles(1.0, GammaSystem(LOW_EXAMPLE, 0.5))
