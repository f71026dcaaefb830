"""Command-line interface.

Subcommands
    analyze      classify a parameter tuple and locate the coupling minimum
    solve-gamma  solve the coupled scale system for one gamma
    continue     trace the root branch over a gamma grid from the decoupled end
    minimize     run the lattice quotient minimization (scalar or coupled)
    verify       run the named self-check suite

Exit status: 0 on success, 1 when a solver or verification fails to
converge or a check fails, 2 on usage or configuration errors.  All CSV
output carries 17 significant digits and is byte-reproducible for a fixed
config and seed.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, algebraic, checks, coupling, gagliardo
from .config import RunConfig, parse_gamma_grid
from .errors import (
    ConfigError,
    ConvergenceError,
    CritcoupleError,
    ParameterError,
    RegimeError,
    SolveError,
)
from .exponents import EnergyWindow, ParamSet, regime_classify

USAGE_ERROR = 2
FAILURE = 1


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, float) else str(v) for v in row])


def _ensure_out(cfg: RunConfig) -> Path | None:
    if cfg.out is None:
        return None
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _profile_taus(params: ParamSet, n: int) -> np.ndarray:
    return np.geomspace(1e-4, coupling.default_tau_max(params), n)


def _plot_profile(path: Path, params: ParamSet, cls) -> None:
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "critcouple"
    import matplotlib.pyplot as plt

    taus = _profile_taus(params, 2000)
    fig, (ax_h, ax_g) = plt.subplots(2, 1, figsize=(6.0, 6.5), sharex=True)
    ax_h.semilogx(taus, coupling.h_eval(taus, params), lw=1.2)
    ax_h.axhline(1.0, color="0.6", lw=0.8, ls="--")
    for root in cls.g_roots:
        ax_h.axvline(root, color="tab:red", lw=0.6, ls=":")
    if cls.tau_min > 0.0:
        ax_h.plot([cls.tau_min], [cls.h_at_tau_min], "o", color="tab:red", ms=5)
    ax_h.set_ylabel("coupling ratio h(tau)")
    ax_h.set_title(
        f"N={params.N}, s={params.s:g}, p={params.p:g}, "
        f"alpha={params.alpha:g}, beta={params.beta:g}"
    )
    g_vals = coupling.g_eval(taus, params)
    ax_g.semilogx(taus, np.clip(g_vals, -50.0, 50.0), lw=1.2, color="tab:green")
    ax_g.axhline(0.0, color="0.6", lw=0.8, ls="--")
    for root in cls.g_roots:
        ax_g.axvline(root, color="tab:red", lw=0.6, ls=":")
    ax_g.set_xlabel("tau")
    ax_g.set_ylabel("g(tau), clipped")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _plot_branch(path: Path, points) -> None:
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "critcouple"
    import matplotlib.pyplot as plt

    gs = [pt[0] for pt in points]
    sums = [pt[1] + pt[2] for pt in points]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.semilogx(gs, sums, lw=1.2)
    ax.axhline(1.0, color="0.6", lw=0.8, ls="--")
    ax.set_xlabel("gamma")
    ax.set_ylabel("k + l")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _plot_minimizer(path: Path, grid, funcs: dict) -> None:
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "critcouple"
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, f in funcs.items():
        ax.plot(grid.x, f.values, lw=1.2, label=label)
    ax.set_xlabel("x")
    ax.set_ylabel("value")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _parse_params_flag(text: str) -> dict:
    parts = [tok.strip() for tok in text.split(",")]
    if len(parts) not in (4, 5):
        raise ConfigError(
            f"--params needs N,s,p,alpha[,beta], got {len(parts)} values: {text!r}"
        )
    try:
        vals = [float(tok) for tok in parts]
    except ValueError as exc:
        raise ConfigError(f"bad --params value: {exc}") from exc
    if not vals[0].is_integer():
        raise ConfigError(f"N must be an integer, got {vals[0]!r}")
    out = {"N": int(vals[0]), "s": vals[1], "p": vals[2], "alpha": vals[3]}
    if len(vals) == 5:
        out["beta"] = vals[4]
    return out


def _config_from_args(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        cfg = RunConfig.from_file(args.config)
    overrides = {}
    if getattr(args, "params", None):
        overrides.update(_parse_params_flag(args.params))
    for key in (
        "gamma",
        "gamma_grid",
        "grid_n",
        "half_width",
        "mask_radius",
        "eps_shift",
        "tol",
        "max_iter",
        "scan_n",
        "seed",
        "out",
        "filter",
        "golden",
        "s_const",
    ):
        val = getattr(args, key, None)
        if val is not None:
            overrides[key] = val
    return cfg.override(**overrides)


def _paramset(cfg: RunConfig) -> ParamSet:
    cfg.require("N", "s", "p")
    if cfg.alpha is None and cfg.beta is None:
        raise ConfigError("missing required settings: alpha (or beta)")
    if cfg.alpha is not None:
        params = ParamSet.from_alpha(cfg.N, cfg.s, cfg.p, cfg.alpha)
        if cfg.beta is not None and abs(cfg.beta - params.beta) > 1e-9:
            raise ConfigError(
                f"beta={cfg.beta} inconsistent with alpha; expected {params.beta}"
            )
        return params
    return ParamSet.from_beta(cfg.N, cfg.s, cfg.p, cfg.beta)


def _print_kv(pairs) -> None:
    width = max(len(k) for k, _ in pairs)
    for key, value in pairs:
        print(f"  {key:<{width}}  {value}")


# -- subcommands -------------------------------------------------------------


def _cmd_analyze(args) -> int:
    cfg = _config_from_args(args)
    params = _paramset(cfg)
    regime = regime_classify(params)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        cls = coupling.classify(params)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)

    pairs = [
        ("N, s, p", f"{params.N}, {_fmt(params.s)}, {_fmt(params.p)}"),
        ("alpha, beta", f"{_fmt(params.alpha)}, {_fmt(params.beta)}"),
        ("p_star", _fmt(params.p_star)),
        ("coupling case", coupling.coupling_case(params).value),
        ("ground-state case", regime.ground_state_case.value),
        ("energy window", regime.energy_window.value),
        ("derivative roots", ", ".join(_fmt(r) for r in cls.g_roots) or "none"),
    ]
    if cls.tau_min > 0.0:
        r1, r2 = coupling.verify_sync_relations(cls, params)
        pairs += [
            ("tau_min", _fmt(cls.tau_min)),
            ("h(tau_min)", _fmt(cls.h_at_tau_min)),
            ("lambda", _fmt(cls.lam)),
            ("mu", _fmt(cls.mu)),
            ("sync residuals", f"{r1:.3e}, {r2:.3e}"),
        ]
    else:
        pairs.append(("tau_min", "none (ratio stays at its boundary value 1)"))
    if regime.energy_window is EnergyWindow.HIGH:
        pairs.append(
            ("gamma upper threshold", _fmt(algebraic.gamma_upper_threshold(params)))
        )
    elif regime.energy_window is EnergyWindow.LOW:
        pairs.append(
            ("gamma lower threshold", _fmt(algebraic.gamma_lower_threshold(params)))
        )
    print("analysis")
    _print_kv(pairs)

    out = _ensure_out(cfg)
    if out is not None:
        _write_csv(
            out / "analysis.csv",
            ["key", "value"],
            [(k, v) for k, v in pairs],
        )
        _write_csv(
            out / "roots.csv",
            ["tau", "g_value", "h_value"],
            [
                (r, coupling.g_eval(r, params), coupling.h_eval(r, params))
                for r in cls.g_roots
            ],
        )
        taus = _profile_taus(params, 400)
        _write_csv(
            out / "profile.csv",
            ["tau", "h_value", "g_value"],
            zip(
                (float(t) for t in taus),
                (float(v) for v in coupling.h_eval(taus, params)),
                (float(v) for v in coupling.g_eval(taus, params)),
            ),
        )
        _plot_profile(out / "profile.svg", params, cls)
        print(
            f"wrote {out / 'analysis.csv'}, {out / 'roots.csv'}, "
            f"{out / 'profile.csv'}, {out / 'profile.svg'}"
        )
    return 0


def _cmd_solve_gamma(args) -> int:
    cfg = _config_from_args(args)
    params = _paramset(cfg)
    cfg.require("gamma")
    regime = regime_classify(params)
    window = regime.energy_window
    if window is EnergyWindow.HIGH:
        bound = algebraic.gamma_upper_threshold(params)
        print(f"upper gamma threshold = {_fmt(bound)}")
        if cfg.gamma > bound:
            print(
                f"warning: gamma={cfg.gamma:g} exceeds the upper threshold "
                f"{bound:.6g}; existence is not covered there",
                file=sys.stderr,
            )
    elif window is EnergyWindow.LOW:
        bound = algebraic.gamma_lower_threshold(params)
        print(f"lower gamma threshold = {_fmt(bound)}")
        if cfg.gamma < bound:
            print(
                f"warning: gamma={cfg.gamma:g} is below the lower threshold "
                f"{bound:.6g}; existence is not covered there",
                file=sys.stderr,
            )
    else:
        print(
            "warning: parameters sit outside both energy windows; "
            "solving the scale system anyway",
            file=sys.stderr,
        )

    sys_ = algebraic.GammaSystem(params, cfg.gamma)
    sols = algebraic.solve_all(sys_, scan_n=cfg.scan_n)
    print(f"{len(sols)} root(s) of the scale system at gamma={_fmt(cfg.gamma)}")
    for i, sol in enumerate(sols):
        tags = []
        if sol.is_k0:
            tags.append("k0")
        if sol.is_l1:
            tags.append("l1")
        tag = f"  [{', '.join(tags)}]" if tags else ""
        print(
            f"  root {i}: k={_fmt(sol.k)}  l={_fmt(sol.l)}  "
            f"k+l={_fmt(sol.k + sol.l)}  res=({sol.residual_f1:.2e}, "
            f"{sol.residual_f2:.2e}){tag}"
        )
    least = min(sols, key=lambda t: t.k + t.l)
    coeff = (params.s / params.N) * (least.k + least.l)
    print(f"least k+l = {_fmt(least.k + least.l)}")
    s_const, s_origin = cfg.s_const, "supplied"
    if s_const is None and params.N == 1 and params.s * params.p < 1.0:
        grid = gagliardo.Grid1D(cfg.half_width, cfg.grid_n)
        est = gagliardo.minimize_scalar(
            gagliardo.gaussian_bump(grid),
            params,
            gagliardo.MinimizeOptions(tol=cfg.tol, max_iter=cfg.max_iter, symmetrize=True),
        )
        s_const, s_origin = est.value, f"lattice estimate, n={cfg.grid_n}"
    if s_const is not None:
        print(
            f"least energy = "
            f"{_fmt(algebraic.least_energy(least.k, least.l, s_const, params))}"
            f"  (S = {_fmt(s_const)}, {s_origin})"
        )
    else:
        print(
            f"least energy = {_fmt(coeff)} * S^{{{_fmt(params.N / (params.s * params.p))}}}"
            " (pass --s-const to evaluate)"
        )

    out = _ensure_out(cfg)
    if out is not None:
        _write_csv(
            out / "roots.csv",
            ["k", "l", "k_plus_l", "residual_f1", "residual_f2", "is_k0", "is_l1"],
            [
                (s.k, s.l, s.k + s.l, s.residual_f1, s.residual_f2, int(s.is_k0), int(s.is_l1))
                for s in sols
            ],
        )
        print(f"wrote {out / 'roots.csv'}")
    return 0


def _cmd_continue(args) -> int:
    cfg = _config_from_args(args)
    params = _paramset(cfg)
    if cfg.gamma_grid is None:
        raise ConfigError("missing required settings: gamma_grid")
    grid = parse_gamma_grid(cfg.gamma_grid)
    out = _ensure_out(cfg)

    def emit(points, gamma_one, status):
        print(f"continuation over {len(points)} point(s): {status}")
        if gamma_one is not None:
            print(f"largest gamma with k+l > 1: {_fmt(gamma_one)}")
        else:
            print("k+l stayed above 1 on the whole grid")
        if out is not None:
            _write_csv(
                out / "branch.csv",
                ["gamma", "k", "l", "k_plus_l"],
                [(g, k, l, k + l) for g, k, l in points],
            )
            _plot_branch(out / "branch.svg", points)
            print(f"wrote {out / 'branch.csv'}, {out / 'branch.svg'}")

    try:
        branch = algebraic.continue_branch(params, grid)
    except ConvergenceError as exc:
        partial = exc.partial
        if partial is not None and partial.points:
            emit(partial.points, partial.gamma_one, f"stalled ({exc})")
        else:
            print(f"continuation failed before the first point: {exc}", file=sys.stderr)
        return FAILURE
    emit(branch.points, branch.gamma_one, "completed")
    return 0


def _cmd_minimize(args) -> int:
    cfg = _config_from_args(args)
    params = _paramset(cfg)
    if params.N != 1:
        raise ConfigError("minimize runs on the N=1 lattice; pass N=1")
    if cfg.mask_radius is not None:
        grid = gagliardo.Grid1D.ball(cfg.half_width, cfg.grid_n, cfg.mask_radius)
    else:
        grid = gagliardo.Grid1D(cfg.half_width, cfg.grid_n)
    opts = gagliardo.MinimizeOptions(
        tol=cfg.tol, max_iter=cfg.max_iter, symmetrize=args.symmetrize
    )
    bump = gagliardo.gaussian_bump(grid)
    out = _ensure_out(cfg)

    if cfg.gamma is None:
        result = gagliardo.minimize_scalar(bump, params, opts)
        print("scalar quotient minimization")
        _print_kv(
            [
                ("value", _fmt(result.value)),
                ("iterations", str(result.iterations)),
                ("grad norm", f"{result.grad_norm:.3e}"),
                ("el residual", f"{result.el_residual:.3e}"),
                ("converged", str(result.converged)),
                ("stop reason", result.message),
            ]
        )
        if out is not None:
            result.minimizer.to_csv(out / "minimizer_u.csv")
            _write_csv(
                out / "history.csv",
                ["iteration", "value"],
                list(enumerate(result.history)),
            )
            _plot_minimizer(out / "minimizer.svg", grid, {"u": result.minimizer})
            print(
                f"wrote {out / 'minimizer_u.csv'}, {out / 'history.csv'}, "
                f"{out / 'minimizer.svg'}"
            )
    else:
        cls = coupling.classify(params)
        tau0 = float(cls.tau_min) if cls.tau_min > 0.0 else 1.0
        result = gagliardo.minimize_vector(
            bump, bump.scaled(tau0), cfg.gamma, params, eps_shift=cfg.eps_shift, opts=opts
        )
        u_fun, v_fun = result.minimizer
        print(f"coupled quotient minimization at gamma={_fmt(cfg.gamma)}")
        _print_kv(
            [
                ("value", _fmt(result.value)),
                ("iterations", str(result.iterations)),
                ("grad norm", f"{result.grad_norm:.3e}"),
                ("el residual", f"{result.el_residual:.3e}"),
                ("converged", str(result.converged)),
                ("stop reason", result.message),
            ]
        )
        if cfg.gamma == 1.0 and cfg.eps_shift == 0.0:
            scalar = gagliardo.minimize_scalar(bump, params, opts)
            gap = abs(result.value - cls.h_at_tau_min * scalar.value) / scalar.value
            _print_kv(
                [
                    ("scalar value", _fmt(scalar.value)),
                    ("h(tau_min) * scalar", _fmt(cls.h_at_tau_min * scalar.value)),
                    ("ratio-identity gap", f"{gap:.3e}"),
                ]
            )
            result = replace(result, converged=result.converged and scalar.converged)
        if out is not None:
            u_fun.to_csv(out / "minimizer_u.csv")
            v_fun.to_csv(out / "minimizer_v.csv")
            _write_csv(
                out / "history.csv",
                ["iteration", "value"],
                list(enumerate(result.history)),
            )
            _plot_minimizer(out / "minimizer.svg", grid, {"u": u_fun, "v": v_fun})
            print(
                f"wrote {out / 'minimizer_u.csv'}, {out / 'minimizer_v.csv'}, "
                f"{out / 'history.csv'}, {out / 'minimizer.svg'}"
            )
    return 0 if result.converged else FAILURE


def _cmd_verify(args) -> int:
    cfg = _config_from_args(args)
    results = checks.run_checks(
        name_filter=cfg.filter, seed=cfg.seed, golden_path=cfg.golden
    )
    if not results:
        raise ConfigError(f"no checks match filter {cfg.filter!r}")
    failed = 0
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        line = f"{status}  {res.name}  ({res.seconds:.2f}s)"
        if not res.passed:
            line += f"\n      {res.detail}"
            failed += 1
        print(line)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    out = _ensure_out(cfg)
    if out is not None:
        _write_csv(
            out / "verify.csv",
            ["name", "passed", "seconds", "detail"],
            [(r.name, int(r.passed), r.seconds, r.detail) for r in results],
        )
        print(f"wrote {out / 'verify.csv'}")
    return FAILURE if failed else 0


def _add_common(sub: argparse.ArgumentParser, *, with_params=True) -> None:
    sub.add_argument("--config", help="key=value config file; flags override it")
    if with_params:
        sub.add_argument(
            "--params",
            help='parameter tuple "N,s,p,alpha" (optionally ",beta")',
        )
    sub.add_argument("--out", help="directory for CSV/SVG artifacts")
    sub.add_argument("--seed", type=int, help="seed for randomized pieces")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="critcouple",
        description="critically coupled quotient toolbox",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p_an = subs.add_parser("analyze", help="classify a tuple and locate the minimum")
    _add_common(p_an)
    p_an.set_defaults(func=_cmd_analyze)

    p_sg = subs.add_parser("solve-gamma", help="solve the scale system at one gamma")
    _add_common(p_sg)
    p_sg.add_argument("--gamma", type=float, help="coupling strength (positive)")
    p_sg.add_argument("--scan-n", type=int, dest="scan_n", help="scan resolution")
    p_sg.add_argument(
        "--s-const",
        type=float,
        dest="s_const",
        help="scalar constant for evaluating the least energy",
    )
    p_sg.set_defaults(func=_cmd_solve_gamma)

    p_ct = subs.add_parser("continue", help="trace the branch over a gamma grid")
    _add_common(p_ct)
    p_ct.add_argument(
        "--gamma-grid",
        dest="gamma_grid",
        help='grid spec: "a,b,c", "lin:a:b:n" or "geom:a:b:n"',
    )
    p_ct.set_defaults(func=_cmd_continue)

    p_mn = subs.add_parser("minimize", help="lattice quotient minimization")
    _add_common(p_mn)
    p_mn.add_argument("--gamma", type=float, help="coupled problem when given")
    p_mn.add_argument("--grid-n", type=int, dest="grid_n", help="lattice cells")
    p_mn.add_argument(
        "--half-width", type=float, dest="half_width", help="box half width"
    )
    p_mn.add_argument(
        "--mask-radius",
        type=float,
        dest="mask_radius",
        help="pin cells outside |x| <= radius",
    )
    p_mn.add_argument(
        "--eps-shift",
        type=float,
        dest="eps_shift",
        help="subcritical shift of the constraint exponents",
    )
    p_mn.add_argument("--tol", type=float, help="relative-decrease stop tolerance")
    p_mn.add_argument("--max-iter", type=int, dest="max_iter", help="iteration cap")
    p_mn.add_argument(
        "--symmetrize",
        action="store_true",
        help="project iterates onto decreasing rearrangements",
    )
    p_mn.set_defaults(func=_cmd_minimize)

    p_vf = subs.add_parser("verify", help="run the self-check suite")
    _add_common(p_vf, with_params=False)
    p_vf.add_argument("--filter", help="substring filter on check names")
    p_vf.add_argument("--golden", help="alternative reference-values JSON")
    p_vf.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    if os.environ.get("CRITCOUPLE_THREADS"):
        try:
            int(os.environ["CRITCOUPLE_THREADS"])
        except ValueError:
            print(
                f"error: CRITCOUPLE_THREADS="
                f"{os.environ['CRITCOUPLE_THREADS']!r} is not an integer",
                file=sys.stderr,
            )
            return USAGE_ERROR
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, ConfigError, RegimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (SolveError, ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILURE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except CritcoupleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILURE


if __name__ == "__main__":
    sys.exit(main())
