"""Command-line shell: config ingestion, dispatch, CSV/SVG emission.

Commands: validate, solve, sweep, commit, commit-sweep, ext, oracle, repro.
Numeric output keeps full precision (17 significant digits) for downstream
diffing; human-readable rounding appears only in terminal summaries.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from typing import Optional

import numpy as np

from .checks import AcceptanceHarness, hard_failures
from .commitment import solve_commitment
from .config import ConfigError, RunConfig, build_game, load_config
from .environment import Environment
from .equilibrium import ScreeningGame
from .extensions import binary_effort_equilibrium, linear_reputation, solve_convex_cost_equilibrium
from .noise import NoiseModel, validate_noise
from .oracle import monte_carlo_welfare
from .svgplot import write_chart
from .welfare import sweep as run_sweep
from .welfare import default_rho_grid

_NUM = lambda x: format(x, ".17g")  # noqa: E731


def _parse_rho_grid(spec: str) -> np.ndarray:
    parts = spec.split(":")
    if len(parts) != 4:
        raise ConfigError(f"--rho-grid expects min:max:points:spacing, got {spec!r}")
    lo, hi = float(parts[0]), float(parts[1])
    points = int(parts[2])
    spacing = parts[3]
    if not (0 < lo < hi and points >= 2):
        raise ConfigError(f"bad --rho-grid bounds {spec!r}")
    if spacing == "log":
        return np.geomspace(lo, hi, points)
    if spacing == "linear":
        return np.linspace(lo, hi, points)
    raise ConfigError(f"--rho-grid spacing must be log or linear, got {spacing!r}")


def _sigma_from_args(args) -> float:
    if args.sigma is not None:
        return args.sigma
    return 1.0 / args.rho


def _grid_from(cfg: RunConfig, game: ScreeningGame, override: Optional[str]) -> np.ndarray:
    if override:
        return _parse_rho_grid(override)
    return default_rho_grid(
        game, cfg.grid_points, cfg.grid_min_mult, cfg.grid_max_mult, cfg.grid_spacing
    )


def cmd_validate(cfg: RunConfig, noise=None, env=None) -> int:
    game = build_game(cfg, noise=noise, env=env)
    noise_report = validate_noise(game.noise)
    env_report = game.env.validate()
    for line in noise_report.lines():
        print(f"noise  {line}")
    for line in env_report.lines():
        print(f"env    {line}")
    return 0 if noise_report.passed and env_report.passed else 1


def cmd_solve(cfg: RunConfig, sigma: float, noise=None, env=None) -> int:
    game = build_game(cfg, noise=noise, env=env)
    eq = game.solve(sigma)
    print(
        ",".join(
            [
                eq.kind,
                _NUM(eq.tau),
                _NUM(eq.tau_hat),
                _NUM(eq.theta_hat),
                _NUM(eq.q_residual),
                _NUM(eq.pbr_residual),
            ]
        )
    )
    return 0


def _emit_sweep(cfg: RunConfig, game: ScreeningGame, grid, out: Optional[str], svg: Optional[str]):
    result = run_sweep(game, grid, tol=cfg.quad_tol)
    text = result.to_csv()
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if svg:
        rows = result.existing()
        rho = [r.rho for r in rows]
        write_chart(
            svg,
            rho,
            {"V": [r.report.V for r in rows], "AR": [r.report.AR for r in rows], "U": [r.report.U for r in rows]},
            title="Equilibrium outcomes by screening precision",
            xlabel="precision rho (log scale)",
            ylabel="value",
        )
    return result


def cmd_sweep(cfg: RunConfig, args, noise=None, env=None) -> int:
    game = build_game(cfg, noise=noise, env=env)
    grid = _grid_from(cfg, game, args.rho_grid)
    _emit_sweep(cfg, game, grid, args.out or cfg.out_csv, args.svg or cfg.out_svg)
    return 0


def cmd_commit(cfg: RunConfig, sigma: float, noise=None, env=None) -> int:
    from .welfare import principal_payoff

    game = build_game(cfg, noise=noise, env=env)
    sol = solve_commitment(game, sigma)
    eq = game.solve(sigma)
    v = principal_payoff(game, eq, cfg.quad_tol)
    print(f"tau_hat_star={_NUM(sol.tau_hat_star)}")
    print(f"theta_hat_star={_NUM(sol.theta_hat_star)}")
    print(f"Vbar={_NUM(sol.value)}")
    print(f"V={_NUM(v)}")
    print(f"gap={_NUM(sol.value - v)}")
    if sol.degenerate:
        print("degenerate=1")
    for ta in sol.near_optima:
        print(f"near_optimum={_NUM(ta)}")
    return 0


def cmd_commit_sweep(cfg: RunConfig, args, noise=None, env=None) -> int:
    game = build_game(cfg, noise=noise, env=env)
    grid = _grid_from(cfg, game, args.rho_grid)
    result = run_sweep(game, grid, tol=cfg.quad_tol)
    lines = [result.CSV_HEADER + ",tau_hat_star,theta_hat_star,Vbar"]
    base = result.to_csv().strip().splitlines()[1:]
    for row, text in zip(result.rows, base):
        if row.exists:
            sol = solve_commitment(game, row.sigma)
            lines.append(
                text + f",{_NUM(sol.tau_hat_star)},{_NUM(sol.theta_hat_star)},{_NUM(sol.value)}"
            )
        else:
            lines.append(text + ",,,")
    payload = "\n".join(lines) + "\n"
    out = args.out or cfg.out_csv
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)
    return 0


def cmd_ext(cfg: RunConfig, args, noise=None, env=None) -> int:
    game = build_game(cfg, noise=noise, env=env)
    grid = _parse_rho_grid(args.rho_grid)
    lines: list[str] = []
    if args.model == "quadratic":
        lines.append("rho,tau,theta_hat,V,residual")
        for rho in grid:
            eq = solve_convex_cost_equilibrium(game.noise, game.env, float(rho))
            if eq is None:
                lines.append(f"{_NUM(float(rho))},,,,")
            else:
                lines.append(
                    ",".join(_NUM(x) for x in (eq.rho, eq.tau, eq.theta_hat, eq.value, eq.residual))
                )
    elif args.model == "binary":
        lines.append("rho,tau,theta_hat,delta,V,residual")
        for rho in grid:
            eq = binary_effort_equilibrium(
                game.noise, game.env, float(rho), ebar=args.ebar, cost_kappa=args.ckappa
            )
            if eq is None:
                lines.append(f"{_NUM(float(rho))},,,,,")
            else:
                lines.append(
                    ",".join(
                        _NUM(x)
                        for x in (eq.rho, eq.tau, eq.theta_hat, eq.delta, eq.value, eq.residual)
                    )
                )
    else:  # reputation
        lines.append("rho,k,q")
        for rho in grid:
            k, q = linear_reputation(float(rho), args.mu, args.omega)
            lines.append(",".join(_NUM(x) for x in (float(rho), k, q)))
    payload = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)
    return 0


def cmd_oracle(cfg: RunConfig, sigma: float, n: int, seed: int, noise=None, env=None) -> int:
    game = build_game(cfg, noise=noise, env=env)
    eq = game.solve(sigma)
    report = monte_carlo_welfare(game, eq, n=n, seed=seed)
    for line in report.lines():
        print(line)
    return 0


def cmd_repro(cfg: RunConfig, outdir: str) -> int:
    os.makedirs(outdir, exist_ok=True)
    harness = AcceptanceHarness(cfg)
    for fam in ("normal", "laplace"):
        data = harness.family(fam)
        rows = data.result.existing()
        rho = [r.rho for r in rows]
        with open(os.path.join(outdir, f"fig1-{fam}.csv"), "w", encoding="utf-8") as fh:
            fh.write(data.result.to_csv())
        write_chart(
            os.path.join(outdir, f"fig1-{fam}.svg"),
            rho,
            {"V": [r.report.V for r in rows]},
            title=f"Principal payoff vs precision ({fam} noise)",
            xlabel="precision rho (log scale)",
            ylabel="V",
        )
        write_chart(
            os.path.join(outdir, f"fig2-{fam}.svg"),
            rho,
            {"U": [r.report.U for r in rows], "AR": [r.report.AR for r in rows]},
            title=f"Agent payoff and approval rate vs precision ({fam} noise)",
            xlabel="precision rho (log scale)",
            ylabel="value",
        )
    outcomes = harness.outcomes()
    for o in outcomes:
        print(o.line())
    hard = hard_failures(outcomes)
    known = [o for o in outcomes if not o.passed and o.known_defect]
    print(
        f"{sum(o.passed for o in outcomes)}/{len(outcomes)} checks passed"
        + (f", {len(known)} known spec-calibration defects (FAIL*)" if known else "")
    )
    return 1 if hard else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="screenlab",
        description="Equilibrium engine and precision sweeps for noisy costly-signaling screening",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, sigma_rho=False):
        p.add_argument("--config", help="path to a section.key = value config file")
        if sigma_rho:
            grp = p.add_mutually_exclusive_group(required=True)
            grp.add_argument("--sigma", type=float, help="noise scale (= 1/rho)")
            grp.add_argument("--rho", type=float, help="precision (= 1/sigma)")

    add_common(sub.add_parser("validate", help="check noise/environment assumptions"))
    add_common(sub.add_parser("solve", help="solve one equilibrium; prints a CSV row"), True)

    p = sub.add_parser("sweep", help="solve over a precision grid; writes CSV (and SVG)")
    add_common(p)
    p.add_argument("--out", help="CSV output path (stdout if omitted)")
    p.add_argument("--svg", help="SVG chart path")
    p.add_argument("--rho-grid", help="min:max:points:spacing override")

    add_common(sub.add_parser("commit", help="commitment benchmark at one noise level"), True)

    p = sub.add_parser("commit-sweep", help="sweep with commitment columns appended")
    add_common(p)
    p.add_argument("--out", help="CSV output path (stdout if omitted)")
    p.add_argument("--rho-grid", help="min:max:points:spacing override")

    p = sub.add_parser("ext", help="robustness variants")
    add_common(p)
    p.add_argument("model", choices=["quadratic", "binary", "reputation"])
    p.add_argument("--rho-grid", required=True, help="min:max:points:spacing")
    p.add_argument("--out", help="CSV output path (stdout if omitted)")
    p.add_argument("--ebar", type=float, default=1.0, help="binary effort quantum")
    p.add_argument("--ckappa", type=float, default=8.0, help="binary cost scale: c(theta)=ckappa/theta")
    p.add_argument("--omega", type=float, default=1.5, help="reputation prior standard deviation")
    p.add_argument("--mu", type=float, default=0.0, help="reputation prior mean")

    p = sub.add_parser("oracle", help="Monte Carlo and brute-force verification")
    add_common(p, True)
    p.add_argument("--n", type=int, default=None, help="simulation draws")
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("repro", help="figure pipeline plus the acceptance suite")
    add_common(p)
    p.add_argument("--outdir", default=".", help="directory for fig CSV/SVG artifacts")

    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "validate":
            return cmd_validate(cfg)
        if args.command == "solve":
            return cmd_solve(cfg, _sigma_from_args(args))
        if args.command == "sweep":
            return cmd_sweep(cfg, args)
        if args.command == "commit":
            return cmd_commit(cfg, _sigma_from_args(args))
        if args.command == "commit-sweep":
            return cmd_commit_sweep(cfg, args)
        if args.command == "ext":
            return cmd_ext(cfg, args)
        if args.command == "oracle":
            return cmd_oracle(
                cfg,
                _sigma_from_args(args),
                args.n if args.n is not None else cfg.mc_n,
                args.seed if args.seed is not None else cfg.seed,
            )
        if args.command == "repro":
            return cmd_repro(cfg, args.outdir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
