"""Command-line front end.

Subcommands: analyze, replicator, manet, sweep, oracle-check. Exit status is
0 on success, 1 on invalid input and 2 when a check fails.
"""

from __future__ import annotations

import argparse
import itertools
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import output
from .config import ConfigError, RunConfig, build_config, parse_area, read_config_file
from .dynamics import (
    basin_prediction,
    classify_ess,
    equilibrium_report,
    integrate,
    run_mode,
    threshold_pT,
)
from .game import (
    GameParams,
    NonViableRegimeError,
    brute_force_dove_strategy,
    optimal_dove_strategy,
)
from .manet import run_simulation

EXIT_OK, EXIT_INVALID, EXIT_CHECK = 0, 1, 2


class CheckFailed(Exception):
    pass


# --- analyze ---------------------------------------------------------------

def cmd_analyze(cfg: RunConfig, stream=None) -> dict:
    stream = stream or sys.stdout
    params = cfg.params()
    report = equilibrium_report(params)
    verdicts = {p: classify_ess(params, p) for p in report.fixed_points}

    lines = [
        f"lambda={params.lam:g} delta_r={params.delta_r:g} delta_g={params.delta_g:g} "
        f"delta_b={params.delta_b:g}",
        f"p_T = {output.fmt(report.p_T)}",
        "fixed points: " + ", ".join(output.fmt(p) for p in report.fixed_points),
        "ESS (analytic): {" + ", ".join(output.fmt(p) for p in report.ess_points) + "}",
        f"mixed NE (not ESS): {output.fmt(report.mixed_ne)}",
        f"invasion barrier at p*=1: {report.barriers[1.0]}",
        f"invasion barrier at p*=0: {report.barriers[0.0]}",
        "",
        "empirical ESS check (sampled q and epsilon grids):",
        f"{'p_star':>12} {'analytic':>9} {'empirical':>9} {'inf barrier':>12}",
    ]
    rows = []
    for p_star, verdict in verdicts.items():
        analytic = p_star in report.ess_points
        inf_b = verdict.barrier_infimum
        lines.append(f"{output.fmt(p_star):>12} {str(analytic):>9} {str(verdict.is_ess):>9} "
                     f"{output.fmt(inf_b) if inf_b is not None else '-':>12}")
        for q, emp in verdict.barriers.items():
            ana = report.invasion_barrier(p_star, q) if analytic else float("nan")
            rows.append((float(p_star), float(q), analytic, verdict.is_ess,
                         float("nan") if emp is None else float(emp), float(ana)))
    disagree = [p for p, v in verdicts.items() if v.is_ess != (p in report.ess_points)]
    lines.append("")
    lines.append("p*=0 empirical vs analytic barrier per mutant q:")
    for q, emp in verdicts[0.0].barriers.items():
        lines.append(f"  q={output.fmt(q):<6} empirical={output.fmt(emp):<8} "
                     f"analytic={output.fmt(report.invasion_barrier(0.0, q))}")
    text = "\n".join(lines) + "\n"
    print(text, end="", file=stream)

    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / "analyze.txt").write_text(text)
    output.write_rows(cfg.out / "ess_table.csv",
                      ("p_star", "q", "analytic_ess", "empirical_ess", "empirical_barrier",
                       "analytic_barrier"), rows)
    if disagree:
        raise CheckFailed(f"analytic and empirical ESS verdicts disagree at {disagree}")
    return {"report": report, "verdicts": verdicts}


# --- replicator ------------------------------------------------------------

def trajectory_path(out: Path, mode: str, p0: float) -> Path:
    return out / f"replicator_{mode}_p0_{output.p0_tag(p0)}.csv"


def cmd_replicator(cfg: RunConfig, stream=None) -> dict:
    stream = stream or sys.stdout
    params = cfg.params()
    results = {}
    for mode in cfg.modes:
        for p0 in cfg.p0:
            traj = run_mode(params, mode, p0, cfg.dt, cfg.horizon, cfg.method)
            output.write_trajectory(trajectory_path(cfg.out, mode, p0), traj)
            t_conv = output.fmt(traj.t_converged) if traj.converged else "-"
            print(f"mode={mode} p0={output.p0_tag(p0)} final_p={output.fmt(traj.final_p)} "
                  f"converged={str(traj.converged).lower()} t_converged={t_conv}", file=stream)
            results[(mode, p0)] = traj
    return results


# --- manet -----------------------------------------------------------------

def manet_path(out: Path, mode: str, p0: float) -> Path:
    return out / f"manet_{mode}_p0_{output.p0_tag(p0)}.csv"


def cmd_manet(cfg: RunConfig, stream=None) -> dict:
    stream = stream or sys.stdout
    params = cfg.params()
    results = {}
    for mode in cfg.modes:
        for p0 in cfg.p0:
            res = run_simulation(cfg.topology(), cfg.sim(mode, p0), params)
            output.write_manet(manet_path(cfg.out, mode, p0), res.records)
            nf = res.normalized_forwarded
            tail = nf[-max(1, len(nf) // 10):]
            print(f"mode={mode} p0={output.p0_tag(p0)} seed={cfg.seed} epochs={len(nf)} "
                  f"isolated={len(res.topology.isolated)} "
                  f"last_decile_normalized_forwarded={output.fmt(float(tail.mean()))}",
                  file=stream)
            results[(mode, p0)] = res
    return results


# --- sweep -----------------------------------------------------------------

def _sweep_cell(args):
    idx, lam, dr, db, dg, p0, dt, horizon, method = args
    params = GameParams(lam, dr, db, dg)
    p_T = threshold_pT(params)
    predicted = basin_prediction(params, p0)
    traj = integrate(params, p0, dt, horizon, method)
    final = traj.final_p
    observed = min((0.0, p_T, 1.0), key=lambda v: abs(v - final))
    agree = abs(final - predicted) < 1e-3
    return (idx, lam, dr, db, p0, p_T, predicted, final, observed, traj.converged, agree)


def cmd_sweep(cfg: RunConfig, stream=None) -> List[tuple]:
    stream = stream or sys.stdout
    dg = cfg.delta_g[0] if len(cfg.delta_g) == 1 else None
    if len(cfg.delta_g) > 1:
        raise ConfigError("delta_g: sweeps take a single value")
    grid = list(itertools.product(cfg.lam, cfg.delta_r, cfg.delta_b, cfg.p0))
    if len(grid) > cfg.max_cells:
        raise ConfigError(f"sweep has {len(grid)} cells, above the cap of {cfg.max_cells}; "
                          "narrow the ranges or raise --max-cells")
    for lam, dr, db, _ in grid:
        GameParams(lam, dr, db, dg).require_viable()
    cells = [(k, lam, dr, db, dg, p0, cfg.dt, cfg.horizon, cfg.method)
             for k, (lam, dr, db, p0) in enumerate(grid)]
    if cfg.workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_sweep_cell, cells, chunksize=max(1, len(cells) // (4 * cfg.workers))))
    else:
        rows = [_sweep_cell(c) for c in cells]
    output.write_rows(cfg.out / "sweep.csv", output.SWEEP_COLUMNS, rows)
    n_disagree = sum(1 for r in rows if not r[-1])
    print(f"cells={len(rows)} disagreements={n_disagree} -> {cfg.out / 'sweep.csv'}", file=stream)
    return rows


# --- oracle-check ----------------------------------------------------------

def random_params(rng: np.random.Generator, count: int) -> List[GameParams]:
    sets = []
    for _ in range(count):
        dg = rng.uniform(0.2, 5.0)
        sets.append(GameParams(
            lam=rng.uniform(1.1, 6.0),
            delta_r=rng.uniform(0.2, 5.0),
            delta_b=rng.uniform(0.05, dg),
            delta_g=dg,
        ))
    return sets


def cmd_oracle_check(cfg: RunConfig, stream=None) -> dict:
    stream = stream or sys.stdout
    if cfg.grid_steps < 100:
        raise ConfigError("grid_steps: oracle-check needs at least 100")
    base = cfg.params()
    base.require_viable()
    tol = 1.0 / cfg.grid_steps
    p_grid = np.linspace(0.0, 0.99, cfg.p_points)
    sets = [base] + random_params(np.random.default_rng(cfg.seed), cfg.random_sets)

    rows = []
    worst = 0.0
    failures = 0
    print(f"{'set':>3} {'lambda':>8} {'delta_r':>8} {'delta_g':>8} {'delta_b':>8} "
          f"{'max|ds_h|':>10} {'s_d ok':>6} {'pass':>5}", file=stream)
    for k, prm in enumerate(sets):
        dev = 0.0
        sd_ok = True
        for p in p_grid:
            closed = optimal_dove_strategy(prm, float(p))
            oracle = brute_force_dove_strategy(prm, float(p), cfg.grid_steps)
            d = abs(closed.s_h - oracle.s_h)
            dev = max(dev, d)
            sd_ok &= oracle.s_d == 1.0
            rows.append((k, prm.lam, prm.delta_r, prm.delta_g, prm.delta_b, float(p),
                         closed.s_d, closed.s_h, oracle.s_d, oracle.s_h, d))
        ok = dev <= tol + 1e-12 and sd_ok
        failures += not ok
        worst = max(worst, dev)
        print(f"{k:>3} {prm.lam:>8.4g} {prm.delta_r:>8.4g} {prm.delta_g:>8.4g} {prm.delta_b:>8.4g} "
              f"{dev:>10.3g} {str(sd_ok):>6} {str(ok):>5}", file=stream)

    # delta_g must not move s_h once s_d = 1
    dg_columns = {}
    for dg in (1.0, 3.0, 10.0):
        if dg < base.delta_b:
            continue
        prm = GameParams(base.lam, base.delta_r, base.delta_b, dg)
        dg_columns[dg] = [brute_force_dove_strategy(prm, float(p), cfg.grid_steps).s_h
                          for p in p_grid[::10]]
    cols = list(dg_columns.values())
    dg_ok = all(c == cols[0] for c in cols)
    failures += not dg_ok
    print(f"delta_g invariance over {sorted(dg_columns)}: {'pass' if dg_ok else 'FAIL'}", file=stream)
    print(f"max |ds_h| = {worst:.3g} (tolerance {tol:.3g}); "
          f"{'PASS' if failures == 0 else 'FAIL'}", file=stream)

    output.write_rows(cfg.out / "oracle_check.csv",
                      ("set", "lambda", "delta_r", "delta_g", "delta_b", "p", "closed_s_d",
                       "closed_s_h", "oracle_s_d", "oracle_s_h", "abs_diff"), rows)
    if failures:
        raise CheckFailed(f"oracle check failed for {failures} case(s)")
    return {"max_dev": worst, "sets": sets}


# --- argument parsing ------------------------------------------------------

COMMANDS = {
    "analyze": cmd_analyze,
    "replicator": cmd_replicator,
    "manet": cmd_manet,
    "sweep": cmd_sweep,
    "oracle-check": cmd_oracle_check,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> List[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected number(s), got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty value list")
    return values


def _area(text: str):
    try:
        return parse_area(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("game")
    # game values are repeatable/comma lists so sweeps can reuse the same flags
    g.add_argument("--lambda", dest="lam", type=_float_list, action="append")
    g.add_argument("--delta-r", dest="delta_r", type=_float_list, action="append")
    g.add_argument("--delta-g", dest="delta_g", type=_float_list, action="append")
    g.add_argument("--delta-b", dest="delta_b", type=_float_list, action="append")
    d = common.add_argument_group("dynamics")
    d.add_argument("--p0", type=_float_list, action="append")
    d.add_argument("--dt", type=float)
    d.add_argument("--horizon", type=float)
    d.add_argument("--method", choices=("euler", "rk4"))
    s = common.add_argument_group("simulation")
    s.add_argument("--nodes", type=int)
    s.add_argument("--area", type=_area, help="WIDTHxHEIGHT in meters")
    s.add_argument("--range", dest="tx_range", type=float)
    s.add_argument("--packets", type=int)
    s.add_argument("--epochs", type=int)
    s.add_argument("--rounds", type=int)
    s.add_argument("--keep-reputation", dest="keep_reputation", action="store_const", const=True,
                   help="nodes keep their reputation when switching class")
    s.add_argument("--no-repair", dest="repair", action="store_const", const=False,
                   help="doves with non-positive reputation follow the plain strategy")
    common.add_argument("--seed", type=int)
    common.add_argument("--mode", choices=("constrained", "baseline", "both"))
    common.add_argument("--out", type=Path)
    common.add_argument("--config", type=Path)
    common.add_argument("--grid-steps", dest="grid_steps", type=int)
    common.add_argument("--random-sets", dest="random_sets", type=int)
    common.add_argument("--p-points", dest="p_points", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--max-cells", dest="max_cells", type=int)

    parser = _Parser(
        prog="repforward",
        description="Reputation-constrained packet forwarding: analysis and simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "analyze": "equilibria, ESS verdicts and invasion barriers",
        "replicator": "integrate replicator trajectories to CSV",
        "manet": "agent-based forwarding simulation to CSV",
        "sweep": "parameter sweep of basin predictions vs integration",
        "oracle-check": "closed-form optimal strategy vs grid-search oracle",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


_LIST_FIELDS = ("lam", "delta_r", "delta_g", "delta_b", "p0")


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    flags = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
    for name in _LIST_FIELDS:
        if flags.get(name) is not None:
            flags[name] = [v for chunk in flags[name] for v in chunk]
    file_values = read_config_file(ns.config) if ns.config else {}
    return build_config(file_values, flags)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        cfg = config_from_args(ns)
        COMMANDS[ns.command](cfg)
    except CheckFailed as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except (ConfigError, NonViableRegimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
