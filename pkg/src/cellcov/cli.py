"""Command-line harness: coverage curves, invariance validation, figures.

Subcommands
-----------
curve                one coverage curve (analytic, simulated or both) to CSV/JSON
validate-invariance  check that coverage does not depend on station density
reproduce-figures    standard downlink/uplink curve files plus a comparison
                     report against the bundled reference dataset

Flags mirror the run-configuration fields; ``--config FILE`` supplies the
same fields from JSON with explicit flags taking precedence.  Identical
configuration and seed produce byte-identical output files.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import click
import numpy as np

from . import analytic
from .params import CoverageMethod, NetworkParams, SirThreshold, threshold_grid
from .refcurves import reference_curve
from .simulate import density_invariance_experiment, run_sweep
from .spatial import SimWindow

__all__ = ["main", "RunConfig", "ConfigError", "CurveRecord",
           "write_csv", "write_json", "parse_csv_records"]


class ConfigError(ValueError):
    """Invalid run configuration; message names the offending field."""


_DEFAULTS = {
    "method": "analytic",
    "alpha": 4.0,
    "epsilon": (0.0,),
    "lambda": 1e-5,
    "side": 2000.0,
    "xi_min": -15.0,
    "xi_max": 15.0,
    "xi_step": 1.0,
    "realizations": 3000,
    "seed": 42,
    "format": "csv",
    "workers": 1,
    "out": None,
}

# acceptance gates for the analytic-vs-reference comparison
_REF_TOL = {"dl": 5e-4, "ul": 1e-3}
# analytic density-invariance gates
_INVARIANCE_TOL = {"dl": 1e-6, "ul": 1e-5}


@dataclass(frozen=True)
class RunConfig:
    mode: str
    method: str = "analytic"
    alpha: float = 4.0
    epsilon: tuple = (0.0,)
    density: float = 1e-5
    side: float = 2000.0
    xi_min: float = -15.0
    xi_max: float = 15.0
    xi_step: float = 1.0
    realizations: int = 3000
    seed: int = 42
    out: str | None = None
    format: str = "csv"
    workers: int = 1

    def __post_init__(self):
        if self.mode not in ("dl", "ul"):
            raise ConfigError(f"mode: must be 'dl' or 'ul', got {self.mode!r}")
        if self.method not in ("analytic", "sim", "both"):
            raise ConfigError(f"method: must be analytic|sim|both, got {self.method!r}")
        if not self.alpha > 2:
            raise ConfigError(f"alpha: must be > 2, got {self.alpha}")
        if any(not 0.0 <= e <= 1.0 for e in self.epsilon):
            raise ConfigError(f"epsilon: values must lie in [0, 1], got {self.epsilon}")
        if not self.density > 0:
            raise ConfigError(f"lambda: must be > 0, got {self.density}")
        if not self.side > 0:
            raise ConfigError(f"side: must be > 0, got {self.side}")
        if self.xi_step <= 0:
            raise ConfigError(f"xi-step: must be > 0, got {self.xi_step}")
        if self.xi_min > self.xi_max:
            raise ConfigError(f"xi range: min {self.xi_min} > max {self.xi_max}")
        if self.method in ("sim", "both") and self.realizations < 1:
            raise ConfigError(f"realizations: must be >= 1, got {self.realizations}")
        if self.workers < 1:
            raise ConfigError(f"workers: must be >= 1, got {self.workers}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format: must be csv|json, got {self.format!r}")

    @property
    def kappa(self) -> float:
        return self.alpha / 2.0

    def grid(self) -> list[SirThreshold]:
        return threshold_grid(self.xi_min, self.xi_max, self.xi_step)


@dataclass
class CurveRecord:
    xi_db: float
    epsilon: float | None
    p_analytic: float | None
    p_sim: float | None
    stderr: float | None
    method: str


CSV_HEADER = "xi_db,epsilon,p_analytic,p_sim,stderr,method"


def _fmt(x: float | None, sig: int) -> str:
    return "" if x is None else f"{x:.{sig}g}"


def _record_row(r: CurveRecord) -> str:
    return ",".join([
        _fmt(r.xi_db, 6), _fmt(r.epsilon, 6), _fmt(r.p_analytic, 6),
        _fmt(r.p_sim, 6), _fmt(r.stderr, 3), r.method,
    ])


def write_csv(records: list[CurveRecord], fh, header: str = CSV_HEADER) -> None:
    fh.write(header + "\n")
    for r in records:
        fh.write(_record_row(r) + "\n")


def write_json(records: list[CurveRecord], metadata: dict, fh) -> None:
    payload = {
        "metadata": metadata,
        "records": [
            {"xi_db": r.xi_db, "epsilon": r.epsilon, "p_analytic": r.p_analytic,
             "p_sim": r.p_sim, "stderr": r.stderr, "method": r.method}
            for r in records
        ],
    }
    json.dump(payload, fh, indent=2, sort_keys=True)
    fh.write("\n")


def parse_csv_records(text: str) -> list[CurveRecord]:
    lines = text.strip().splitlines()
    records = []
    for line in lines[1:]:
        xi_db, eps, pa, ps, se, method = line.split(",")
        records.append(CurveRecord(
            xi_db=float(xi_db),
            epsilon=float(eps) if eps else None,
            p_analytic=float(pa) if pa else None,
            p_sim=float(ps) if ps else None,
            stderr=float(se) if se else None,
            method=method,
        ))
    return records


_METHOD_TAG = {
    CoverageMethod.ANALYTIC_CLOSED_FORM: "closed_form",
    CoverageMethod.ANALYTIC_GENERAL: "general",
    CoverageMethod.SIMULATED: "sim",
}


def _curve_records(config: RunConfig) -> tuple[list[CurveRecord], dict]:
    """Evaluate one run configuration into output records and file metadata."""
    grid = config.grid()
    want_analytic = config.method in ("analytic", "both")
    want_sim = config.method in ("sim", "both")
    series = list(config.epsilon) if config.mode == "ul" else [None]

    analytic_curves = {}
    if want_analytic:
        for eps in series:
            analytic_curves[eps] = analytic.coverage_curve(
                config.mode, grid, config.kappa, epsilon=eps
            )

    sweep = None
    if want_sim:
        params = NetworkParams(density=config.density, alpha=config.alpha)
        sweep = run_sweep(
            config.mode, params, SimWindow(side=config.side), grid,
            epsilons=tuple(config.epsilon) if config.mode == "ul" else (),
            n_realizations=config.realizations, master_seed=config.seed,
            workers=config.workers,
        )
        for w in sweep.metadata.warnings:
            click.echo(f"warning: {w}", err=True)

    records = []
    for j, t in enumerate(grid):
        for k, eps in enumerate(series):
            tags = []
            p_analytic = p_sim = stderr = None
            if want_analytic:
                point = analytic_curves[eps][j]
                p_analytic = point.probability
                tags.append(_METHOD_TAG[point.method])
            if sweep is not None:
                est = sweep.estimate(k, j)
                p_sim = est.p_hat
                stderr = est.stderr
                tags.append("sim")
            records.append(CurveRecord(
                xi_db=t.xi_db, epsilon=eps, p_analytic=p_analytic,
                p_sim=p_sim, stderr=stderr, method="+".join(tags),
            ))

    metadata = {
        "mode": config.mode, "method": config.method, "alpha": config.alpha,
        "epsilon": list(config.epsilon) if config.mode == "ul" else None,
        "lambda": config.density, "side": config.side,
        "xi_min": config.xi_min, "xi_max": config.xi_max, "xi_step": config.xi_step,
        "seed": config.seed,
    }
    if sweep is not None:
        metadata.update({
            "realizations": config.realizations,
            "realizations_used": sweep.used,
            "discards": sweep.metadata.discards,
        })
        click.echo(
            f"simulation: {sweep.used} realizations used, "
            f"{sum(sweep.metadata.discards.values())} discarded, "
            f"{sweep.metadata.wall_time:.1f} s", err=True,
        )
    return records, metadata


def _emit(records: list[CurveRecord], metadata: dict, config: RunConfig) -> None:
    if config.out is None:
        if config.format == "csv":
            write_csv(records, sys.stdout)
        else:
            write_json(records, metadata, sys.stdout)
        return
    with open(config.out, "w") as fh:
        if config.format == "csv":
            write_csv(records, fh)
        else:
            write_json(records, metadata, fh)
    click.echo(f"wrote {config.out}", err=True)


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config: top-level JSON value must be an object")
    return data


def _merged_value(name: str, ctx: click.Context, cli_value, file_values: dict):
    """Precedence: explicit flag > config file > built-in default."""
    source = ctx.get_parameter_source(name.replace("-", "_"))
    if source is not None and source.name == "COMMANDLINE":
        return cli_value
    if name in file_values:
        return file_values[name]
    return cli_value


def _build_config(ctx, mode, method, alpha, epsilon, lam, side, xi_min, xi_max,
                  xi_step, realizations, seed, out, fmt, workers, config) -> RunConfig:
    file_values = _load_config_file(config)
    pick = lambda name, val: _merged_value(name, ctx, val, file_values)
    eps = pick("epsilon", epsilon)
    if not isinstance(eps, (tuple, list)):
        eps = (eps,)
    try:
        return RunConfig(
            mode=pick("mode", mode),
            method=pick("method", method),
            alpha=pick("alpha", alpha),
            epsilon=tuple(float(e) for e in eps),
            density=pick("lambda", lam),
            side=pick("side", side),
            xi_min=pick("xi-min", xi_min),
            xi_max=pick("xi-max", xi_max),
            xi_step=pick("xi-step", xi_step),
            realizations=pick("realizations", realizations),
            seed=pick("seed", seed),
            out=pick("out", out),
            format=pick("format", fmt),
            workers=pick("workers", workers),
        )
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from exc


def _run_options(fn):
    opts = [
        click.option("--method", type=click.Choice(["analytic", "sim", "both"]),
                     default=_DEFAULTS["method"], show_default=True),
        click.option("--alpha", type=float, default=_DEFAULTS["alpha"],
                     show_default=True, help="Path-loss exponent (> 2)."),
        click.option("--epsilon", type=float, multiple=True,
                     default=_DEFAULTS["epsilon"], show_default=True,
                     help="Uplink power-control factor; repeatable."),
        click.option("--lambda", "lam", type=float, default=_DEFAULTS["lambda"],
                     show_default=True, help="Station density in BS/m^2."),
        click.option("--side", type=float, default=_DEFAULTS["side"],
                     show_default=True, help="Simulation window side in metres."),
        click.option("--xi-min", type=float, default=_DEFAULTS["xi_min"], show_default=True),
        click.option("--xi-max", type=float, default=_DEFAULTS["xi_max"], show_default=True),
        click.option("--xi-step", type=float, default=_DEFAULTS["xi_step"], show_default=True),
        click.option("--realizations", type=int, default=_DEFAULTS["realizations"],
                     show_default=True),
        click.option("--seed", type=int, default=_DEFAULTS["seed"], show_default=True),
        click.option("--out", type=click.Path(dir_okay=False, writable=True),
                     default=None, help="Output file (stdout when omitted)."),
        click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
                     default=_DEFAULTS["format"], show_default=True),
        click.option("--workers", type=int, default=_DEFAULTS["workers"], show_default=True),
        click.option("--config", type=click.Path(exists=False), default=None,
                     help="JSON file with the same fields; flags override it."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


@click.group()
def main():
    """Coverage probability of Poisson cellular networks, both link directions."""


@main.command("curve")
@click.option("--mode", type=click.Choice(["dl", "ul"]), required=True)
@_run_options
@click.pass_context
def cmd_curve(ctx, mode, method, alpha, epsilon, lam, side, xi_min, xi_max,
              xi_step, realizations, seed, out, fmt, workers, config):
    """Evaluate one coverage curve and emit records per (threshold, epsilon)."""
    cfg = _build_config(ctx, mode, method, alpha, epsilon, lam, side, xi_min,
                        xi_max, xi_step, realizations, seed, out, fmt, workers,
                        config)
    try:
        records, metadata = _curve_records(cfg)
    except analytic.NonConvergenceError as exc:
        raise click.ClickException(f"numerical failure: {exc}") from exc
    _emit(records, metadata, cfg)


@main.command("validate-invariance")
@click.option("--mode", type=click.Choice(["dl", "ul"]), required=True)
@click.option("--lambda", "lambdas", type=float, multiple=True,
              help="Station densities to compare; at least two (defaults to "
                   "1e-6 and 1e-4).")
@_run_options
@click.pass_context
def cmd_validate_invariance(ctx, mode, lambdas, method, alpha, epsilon, lam,
                            side, xi_min, xi_max, xi_step, realizations, seed,
                            out, fmt, workers, config):
    """Check that coverage probability is independent of station density."""
    cfg = _build_config(ctx, mode, method, alpha, epsilon, lam, side, xi_min,
                        xi_max, xi_step, realizations, seed, out, fmt, workers,
                        config)
    densities = tuple(lambdas) if len(lambdas) >= 2 else (1e-6, 1e-4)
    if any(not d > 0 for d in densities):
        raise click.ClickException("lambda: densities must be > 0")
    grid = cfg.grid()
    lines = []
    ok = True

    if cfg.method in ("analytic", "both"):
        tol = _INVARIANCE_TOL[cfg.mode]
        for eps in (cfg.epsilon if cfg.mode == "ul" else (None,)):
            values = np.empty((len(densities), len(grid)))
            try:
                for i, rho in enumerate(densities):
                    for j, t in enumerate(grid):
                        if cfg.mode == "dl":
                            values[i, j] = analytic.dl_coverage_with_density(
                                t, rho, cfg.kappa)
                        else:
                            values[i, j] = analytic.ul_coverage_with_density(
                                t, rho, cfg.kappa, eps)
            except analytic.NonConvergenceError as exc:
                raise click.ClickException(f"numerical failure: {exc}") from exc
            gap = float((values.max(axis=0) - values.min(axis=0)).max())
            verdict = "PASS" if gap <= tol else "FAIL"
            ok = ok and gap <= tol
            label = f" epsilon={eps:g}" if eps is not None else ""
            lines.append(
                f"analytic {cfg.mode}{label}: max pairwise gap {gap:.3e} "
                f"across lambda={list(densities)} (tolerance {tol:.0e}) {verdict}"
            )

    if cfg.method in ("sim", "both"):
        for eps in (cfg.epsilon if cfg.mode == "ul" else (cfg.epsilon[0],)):
            result = density_invariance_experiment(
                cfg.mode, cfg.kappa, eps, grid, densities,
                n_realizations=cfg.realizations, master_seed=cfg.seed,
                workers=cfg.workers,
            )
            verdict = "PASS" if result.passed else "FAIL"
            ok = ok and result.passed
            lines.append(
                f"simulated {cfg.mode} epsilon={eps:g}: max gap {result.max_gap:.4f} "
                f"vs noise bound {float(result.gap_bound.max()):.4f} "
                f"({cfg.realizations} realizations) {verdict}"
            )

    report = "\n".join(lines)
    click.echo(report)
    if cfg.out:
        Path(cfg.out).write_text(report + "\n")
    if not ok:
        ctx.exit(1)


def _figure_curves(mode: str, grid, kappas=(2.0, 3.0)):
    """Analytic figure curves keyed by series name."""
    out = {}
    for kappa in kappas:
        series = f"alpha{int(2 * kappa)}"
        eps = 0.0 if mode == "ul" else None
        points = analytic.coverage_curve(mode, grid, kappa, epsilon=eps)
        out[series] = np.array([p.probability for p in points])
    return out


@main.command("reproduce-figures")
@click.option("--out-dir", type=click.Path(file_okay=False), default=".",
              show_default=True)
@click.option("--lambda", "lam", type=float, default=_DEFAULTS["lambda"],
              show_default=True)
@click.option("--side", type=float, default=_DEFAULTS["side"], show_default=True)
@click.option("--realizations", type=int, default=_DEFAULTS["realizations"],
              show_default=True)
@click.option("--seed", type=int, default=_DEFAULTS["seed"], show_default=True)
@click.option("--workers", type=int, default=_DEFAULTS["workers"], show_default=True)
@click.pass_context
def cmd_reproduce_figures(ctx, out_dir, lam, side, realizations, seed, workers):
    """Rebuild the standard coverage figures and diff them against the bundled
    reference dataset (downlink and uplink, alpha in {4, 6}, epsilon = 0)."""
    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)
    grid = threshold_grid(-15.0, 15.0, 1.0)
    xi_db = np.array([t.xi_db for t in grid])
    window = SimWindow(side=side)
    lines = []
    ok = True

    # curve identity: which reference curve does the si/ci formula match at 0 dB
    v0 = analytic.ul_coverage_eps0_alpha4(SirThreshold.from_db(0.0))
    refs0 = {s: dict(zip(*reference_curve("ul", s).as_arrays()))[0.0]
             for s in ("alpha4", "alpha6")}
    nearest = min(refs0, key=lambda s: abs(refs0[s] - v0))
    lines.append(
        f"uplink curve identity: si/ci value {v0:.5f} at 0 dB is nearest the "
        f"{nearest} reference curve ({refs0[nearest]:.5f})"
    )
    ok = ok and nearest == "alpha4"

    for mode, fname in (("dl", "dl_coverage.csv"), ("ul", "ul_coverage.csv")):
        curves = _figure_curves(mode, grid)
        records = []
        for series, values in curves.items():
            alpha = float(series.removeprefix("alpha"))
            params = NetworkParams(density=lam, alpha=alpha)
            sweep = run_sweep(
                mode, params, window, grid,
                epsilons=(0.0,) if mode == "ul" else (),
                n_realizations=realizations, master_seed=seed, workers=workers,
            )
            p_sim = sweep.p_hat[0]
            stderr = sweep.stderr[0]
            for j, t in enumerate(grid):
                records.append((series, CurveRecord(
                    xi_db=t.xi_db, epsilon=0.0 if mode == "ul" else None,
                    p_analytic=float(values[j]), p_sim=float(p_sim[j]),
                    stderr=float(stderr[j]),
                    method=("closed_form" if mode == "dl" or series == "alpha4"
                            else "general") + "+sim",
                )))

            ref_db, ref_vals = reference_curve(mode, series).as_arrays()
            idx = np.searchsorted(xi_db, ref_db)
            dev = np.abs(values[idx] - ref_vals)
            tol = _REF_TOL[mode]
            verdict = "PASS" if dev.max() <= tol else "FAIL"
            ok = ok and dev.max() <= tol
            lines.append(
                f"{mode} {series}: analytic vs reference max |dev| = "
                f"{dev.max():.2e} over {len(ref_vals)} points "
                f"(tolerance {tol:.0e}) {verdict}"
            )

            bound = np.maximum(3.0 * stderr, 0.015)
            sim_dev = np.abs(p_sim - values)
            verdict = "PASS" if np.all(sim_dev <= bound) else "FAIL"
            ok = ok and bool(np.all(sim_dev <= bound))
            lines.append(
                f"{mode} {series}: simulated vs analytic max |dev| = "
                f"{sim_dev.max():.4f} (bound max(3*stderr, 0.015), "
                f"{sweep.used} realizations) {verdict}"
            )

        fpath = out_path / fname
        with open(fpath, "w") as fh:
            fh.write("series," + CSV_HEADER + "\n")
            for series, rec in records:
                fh.write(series + "," + _record_row(rec) + "\n")
        lines.append(f"wrote {fpath}")

    report = "\n".join(lines)
    click.echo(report)
    (out_path / "report.txt").write_text(report + "\n")
    if not ok:
        ctx.exit(1)


if __name__ == "__main__":
    main()
