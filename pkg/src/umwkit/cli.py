"""Command-line front-end.

Exit codes: 0 success, 2 usage, 3 parse/validation, 4 convergence,
5 I/O.  When --output is given stdout stays silent; human-readable summaries
go to stderr.  JSON numbers are emitted at full binary precision; stderr
tables round to 3 decimals.
"""

import dataclasses
import json
import math
import os
import sys

import click
import numpy as np

from .datatable import extract_response, numeric_columns, read_table
from .diagnostics import gof_stats, quantile_residuals, simulated_envelope, r2_generalized
from .distribution import UmwParams, quantile_solve, sample
from .errors import (
    ConvergenceFailure,
    DegenerateProbability,
    DomainError,
    RankDeficientDesign,
    SingularInformation,
)
from .formula import build_design, parse_formula
from .inference import Dataset, confidence_intervals, fit_umw, wald_test
from .links import LINK_NAMES
from .montecarlo import (
    DEFAULT_REPLICATES,
    estimates_to_csv,
    load_scenario,
    preset_scenarios,
    report_to_csv,
    run_study,
)
from .regression import fit_rq, make_spec

EXIT_VALIDATION = 3
EXIT_CONVERGENCE = 4
EXIT_IO = 5

_JSON_NAME = {"lam": "lambda"}


def _die(code: int, message: str):
    click.echo(f"umwkit: error: {message}", err=True)
    sys.exit(code)


def _guarded(body):
    try:
        body()
    except (DomainError, RankDeficientDesign, DegenerateProbability) as exc:
        _die(EXIT_VALIDATION, str(exc))
    except (ConvergenceFailure, SingularInformation) as exc:
        _die(EXIT_CONVERGENCE, str(exc))
    except OSError as exc:
        _die(EXIT_IO, str(exc))


def _jsonable(obj):
    """Recursively convert to plain JSON types; non-finite floats -> null."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _write_json(report: dict, output):
    text = json.dumps(_jsonable(report), indent=2, allow_nan=False) + "\n"
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _write_text(text: str, output):
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _plot_stem(output: str) -> str:
    stem, _ = os.path.splitext(output)
    return stem


def _display_names(fit) -> list:
    return [_JSON_NAME.get(n, n) for n in fit.param_names]


def _inference_block(fit, names, level: float = 0.95) -> dict:
    """estimates / std_errors / ci / wald keyed by display name."""
    block = {"estimates": {nm: float(v) for nm, v in zip(names, fit.estimates)}}
    have_se = fit.std_errors is not None and not np.any(np.isnan(fit.std_errors))
    if have_se:
        block["std_errors"] = {nm: float(v) for nm, v in zip(names, fit.std_errors)}
        ci = confidence_intervals(fit, level)
        block["ci"] = {
            "level": level,
            "lower": {nm: float(v) for nm, v in zip(names, ci[:, 0])},
            "upper": {nm: float(v) for nm, v in zip(names, ci[:, 1])},
        }
        wald = {}
        for i, nm in enumerate(names):
            w = wald_test(fit, i, 0.0)
            wald[nm] = {"statistic": w.statistic, "p_value": w.p_value}
        block["wald"] = wald
    else:
        block["std_errors"] = None
        block["ci"] = None
        block["wald"] = None
    return block


def _criteria_block(fit) -> dict:
    c = fit.criteria
    return {"aic": c.aic, "bic": c.bic, "aicc": c.aicc}


def _stderr_table(fit, names):
    se = fit.std_errors
    click.echo(f"  {'parameter':<16}{'estimate':>10}{'se':>10}", err=True)
    for i, nm in enumerate(names):
        se_s = f"{se[i]:>10.3f}" if se is not None and not np.isnan(se[i]) else f"{'--':>10}"
        click.echo(f"  {nm:<16}{fit.estimates[i]:>10.3f}{se_s}", err=True)
    click.echo(f"  loglik {fit.loglik:.3f}  aic {fit.criteria.aic:.3f}  "
               f"converged {fit.converged}", err=True)


@click.group()
@click.version_option(package_name="umwkit", prog_name="umwkit")
def main():
    """Unit-interval distribution and quantile-regression toolkit."""


# ---------------------------------------------------------------- fit-dist --

@main.command("fit-dist")
@click.option("--input", "input_path", required=True, type=click.Path(), help="CSV file.")
@click.option("--response", required=True, help="Response column name.")
@click.option("--output", type=click.Path(), default=None, help="JSON report path.")
@click.option("--drop-invalid", is_flag=True, help="Drop rows with responses outside (0,1).")
@click.option("--emit-plot-data", is_flag=True,
              help="Write density/QQ/residual CSVs next to --output.")
def fit_dist_cmd(input_path, response, output, drop_invalid, emit_plot_data):
    """Fit the three-parameter distribution to a CSV column."""
    if emit_plot_data and not output:
        raise click.UsageError("--emit-plot-data requires --output")

    def body():
        table = read_table(input_path)
        values, _, dropped = extract_response(table, response, drop_invalid)
        if dropped:
            click.echo(f"dropped {len(dropped)} invalid row(s)", err=True)
        d = Dataset(values)
        fit = fit_umw(d)
        p_hat = UmwParams(*fit.estimates)
        gof = gof_stats(p_hat, d)
        resid = quantile_residuals(p_hat, d)
        names = _display_names(fit)
        report = {
            "model": "umw",
            "input": str(input_path),
            "response": response,
            "n": d.n,
            "dropped_rows": dropped,
            **_inference_block(fit, names),
            "loglik": fit.loglik,
            "criteria": _criteria_block(fit),
            "gof": {"ks": gof.ks, "ad": gof.ad, "cvm": gof.cvm},
            "residual_ad_statistic": resid.ad_statistic,
            "residual_ad_p": resid.ad_p_value,
            "residual_ad_variant": resid.ad_variant,
            "converged": fit.converged,
            "iterations": fit.iterations,
            "message": fit.message,
        }
        _write_json(report, output)
        _stderr_table(fit, names)
        if emit_plot_data:
            _emit_dist_plot_data(_plot_stem(output), p_hat, d, resid)

    _guarded(body)


def _emit_dist_plot_data(stem, p_hat, d, resid):
    lo = quantile_solve(p_hat.alpha, p_hat.gamma, p_hat.lam, 0.001)
    hi = quantile_solve(p_hat.alpha, p_hat.gamma, p_hat.lam, 0.999)
    grid = np.linspace(float(lo), float(hi), 512)
    from .distribution import pdf as _pdf
    dens = _pdf(p_hat, grid)
    with open(f"{stem}_density.csv", "w", encoding="utf-8") as fh:
        fh.write("y,pdf\n")
        for yv, fv in zip(grid, dens):
            fh.write(f"{float(yv)!r},{float(fv)!r}\n")
    ys = np.sort(d.values)
    n = ys.size
    theo = quantile_solve(p_hat.alpha, p_hat.gamma, p_hat.lam,
                          (np.arange(1, n + 1) - 0.5) / n)
    with open(f"{stem}_qq.csv", "w", encoding="utf-8") as fh:
        fh.write("theoretical,empirical\n")
        for tq, eq in zip(theo, ys):
            fh.write(f"{float(tq)!r},{float(eq)!r}\n")
    with open(f"{stem}_residuals.csv", "w", encoding="utf-8") as fh:
        fh.write("index,residual\n")
        for i, rv in enumerate(resid.residuals, start=1):
            fh.write(f"{i},{float(rv)!r}\n")


# ----------------------------------------------------------------- fit-reg --

def _parse_tau_grid(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise DomainError("--tau-grid must look like start:stop:step, e.g. 0.1:0.9:0.1")
    try:
        start, stop, step = (float(v) for v in parts)
    except ValueError:
        raise DomainError(f"bad --tau-grid {text!r}") from None
    if step <= 0 or not 0 < start < 1 or not 0 < stop < 1 or stop < start:
        raise DomainError(f"bad --tau-grid {text!r}")
    taus = []
    t = start
    while t <= stop + 1e-12:
        taus.append(round(t, 12))
        t += step
    return taus


@main.command("fit-reg")
@click.option("--input", "input_path", required=True, type=click.Path(), help="CSV file.")
@click.option("--formula", "formula_text", required=True,
              help="Model formula, e.g. 'accuracy ~ iq^2 + dyslexia:iq^2'.")
@click.option("--tau", type=float, default=0.5, show_default=True, help="Quantile level.")
@click.option("--tau-grid", default=None,
              help="start:stop:step sweep; one report per tau.")
@click.option("--link", type=click.Choice(LINK_NAMES), default="logit", show_default=True)
@click.option("--output", type=click.Path(), default=None, help="JSON report path.")
@click.option("--drop-invalid", is_flag=True, help="Drop rows with responses outside (0,1).")
@click.option("--emit-plot-data", is_flag=True,
              help="Write residual/QQ/envelope CSVs next to --output.")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Seed for the simulated envelope.")
@click.option("--threads", type=int, default=1, envvar="UMWKIT_THREADS", show_default=True)
def fit_reg_cmd(input_path, formula_text, tau, tau_grid, link, output, drop_invalid,
                emit_plot_data, seed, threads):
    """Fit the quantile regression model given a formula."""
    if emit_plot_data and not output:
        raise click.UsageError("--emit-plot-data requires --output")

    def body():
        formula = parse_formula(formula_text)
        table = read_table(input_path)
        values, kept, dropped = extract_response(table, formula.response, drop_invalid)
        if dropped:
            click.echo(f"dropped {len(dropped)} invalid row(s)", err=True)
        needed = sorted({n for t in formula.terms for n, _ in t.factors})
        columns = numeric_columns(table, needed, kept)
        design = build_design(formula, columns) if columns else (
            np.ones((values.size, 1)) if formula.intercept else None)
        if design is None or design.shape[1] == 0:
            raise DomainError("formula selects no design columns")
        d = Dataset(values)
        null_loglik = fit_umw(d).loglik

        taus = _parse_tau_grid(tau_grid) if tau_grid else [tau]
        reports = []
        for t in taus:
            spec = make_spec(design, d, tau=t, link=link)
            fit = fit_rq(spec)
            resid = quantile_residuals(fit)
            names = ["gamma", "lambda"] + list(formula.column_names)
            report = {
                "model": "rq-umw",
                "input": str(input_path),
                "formula": formula_text,
                "tau": t,
                "link": link,
                "n": d.n,
                "dropped_rows": dropped,
                **_inference_block(fit, names),
                "coefficients": _coefficient_rows(fit, names),
                "loglik": fit.loglik,
                "criteria": _criteria_block(fit),
                "r2_g": r2_generalized(fit.loglik, null_loglik, d.n),
                "residual_ad_statistic": resid.ad_statistic,
                "residual_ad_p": resid.ad_p_value,
                "residual_ad_variant": resid.ad_variant,
                "converged": fit.converged,
                "iterations": fit.iterations,
                "message": fit.message,
            }
            reports.append((t, report, fit, resid))

        if len(reports) == 1:
            _, report, fit, resid = reports[0]
            _write_json(report, output)
            _stderr_table(fit, ["gamma", "lambda"] + list(formula.column_names))
            if emit_plot_data:
                _emit_reg_plot_data(_plot_stem(output), fit, resid, seed, threads)
        else:
            if output:
                stem, ext = os.path.splitext(output)
                for t, report, fit, resid in reports:
                    _write_json(report, f"{stem}_tau{t:g}{ext or '.json'}")
                    if emit_plot_data:
                        _emit_reg_plot_data(f"{stem}_tau{t:g}", fit, resid, seed, threads)
            else:
                _write_json([r for _, r, _, _ in reports], None)

    _guarded(body)


def _coefficient_rows(fit, names):
    rows = []
    se_ok = fit.std_errors is not None
    for i, nm in enumerate(names):
        row = {"name": nm, "estimate": float(fit.estimates[i])}
        if se_ok and not np.isnan(fit.std_errors[i]):
            w = wald_test(fit, i, 0.0)
            row["std_error"] = float(fit.std_errors[i])
            row["wald_statistic"] = w.statistic
            row["p_value"] = w.p_value
        else:
            row["std_error"] = None
            row["wald_statistic"] = None
            row["p_value"] = None
        rows.append(row)
    return rows


def _emit_reg_plot_data(stem, fit, resid, seed, threads):
    with open(f"{stem}_residuals.csv", "w", encoding="utf-8") as fh:
        fh.write("index,residual,fitted_quantile\n")
        for i, (rv, mv) in enumerate(zip(resid.residuals, fit.mu), start=1):
            fh.write(f"{i},{float(rv)!r},{float(mv)!r}\n")
    sorted_r = np.sort(resid.residuals)
    n = sorted_r.size
    from scipy.special import ndtri
    theo = ndtri((np.arange(1, n + 1) - 0.5) / n)
    with open(f"{stem}_qq.csv", "w", encoding="utf-8") as fh:
        fh.write("theoretical,empirical\n")
        for tq, eq in zip(theo, sorted_r):
            fh.write(f"{float(tq)!r},{float(eq)!r}\n")
    bands = simulated_envelope(fit, n_sim=100, level=0.95, seed=seed, threads=threads)
    with open(f"{stem}_envelope.csv", "w", encoding="utf-8") as fh:
        fh.write("position,observed,lower,median,upper\n")
        for i in range(n):
            fh.write(f"{i + 1},{float(bands.sorted_residuals[i])!r},{float(bands.lower[i])!r},"
                     f"{float(bands.median[i])!r},{float(bands.upper[i])!r}\n")


# ---------------------------------------------------------------- simulate --

@main.command("simulate")
@click.option("--preset", default=None,
              help="Built-in scenario name (e.g. dist-scenario1).")
@click.option("--input", "input_path", type=click.Path(), default=None,
              help="Scenario file (key = value lines).")
@click.option("--replicates", type=int, default=None, help="Override replicate count.")
@click.option("--seed", type=int, default=None, help="Override base seed.")
@click.option("--n", "n_override", default=None,
              help="Override sample-size grid (comma-separated).")
@click.option("--tau", "tau_override", default=None,
              help="Override quantile grid (comma-separated, regression only).")
@click.option("--threads", type=int, default=1, envvar="UMWKIT_THREADS", show_default=True)
@click.option("--output", type=click.Path(), default=None, help="Report CSV path.")
@click.option("--emit-plot-data", is_flag=True,
              help="Also dump per-replicate estimates next to --output.")
def simulate_cmd(preset, input_path, replicates, seed, n_override, tau_override,
                 threads, output, emit_plot_data):
    """Run a Monte Carlo study and emit the bias/MSE/coverage table."""
    if (preset is None) == (input_path is None):
        raise click.UsageError("give exactly one of --preset or --input")
    if emit_plot_data and not output:
        raise click.UsageError("--emit-plot-data requires --output")

    def body():
        if preset is not None:
            presets = preset_scenarios()
            if preset not in presets:
                raise DomainError(
                    f"unknown preset {preset!r}; available: {', '.join(sorted(presets))}"
                )
            scenario = presets[preset]
        else:
            scenario = load_scenario(input_path)
        updates = {}
        if replicates is not None:
            updates["replicates"] = replicates
        if seed is not None:
            updates["base_seed"] = seed
        if n_override is not None:
            updates["sample_sizes"] = tuple(int(v) for v in n_override.split(","))
        if tau_override is not None:
            if scenario.kind != "regression":
                raise DomainError("--tau only applies to regression scenarios")
            updates["quantile_levels"] = tuple(float(v) for v in tau_override.split(","))
        if updates:
            scenario = dataclasses.replace(scenario, **updates)
        report = run_study(scenario, threads=threads, collect_estimates=emit_plot_data)
        _write_text(report_to_csv(report), output)
        if emit_plot_data:
            with open(f"{_plot_stem(output)}_estimates.csv", "w", encoding="utf-8") as fh:
                fh.write(estimates_to_csv(report))
        click.echo(
            f"{scenario.name}: {scenario.replicates} replicates x "
            f"{len(scenario.sample_sizes)} sample size(s) done", err=True,
        )

    _guarded(body)


# ------------------------------------------------------------------ sample --

@main.command("sample")
@click.option("--alpha", type=float, required=True)
@click.option("--gamma", type=float, required=True)
@click.option("--lambda", "lam", type=float, required=True)
@click.option("--n", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--output", type=click.Path(), default=None, help="CSV path (default stdout).")
def sample_cmd(alpha, gamma, lam, n, seed, output):
    """Draw random variates and write them one per line."""

    def body():
        p = UmwParams(alpha, gamma, lam)
        draws = sample(p, n, seed)
        lines = "y\n" + "".join(f"{float(v)!r}\n" for v in draws)
        _write_text(lines, output)

    _guarded(body)


if __name__ == "__main__":
    main()
