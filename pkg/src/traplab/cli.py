"""Command-line interface: ``traplab <subcommand> [options]``.

Every option can also be set through an environment variable named
``TRAPLAB_<SUBCOMMAND>_<OPTION>`` (e.g. ``TRAPLAB_EVAL_ALPHA``); flags win
over the environment, which wins over defaults.
"""

from __future__ import annotations

import functools
import io
import json
import math
import sys

import click
import numpy as np

from . import __version__
from .dataio import (
    SchemaConfig,
    dumps,
    load_csv,
    shortfalls,
    write_csv,
    group_records,
)
from .errors import TraplabError
from .estimate import fit
from .gerbershiu import (
    conditional_expected_trapping_time,
    deficit_cdf_conditional,
    deficit_cdf_discounted,
    expected_trapping_time,
    laplace_trapping_time,
    trapping_probability,
)
from .gof import ESTIMATORS, gof_report, ks_statistic, r_squared
from .model import ModelParams, SimConfig, monte_carlo
from .poverty import TIE_POLICY, fgt_empirical, fgt_from_b1, headcount


def parse_grid(spec: str):
    """``min:max:steps`` -> evenly spaced grid including both ends."""
    try:
        lo, hi, steps = spec.split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError:
        raise click.BadParameter(f"expected min:max:steps, got {spec!r}")
    if steps < 1 or hi < lo:
        raise click.BadParameter(f"invalid grid {spec!r}")
    if steps == 1:
        return [lo]
    return np.linspace(lo, hi, steps).tolist()


def _emit(text: str, output):
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _fail(exc: Exception, code: int = 1):
    err = {"error": type(exc).__name__, "message": str(exc)}
    click.echo(json.dumps(err, sort_keys=True), err=True)
    sys.exit(code)


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except TraplabError as exc:
            _fail(exc)
        except (OSError, json.JSONDecodeError) as exc:
            _fail(exc)

    return wrapper


def model_options(fn):
    opts = [
        click.option("--r", "r", type=float, default=1.0, show_default=True, help="Capital growth rate."),
        click.option("--lambda", "lam", type=float, default=1.0, show_default=True, help="Loss intensity."),
        click.option("--alpha", type=float, default=1.25, show_default=True, help="Beta(alpha, 1) shape."),
        click.option("--xstar", "x_star", type=float, default=1.0, show_default=True, help="Critical capital."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def sim_options(fn):
    opts = [
        click.option("--paths", type=int, default=10_000, show_default=True),
        click.option("--seed", type=int, default=0, show_default=True),
        click.option("--horizon", type=float, default=None),
        click.option("--eps", type=float, default=1e-6, show_default=True, help="Censoring level for psi."),
        click.option("--threads", type=int, default=1, show_default=True),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _params(r, lam, alpha, x_star) -> ModelParams:
    try:
        return ModelParams(r=r, lam=lam, alpha=alpha, x_star=x_star)
    except TraplabError as exc:
        raise click.BadParameter(str(exc))


def _safe(fn, *args):
    try:
        return fn(*args)
    except TraplabError:
        return math.nan


class TraplabGroup(click.Group):
    """Group whose usage errors also carry a JSON error line on stderr."""

    def main(self, *args, standalone_mode=True, **kwargs):
        if not standalone_mode:
            return super().main(*args, standalone_mode=False, **kwargs)
        try:
            rv = super().main(*args, standalone_mode=False, **kwargs)
        except click.ClickException as exc:
            exc.show()
            _fail(exc, exc.exit_code)
        except click.Abort as exc:
            _fail(exc)
        sys.exit(rv if isinstance(rv, int) else 0)


@click.group(cls=TraplabGroup, context_settings={"auto_envvar_prefix": "TRAPLAB", "show_default": True})
@click.version_option(__version__)
def main():
    """Household capital trapping: closed forms, simulation and B1 poverty fits."""


# ---------------------------------------------------------------------------
# eval


@main.command("eval")
@model_options
@click.option("--delta", type=float, default=0.0)
@click.option("--x-grid", "x_grid", default="1:5:9", help="min:max:steps in capital units.")
@click.option("--deficit", "deficit_level", type=float, default=None, help="Deficit level y (default x*/2).")
@click.option("--format", "fmt_", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@handle_errors
def cmd_eval(r, lam, alpha, x_star, delta, x_grid, deficit_level, fmt_, output):
    """Evaluate closed forms over a capital grid."""
    p = _params(r, lam, alpha, x_star)
    if delta < 0:
        raise click.BadParameter("--delta must be >= 0")
    xs = parse_grid(x_grid)
    if xs[0] < x_star:
        raise click.BadParameter("--x-grid must start at or above --xstar")
    y_def = 0.5 * x_star if deficit_level is None else deficit_level
    cols = ["x", "psi", "laplace", "expected_tau", "expected_tau_given_trapped", "deficit_cdf_discounted"]
    rows = []
    for x in xs:
        rows.append([
            x,
            trapping_probability(x, p),
            laplace_trapping_time(x, p, delta),
            _safe(expected_trapping_time, x, p),
            _safe(conditional_expected_trapping_time, x, p),
            deficit_cdf_discounted(y_def, x, p, delta),
        ])
    if fmt_ == "csv":
        buf = io.StringIO()
        write_csv(buf, cols, rows)
        _emit(buf.getvalue(), output)
        return
    doc = {
        "params": {"r": r, "lambda": lam, "alpha": alpha, "x_star": x_star, "delta": delta,
                   "deficit_level": y_def},
        "net_condition": p.net_condition,
        "notes": [] if p.net_condition else ["alpha <= lambda/r: psi set to 1, expected times undefined"],
        "rows": [dict(zip(cols, row)) for row in rows],
    }
    _emit(dumps(doc), output)


# ---------------------------------------------------------------------------
# simulate


@main.command("simulate")
@model_options
@sim_options
@click.option("--x0", type=float, default=None, help="Initial capital (default 1.25 x*).")
@click.option("--delta", type=float, default=0.0)
@click.option("--samples", type=click.Path(dir_okay=False), default=None, help="CSV of trapped events.")
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@handle_errors
def cmd_simulate(r, lam, alpha, x_star, paths, seed, horizon, eps, threads, x0, delta, samples, output):
    """Monte Carlo simulation of trapping from x0."""
    p = _params(r, lam, alpha, x_star)
    x0 = 1.25 * x_star if x0 is None else x0
    cfg = SimConfig(n_paths=paths, seed=seed, horizon=horizon, upper_barrier_prob=eps)
    s = monte_carlo(x0, p, cfg, delta=delta, workers=threads)
    doc = {
        "params": {"r": r, "lambda": lam, "alpha": alpha, "x_star": x_star, "x0": x0, "delta": delta,
                   "paths": paths, "seed": seed, "horizon": horizon, "eps": eps},
        "summary": s.to_dict(),
        "closed_form": {
            "psi": trapping_probability(x0, p),
            "laplace": laplace_trapping_time(x0, p, delta),
            "expected_tau": _safe(expected_trapping_time, x0, p),
        },
    }
    if samples:
        write_csv(
            samples,
            ["tau", "surplus_before", "deficit"],
            zip(s.tau_samples, s.surplus_samples, s.deficit_samples),
        )
    _emit(dumps(doc), output)


# ---------------------------------------------------------------------------
# microdata commands


def data_options(fn):
    opts = [
        click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True),
        click.option("--schema", "schema_path", type=click.Path(exists=True, dir_okay=False), default=None),
        click.option("--xstar", "x_star", type=float, default=None,
                     help="Poverty line (default from the schema unit: 421 daily, 153530 annual)."),
        click.option("--group-by", type=click.Choice(["none", "region", "area"]), default="none"),
        click.option("--output", type=click.Path(dir_okay=False), default=None),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _load(input_path, schema_path, x_star):
    schema = SchemaConfig.from_json(schema_path) if schema_path else SchemaConfig()
    loaded = load_csv(input_path, schema)
    line = schema.default_poverty_line if x_star is None else x_star
    return schema, loaded, line


def _direct(recs, line):
    cons = [r.consumption for r in recs]
    w = [r.weight for r in recs]
    out = {}
    for tag, weights in (("unweighted", None), ("weighted", w)):
        out[tag] = {
            "headcount": headcount(cons, weights, line),
            "fgt1": fgt_empirical(cons, weights, gamma=1.0, x_star=line),
            "fgt2": fgt_empirical(cons, weights, gamma=2.0, x_star=line),
        }
    return out


def _base_doc(schema, loaded, line, group_by):
    return {
        "params": {"x_star": line, "unit": schema.unit, "group_by": group_by, "tie_policy": TIE_POLICY},
        "n_records": len(loaded.records),
        "rejects": [{"line": rj.line, "reason": rj.reason} for rj in loaded.rejects],
        "groups": {},
    }


@main.command("fit")
@data_options
@click.option("--nboot", type=int, default=9999)
@click.option("--seed", type=int, default=0)
@click.option("--min-size", type=int, default=30)
@click.option("--threads", type=int, default=1)
@handle_errors
def cmd_fit(input_path, schema_path, x_star, group_by, output, nboot, seed, min_size, threads):
    """Fit the B1 short-fall model per group: alpha, KS p-value, R^2 and FGT indices."""
    schema, loaded, line = _load(input_path, schema_path, x_star)
    gb = None if group_by == "none" else group_by
    doc = _base_doc(schema, loaded, line, group_by)
    groups = group_records(loaded.records, gb)
    samples = shortfalls(loaded.records, line, gb)
    seeds = np.random.SeedSequence(seed).spawn(len(samples))
    for (key, s), ss in zip(samples.items(), seeds):
        recs = groups[key]
        entry = {"n_records": len(recs), "n_poor": s.n, "direct": _direct(recs, line), "flags": []}
        if s.n == 0:
            entry["flags"].append("no poor households")
            doc["groups"][key] = entry
            continue
        rep = fit(s, min_size)
        entry["fit"] = rep.to_dict()
        entry["flags"].extend(rep.flags)
        h = entry["direct"]["unweighted"]["headcount"]
        for name, seed_e in zip(ESTIMATORS, ss.spawn(len(ESTIMATORS))):
            try:
                g = gof_report(s, name, nboot, seed_e, threads)
                gd = g.to_dict()
            except TraplabError as exc:
                gd = {"error": str(exc)}
                entry["flags"].append(f"gof-{name}: {exc}")
            a = rep.alpha_mle if name == "mle" else rep.alpha_mme
            gd.update(
                alpha=a,
                fgt1=fgt_from_b1(a, h, 1.0, line),
                fgt2=fgt_from_b1(a, h, 2.0, line),
            )
            entry[name] = gd
        doc["groups"][key] = entry
    _emit(dumps(doc), output)


@main.command("gof")
@data_options
@click.option("--alpha", type=float, default=None, help="Test this alpha instead of the fitted one (no p-value).")
@click.option("--estimator", type=click.Choice(sorted(ESTIMATORS)), default="mle")
@click.option("--nboot", type=int, default=9999)
@click.option("--seed", type=int, default=0)
@click.option("--threads", type=int, default=1)
@handle_errors
def cmd_gof(input_path, schema_path, x_star, group_by, output, alpha, estimator, nboot, seed, threads):
    """KS statistic, bootstrap p-value and R^2 of the B1 fit per group."""
    schema, loaded, line = _load(input_path, schema_path, x_star)
    gb = None if group_by == "none" else group_by
    doc = _base_doc(schema, loaded, line, group_by)
    samples = shortfalls(loaded.records, line, gb)
    seeds = np.random.SeedSequence(seed).spawn(len(samples))
    for (key, s), ss in zip(samples.items(), seeds):
        if s.n == 0:
            doc["groups"][key] = {"n_poor": 0, "flags": ["no poor households"]}
            continue
        if alpha is not None:
            doc["groups"][key] = {
                "n_poor": s.n, "alpha": alpha,
                "d_stat": ks_statistic(s, alpha), "r_squared": r_squared(s, alpha),
            }
        else:
            doc["groups"][key] = {"n_poor": s.n, **gof_report(s, estimator, nboot, ss, threads).to_dict()}
    _emit(dumps(doc), output)


@main.command("fgt")
@click.option("--gamma", "gammas", type=float, multiple=True, default=(0.0, 1.0, 2.0))
@click.option("--alpha", type=float, default=None, help="B1 shape for the parametric index.")
@click.option("--headcount", "head", type=float, default=None, help="Head-count for the parametric index.")
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--schema", "schema_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--xstar", "x_star", type=float, default=None)
@click.option("--group-by", type=click.Choice(["none", "region", "area"]), default="none")
@click.option("--weighted/--unweighted", default=False)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@handle_errors
def cmd_fgt(gammas, alpha, head, input_path, schema_path, x_star, group_by, weighted, output):
    """FGT indices from microdata (empirical) or from a B1 shape and head-count."""
    doc = {"params": {"gamma": list(gammas), "tie_policy": TIE_POLICY}}
    if input_path is None and (alpha is None or head is None):
        raise click.UsageError("give --input, or both --alpha and --headcount")
    if alpha is not None and head is not None:
        line = 1.0 if x_star is None else x_star
        doc["b1"] = {
            "alpha": alpha, "headcount": head,
            "fgt": {format(g, "g"): fgt_from_b1(alpha, head, g, line) for g in gammas},
        }
    if input_path is not None:
        schema, loaded, line = _load(input_path, schema_path, x_star)
        gb = None if group_by == "none" else group_by
        doc["params"].update(x_star=line, unit=schema.unit, group_by=group_by, weighted=weighted)
        doc["empirical"] = {}
        for key, recs in group_records(loaded.records, gb).items():
            cons = [rr.consumption for rr in recs]
            w = [rr.weight for rr in recs] if weighted else None
            doc["empirical"][key] = {
                format(g, "g"): fgt_empirical(cons, w, gamma=g, x_star=line) for g in gammas
            }
    _emit(dumps(doc), output)


# ---------------------------------------------------------------------------
# plot data


@main.command("plotdata")
@model_options
@sim_options
@click.option("--kind", type=click.Choice(["psi", "laplace", "etime", "deficit"]), default="psi")
@click.option("--delta", type=float, default=0.0)
@click.option("--x-grid", "x_grid", default="1:3:5", help="Capital grid (deficit grid for --kind deficit).")
@click.option("--x0", type=float, default=None, help="Initial capital for --kind deficit (default 1.25 x*).")
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@handle_errors
def cmd_plotdata(r, lam, alpha, x_star, paths, seed, horizon, eps, threads, kind, delta, x_grid, x0, output):
    """Closed form next to Monte Carlo estimates, as CSV for plotting."""
    p = _params(r, lam, alpha, x_star)
    grid = parse_grid(x_grid)
    buf = io.StringIO()
    if kind == "deficit":
        x0 = 1.25 * x_star if x0 is None else x0
        cfg = SimConfig(n_paths=paths, seed=seed, horizon=horizon, upper_barrier_prob=eps)
        s = monte_carlo(x0, p, cfg, workers=threads)
        d = np.sort(s.deficit_samples)
        rows = []
        for y in grid:
            f = deficit_cdf_conditional(y, p)
            emp = np.searchsorted(d, y, side="right") / d.size if d.size else math.nan
            se = math.sqrt(f * (1.0 - f) / d.size) if d.size else math.nan
            rows.append([y, f, emp, se])
        write_csv(buf, ["y", "closed_form", "monte_carlo", "stderr"], rows)
        _emit(buf.getvalue(), output)
        return
    if grid[0] < x_star:
        raise click.BadParameter("--x-grid must start at or above --xstar")
    seeds = np.random.SeedSequence(seed).spawn(len(grid))
    rows = []
    for x, ss in zip(grid, seeds):
        cfg = SimConfig(n_paths=paths, seed=int(ss.generate_state(1, np.uint64)[0]), horizon=horizon,
                        upper_barrier_prob=eps)
        s = monte_carlo(x, p, cfg, delta=delta, workers=threads)
        if kind == "psi":
            rows.append([x, trapping_probability(x, p), s.psi_hat, s.se_psi])
        elif kind == "laplace":
            rows.append([x, laplace_trapping_time(x, p, delta), s.discounted_hat, s.se_discounted])
        else:
            rows.append([x, _safe(conditional_expected_trapping_time, x, p),
                         s.mean_tau_given_trapped, s.se_tau_given_trapped])
    write_csv(buf, ["x", "closed_form", "monte_carlo", "stderr"], rows)
    _emit(buf.getvalue(), output)


if __name__ == "__main__":  # pragma: no cover
    main()
