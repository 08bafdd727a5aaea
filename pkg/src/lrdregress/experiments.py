"""Config-driven experiment runner.

An experiment is described by a flat INI file with typed sections (schema
below), runs deterministically from a single master seed, and emits CSV
tables plus a plain-text summary. The master seed fans out via
``derive_seed(seed, role)`` to one child seed per role (errors, predictors)
and via per-(d, h, replicate) substreams inside the simulators, so any
subset of an experiment can be reproduced independently.

Config schema (all keys optional unless noted)::

    [experiment]
    id = table1            experiment identifier (used in file names)
    kind = table           table | cv | rates | conditions | simulate
    n = 100                sample size per replicate
    replicates = 500
    seed = 1               master seed
    workers = 1            process-level parallelism over replicates

    [errors]
    law = gaussian         innovation law: gaussian | uniform
    d_values = 0.0, 0.1    fractional-differencing ladder
    scale = 1.0            multiplier applied to the simulated errors
    normalization = innovation   innovation (raw filter, variance grows
                           with d) | marginal (unit variance for every d)
    truncation = 0         MA truncation; 0 means max(5000, n)

    [predictors]
    mode = iid             iid | lrd
    d_x = 0.3              predictor memory (lrd mode)

    [model]
    true_function = sin2pi
    kernel = epanechnikov

    [bandwidth]
    h_values = 0.05, 1.0   explicit bandwidths (table kind)
    grid_points = 25       automatic grid size (cv / rates kinds)
    grid_spread = 5.0      grid spans [h_opt/spread, h_opt*spread]
    leave_out = 0          cross-validation leave-out radius

    [rates]
    n_ladder = 200, 400, 800, 1600, 3200
    alphas = 0.9, 0.3

    [conditions]
    alpha = 0.4
    alpha_x = 1.0
    beta = 0.2             bandwidth rule h(n) = n^(-beta)
    seeds = 100
"""

import configparser
import csv
import hashlib
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .conditions import (
    BandwidthRule,
    check_bandwidth_conditions,
    check_negligibility,
    check_var_linear_growth,
)
from .innovations import InnovationSpec, derive_seed
from .processes import PredictorSpec, ProcessSpec
from .risk import (
    build_theory_constants,
    cv_criterion,
    default_h_grid,
    integrated_squared_error,
    minimize_over_grid,
)
from .samples import make_sample
from .slopes import fit_loglog_slope

_ROLE_ERRORS = 1
_ROLE_PREDICTORS = 2

KINDS = ("table", "cv", "rates", "conditions", "simulate")

_DEFAULT_D_LADDER = (0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment_id: str = "exp"
    kind: str = "table"
    n: int = 100
    replicates: int = 500
    seed: int = 1
    workers: int = 1
    innovation_law: str = "gaussian"
    d_values: tuple = _DEFAULT_D_LADDER
    error_scale: float = 1.0
    error_normalization: str = "innovation"
    truncation: int = 0
    predictor_mode: str = "iid"
    d_x: float = 0.3
    true_function: str = "sin2pi"
    kernel: str = "epanechnikov"
    h_values: tuple = (0.05, 1.0)
    h_grid_points: int = 25
    h_grid_spread: float = 5.0
    leave_out: int = 0
    n_ladder: tuple = (200, 400, 800, 1600, 3200)
    alphas: tuple = (0.9, 0.3)
    condition_alpha: float = 0.4
    condition_alpha_x: float = 1.0
    condition_beta: float = 0.3
    condition_seeds: int = 100

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.n < 2 or self.replicates < 1:
            raise ValueError("need n >= 2 and replicates >= 1")
        if any(not (0.0 <= d < 0.5) for d in self.d_values):
            raise ValueError("every d must lie in [0, 0.5)")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.error_normalization not in ("innovation", "marginal"):
            raise ValueError("error_normalization must be 'innovation' or 'marginal'")

    @property
    def error_scaling(self):
        # "innovation" matches classical fractional-noise generators (raw
        # filter, marginal variance grows with d); "marginal" rescales every
        # d to unit error variance.
        return "unit-innovation" if self.error_normalization == "innovation" else "unit-variance"

    def error_spec(self, d):
        trunc = self.truncation if self.truncation else None
        return ProcessSpec.from_d(
            "farima",
            d,
            innovation=InnovationSpec(self.innovation_law, derive_seed(self.seed, _ROLE_ERRORS)),
            truncation=trunc,
            burn_in=trunc,
            scaling=self.error_scaling,
        )

    def predictor_spec(self):
        seed = derive_seed(self.seed, _ROLE_PREDICTORS)
        if self.predictor_mode == "iid":
            return PredictorSpec(mode="iid", innovation=InnovationSpec("gaussian", seed))
        return PredictorSpec.from_d(self.d_x, innovation=InnovationSpec("gaussian", seed))


def _tuple_of(text, cast):
    text = text.strip()
    if not text:
        return ()
    return tuple(cast(tok.strip()) for tok in text.split(","))


def parse_config(text):
    """Parse the INI schema into an :class:`ExperimentConfig`."""
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ValueError(f"malformed config: {exc}") from exc
    kwargs = {}

    def grab(section, option, cast, key):
        if parser.has_option(section, option):
            raw = parser.get(section, option)
            try:
                kwargs[key] = cast(raw)
            except (TypeError, ValueError) as exc:
                raise ValueError(f"config field [{section}] {option}: {exc}") from exc

    grab("experiment", "id", str, "experiment_id")
    grab("experiment", "kind", str, "kind")
    grab("experiment", "n", int, "n")
    grab("experiment", "replicates", int, "replicates")
    grab("experiment", "seed", int, "seed")
    grab("experiment", "workers", int, "workers")
    grab("errors", "law", str, "innovation_law")
    grab("errors", "d_values", lambda t: _tuple_of(t, float), "d_values")
    grab("errors", "scale", float, "error_scale")
    grab("errors", "normalization", str, "error_normalization")
    grab("errors", "truncation", int, "truncation")
    grab("predictors", "mode", str, "predictor_mode")
    grab("predictors", "d_x", float, "d_x")
    grab("model", "true_function", str, "true_function")
    grab("model", "kernel", str, "kernel")
    grab("bandwidth", "h_values", lambda t: _tuple_of(t, float), "h_values")
    grab("bandwidth", "grid_points", int, "h_grid_points")
    grab("bandwidth", "grid_spread", float, "h_grid_spread")
    grab("bandwidth", "leave_out", int, "leave_out")
    grab("rates", "n_ladder", lambda t: _tuple_of(t, int), "n_ladder")
    grab("rates", "alphas", lambda t: _tuple_of(t, float), "alphas")
    grab("conditions", "alpha", float, "condition_alpha")
    grab("conditions", "alpha_x", float, "condition_alpha_x")
    grab("conditions", "beta", float, "condition_beta")
    grab("conditions", "seeds", int, "condition_seeds")
    return ExperimentConfig(**kwargs)


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


def config_to_text(config):
    """Canonical INI serialization; parse(config_to_text(c)) == c."""
    fmt = lambda xs: ", ".join(repr(x) if isinstance(x, float) else str(x) for x in xs)
    lines = [
        "[experiment]",
        f"id = {config.experiment_id}",
        f"kind = {config.kind}",
        f"n = {config.n}",
        f"replicates = {config.replicates}",
        f"seed = {config.seed}",
        f"workers = {config.workers}",
        "",
        "[errors]",
        f"law = {config.innovation_law}",
        f"d_values = {fmt(config.d_values)}",
        f"scale = {config.error_scale!r}",
        f"normalization = {config.error_normalization}",
        f"truncation = {config.truncation}",
        "",
        "[predictors]",
        f"mode = {config.predictor_mode}",
        f"d_x = {config.d_x!r}",
        "",
        "[model]",
        f"true_function = {config.true_function}",
        f"kernel = {config.kernel}",
        "",
        "[bandwidth]",
        f"h_values = {fmt(config.h_values)}",
        f"grid_points = {config.h_grid_points}",
        f"grid_spread = {config.h_grid_spread!r}",
        f"leave_out = {config.leave_out}",
        "",
        "[rates]",
        f"n_ladder = {fmt(config.n_ladder)}",
        f"alphas = {fmt(config.alphas)}",
        "",
        "[conditions]",
        f"alpha = {config.condition_alpha!r}",
        f"alpha_x = {config.condition_alpha_x!r}",
        f"beta = {config.condition_beta!r}",
        f"seeds = {config.condition_seeds}",
        "",
    ]
    return "\n".join(lines)


@dataclass(frozen=True)
class ExperimentReport:
    kind: str
    experiment_id: str
    header: tuple
    rows: tuple
    summary: tuple
    config_text: str
    seed: int

    @property
    def config_hash(self):
        return hashlib.sha256(self.config_text.encode()).hexdigest()


def _constants_for(config, d, n=None):
    n = n or config.n
    from .coefficients import farima_coeffs

    alpha = 1.0 - 2.0 * d
    coeffs = None
    if d > 0:
        coeffs = farima_coeffs(d, max(5000, n))
        if config.error_scaling == "unit-variance":
            coeffs = coeffs.normalized()
    pred_coeffs = None
    alpha_x = 1.0
    if config.predictor_mode == "lrd":
        alpha_x = 1.0 - 2.0 * config.d_x
        pred_coeffs = config.predictor_spec().coefficients(n)
    return build_theory_constants(
        config.true_function,
        "standard-normal",
        error_coeffs=coeffs,
        alpha=alpha,
        predictor_coeffs=pred_coeffs,
        alpha_x=alpha_x,
        n_ref=n,
    )


def _map_ordered(fn, items, workers):
    if workers <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (workers * 4))))


def _table_cell(args):
    config, d, d_idx, h, h_idx, rep, constants = args
    sample = make_sample(
        config.n,
        config.true_function,
        config.error_spec(d),
        config.predictor_spec(),
        stream=(d_idx, h_idx, rep),
        error_scale=config.error_scale,
    )
    ise, flags = integrated_squared_error(sample, config.kernel, h, constants)
    ise_star, flags_star = integrated_squared_error(
        sample, config.kernel, h, constants, shape=True
    )
    return ise, ise_star, flags + flags_star


def run_table_experiment(config, return_replicates=False):
    """Monte Carlo weighted-ISE table over the (d, h) ladder.

    For every (d, h) cell, ``replicates`` fresh samples are simulated and
    the trapezoid-discretized weighted squared error of the local-average
    and shape estimators is averaged.
    """
    rows = []
    per_rep = {}
    for d_idx, d in enumerate(config.d_values):
        constants = _constants_for(config, d)
        for h_idx, h in enumerate(config.h_values):
            args = [
                (config, d, d_idx, h, h_idx, rep, constants)
                for rep in range(config.replicates)
            ]
            cells = _map_ordered(_table_cell, args, config.workers)
            ises = np.array([c[0] for c in cells])
            stars = np.array([c[1] for c in cells])
            flags = np.array([c[2] for c in cells])
            if return_replicates:
                per_rep[(d, h)] = (ises, stars)
            se = float(np.std(ises) / np.sqrt(ises.size))
            se_star = float(np.std(stars) / np.sqrt(stars.size))
            rows.append(
                (
                    float(d),
                    float(h),
                    float(np.mean(ises)),
                    float(np.mean(stars)),
                    se,
                    se_star,
                    float(np.mean(flags)),
                )
            )
    report = ExperimentReport(
        kind="table",
        experiment_id=config.experiment_id,
        header=("d", "h", "mise", "mise_star", "se_mise", "se_mise_star", "mean_flagged"),
        rows=tuple(rows),
        summary=(
            f"replicates = {config.replicates}",
            f"n = {config.n}",
            f"predictors = {config.predictor_mode}",
        ),
        config_text=config_to_text(config),
        seed=config.seed,
    )
    return (report, per_rep) if return_replicates else report


def run_cv_experiment(config):
    """Per-d summary of the cross-validation criterion at its own minimizer."""
    rows = []
    for d_idx, d in enumerate(config.d_values):
        alpha = 1.0 - 2.0 * d
        constants = _constants_for(config, d)
        h_grid = default_h_grid(
            config.n,
            alpha,
            constants,
            config.kernel,
            points=config.h_grid_points,
            spread=config.h_grid_spread,
        )
        espec = config.error_spec(d)
        pspec = config.predictor_spec()
        cv_min = np.empty(config.replicates)
        h_min = np.empty(config.replicates)
        skipped = np.empty(config.replicates)
        for rep in range(config.replicates):
            sample = make_sample(
                config.n,
                config.true_function,
                espec,
                pspec,
                stream=(d_idx, 0, rep),
                error_scale=config.error_scale,
            )
            values = []
            skip = 0
            for h in h_grid:
                res = cv_criterion(
                    sample, config.kernel, h, leave_out=config.leave_out, support=constants.support
                )
                values.append(res.value)
                skip = max(skip, res.n_skipped)
            h_sel, _ = minimize_over_grid(values, h_grid)
            cv_min[rep] = min(values)
            h_min[rep] = h_sel
            skipped[rep] = skip
        rows.append(
            (
                float(d),
                float(np.mean(cv_min)),
                float(np.std(cv_min) / np.sqrt(config.replicates)),
                float(np.median(h_min)),
                float(np.quantile(h_min, 0.25)),
                float(np.quantile(h_min, 0.75)),
                float(np.mean(skipped)),
            )
        )
    return ExperimentReport(
        kind="cv",
        experiment_id=config.experiment_id,
        header=("d", "cv_mean", "cv_se", "h_cv_median", "h_cv_q25", "h_cv_q75", "mean_skipped"),
        rows=tuple(rows),
        summary=(f"leave_out = {config.leave_out}", f"n = {config.n}"),
        config_text=config_to_text(config),
        seed=config.seed,
    )


def run_rate_study(config, h_points=9, h_spread=2.5):
    """Monte Carlo risk at the empirically optimal bandwidth over an n-ladder.

    For each memory exponent and each n, the replicate-averaged weighted ISE
    is minimized over a bandwidth grid centered on the theoretical optimum;
    the log-log slope of that minimum against n estimates the risk decay
    rate for both the local-average and the shape estimator.
    """
    if len(config.n_ladder) < 4:
        raise ValueError("rate study needs an n-ladder of at least 4 sizes")
    rows = []
    slopes = []
    for alpha in config.alphas:
        d = (1.0 - alpha) / 2.0
        mise_by_n = []
        star_by_n = []
        for n in config.n_ladder:
            constants = _constants_for(config, d, n=n)
            h_grid = default_h_grid(n, alpha, constants, config.kernel, points=h_points, spread=h_spread)
            espec = config.error_spec(d)
            pspec = config.predictor_spec()
            ises = np.zeros((config.replicates, h_grid.size))
            stars = np.zeros((config.replicates, h_grid.size))
            for rep in range(config.replicates):
                sample = make_sample(
                    n, config.true_function, espec, pspec, stream=(int(n), 0, rep),
                    error_scale=config.error_scale,
                )
                for j, h in enumerate(h_grid):
                    ises[rep, j] = integrated_squared_error(sample, config.kernel, h, constants)[0]
                    stars[rep, j] = integrated_squared_error(
                        sample, config.kernel, h, constants, shape=True
                    )[0]
            mean_ise = ises.mean(axis=0)
            mean_star = stars.mean(axis=0)
            j_min = int(np.argmin(mean_ise))
            j_star = int(np.argmin(mean_star))
            mise_by_n.append(mean_ise[j_min])
            star_by_n.append(mean_star[j_star])
            rows.append((alpha, "regression", int(n), float(mean_ise[j_min]), float(h_grid[j_min])))
            rows.append((alpha, "shape", int(n), float(mean_star[j_star]), float(h_grid[j_star])))
        ns = np.asarray(config.n_ladder, dtype=float)
        fit = fit_loglog_slope(ns, np.asarray(mise_by_n))
        fit_star = fit_loglog_slope(ns, np.asarray(star_by_n))
        slopes.append(f"alpha = {alpha!r}: regression slope = {fit.slope!r}, shape slope = {fit_star.slope!r}")
    return ExperimentReport(
        kind="rates",
        experiment_id=config.experiment_id,
        header=("alpha", "estimator", "n", "mise_opt", "h_at_min"),
        rows=tuple(rows),
        summary=tuple(slopes),
        config_text=config_to_text(config),
        seed=config.seed,
    )


def run_condition_study(config):
    """Analytic bandwidth-condition verdicts plus Monte Carlo checks."""
    alpha = config.condition_alpha
    rule = BandwidthRule(scale=1.0, exponent=config.condition_beta)
    verdicts = list(
        check_bandwidth_conditions(alpha, config.condition_alpha_x, rule).values()
    )
    spec = ProcessSpec.from_d(
        "farima",
        (1.0 - alpha) / 2.0,
        innovation=InnovationSpec(config.innovation_law, derive_seed(config.seed, _ROLE_ERRORS)),
    )
    verdicts.append(
        check_negligibility(spec, rule, seeds=config.condition_seeds)
    )
    verdicts.append(check_var_linear_growth(spec, reps=config.condition_seeds))
    rows = []
    for verdict in verdicts:
        for row in verdict.to_rows():
            rows.append(row)
    return ExperimentReport(
        kind="conditions",
        experiment_id=config.experiment_id,
        header=("condition", "n", "statistic", "exponent", "verdict"),
        rows=tuple(rows),
        summary=(
            f"alpha = {alpha!r}, alpha_x = {config.condition_alpha_x!r}, beta = {config.condition_beta!r}",
        ),
        config_text=config_to_text(config),
        seed=config.seed,
    )


def run_simulate(config):
    """Emit one raw sample per d value (columns: d, index, x, y, eps)."""
    rows = []
    for d_idx, d in enumerate(config.d_values):
        sample = make_sample(
            config.n,
            config.true_function,
            config.error_spec(d),
            config.predictor_spec(),
            stream=(d_idx, 0, 0),
            error_scale=config.error_scale,
        )
        for i in range(sample.n):
            rows.append((float(d), i + 1, float(sample.x[i]), float(sample.y[i]), float(sample.meta.errors[i])))
    return ExperimentReport(
        kind="simulate",
        experiment_id=config.experiment_id,
        header=("d", "index", "x", "y", "eps"),
        rows=tuple(rows),
        summary=(f"n = {config.n}",),
        config_text=config_to_text(config),
        seed=config.seed,
    )


RUNNERS = {
    "table": run_table_experiment,
    "cv": run_cv_experiment,
    "rates": run_rate_study,
    "conditions": run_condition_study,
    "simulate": run_simulate,
}


def run_experiment(config):
    return RUNNERS[config.kind](config)


def _format_cell(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_report(report, out_dir):
    """Write ``<id>_<kind>.csv`` and ``<id>_summary.txt``; byte-deterministic."""
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{report.experiment_id}_{report.kind}.csv")
    with open(csv_path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(report.header)
        for row in report.rows:
            writer.writerow([_format_cell(v) for v in row])
    summary_path = os.path.join(out_dir, f"{report.experiment_id}_summary.txt")
    with open(summary_path, "w", newline="\n") as fh:
        fh.write(f"experiment: {report.experiment_id}\n")
        fh.write(f"kind: {report.kind}\n")
        fh.write(f"seed: {report.seed}\n")
        fh.write(f"config_sha256: {report.config_hash}\n")
        fh.write(f"package_version: {__version__}\n")
        for line in report.summary:
            fh.write(line + "\n")
        fh.write("--- config ---\n")
        fh.write(report.config_text)
    return csv_path, summary_path


def _parse_cell(token):
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        return token


def read_report(csv_path, summary_path):
    """Parse emitted files back into an :class:`ExperimentReport`."""
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        rows = tuple(tuple(_parse_cell(tok) for tok in row) for row in reader)
    with open(summary_path) as fh:
        text = fh.read()
    head, _, config_text = text.partition("--- config ---\n")
    meta = {}
    summary = []
    for line in head.splitlines():
        key, sep, value = line.partition(": ")
        if sep and key in ("experiment", "kind", "seed", "config_sha256", "package_version"):
            meta[key] = value
        else:
            summary.append(line)
    return ExperimentReport(
        kind=meta["kind"],
        experiment_id=meta["experiment"],
        header=header,
        rows=rows,
        summary=tuple(summary),
        config_text=config_text,
        seed=int(meta["seed"]),
    )
