"""Numeric trend diagnostics for the rate conditions.

Conditions stated "in probability" are operationalized as seed-averaged
absolute statistics over a ladder of sample sizes, with a verdict read off
the fitted log-log slope (tolerance +-0.1 on the exponent). For bandwidth
rules of the form h(n) = c * n^(-beta) the four power conditions reduce to
exact exponent arithmetic, so those verdicts need no simulation at all.

Condition ids
-------------
``A``       (sqrt(nh)/n) |sum (E[eps_i|past] - eps_i)|  -> 0
``B1``      h n^{1-alpha}      -> 0   (regression estimator, error memory)
``B2``      h^5 n^{1-alpha}    -> 0   (shape estimator, error memory)
``C1``      h^5 n^{1-alpha_x}  -> 0   (regression estimator, predictor memory)
``C2``      h n^{1-alpha_x}    -> 0   (shape estimator, predictor memory)
``C6``      mixed-normalization shape condition, exponent
            (1 - beta - alpha - alpha_x)/2 for linear errors
``varO(n)`` Var(sum (E[eps_i|past] - eps_i)) grows at most linearly
"""

import csv
from dataclasses import dataclass

import numpy as np

from .processes import simulate_process
from .slopes import fit_loglog_slope
from .validation import check_count, check_positive

DEFAULT_N_LADDER = (256, 512, 1024, 2048, 4096, 8192)
EXPONENT_TOLERANCE = 0.1

TENDS_TO_ZERO = "tends-to-zero"
BOUNDED = "bounded"
DIVERGES = "diverges"


@dataclass(frozen=True)
class BandwidthRule:
    """Deterministic bandwidth sequence h(n) = scale * n^(-exponent)."""

    scale: float = 1.0
    exponent: float = 0.2

    def __post_init__(self):
        check_positive(self.scale, "scale")
        if self.exponent < 0:
            raise ValueError("bandwidth exponent must be >= 0 (h must not grow)")

    def __call__(self, n):
        return self.scale * float(n) ** (-self.exponent)


@dataclass(frozen=True, eq=False)
class ConditionVerdict:
    condition: str
    n_values: tuple
    statistics: tuple
    exponent: float
    verdict: str
    tolerance: float

    def to_rows(self):
        rows = []
        for n, stat in zip(self.n_values, self.statistics):
            rows.append((self.condition, n, stat, self.exponent, self.verdict))
        if not rows:
            rows.append((self.condition, "", "", self.exponent, self.verdict))
        return rows


def verdict_from_exponent(exponent, tolerance=EXPONENT_TOLERANCE):
    if exponent < -tolerance:
        return TENDS_TO_ZERO
    if exponent > tolerance:
        return DIVERGES
    return BOUNDED


def _analytic(condition, exponent):
    # exact exponent arithmetic: strict sign decides, no tolerance band
    return ConditionVerdict(
        condition=condition,
        n_values=(),
        statistics=(),
        exponent=float(exponent),
        verdict=verdict_from_exponent(exponent, tolerance=0.0),
        tolerance=0.0,
    )


def check_bandwidth_conditions(alpha, alpha_x, rule):
    """Exact trend verdicts for the four power conditions plus the mixed one.

    The flip boundaries are beta = 1 - alpha for the first-order conditions
    and beta = (1 - alpha)/5 for the fifth-power ones (same with alpha_x).
    """
    beta = rule.exponent
    return {
        "B1": _analytic("B1", (1.0 - alpha) - beta),
        "B2": _analytic("B2", (1.0 - alpha) - 5.0 * beta),
        "C1": _analytic("C1", (1.0 - alpha_x) - 5.0 * beta),
        "C2": _analytic("C2", (1.0 - alpha_x) - beta),
        "C6": _analytic("C6", (1.0 - beta - alpha - alpha_x) / 2.0),
    }


def _require_cond_mean(spec):
    if spec.family == "functional-of-linear" and spec.params.transform != "square":
        raise ValueError("no closed-form conditional mean for this transform")


def _cond_diff_sums(spec, n, seeds):
    sums = np.empty(seeds)
    for s in range(seeds):
        run = simulate_process(spec, n, stream=(s,))
        if run.cond_mean is None:
            raise ValueError(f"family {spec.family!r} exposes no conditional mean")
        sums[s] = np.sum(run.cond_diff)
    return sums


def check_negligibility(spec, rule, n_ladder=DEFAULT_N_LADDER, seeds=100):
    """Condition A: seed-averaged (sqrt(nh)/n)|sum(E[eps|past] - eps)| trend."""
    _require_cond_mean(spec)
    seeds = check_count(seeds, "seeds", minimum=2)
    n_ladder = tuple(int(n) for n in n_ladder)
    stats = []
    for n in n_ladder:
        h = rule(n)
        sums = _cond_diff_sums(spec, n, seeds)
        stats.append(np.sqrt(n * h) / n * np.mean(np.abs(sums)))
    fit = fit_loglog_slope(np.array(n_ladder, dtype=float), np.array(stats))
    return ConditionVerdict(
        condition="A",
        n_values=n_ladder,
        statistics=tuple(float(s) for s in stats),
        exponent=fit.slope,
        verdict=verdict_from_exponent(fit.slope),
        tolerance=EXPONENT_TOLERANCE,
    )


def check_shape_mixed_condition(spec, alpha_x, rule, n_ladder=DEFAULT_N_LADDER, seeds=100):
    """Condition C6: (sqrt(nh)/n^{alpha_x/2}) |n^{-1} sum E[eps|past]| trend."""
    _require_cond_mean(spec)
    seeds = check_count(seeds, "seeds", minimum=2)
    n_ladder = tuple(int(n) for n in n_ladder)
    stats = []
    for n in n_ladder:
        h = rule(n)
        sums = np.empty(seeds)
        for s in range(seeds):
            run = simulate_process(spec, n, stream=(s,))
            sums[s] = np.sum(run.cond_mean)
        stats.append(np.sqrt(n * h) / float(n) ** (alpha_x / 2.0) / n * np.mean(np.abs(sums)))
    fit = fit_loglog_slope(np.array(n_ladder, dtype=float), np.array(stats))
    return ConditionVerdict(
        condition="C6",
        n_values=n_ladder,
        statistics=tuple(float(s) for s in stats),
        exponent=fit.slope,
        verdict=verdict_from_exponent(fit.slope),
        tolerance=EXPONENT_TOLERANCE,
    )


LINEAR_GROWTH_TOLERANCE = 0.1


def check_var_linear_growth(spec, n_ladder=DEFAULT_N_LADDER, reps=200):
    """Variance-order condition: Var(sum(E[eps|past] - eps)) = O(n).

    The statistic is the Monte Carlo variance of the centered partial sum;
    verdict ``bounded`` means the fitted growth exponent is <= 1.1 (linear
    growth within tolerance).
    """
    _require_cond_mean(spec)
    reps = check_count(reps, "reps", minimum=2)
    n_ladder = tuple(int(n) for n in n_ladder)
    stats = []
    for n in n_ladder:
        sums = _cond_diff_sums(spec, n, reps)
        stats.append(float(np.var(sums)))
    fit = fit_loglog_slope(np.array(n_ladder, dtype=float), np.array(stats))
    verdict = BOUNDED if fit.slope <= 1.0 + LINEAR_GROWTH_TOLERANCE else DIVERGES
    return ConditionVerdict(
        condition="varO(n)",
        n_values=n_ladder,
        statistics=tuple(stats),
        exponent=fit.slope,
        verdict=verdict,
        tolerance=LINEAR_GROWTH_TOLERANCE,
    )


def verdicts_to_csv(verdicts, path):
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["condition", "n", "statistic", "exponent", "verdict"])
        for verdict in verdicts:
            for row in verdict.to_rows():
                writer.writerow(
                    [
                        row[0],
                        row[1],
                        repr(float(row[2])) if row[2] != "" else "",
                        repr(float(row[3])),
                        row[4],
                    ]
                )
