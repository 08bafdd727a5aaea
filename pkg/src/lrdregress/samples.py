"""Regression samples tied to the specs that generated them."""

from dataclasses import dataclass

import numpy as np

from .functions import get_true_function
from .processes import PredictorSpec, ProcessSpec, simulate_predictors, simulate_process
from .validation import check_count


@dataclass(frozen=True, eq=False)
class SampleMeta:
    """Everything needed to regenerate a sample bit-exactly plus the truth.

    ``errors`` keeps the realized noise so risk diagnostics that need the
    true disturbances (synthetic data only) can access them directly.
    """

    true_function: str
    error_spec: ProcessSpec
    predictor_spec: PredictorSpec
    density: str = "standard-normal"
    errors: np.ndarray = None
    error_scale: float = 1.0


@dataclass(frozen=True, eq=False)
class RegressionSample:
    x: np.ndarray
    y: np.ndarray
    meta: SampleMeta

    def __post_init__(self):
        if self.x.shape != self.y.shape or self.x.ndim != 1:
            raise ValueError("x and y must be 1-d arrays of equal length")
        if self.x.size < 2:
            raise ValueError("a sample needs at least two observations")

    @property
    def n(self):
        return self.x.size

    def true_values(self, points=None):
        m = get_true_function(self.meta.true_function)
        return m(self.x if points is None else points)


def make_sample(n, true_function, error_spec, predictor_spec, stream=(), error_scale=1.0):
    """Simulate (x_i, y_i = m(x_i) + scale * eps_i) from the given specs.

    Deterministic in all arguments; ``stream`` selects a substream of both
    specs' seeds so one base seed can fan out over replicates.
    """
    n = check_count(n, "n", minimum=2)
    m = get_true_function(true_function)
    x = simulate_predictors(predictor_spec, n, stream=stream)
    eps = simulate_process(error_spec, n, stream=stream).values * error_scale
    y = m(x) + eps
    meta = SampleMeta(
        true_function=m.name,
        error_spec=error_spec,
        predictor_spec=predictor_spec,
        errors=eps,
        error_scale=error_scale,
    )
    return RegressionSample(x=x, y=y, meta=meta)
