"""Row-resampling confidence intervals for any table-to-number pipeline.

Replicate b always draws its row indices from counter stream b of the base
seed, never from a shared sequential generator. That one choice buys a lot:
the interval is reproducible from the seed alone, independent of thread
count and completion order, and any single replicate can be re-run in
isolation when it misbehaves.

Replicates that fail for recoverable statistical reasons (an estimand
undefined on the resample, an empty stratum, a fit that separates) are
counted and excluded rather than patched over; the count is part of the
result because a high failure rate is itself a finding about the data.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dataset import DataTable
from .errors import (
    ConfigError,
    DegenerateError,
    NoSupportError,
    NotIdentifiedError,
    SeparationError,
    SingularError,
)
from .scm import derived_rng

RECOVERABLE = (NotIdentifiedError, NoSupportError, SeparationError, SingularError)


@dataclass(frozen=True)
class BootstrapResult:
    point: float
    boot_mean: float
    boot_sd: float
    ci_lower: float
    ci_upper: float
    n_boot: int
    n_failures: int
    alpha: float

    def as_dict(self) -> dict:
        return {
            "point": self.point,
            "boot_mean": self.boot_mean,
            "boot_sd": self.boot_sd,
            "ci_lower": self.ci_lower,
            "ci_upper": self.ci_upper,
            "n_boot": self.n_boot,
            "n_failures": self.n_failures,
            "alpha": self.alpha,
        }


def bootstrap(
    table: DataTable,
    pipeline,
    *,
    n_boot: int = 1000,
    seed: int = 0,
    alpha: float = 0.05,
    threads: int = 1,
) -> BootstrapResult:
    """Percentile interval for pipeline(table) under i.i.d. row resampling.

    pipeline maps a DataTable to a float and is rerun on each resampled
    table, so whatever it does internally (refitting models included) is
    inside the interval. A failure of the full-sample point estimate is not
    caught; if the pipeline cannot answer on the actual data there is
    nothing to wrap an interval around. DegenerateError means every single
    replicate failed.
    """
    n_boot = int(n_boot)
    threads = int(threads)
    alpha = float(alpha)
    if n_boot < 1:
        raise ConfigError(f"need at least one bootstrap replicate, got {n_boot}")
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must be in (0, 1), got {alpha}")
    if threads < 1:
        raise ConfigError(f"need at least one thread, got {threads}")

    point = float(pipeline(table))
    n = table.n_rows
    if n == 0:
        raise DegenerateError("cannot resample an empty table")

    def replicate(b: int):
        idx = derived_rng(seed, b).integers(0, n, size=n)
        try:
            return float(pipeline(table.take(idx)))
        except RECOVERABLE:
            return None

    if threads == 1:
        outcomes = [replicate(b) for b in range(n_boot)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(replicate, range(n_boot)))

    values = np.asarray([v for v in outcomes if v is not None], dtype=float)
    n_failures = n_boot - values.size
    if values.size == 0:
        raise DegenerateError(
            f"all {n_boot} bootstrap replicates failed; the estimate is too "
            "fragile under resampling to report an interval"
        )
    lo, hi = np.percentile(
        values, [100.0 * alpha / 2.0, 100.0 * (1.0 - alpha / 2.0)], method="linear"
    )
    return BootstrapResult(
        point=point,
        boot_mean=float(values.mean()),
        boot_sd=float(values.std(ddof=1)) if values.size > 1 else 0.0,
        ci_lower=float(lo),
        ci_upper=float(hi),
        n_boot=n_boot,
        n_failures=n_failures,
        alpha=alpha,
    )
