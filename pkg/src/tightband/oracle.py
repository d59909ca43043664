"""Hindsight-optimal interval benchmarks and realized-run metrics.

Opt(S, alpha) is the minimum volume of one fixed closed interval covering
at least a (1 - alpha) fraction of the sequence in hindsight. On integer
counts that means covering >= T - floor(alpha*T) points; the floor gets a
1e-12 additive guard so that 0.1 * 10 = 0.9999... style float error never
flips the combinatorial count.

Two implementations are kept deliberately separate: opt_volume sorts once
and slides a window, brute_force_opt enumerates every candidate interval
with data-valued endpoints and counts coverage by direct comparison. They
must agree, and the test suite holds them to that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .core import Interval, min_window_sorted

if TYPE_CHECKING:  # pragma: no cover
    from .predictor import PredictorConfig, RunTrace


def allowed_misses(n: int, alpha: float) -> int:
    """Points a feasible interval may miss out of n at miscoverage alpha."""
    return math.floor(alpha * n + 1e-12)


def opt_volume(sequence: Sequence[float], alpha: float) -> tuple[float, Interval]:
    """Smallest volume of one interval covering a 1 - alpha fraction.

    Returns (volume, witness). The witness's endpoints are data values:
    shrinking any covering interval onto its extreme covered points keeps
    coverage and cannot grow volume. Ties break to the leftmost witness.
    """
    values = np.sort(np.asarray(sequence, dtype=float))
    n = len(values)
    if n == 0:
        raise ValueError("opt_volume needs a nonempty sequence")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    m = n - allowed_misses(n, alpha)
    witness = min_window_sorted(values, m)
    return witness.volume, witness


def brute_force_opt(sequence: Sequence[float], alpha: float) -> tuple[float, Interval]:
    """Exhaustive reference for opt_volume; independent of the window scan.

    Every candidate [v_i, v_j] with endpoints drawn from the data (the
    degenerate i = j cases included) is scored by counting covered points
    with direct comparisons. Minimum volume wins; ties go to the smallest
    left endpoint.
    """
    values = np.asarray(sequence, dtype=float)
    n = len(values)
    if n == 0:
        raise ValueError("brute_force_opt needs a nonempty sequence")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    m = n - allowed_misses(n, alpha)
    if m <= 0:
        return 0.0, Interval(0.0, 0.0)
    v = np.sort(values)
    # counts[i, j] = #{y : v[i] <= y <= v[j]}, by brute comparison, not ranks
    ge = values[None, None, :] >= v[:, None, None]
    le = values[None, None, :] <= v[None, :, None]
    counts = np.sum(ge & le, axis=2)
    i_idx, j_idx = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    feasible = (counts >= m) & (i_idx <= j_idx)
    if not feasible.any():  # cannot happen: [v[0], v[n-1]] covers all n >= m
        raise AssertionError("no feasible candidate interval")
    vols = v[j_idx] - v[i_idx]
    order = np.lexsort((v[i_idx][feasible], vols[feasible]))
    k = order[0]
    lo = float(v[i_idx[feasible][k]])
    hi = float(v[j_idx[feasible][k]])
    return hi - lo, Interval(lo, hi)


@dataclass(frozen=True)
class Metrics:
    """Realized performance of one run against the hindsight benchmark."""

    coverage: float
    mistakes: int
    avg_volume: float
    max_volume: float
    opt_volume: float
    mu_avg: float
    mu_max: float
    resets: int


def compute_metrics(
    trace: "RunTrace", sequence: Sequence[float], alpha: float, cfg: "PredictorConfig"
) -> Metrics:
    """Summarize a trace: coverage, volumes, and ratios to max(Opt, minwidth)."""
    observed = np.asarray(sequence, dtype=float)
    if len(observed) != len(trace.observed):
        raise ValueError("sequence length does not match the trace")
    volumes = trace.played_hi - trace.played_lo
    opt, _ = opt_volume(observed, alpha)
    denom = max(opt, cfg.minwidth)
    mistakes = int(np.sum(~trace.covered))
    T = len(observed)
    return Metrics(
        coverage=1.0 - mistakes / T,
        mistakes=mistakes,
        avg_volume=float(np.mean(volumes)),
        max_volume=float(np.max(volumes)),
        opt_volume=opt,
        mu_avg=float(np.mean(volumes)) / denom,
        mu_max=float(np.max(volumes)) / denom,
        resets=len(trace.reset_days),
    )
