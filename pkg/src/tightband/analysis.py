"""Post-hoc audits of predictor traces.

Three families of checks:

* structural audits of arbitrary-order runs (mu > 3): between
  consecutive resets late in the run the working interval's volume must
  grow by a factor (mu-1)/2 (the new base must poke out of the old
  dilated interval while still touching the old base, so it spans at
  least the dilation margin), which caps the number of late resets at
  1 + ceil(log_{(mu-1)/2}(1/minwidth)) and yields an explicit end-to-end
  mistake bound;
* a deterministic volume-cap check: any fixed interval missing at most
  k* points in total stays feasible on every prefix, where k* is the
  largest such count the schedule's integer budgets permit under the
  worst arrangement, so no played interval can exceed
  mu * max(opt volume at k* misses, minwidth);
* an empirical uniform-convergence checker for exchangeable data: how
  far interval miss-rates on a window can drift from their full-sequence
  values, maximized over every interval with data-valued endpoints.

Audit constants here are derived from the growth argument, not quoted;
reports label them accordingly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import min_window_sorted
from .generators import derive_seed, gen_permutation
from .predictor import ArbitraryOrderSchedule, PredictorConfig, RunTrace


class ScheduleMismatchError(ValueError):
    """An audit was asked to run outside its schedule regime."""


def _require_arbitrary(cfg: PredictorConfig) -> ArbitraryOrderSchedule:
    if not isinstance(cfg.schedule, ArbitraryOrderSchedule):
        raise ScheduleMismatchError(
            f"audit needs the arbitrary-order schedule, got {type(cfg.schedule).__name__}"
        )
    if not cfg.mu > 3.0:
        raise ScheduleMismatchError(
            f"audit needs mu > 3 (growth factor (mu-1)/2 > 1), got mu = {cfg.mu}"
        )
    return cfg.schedule


def reset_count_bound(mu: float, minwidth: float) -> int:
    """Max resets within one epoch: 1 + ceil(log_{(mu-1)/2}(1/minwidth)).

    Each late reset multiplies the working volume by at least (mu-1)/2
    and no reset volume is below mu*minwidth or above mu*1.
    """
    if not mu > 3.0:
        raise ValueError(f"reset_count_bound needs mu > 3, got {mu}")
    factor = (mu - 1.0) / 2.0
    return 1 + math.ceil(math.log(1.0 / minwidth) / math.log(factor))


@dataclass(frozen=True)
class PhaseAuditReport:
    reset_days: tuple[int, ...]
    reset_volumes: tuple[float, ...]
    epoch_start: int
    growth_ok: bool
    reset_count_bound: int
    reset_count_ok: bool


def phase_audit(trace: RunTrace, cfg: PredictorConfig) -> PhaseAuditReport:
    """Check reset growth and count on the trailing single epoch.

    With the alpha*T/t schedule, every day t >= epoch_start = 2*alpha*T + 2
    belongs to one epoch: any two intervals feasible there each miss at
    most alpha*T of the first 2*alpha*T + 1 points, so they must share a
    point and the doubling argument applies between consecutive resets.
    """
    sched = _require_arbitrary(cfg)
    epoch_start = int(math.floor(2.0 * sched.alpha * cfg.T + 1e-12)) + 2
    volumes = tuple(c.volume for c in trace.reset_currents)
    factor = (cfg.mu - 1.0) / 2.0
    growth_ok = True
    for k in range(1, len(trace.reset_days)):
        if trace.reset_days[k - 1] >= epoch_start:
            if volumes[k] < factor * volumes[k - 1] - 1e-12:
                growth_ok = False
                break
    bound = reset_count_bound(cfg.mu, cfg.minwidth)
    in_epoch = sum(1 for d in trace.reset_days if d >= epoch_start)
    return PhaseAuditReport(
        reset_days=trace.reset_days,
        reset_volumes=volumes,
        epoch_start=epoch_start,
        growth_ok=growth_ok,
        reset_count_bound=bound,
        reset_count_ok=in_epoch <= bound,
    )


def mistake_bound(cfg: PredictorConfig, alpha: float) -> float:
    """Explicit mistake cap for the alpha*T/t schedule, mu > 3.

    Days up to 2*alpha*T + 1 may all be mistakes; after that one epoch
    remains, holding at most 2 + ceil(log_{(mu-1)/2}(1/minwidth)) phases
    (the resets, plus the phase that entered the epoch), each of which
    can miss at most alpha*T + 1 points before a reset fires.
    """
    _require_arbitrary(cfg)
    aT = alpha * cfg.T
    phases = 2 + math.ceil(math.log(1.0 / cfg.minwidth) / math.log((cfg.mu - 1.0) / 2.0))
    return (2.0 * aT + 1.0) + phases * (aT + 1.0)


def mistake_bound_check(trace: RunTrace, cfg: PredictorConfig, alpha: float) -> bool:
    """True iff the trace's mistake count is within the explicit cap."""
    return trace.mistakes <= mistake_bound(cfg, alpha)


@dataclass(frozen=True)
class VolumeCapReport:
    ok: bool
    cap: float
    max_played_volume: float
    always_feasible_misses: int


def always_feasible_misses(cfg: PredictorConfig) -> int:
    """Largest k such that any interval missing <= k points in total is
    feasible on every prefix, whatever the arrangement.

    An interval with k total misses can show min(n, k) misses on a
    prefix of length n, so it survives day n+1's check iff
    min(n, k) <= budget(n). The condition splits into budget(n) = n for
    all n < k and k <= min_{n >= k} budget(n).
    """
    T = cfg.T
    budgets = [
        math.floor(cfg.schedule.budget(n) + 1e-12) for n in range(1, T)
    ]  # budgets[n-1] for prefix length n
    c = 0
    while c < len(budgets) and budgets[c] == c + 1:
        c += 1
    suffix_min = [0] * len(budgets)
    running = T  # larger than any budget
    for idx in range(len(budgets) - 1, -1, -1):
        running = min(running, budgets[idx])
        suffix_min[idx] = running
    for k in range(min(c + 1, T), -1, -1):
        if k == 0 or k > len(budgets) or k <= suffix_min[k - 1]:
            return k
    return 0


def volume_cap_check(
    trace: RunTrace, sequence: Sequence[float], cfg: PredictorConfig
) -> VolumeCapReport:
    """Deterministic worst-case cap on every played volume.

    Every reset base is a minimum-volume feasible interval, so it is no
    wider than the best interval missing at most always_feasible_misses
    points of the full sequence; the played interval is that base widened
    to mu * max(volume, minwidth). 1e-9 of slack absorbs float dust.
    """
    k = always_feasible_misses(cfg)
    values = np.sort(np.asarray(sequence, dtype=float))
    opt_k = min_window_sorted(values, len(values) - k).volume
    cap = cfg.mu * max(opt_k, cfg.minwidth) + 1e-9
    max_vol = float(np.max(trace.played_hi - trace.played_lo))
    return VolumeCapReport(
        ok=max_vol <= cap,
        cap=cap,
        max_played_volume=max_vol,
        always_feasible_misses=k,
    )


# ---------------------------------------------------------------------------
# uniform convergence


@dataclass(frozen=True)
class UcReport:
    prefix_len: int
    max_deviation: float
    bound: float
    within: bool


def uc_max_deviation(full_sequence: Sequence[float], window: tuple[int, int]) -> float:
    """Largest |miss rate on window - miss rate overall| over all intervals.

    Candidates are closed intervals with endpoints among the distinct
    data values, plus the empty interval; miss rates only change when an
    endpoint crosses a data value, so these attain the supremum.

    Let G[k] be (covered fraction in window) - (covered fraction overall)
    for the interval (-inf, v_k], with G[0] = 0. The deviation of
    [v_i, v_j] is |G[j] - G[i-1]|, so the maximum over all i <= j (and
    the empty interval, which gives 0) is max(G) - min(G).
    """
    seq = np.asarray(full_sequence, dtype=float)
    T = len(seq)
    a, b = window
    if not (1 <= a <= b <= T):
        raise ValueError(f"window {window} invalid for sequence of length {T}")
    w = b - a + 1
    distinct = np.unique(seq)
    sorted_seq = np.sort(seq)
    sorted_win = np.sort(seq[a - 1 : b])
    cov_full = np.searchsorted(sorted_seq, distinct, side="right") / T
    cov_win = np.searchsorted(sorted_win, distinct, side="right") / w
    g = np.concatenate(([0.0], cov_win - cov_full))
    return float(np.max(g) - np.min(g))


def uc_profile(
    multiset: Sequence[float],
    T: int,
    prefix_lens: Sequence[int],
    trials: int,
    C: float,
    seed: int,
) -> list[UcReport]:
    """Deviation quantiles over seeded permutations of one multiset.

    For each trial the multiset is re-permuted and uc_max_deviation is
    taken on each prefix [1, t]; the report's max_deviation is the 95th
    percentile across trials, compared against C*sqrt(ln T / t).
    """
    if len(multiset) != T:
        raise ValueError(f"multiset size {len(multiset)} != T = {T}")
    lens = [int(t) for t in prefix_lens]
    if any(not 1 <= t <= T for t in lens):
        raise ValueError(f"prefix lengths {lens} must lie in [1, {T}]")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if C <= 0:
        raise ValueError("C must be > 0")
    devs = np.empty((len(lens), trials))
    for trial in range(trials):
        perm = gen_permutation(multiset, derive_seed(seed, trial))
        for k, t in enumerate(lens):
            devs[k, trial] = uc_max_deviation(perm, (1, t))
    ln_T = math.log(T)
    reports = []
    for k, t in enumerate(lens):
        q95 = float(np.quantile(devs[k], 0.95))
        bound = C * math.sqrt(ln_T / t)
        reports.append(UcReport(prefix_len=t, max_deviation=q95, bound=bound, within=q95 <= bound))
    return reports
