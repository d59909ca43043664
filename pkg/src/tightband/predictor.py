"""Online interval prediction by reset-and-dilate.

The predictor keeps one working interval. Each day t it first checks
whether that interval still has empirical coverage >= 1 - R(t-1) over the
t-1 points seen so far; if not, it resets: re-center on the narrowest
window that does meet the requirement, dilate the width to
mu * max(window volume, minwidth), and keep that until the next reset.
The played set is always the working interval clipped to [0, 1].

Rate schedules R(t) decide the regime. alpha*T/t handles arbitrary
(even adversarial) orderings: it forces any surviving interval to have
missed at most alpha*T points in absolute terms, so the benchmark
interval is always feasible and the working interval's width performs a
doubling search for the benchmark scale. alpha + C*sqrt(ln T / t)
handles exchangeable sequences, where uniform convergence of interval
miss rates lets the predictor track the hindsight optimum with no
dilation at all (mu = 1).

Everything here is deterministic: a run is a pure function of the config
and the input sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .core import Interval, RankedMultiset, min_window_interval


class ProtocolError(RuntimeError):
    """predict/update called out of turn, or past the horizon."""


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


@dataclass(frozen=True)
class ArbitraryOrderSchedule:
    """R(0) = 1, R(t) = min(1, alpha*T/t): an absolute budget of alpha*T misses.

    T may be passed as a real; it only enters through the product alpha*T.
    """

    alpha: float
    T: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.T < 1:
            raise ValueError(f"T must be >= 1, got {self.T}")

    def rate(self, t: int) -> float:
        _check_rate_day(t, self.T)
        if t == 0:
            return 1.0
        return _clamp01(self.alpha * self.T / t)

    def budget(self, n: int) -> float:
        """rate(n) * n in product form: min(n, alpha*T).

        Dividing by n and multiplying back can drift by more than the
        1e-12 integer guard once alpha*T is in the thousands; the direct
        product keeps the feasibility count exact.
        """
        _check_rate_day(n, self.T)
        if n == 0:
            return 0.0
        return min(float(n), self.alpha * self.T)


@dataclass(frozen=True)
class ExchangeableSchedule:
    """R(0) = 1, R(t) = min(1, alpha + C*sqrt(ln T / t)).

    The sqrt slack covers the sampling error between a prefix and the full
    sequence under exchangeability; C is the (otherwise unspecified)
    constant in front, default 1.
    """

    alpha: float
    T: float
    C: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.T < 1:
            raise ValueError(f"T must be >= 1, got {self.T}")
        if self.C <= 0:
            raise ValueError(f"C must be > 0, got {self.C}")

    def rate(self, t: int) -> float:
        _check_rate_day(t, self.T)
        if t == 0:
            return 1.0
        return _clamp01(self.alpha + self.C * math.sqrt(math.log(self.T) / max(t, 1)))

    def budget(self, n: int) -> float:
        """rate(n) * n as min(n, alpha*n + C*sqrt(n ln T))."""
        _check_rate_day(n, self.T)
        if n == 0:
            return 0.0
        return min(float(n), self.alpha * n + self.C * math.sqrt(n * math.log(self.T)))


@dataclass(frozen=True)
class TableSchedule:
    """Explicit rate table; rate(t) = clamp(rates[t], 0, 1)."""

    rates: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.rates) == 0:
            raise ValueError("rate table must be nonempty")

    @property
    def T(self) -> int:
        return len(self.rates)

    def rate(self, t: int) -> float:
        _check_rate_day(t, self.T)
        return _clamp01(self.rates[t])

    def budget(self, n: int) -> float:
        """rate(n) * n; the table entry is already the final rate."""
        return self.rate(n) * n


Schedule = Union[ArbitraryOrderSchedule, ExchangeableSchedule, TableSchedule]


def _check_rate_day(t: int, T: float) -> None:
    if not 0 <= t <= T - 1:
        raise ValueError(f"rate day {t} outside [0, {T - 1}]")


@dataclass(frozen=True)
class PredictorConfig:
    minwidth: float
    mu: float
    T: int
    schedule: Schedule

    def __post_init__(self) -> None:
        if not 0.0 < self.minwidth <= 1.0:
            raise ValueError(f"minwidth must be in (0, 1], got {self.minwidth}")
        if self.mu < 1.0:
            raise ValueError(f"mu must be >= 1, got {self.mu}")
        if not (isinstance(self.T, int) and self.T >= 1):
            raise ValueError(f"T must be an integer >= 1, got {self.T}")
        if self.schedule.T < self.T:
            raise ValueError(
                f"schedule covers horizon {self.schedule.T}, config needs {self.T}"
            )


@dataclass
class PredictorState:
    """Mutable per-run state. day is 1-indexed: the next day to predict."""

    day: int = 1
    past: RankedMultiset = field(default_factory=RankedMultiset)
    current: Interval = Interval(0.0, 0.0)
    misses_of_current: int = 0
    awaiting_update: bool = False
    # set by predict() for the caller's trace bookkeeping
    played: Interval = Interval(0.0, 0.0)
    last_reset: bool = False
    last_base: Interval | None = None


class OnlinePredictor:
    """Strict predict-then-reveal driver around one PredictorState."""

    def __init__(self, cfg: PredictorConfig) -> None:
        self.cfg = cfg
        self.state = PredictorState()

    def predict(self) -> Interval:
        """Reset the working interval if infeasible, then play it clipped.

        With n = day - 1 past points, the working interval is infeasible
        when misses_of_current > floor(R(n)*n + 1e-12); the guard keeps
        float dust out of an integer comparison. On reset, the new base is
        the narrowest window on all but that many past points, and the
        working interval becomes the base re-widened to
        mu * max(base volume, minwidth) about the base's center. That is
        the same as dilating by mu * max(1, minwidth/vol(base)) but has no
        zero-width special case.
        """
        st, cfg = self.state, self.cfg
        if st.awaiting_update:
            raise ProtocolError("predict called twice without an update between")
        if st.day > cfg.T:
            raise ProtocolError(f"horizon {cfg.T} exhausted")
        st.last_reset = False
        st.last_base = None
        n = st.day - 1
        if n > 0:
            budget = math.floor(cfg.schedule.budget(n) + 1e-12)
            if st.misses_of_current > budget:
                base = min_window_interval(st.past, n - budget)
                half = 0.5 * cfg.mu * max(base.volume, cfg.minwidth)
                center = 0.5 * (base.lo + base.hi)
                st.current = Interval(center - half, center + half)
                st.misses_of_current = n - st.past.count_in(st.current)
                st.last_reset = True
                st.last_base = base
        st.awaiting_update = True
        st.played = st.current.clip_unit()
        return st.played

    def update(self, y: float) -> bool:
        """Reveal y; returns whether the played interval covered it.

        Misses are counted against the unclipped working interval, which
        agrees with the played (clipped) one for y in [0, 1]: clipping to
        the data's own range removes no data points.
        """
        st = self.state
        if not st.awaiting_update:
            raise ProtocolError("update called without a preceding predict")
        if not 0.0 <= y <= 1.0:
            raise ValueError(f"observations must lie in [0, 1], got {y}")
        covered = st.played.lo <= y <= st.played.hi
        if not st.current.lo <= y <= st.current.hi:
            st.misses_of_current += 1
        st.past.insert(y)
        st.day += 1
        st.awaiting_update = False
        return covered


@dataclass(frozen=True)
class RunTrace:
    """Per-day log of one run, plus reset/phase bookkeeping.

    played_* are the clipped intervals actually emitted; reset_currents
    are the unclipped working intervals right after each reset (their
    volumes drive the growth audit). phase_starts marks day 1 and every
    reset day: a phase is a maximal run of days with one working interval.
    """

    cfg: PredictorConfig
    played_lo: np.ndarray
    played_hi: np.ndarray
    observed: np.ndarray
    covered: np.ndarray
    reset: np.ndarray
    reset_days: tuple[int, ...]
    reset_bases: tuple[Interval, ...]
    reset_currents: tuple[Interval, ...]

    @property
    def mistakes(self) -> int:
        return int(np.sum(~self.covered))

    @property
    def phase_starts(self) -> tuple[int, ...]:
        return (1, *self.reset_days)

    def played(self, day: int) -> Interval:
        """Interval emitted on a 1-indexed day."""
        if not 1 <= day <= len(self.played_lo):
            raise IndexError(f"day {day} outside trace of length {len(self.played_lo)}")
        return Interval(float(self.played_lo[day - 1]), float(self.played_hi[day - 1]))

    def base_of(self, day: int) -> Interval | None:
        """Base interval logged at a reset day, None on non-reset days."""
        try:
            k = self.reset_days.index(day)
        except ValueError:
            return None
        return self.reset_bases[k]


def run(cfg: PredictorConfig, sequence: Sequence[float]) -> RunTrace:
    """Drive the predictor over a full sequence; pure in (cfg, sequence)."""
    values = [float(y) for y in sequence]
    if len(values) != cfg.T:
        raise ValueError(f"sequence length {len(values)} != horizon {cfg.T}")
    pred = OnlinePredictor(cfg)
    st = pred.state
    played_lo = np.empty(cfg.T)
    played_hi = np.empty(cfg.T)
    covered = np.empty(cfg.T, dtype=bool)
    reset = np.empty(cfg.T, dtype=bool)
    reset_days: list[int] = []
    reset_bases: list[Interval] = []
    reset_currents: list[Interval] = []
    predict, update = pred.predict, pred.update
    for i, y in enumerate(values):
        played = predict()
        if st.last_reset:
            reset_days.append(i + 1)
            reset_bases.append(st.last_base)
            reset_currents.append(st.current)
        played_lo[i] = played.lo
        played_hi[i] = played.hi
        reset[i] = st.last_reset
        covered[i] = update(y)
    return RunTrace(
        cfg=cfg,
        played_lo=played_lo,
        played_hi=played_hi,
        observed=np.array(values),
        covered=covered,
        reset=reset,
        reset_days=tuple(reset_days),
        reset_bases=tuple(reset_bases),
        reset_currents=tuple(reset_currents),
    )


def halfway_conformal_set(cfg: PredictorConfig, prefix: Sequence[float]) -> Interval:
    """The day-ceil(T/2) prediction, trained on the first ceil(T/2)-1 points.

    Under exchangeability this interval is a valid confidence set for the
    final observation y_T: conditioned on the multiset, the day it is
    scored against is exchangeable with the days it was trained on.
    """
    h = math.ceil(cfg.T / 2)
    values = [float(y) for y in prefix]
    if len(values) < h:
        raise ValueError(f"prefix of length {len(values)} shorter than ceil(T/2) = {h}")
    pred = OnlinePredictor(cfg)
    for y in values[: h - 1]:
        pred.predict()
        pred.update(y)
    return pred.predict()
