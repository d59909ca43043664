import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tightband import (
    ArbitraryOrderSchedule,
    Interval,
    PredictorConfig,
    allowed_misses,
    brute_force_opt,
    compute_metrics,
    opt_volume,
    run,
)

unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
ALPHAS = (0.0, 0.1, 1.0 / 3.0, 0.5, 0.9)


class TestAllowedMisses:
    def test_integer_guard(self):
        # 0.3 * 10 rounds to 2.9999999999999996; the guard must not lose the 3rd miss
        assert allowed_misses(10, 0.3) == 3
        assert allowed_misses(10, 0.1) == 1
        assert allowed_misses(3, 1.0 / 3.0) == 1
        assert allowed_misses(7, 0.0) == 0
        assert allowed_misses(5, 1.0) == 5

    @given(n=st.integers(1, 1000), num=st.integers(0, 50), den=st.integers(1, 50))
    def test_rational_alpha_exact(self, n, num, den):
        # alpha = num/den <= 1; floor(alpha*n) must equal the exact rational floor
        if num > den:
            num, den = den, num
        alpha = num / den
        assert allowed_misses(n, alpha) == (num * n) // den


class TestOptVolume:
    def test_examples(self):
        vol, witness = opt_volume([0.1, 0.2, 0.9], 1.0 / 3.0)
        assert (vol, witness) == (pytest.approx(0.1), Interval(0.1, 0.2))
        vol, witness = opt_volume([0.7] * 9, 0.5)
        assert vol == 0.0 and witness == Interval(0.7, 0.7)
        vol, witness = opt_volume([0.1, 0.2, 0.9], 0.0)
        assert vol == pytest.approx(0.8) and witness == Interval(0.1, 0.9)

    def test_validation(self):
        with pytest.raises(ValueError):
            opt_volume([], 0.1)
        with pytest.raises(ValueError):
            opt_volume([0.5], 1.1)
        with pytest.raises(ValueError):
            opt_volume([0.5], -0.1)

    @given(values=st.lists(unit, min_size=1, max_size=50))
    def test_monotone_nonincreasing_in_alpha(self, values):
        vols = [opt_volume(values, a)[0] for a in sorted(ALPHAS)]
        assert all(v1 >= v2 - 1e-15 for v1, v2 in zip(vols, vols[1:]))

    @given(values=st.lists(unit, min_size=1, max_size=50), alpha=st.sampled_from(ALPHAS))
    def test_witness_coverage_exact(self, values, alpha):
        _, witness = opt_volume(values, alpha)
        arr = np.asarray(values)
        covered = int(np.sum((arr >= witness.lo) & (arr <= witness.hi)))
        assert covered >= len(values) - allowed_misses(len(values), alpha)


class TestBruteForceOpt:
    def test_examples(self):
        assert brute_force_opt([0.1, 0.2, 0.9], 1.0 / 3.0) == (
            pytest.approx(0.1),
            Interval(0.1, 0.2),
        )
        assert brute_force_opt([0.0, 1.0], 0.5) == (0.0, Interval(0.0, 0.0))
        assert brute_force_opt([0.3], 0.99) == (0.0, Interval(0.3, 0.3))

    @settings(max_examples=300)
    @given(values=st.lists(unit, min_size=1, max_size=50), alpha=st.sampled_from(ALPHAS))
    def test_routes_agree(self, values, alpha):
        vol_fast, _ = opt_volume(values, alpha)
        vol_brute, _ = brute_force_opt(values, alpha)
        assert abs(vol_fast - vol_brute) <= 1e-12


class TestComputeMetrics:
    def _cfg(self, minwidth, mu, T, alpha):
        return PredictorConfig(
            minwidth=minwidth, mu=mu, T=T, schedule=ArbitraryOrderSchedule(alpha=alpha, T=float(T))
        )

    def test_all_covered(self):
        cfg = self._cfg(0.1, 2.0, 3, 1.0)
        seq = [0.0, 0.0, 0.0]
        m = compute_metrics(run(cfg, seq), seq, 1.0, cfg)
        assert m.coverage == 1.0 and m.mistakes == 0

    def test_constant_hand_example(self):
        cfg = self._cfg(0.1, 2.0, 2, 0.0)
        seq = [0.5, 0.5]
        m = compute_metrics(run(cfg, seq), seq, 0.0, cfg)
        assert m.coverage == 0.5
        assert m.mistakes == 1
        assert m.resets == 1
        # played volumes: day 1 [0,0] then [0.4,0.6]; opt volume 0 -> minwidth floor
        assert m.opt_volume == 0.0
        assert m.max_volume == pytest.approx(0.2)
        assert m.mu_max == pytest.approx(2.0)
        assert m.coverage == 1.0 - m.mistakes / 2

    def test_coverage_identity(self):
        cfg = self._cfg(1e-3, 4.0, 50, 0.2)
        seq = [((i * 37) % 50) / 49 for i in range(50)]
        trace = run(cfg, seq)
        m = compute_metrics(trace, seq, 0.2, cfg)
        assert m.coverage == pytest.approx(1.0 - m.mistakes / 50)
        assert m.mu_max == pytest.approx(m.max_volume / max(m.opt_volume, cfg.minwidth))
        assert m.mu_avg == pytest.approx(m.avg_volume / max(m.opt_volume, cfg.minwidth))
