import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tightband import (
    CustomSpec,
    DkIidSpec,
    DkParams,
    DkThenConstantSpec,
    PermutationSpec,
    PhasedSpec,
    SequenceSpec,
    UnsupportedVariantError,
    derive_seed,
    dk_cdf,
    dk_inverse_cdf,
    dk_vstar,
    gen_dk_iid,
    gen_dk_then_constant,
    gen_permutation,
    gen_phased,
    generate,
    opt_volume,
    read_sequence,
    symmetrize,
    write_sequence,
)
from tightband.generators import spec_from_dict, spec_to_dict

P = DkParams(alpha=0.1, eps=0.3, K=2)


class TestDkParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            DkParams(alpha=0.0, eps=0.3, K=1)
        with pytest.raises(ValueError):
            DkParams(alpha=0.1, eps=0.6, K=1)
        with pytest.raises(ValueError):
            DkParams(alpha=0.1, eps=0.3, K=-1)

    def test_k_bound_names_the_bound(self):
        with pytest.raises(ValueError, match="ln\\(1/alpha\\)"):
            DkParams(alpha=0.1, eps=0.3, K=3)  # ln(10) = 2.30 < 3

    def test_atom(self):
        assert P.atom == pytest.approx(0.3**3)
        assert P.atom_mass == pytest.approx(1.0 - 0.1 * math.e**2)


class TestDkCdf:
    def test_boundary_values(self):
        assert dk_cdf(P.atom, P) == pytest.approx(1.0 - 0.1 * math.e**2)
        assert dk_cdf(P.eps, P) == pytest.approx(0.9)
        assert dk_cdf(1.0, P) == 1.0
        assert dk_cdf(P.atom * 0.999, P) == 0.0
        assert dk_cdf(0.0, P) == 0.0

    def test_domain_checked(self):
        with pytest.raises(ValueError):
            dk_cdf(1.0001, P)

    def test_vectorized_matches_scalar(self):
        xs = np.linspace(0.0, 1.0, 101)
        vec = dk_cdf(xs, P)
        assert vec.shape == xs.shape
        for x, v in zip(xs, vec):
            assert dk_cdf(float(x), P) == v

    def test_nondecreasing_and_jump(self):
        xs = np.linspace(0.0, 1.0, 2001)
        ys = dk_cdf(xs, P)
        assert np.all(np.diff(ys) >= -1e-15)
        # jump of size atom_mass at the atom
        assert dk_cdf(P.atom, P) - dk_cdf(P.atom - 1e-12, P) == pytest.approx(P.atom_mass, abs=1e-9)


class TestDkInverseCdf:
    def test_boundary_values(self):
        assert dk_inverse_cdf(0.0, P) == P.atom
        assert dk_inverse_cdf(P.atom_mass, P) == P.atom
        assert dk_inverse_cdf(1.0 - P.alpha, P) == pytest.approx(P.eps)
        assert dk_inverse_cdf(1.0, P) == pytest.approx(1.0)

    def test_round_trip_on_continuous_pieces(self):
        us = np.linspace(P.atom_mass + 1e-6, 1.0, 500)
        xs = dk_inverse_cdf(us, P)
        back = dk_cdf(xs, P)
        assert np.max(np.abs(back - us)) <= 1e-10

    def test_nondecreasing(self):
        us = np.linspace(0.0, 1.0, 1001)
        xs = dk_inverse_cdf(us, P)
        assert np.all(np.diff(xs) >= -1e-15)


class TestDkVstar:
    def test_values(self):
        assert dk_vstar(0.0, P) == 0.0
        assert dk_vstar(1.0 - P.alpha, P) == pytest.approx(P.eps - P.atom)
        assert dk_vstar(1.0, P) == pytest.approx(1.0 - P.atom)

    def test_convexity(self):
        cs = np.linspace(0.0, 1.0, 1000)
        vs = dk_vstar(cs, P)
        second = np.diff(vs, 2)
        assert np.min(second) >= -1e-9


class TestPhasedSpec:
    def test_validation_messages(self):
        with pytest.raises(ValueError, match="1/alpha"):
            PhasedSpec(alpha=0.1, T=200, K=11, eps=0.3, i=2)
        with pytest.raises(ValueError):
            PhasedSpec(alpha=0.1, T=100, K=2, eps=0.3, i=3)  # i > K
        with pytest.raises(ValueError):
            PhasedSpec(alpha=0.1, T=100, K=2, eps=0.3, i=0)
        with pytest.raises(ValueError, match="exceeds T"):
            PhasedSpec(alpha=0.1, T=15, K=10, eps=0.3, i=2)  # 10 phases of round(1.5)=2 days
        with pytest.raises(ValueError):
            PhasedSpec(alpha=0.001, T=100, K=2, eps=0.3, i=2)  # phase length 0

    def test_phase_length_rounds(self):
        assert PhasedSpec(alpha=0.5, T=4, K=2, eps=0.5, i=2).phase_length == 2
        assert PhasedSpec(alpha=0.1, T=105, K=2, eps=0.5, i=2).phase_length == 11  # round(10.5) -> 11

    def test_day_scales_example(self):
        spec = PhasedSpec(alpha=0.5, T=4, K=2, eps=0.5, i=2)
        assert np.allclose(spec.day_scales(), [0.5, 0.5, 1.0, 1.0])

    def test_day_scales_drop_after_i(self):
        spec = PhasedSpec(alpha=0.25, T=8, K=2, eps=0.5, i=1)
        # phases: j=1 at eps^(K-1)=0.5, then j>i at eps^K=0.25
        assert np.allclose(spec.day_scales(), [0.5, 0.5] + [0.25] * 6)


class TestGeneration:
    def test_phased_example_scales(self):
        seq = gen_phased(0.5, 4, 2, 0.5, 2, seed=1)
        assert seq.shape == (4,)
        assert np.all(seq[:2] <= 0.5)
        assert np.all((seq >= 0.0) & (seq <= 1.0))

    def test_phased_low_ladder_stays_small(self):
        seq = gen_phased(0.25, 8, 2, 0.5, 1, seed=2)
        assert np.all(seq[2:] <= 0.25)

    def test_seeded_determinism(self):
        a = gen_phased(0.1, 50, 2, 0.3, 2, seed=7)
        b = gen_phased(0.1, 50, 2, 0.3, 2, seed=7)
        c = gen_phased(0.1, 50, 2, 0.3, 2, seed=8)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_dk_then_constant(self):
        full = gen_dk_then_constant(P, 20, 20, seed=3)
        iid = gen_dk_iid(P, 20, seed=3)
        assert np.array_equal(full, iid)
        const = gen_dk_then_constant(P, 20, 0, seed=3)
        assert np.all(const == P.atom)
        mixed = gen_dk_then_constant(P, 20, 5, seed=3)
        assert np.all(mixed[5:] == P.atom)
        assert np.array_equal(mixed[:5], iid[:5])

    def test_permutation(self):
        ms = [0.1, 0.5, 0.5, 0.9]
        a = gen_permutation(ms, seed=1)
        b = gen_permutation(ms, seed=2)
        assert sorted(a) == sorted(ms) and sorted(b) == sorted(ms)
        assert not np.array_equal(a, b)
        assert np.array_equal(gen_permutation([0.4], seed=5), [0.4])

    def test_switch_day_validated(self):
        with pytest.raises(ValueError):
            DkThenConstantSpec(P, 10, 11)

    @given(seed=st.integers(0, 2**31), T=st.integers(1, 64))
    @settings(max_examples=50, deadline=None)
    def test_all_values_in_unit_interval(self, seed, T):
        assert np.all((gen_dk_iid(P, T, seed=seed) >= 0.0) & (gen_dk_iid(P, T, seed=seed) <= 1.0))

    def test_atom_frequency_sanity(self):
        seq = gen_dk_iid(P, 20_000, seed=13)
        freq = float(np.mean(seq == P.atom))
        assert freq == pytest.approx(P.atom_mass, abs=0.02)


class TestSymmetrize:
    def test_phased_endpoints(self):
        spec = SequenceSpec(PhasedSpec(alpha=0.5, T=4, K=2, eps=0.5, i=2), seed=0)
        # day scales are [0.5, 0.5, 1, 1]; feed exact endpoint values
        out = symmetrize(np.array([0.0, 0.5, 0.0, 1.0]), spec)
        assert np.allclose(out, [0.25, 0.75, 0.0, 1.0])

    def test_dk_atom_maps_to_center(self):
        spec = SequenceSpec(DkIidSpec(P, 50), seed=4, symmetric=True)
        values = np.full(50, P.atom)
        out = symmetrize(values, SequenceSpec(DkIidSpec(P, 50), seed=4))
        assert np.all(out == 0.5)

    def test_symmetric_generation_centered(self):
        seq = gen_dk_iid(P, 100_000, seed=21, symmetric=True)
        assert np.all((seq >= 0.0) & (seq <= 1.0))
        dev = seq - 0.5
        stderr = float(np.std(dev)) / math.sqrt(len(seq))
        assert abs(float(np.mean(dev))) <= 3 * stderr

    def test_permutation_unsupported(self):
        with pytest.raises(UnsupportedVariantError):
            SequenceSpec(PermutationSpec((0.1, 0.9)), seed=0, symmetric=True)
        with pytest.raises(UnsupportedVariantError):
            symmetrize(np.array([0.5]), SequenceSpec(CustomSpec((0.5,)), seed=0))


class TestSequenceFiles:
    def test_round_trip_exact(self, tmp_path):
        spec = SequenceSpec(PhasedSpec(alpha=0.1, T=30, K=2, eps=0.3, i=1), seed=9)
        values = generate(spec)
        path = tmp_path / "seq.txt"
        write_sequence(path, values, spec)
        got, got_spec = read_sequence(path)
        assert np.array_equal(got, values)
        assert got_spec == spec
        first = path.read_text().splitlines()[0]
        assert first.startswith("# ") and "phased" in first and '"seed": 9' in first

    def test_headerless_file(self, tmp_path):
        path = tmp_path / "plain.txt"
        path.write_text("# a comment\n0.25\n\n0.75\n")
        values, spec = read_sequence(path)
        assert np.array_equal(values, [0.25, 0.75])
        assert spec is None

    def test_permutation_spec_round_trip(self, tmp_path):
        spec = SequenceSpec(PermutationSpec((0.1, 0.5, 0.9)), seed=2)
        values = generate(spec)
        path = tmp_path / "perm.txt"
        write_sequence(path, values, spec)
        got, got_spec = read_sequence(path)
        assert got_spec == spec  # multiset rebuilt from sorted file values
        assert np.array_equal(generate(got_spec), values)

    def test_spec_dict_errors(self):
        with pytest.raises(UnsupportedVariantError):
            spec_from_dict({"variant": "nope", "seed": 0})
        with pytest.raises(ValueError):
            spec_from_dict({"variant": "permutation", "T": 2, "seed": 0})


class TestDeriveSeed:
    def test_deterministic_and_distinct(self):
        assert derive_seed(7, 0, 0) == derive_seed(7, 0, 0)
        seen = {derive_seed(7, c, t) for c in range(4) for t in range(4)}
        assert len(seen) == 16


class TestStatisticalShape:
    def test_ks_distance_sanity(self):
        # light version of the sampler-fidelity check (full scale in acceptance)
        n = 20_000
        seq = np.sort(gen_dk_iid(P, n, seed=17))
        distinct = np.unique(seq)
        emp_hi = np.searchsorted(seq, distinct, side="right") / n
        emp_lo = np.searchsorted(seq, distinct, side="left") / n
        model = dk_cdf(distinct, P)
        left_limits = np.where(distinct == P.atom, 0.0, dk_cdf(np.maximum(distinct - 1e-12, 0.0), P))
        ks = max(float(np.max(np.abs(emp_hi - model))), float(np.max(np.abs(emp_lo - left_limits))))
        assert ks <= 0.02

    def test_opt_monotone_in_ladder_height(self):
        alpha, T, K, eps = 0.05, 10_000, 4, 0.1
        vols = [opt_volume(gen_phased(alpha, T, K, eps, i, seed=29), alpha)[0] for i in (1, 2, 3, 4)]
        assert vols == sorted(vols)
        assert all(a < b for a, b in zip(vols, vols[1:]))
