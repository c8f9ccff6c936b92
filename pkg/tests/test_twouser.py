import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcdma.codes import SpreadingCode, correlation, generate_random_code
from qcdma.filters import all_pass, design_grid_complementary, design_lattice, design_mach_zehnder, signal_bandwidth
from qcdma.oracles import engine_two_user
from qcdma.twouser import decoded_mixture, filtered_coefficients, photon_stats, total_variation

from conftest import pairs


def code_pair(n):
    code = st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n).map(SpreadingCode.from_sequence)
    return st.tuples(code, code)


any_pair = st.integers(1, 12).flatmap(code_pair)


class TestDecodedMixture:
    def test_identical_codes(self):
        c = generate_random_code(8, 3)
        mix = decoded_mixture(c, c)
        assert mix.c_1p1 == pytest.approx(0.5, abs=1e-15)
        assert mix.c_0 == pytest.approx(0.5, abs=1e-15)
        assert not np.any(mix.c_1k)

    def test_orthogonal_codes(self):
        a = generate_random_code(8, 1, balanced=True)
        b = SpreadingCode.from_sequence(np.ones(8))
        assert correlation(a, b) == 0
        mix = decoded_mixture(a, b)
        assert mix.c_1p1 == pytest.approx(0.25, abs=1e-15)
        assert mix.c_0 == pytest.approx(0.25, abs=1e-15)
        assert np.allclose(mix.c_1k, 1 / 16, atol=1e-15)

    def test_two_chip_engine_match(self):
        a, b = SpreadingCode.from_sequence([1, 1]), SpreadingCode.from_sequence([1, -1])
        mix = decoded_mixture(a, b)
        eng = engine_two_user([a, b], all_pass())
        assert abs(mix.c_1p1 - eng["c_1p1"]) <= 1e-12
        assert abs(mix.c_0 - eng["c_0"]) <= 1e-12
        assert np.abs(mix.c_1k - eng["c_1k"]).max() <= 1e-12

    @given(any_pair)
    def test_closed_forms(self, codes):
        a, b = codes
        mix = decoded_mixture(a, b)
        rho = correlation(a, b)
        n_c = a.n_c
        assert mix.c_1p1 == pytest.approx(0.25 * (1 + rho**2), abs=1e-12)
        assert mix.c_0 == pytest.approx(mix.c_1p1, abs=1e-12)
        assert np.allclose(mix.c_1k, (1 - a.chips * b.chips * rho) / (2 * n_c), atol=1e-12)
        assert np.all(mix.c_1k >= -1e-15)
        assert mix.total == pytest.approx(1.0, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            decoded_mixture(generate_random_code(3, 1), generate_random_code(4, 1))


class TestFilteredCoefficients:
    @pytest.mark.parametrize("n_c", [2, 4])
    @pytest.mark.parametrize("L", [1, 3, 5])
    def test_engine_partial_traces(self, n_c, L):
        fp = design_mach_zehnder(L) if L > 1 else design_lattice([0.7])
        for a, b in pairs(n_c, 4):
            for r, (x, y) in enumerate([(a, b), (b, a)]):
                cf = filtered_coefficients(x, y, fp)
                eng = engine_two_user([a, b], fp, receiver=r)
                assert abs(cf.c_dd - eng["c_dd"]) <= 1e-9
                assert abs(cf.c_ff - eng["c_ff"]) <= 1e-9
                assert abs(cf.c_0 - eng["c_0_filtered"]) <= 1e-9
                assert np.abs(cf.c_fqd - eng["c_fqd"]).max() <= 1e-9
                assert np.abs(cf.c_d1k - eng["c_d1k"]).max() <= 1e-9
                assert np.abs(cf.c_f0k - eng["c_f0k"]).max() <= 1e-9
                assert np.abs(cf.exact_pmf() - eng["pmf"][:3]).max() <= 1e-9

    @given(any_pair, st.lists(st.floats(-3, 3), min_size=1, max_size=5))
    def test_exact_pmf_is_normalized(self, codes, theta):
        cf = filtered_coefficients(*codes, design_lattice(theta))
        p = cf.exact_pmf()
        assert p.sum() == pytest.approx(1.0, abs=1e-9)
        assert np.all(p >= -1e-15)

    def test_all_pass_recovers_half(self):
        a, b = pairs(8, 1)[0]
        cf = filtered_coefficients(a, b, all_pass())
        assert cf.d_total == pytest.approx(1.0, abs=1e-15)
        assert photon_stats({0}, cf)[1] == pytest.approx(0.5, abs=1e-15)

    def test_identical_codes_hom(self):
        c = generate_random_code(6, 2)
        cf = filtered_coefficients(c, c, design_mach_zehnder(3))
        assert not np.any(cf.c_1k)

    def test_record_keys(self):
        a, b = pairs(4, 1)[0]
        rec = filtered_coefficients(a, b, design_mach_zehnder(3)).record()
        assert {"c_dd", "c_dd_random_phase", "cc_0", "residual_d", "residual_f"} <= rec.keys()


class TestPhotonStats:
    def test_cases(self):
        a, b = pairs(8, 1)[0]
        cf = filtered_coefficients(a, b, design_mach_zehnder(3))
        assert photon_stats(set(), cf).tolist() == [1.0, 0.0, 0.0]
        p = photon_stats({0}, cf)
        assert p[1] == pytest.approx(cf.d_total / 2)
        assert p[2] == 0
        both = photon_stats({0, 1}, cf)
        assert both[2] == pytest.approx(cf.d_total * cf.d_cross / 4)
        assert both.sum() == pytest.approx(1.0, abs=1e-15)
        with pytest.raises(ValueError):
            photon_stats({2}, cf)

    def test_approximation_at_wideband_scale(self):
        fp = design_grid_complementary(100, 101, signal_bandwidth(100))
        tvs, dev = [], []
        for a, b in pairs(100, 10):
            cf = filtered_coefficients(a, b, fp)
            tvs.append(total_variation(cf.exact_pmf(), photon_stats({0, 1}, cf)))
            dev.append(abs(cf.c_dd - cf.c_dd_random_phase()))
        assert max(tvs) <= 0.02
        # The random-phase estimate of C_DD is close on average.
        assert np.mean(dev) <= 0.01

    def test_total_variation(self):
        assert total_variation(np.array([1.0]), np.array([0.5, 0.5])) == 0.5
