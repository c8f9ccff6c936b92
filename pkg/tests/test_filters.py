import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcdma.codes import SpreadingCode, all_ones, correlation, generate_random_code
from qcdma.filters import (
    all_pass,
    coded_coefficients,
    design_beam_splitter,
    design_grid_complementary,
    design_lattice,
    design_mach_zehnder,
    design_windowed,
    filter_csv,
    frequency_response,
    from_taps,
    correlation_identity_bound,
    correlation_identity_check,
    measure_defect,
    plain_coefficients,
    response_csv,
    signal_bandwidth,
)
from qcdma.oracles import naive_convolution

from conftest import pairs

angles = st.lists(st.floats(-np.pi, np.pi, allow_nan=False), min_size=1, max_size=6)


def code_of(n):
    return st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n).map(SpreadingCode.from_sequence)


def dft_defect(fp, n=65536):
    ht, hr = np.fft.fft(fp.d, n), np.fft.fft(fp.f, n)
    return np.abs(np.abs(ht) ** 2 + np.abs(hr) ** 2 - 1).max(), 2 * np.abs((ht * hr.conj()).real).max()


class TestTaps:
    def test_identity_filter(self):
        assert design_windowed(8, 1, 0.5).mode == "all-pass"
        fp = all_pass()
        assert fp.q_delay == 0
        assert fp.unitarity_defect == 0.0
        assert np.array_equal(fp.f, [0])

    def test_injected_broken_filter_reports_defect(self):
        fp = from_taps(np.array([0.6, 0.3]), np.array([0.0]))
        # |H_T|^2 spans (0.3^2, 0.9^2), so the worst gap to 1 is 1 - 0.09.
        assert fp.power_defect == pytest.approx(0.91, abs=1e-12)

    def test_non_finite_taps_rejected(self):
        with pytest.raises(ValueError):
            from_taps(np.array([np.nan]), np.array([0.0]))

    def test_exact_pairs(self):
        for fp in (design_beam_splitter(0.4), design_mach_zehnder(3), design_mach_zehnder(5)):
            assert fp.unitarity_defect <= 1e-15
        with pytest.raises(ValueError):
            design_mach_zehnder(4)

    @given(angles)
    def test_lattice_is_power_complementary(self, th):
        fp = design_lattice(th)
        assert fp.n_taps == len(th)
        assert dft_defect(fp, 4096)[0] <= 1e-13


class TestWindowed:
    def test_argument_checks(self):
        with pytest.raises(ValueError):
            design_windowed(16, 32, 0.2)
        with pytest.raises(ValueError):
            design_windowed(16, -1, 0.2)
        with pytest.raises(ValueError):
            design_windowed(16, 33, 0.0)
        with pytest.raises(ValueError):
            design_windowed(16, 33, 4.0)

    def test_type_one_linear_phase(self):
        fp = design_windowed(16, 33, signal_bandwidth(16))
        assert fp.q_delay == 16
        assert np.allclose(fp.d.imag, 0)
        assert np.allclose(fp.d, fp.d[::-1])
        assert fp.cross_defect <= 1e-14
        assert fp.power_defect > 0

    def test_three_db_point(self):
        for n_c, L in [(16, 33), (100, 101)]:
            bw = signal_bandwidth(n_c)
            fp = design_windowed(n_c, L, bw)
            assert not fp.notes
            ht, _ = fp.response(np.array([bw]))
            assert abs(abs(ht[0]) ** 2 - 0.5) <= 1e-9

    def test_narrow_design_on_dft_grid(self):
        fp = design_windowed(16, 33, signal_bandwidth(16))
        h = np.abs(np.fft.fft(fp.d, 4096))
        assert h[0] == pytest.approx(1.0, abs=5e-3)
        assert h[1024] <= 1e-2

    def test_unreachable_bandwidth_is_flagged(self):
        with pytest.warns(UserWarning):
            fp = design_windowed(64, 9, signal_bandwidth(64))
        assert fp.notes

    def test_defect_matches_independent_grid(self):
        fp = design_windowed(100, 101, signal_bandwidth(100))
        power, cross = dft_defect(fp)
        assert fp.power_defect == pytest.approx(power, rel=1e-3)
        assert cross <= 1e-14


class TestGridComplementary:
    def test_all_pass_limit(self):
        fp = design_grid_complementary(8, 1, 0.5)
        assert np.array_equal(fp.d, [1]) and np.array_equal(fp.f, [0])
        assert fp.unitarity_defect == 0.0

    def test_defect_small(self):
        fp = design_grid_complementary(16, 33, signal_bandwidth(16))
        power, cross = dft_defect(fp)
        assert max(power, cross) <= 1e-8
        assert fp.unitarity_defect <= 1e-8

    def test_exact_on_design_grid(self):
        g = 256
        fp = design_grid_complementary(8, 33, signal_bandwidth(8), grid_size=g)
        ht, hr = np.fft.fft(fp.d, g), np.fft.fft(fp.f, g)
        assert np.abs(np.abs(ht) ** 2 + np.abs(hr) ** 2 - 1).max() <= 1e-10
        assert np.abs((ht * hr.conj()).real).max() <= 1e-10

    def test_renormalization_recorded(self):
        fp = design_grid_complementary(16, 33, signal_bandwidth(16))
        assert fp.scale < 1
        assert np.abs(np.fft.fft(fp.d, 8192)).max() == pytest.approx(1 - 1e-3, abs=1e-12)

    def test_grid_too_small(self):
        with pytest.raises(ValueError):
            design_grid_complementary(16, 33, 0.3, grid_size=64)

    def test_energy_split_downstream(self):
        fp = design_grid_complementary(16, 33, signal_bandwidth(16))
        for a, b in pairs(16, 10):
            assert abs(coded_coefficients(fp, a, b).energy - 1) <= 1e-7


class TestCoefficients:
    def test_all_pass_plain(self):
        cs = plain_coefficients(all_pass(), 4)
        assert np.allclose(cs.d_series, 0.5)
        assert not np.any(cs.f_series)

    def test_two_tap_by_hand(self):
        cs = plain_coefficients(from_taps([0.5, 0.5], [0.5, -0.5]), 2)
        expected = np.array([1, 2, 1]) / (2 * np.sqrt(2))
        assert np.allclose(cs.d_series, expected, atol=1e-15)
        assert np.allclose(cs.d_series, [0.35355339059327373, 0.70710678118654746, 0.35355339059327373])

    def test_coded_examples(self):
        enc = SpreadingCode.from_sequence([1, -1])
        cs = coded_coefficients(all_pass(), enc, all_ones(2))
        assert np.allclose(cs.d_series, [1 / np.sqrt(2), -1 / np.sqrt(2)])
        fp = design_mach_zehnder(3)
        c = generate_random_code(8, 4)
        a, b = plain_coefficients(fp, 8), coded_coefficients(fp, c, c)
        assert np.array_equal(a.d_series, b.d_series)

    def test_support_length(self):
        fp = design_windowed(16, 33, signal_bandwidth(16))
        assert len(plain_coefficients(fp, 16)) == 33 + 16 - 1

    def test_matched_delay_all_pass(self):
        for n_c in (1, 5, 16):
            c = generate_random_code(n_c, n_c)
            cs = coded_coefficients(all_pass(), c, c)
            assert len(cs) == n_c
            assert np.allclose(np.abs(cs.d_series), 1 / np.sqrt(n_c))

    @given(st.integers(1, 9).flatmap(lambda n: st.tuples(code_of(n), code_of(n))), angles)
    def test_convolution_matches_naive_loop(self, codes, th):
        enc, dec = codes
        fp = design_lattice(th)
        cs = coded_coefficients(fp, enc, dec)
        pi = enc.chips * dec.chips / np.sqrt(enc.n_c)
        assert np.allclose(cs.d_series, naive_convolution(fp.d, pi), atol=1e-14)
        assert np.allclose(cs.f_series, naive_convolution(fp.f, pi), atol=1e-14)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            coded_coefficients(all_pass(), all_ones(3), all_ones(4))

    def test_delay_centre_of_linear_phase_designs(self):
        # |D_q| is symmetric about q_delay + (N_c-1)/2 for type-I designs.
        for fp, n_c in [(design_windowed(16, 33, signal_bandwidth(16)), 16),
                        (design_grid_complementary(100, 101, signal_bandwidth(100)), 100)]:
            p = np.abs(plain_coefficients(fp, n_c).d_series) ** 2
            centroid = np.dot(np.arange(p.size), p) / p.sum()
            assert centroid == pytest.approx(fp.q_delay + (n_c - 1) / 2, abs=1e-6)

    @pytest.mark.parametrize("n_c,L", [(4, 9), (8, 33), (16, 33)])
    def test_peak_near_delay_when_impulse_outlasts_pulse(self, n_c, L):
        fp = design_windowed(n_c, L, signal_bandwidth(n_c))
        mag = np.abs(plain_coefficients(fp, n_c).d_series)
        assert abs(np.argmax(mag) - (fp.q_delay + (n_c - 1) / 2)) <= 1

    def test_wideband_regime_after_filter(self):
        # Matched decoding keeps most energy in T; a wrong code sends most of it to R.
        fp = design_grid_complementary(100, 101, signal_bandwidth(100))
        assert plain_coefficients(fp, 100).transmitted >= 0.8
        for a, b in pairs(100, 10):
            cs = coded_coefficients(fp, a, b)
            assert cs.transmitted <= 0.1
            assert cs.reflected >= 0.9


class TestCorrelationIdentity:
    def test_same_code_exact_filter(self):
        c = generate_random_code(8, 1)
        for fp in (design_mach_zehnder(5), design_lattice([0.2, 1.0, -0.5])):
            assert correlation_identity_check(fp, c, c, generate_random_code(8, 2)) <= 1e-15

    def test_all_pass_any_codes(self):
        for a, b in pairs(8, 10):
            r = generate_random_code(8, 77)
            assert correlation_identity_check(all_pass(), a, b, r) <= 1e-15

    def test_grid_sweep(self):
        for n_c in (4, 16):
            fp = design_grid_complementary(n_c, 9, signal_bandwidth(n_c))
            worst = max(correlation_identity_check(fp, a, b, a) for a, b in pairs(n_c, 50))
            assert worst <= 1e-6

    @given(st.integers(1, 8).flatmap(lambda n: st.tuples(code_of(n), code_of(n), code_of(n))), angles)
    def test_lattice_identity(self, codes, th):
        s, s2, r = codes
        fp = design_lattice(th)
        assert correlation_identity_check(fp, s, s2, r) <= 1e-12

    def test_windowed_deviation_within_defect(self):
        for n_c, L in [(4, 9), (16, 33), (100, 101)]:
            fp = design_windowed(n_c, L, signal_bandwidth(n_c))
            for a, b in pairs(n_c, 20):
                dev = correlation_identity_check(fp, a, b, a)
                assert dev <= fp.power_defect
                assert dev <= correlation_identity_bound(fp, n_c)


class TestExport:
    def test_tap_csv_round_trips(self):
        fp = design_windowed(16, 33, signal_bandwidth(16))
        text = filter_csv(fp)
        meta = [line for line in text.splitlines() if line.startswith("#")]
        assert "# L=33" in meta
        rows = [line for line in text.splitlines() if not line.startswith("#")]
        assert rows[0] == "l,re_d,im_d,re_f,im_f"
        values = np.array([[float(x) for x in r.split(",")] for r in rows[1:]])
        assert np.array_equal(values[:, 1] + 1j * values[:, 2], fp.d)
        assert np.array_equal(values[:, 3] + 1j * values[:, 4], fp.f)

    def test_all_pass_response_is_flat(self):
        resp = frequency_response(all_pass(), 64)
        assert np.allclose(resp[:, 1], 1.0)
        assert np.allclose(resp[:, 2], 0.0)
        assert response_csv(all_pass(), 4).splitlines()[0] == "omega_tc_over_pi,abs_ht_sq,abs_hr_sq"

    def test_measure_defect_helper(self):
        assert measure_defect(np.array([1.0]), np.array([0.0]), 16) == (0.0, 0.0)
