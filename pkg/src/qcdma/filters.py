"""Two-port quantum filter: tap design, unitarity accounting and D/F series.

Frequencies are angular and measured per chip: ``omega`` here means
omega * T_c, so Nyquist is pi and the bandwidth of an unspread pulse is
2 pi / N_c.
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.signal as sps
from scipy.optimize import brentq

from .codes import SpreadingCode, all_ones, chip_product, correlation
from .serialize import fmt as _fmt

DEFAULT_GRID = 8192
DEFAULT_HEADROOM = 1e-3


def signal_bandwidth(n_c: int) -> float:
    """Bandwidth 2 pi / T_p of the unspread pulse, in rad per chip."""
    return 2.0 * np.pi / n_c


@dataclass(frozen=True, eq=False)
class FilterPair:
    """Transmission taps ``d`` and reflection taps ``f`` with tau = T_c.

    ``unitarity_defect`` is the larger of the power defect
    max| |H_T|^2 + |H_R|^2 - 1 | and the cross defect 2 max|Re(H_T H_R*)|,
    both measured on ``defect_grid`` points at construction.
    """

    d: np.ndarray
    f: np.ndarray
    q_delay: int
    mode: str
    power_defect: float
    cross_defect: float
    defect_grid: int
    bandwidth: float | None = None
    window: str | None = None
    design_taps: int | None = None
    scale: float = 1.0
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def unitarity_defect(self) -> float:
        return max(self.power_defect, self.cross_defect)

    @property
    def n_taps(self) -> int:
        return int(self.d.size)

    def response(self, omega: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """H_T and H_R evaluated at per-chip angular frequencies ``omega``."""
        return _eval_taps(self.d, omega), _eval_taps(self.f, omega)


@dataclass(frozen=True, eq=False)
class CoefficientSeries:
    """Per-segment transmission (D) and reflection (F) amplitudes."""

    d_series: np.ndarray
    f_series: np.ndarray

    @property
    def transmitted(self) -> float:
        return float(np.sum(np.abs(self.d_series) ** 2))

    @property
    def reflected(self) -> float:
        return float(np.sum(np.abs(self.f_series) ** 2))

    @property
    def energy(self) -> float:
        return self.transmitted + self.reflected

    def __len__(self) -> int:
        return int(self.d_series.size)


def _eval_taps(taps: np.ndarray, omega: np.ndarray) -> np.ndarray:
    omega = np.asarray(omega, dtype=float)
    l = np.arange(taps.size)
    return np.exp(-1j * np.multiply.outer(omega, l)) @ taps


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


def _pad(a: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(n, dtype=complex)
    out[: a.size] = a
    return out


def measurement_grid(n_taps: int, grid_size: int = DEFAULT_GRID) -> int:
    """Dense grid for defect measurement: at least 8x the tap length."""
    return max(grid_size, 8 * int(2 ** np.ceil(np.log2(max(n_taps, 1)))))


def measure_defect(d: np.ndarray, f: np.ndarray, grid: int) -> tuple[float, float]:
    """Return (power defect, cross defect) on a ``grid``-point FFT grid."""
    ht = np.fft.fft(d, grid)
    hr = np.fft.fft(f, grid)
    power = np.abs(np.abs(ht) ** 2 + np.abs(hr) ** 2 - 1.0).max()
    cross = 2.0 * np.abs((ht * hr.conj()).real).max()
    return float(power), float(cross)


def from_taps(
    d: np.ndarray,
    f: np.ndarray,
    q_delay: int | None = None,
    mode: str = "taps",
    grid_size: int = DEFAULT_GRID,
    **meta,
) -> FilterPair:
    """Wrap explicit taps, padding both to a common length and measuring the defect."""
    d = np.atleast_1d(np.asarray(d, dtype=complex))
    f = np.atleast_1d(np.asarray(f, dtype=complex))
    if d.size < 1 or f.size < 1:
        raise ValueError("tap sequences must be non-empty")
    if not (np.all(np.isfinite(d)) and np.all(np.isfinite(f))):
        raise ValueError("taps must be finite")
    n = max(d.size, f.size)
    d, f = _pad(d, n), _pad(f, n)
    grid = measurement_grid(n, grid_size)
    power, cross = measure_defect(d, f, grid)
    if q_delay is None:
        q_delay = int(np.argmax(np.abs(d))) if np.any(d) else 0
    return FilterPair(
        d=_freeze(d),
        f=_freeze(f),
        q_delay=int(q_delay),
        mode=mode,
        power_defect=power,
        cross_defect=cross,
        defect_grid=grid,
        **meta,
    )


def all_pass() -> FilterPair:
    return from_taps(np.array([1.0]), np.array([0.0]), q_delay=0, mode="all-pass")


def design_beam_splitter(theta: float) -> FilterPair:
    """Single-tap pair d = cos theta, f = j sin theta."""
    return from_taps(np.array([np.cos(theta)]), np.array([1j * np.sin(theta)]), q_delay=0, mode="beam-splitter")


def design_mach_zehnder(L: int) -> FilterPair:
    """d = (1/2, 0, ..., 0, 1/2), f = (1/2, 0, ..., 0, -1/2) with L taps.

    One of the few FIR pairs that meets both complementarity conditions
    exactly: H_T = cos(m w) e^{-j m w} and H_R = j sin(m w) e^{-j m w}.
    """
    if L < 3 or L % 2 == 0:
        raise ValueError(f"L must be odd and >= 3, got {L}")
    d = np.zeros(L)
    f = np.zeros(L)
    d[0] = d[-1] = 0.5
    f[0], f[-1] = 0.5, -0.5
    return from_taps(d, f, q_delay=(L - 1) // 2, mode="mach-zehnder")


def design_lattice(angles) -> FilterPair:
    """Rotation lattice: beam splitters separated by one-chip delays on the R arm.

    (H_T, H_R) is the first column of a paraunitary product, so
    |H_T|^2 + |H_R|^2 = 1 exactly for any angles; the cross term is not
    controlled. The pair is an exact isometry when only the T input is lit.
    """
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    if angles.size < 1:
        raise ValueError("need at least one angle")
    ht = np.array([np.cos(angles[0])], dtype=complex)
    hr = np.array([1j * np.sin(angles[0])], dtype=complex)
    for th in angles[1:]:
        ht = np.append(ht, 0.0)
        hr = np.concatenate([[0.0], hr])
        ht, hr = np.cos(th) * ht + 1j * np.sin(th) * hr, 1j * np.sin(th) * ht + np.cos(th) * hr
    return from_taps(ht, hr, mode="lattice")


def _check_design_args(L: int, bandwidth: float, allow_single: bool = False) -> None:
    if L % 2 == 0 or L < (1 if allow_single else 3):
        raise ValueError(f"L must be odd and >= {1 if allow_single else 3}, got {L}")
    if not 0 < bandwidth <= np.pi:
        raise ValueError(f"bandwidth must lie in (0, pi] rad per chip, got {bandwidth}")


def lowpass_taps(
    L: int,
    bandwidth: float,
    window: str = "hamming",
    peak: float = 1.0,
    grid: int = DEFAULT_GRID,
) -> tuple[np.ndarray, bool]:
    """Type-I windowed-sinc lowpass whose 3-dB point sits at ``bandwidth``.

    The firwin cutoff (its -6 dB point) is solved for so that
    |H(bandwidth)|^2 = 1/2 after the taps are rescaled to max |H| <= peak on
    ``grid`` points. When the window's main lobe is too wide for the request
    the plain cutoff bandwidth/pi is used and the second return value is False.
    """
    _check_design_args(L, bandwidth)
    z = np.exp(-1j * bandwidth * np.arange(L))

    def excess(c: float) -> float:
        taps = sps.firwin(L, c, window=window)
        return float(np.abs(_scale_to_unit(taps, grid, peak) * (taps @ z)) ** 2 - 0.5)

    lo, hi = 1e-9, 1.0 - 1e-9
    if bandwidth < np.pi and excess(lo) < 0 < excess(hi):
        cutoff = brentq(excess, lo, hi, xtol=1e-14)
        return sps.firwin(L, cutoff, window=window), True
    plain = min(bandwidth / np.pi, hi)
    return sps.firwin(L, plain, window=window), False


def _scale_to_unit(d: np.ndarray, grid: int, peak: float) -> float:
    amax = np.abs(np.fft.fft(d, grid)).max()
    return peak / amax if amax > peak else 1.0


def design_windowed(
    n_c: int,
    L: int,
    bandwidth: float,
    window: str = "hamming",
    grid_size: int = DEFAULT_GRID,
) -> FilterPair:
    """Windowed type-I lowpass with a windowed complementary reflection.

    f carries the same window applied to the zero-phase complementary
    magnitude sqrt(1 - |H_T|^2), rotated by +90 degrees and given the same
    group delay (L-1)/2, so the cross term vanishes and the power defect is
    what remains from windowing. L = 1 is the identity filter.
    """
    _check_design_args(L, bandwidth, allow_single=True)
    if L == 1:
        return all_pass()
    grid = measurement_grid(L, grid_size)
    d, matched = lowpass_taps(L, bandwidth, window, 1.0, grid)
    scale = _scale_to_unit(d, grid, 1.0)
    d = d * scale
    amp = np.abs(np.fft.fft(d, grid))
    comp = np.real(np.fft.ifft(np.sqrt(np.clip(1.0 - amp**2, 0.0, None))))
    half = (L - 1) // 2
    centred = np.concatenate([comp[-half:], comp[: half + 1]])
    f = 1j * sps.get_window(window, L, fftbins=False) * centred
    notes = () if matched else ("3-dB point not reachable with this window and L; plain cutoff used",)
    if not matched:
        warnings.warn(notes[0], stacklevel=2)
    return from_taps(
        d, f, q_delay=half, mode="windowed", grid_size=grid_size,
        bandwidth=bandwidth, window=window, design_taps=L, scale=scale, notes=notes,
    )


def design_grid_complementary(
    n_c: int,
    L: int,
    bandwidth: float,
    grid_size: int = DEFAULT_GRID,
    window: str = "hamming",
    headroom: float = DEFAULT_HEADROOM,
) -> FilterPair:
    """Windowed lowpass with a reflection built to be exactly complementary on a grid.

    d is scaled so max |H_T| = 1 - headroom, then delayed so its centre sits at
    grid_size//2. The reflection is H_R = j sqrt(1 - |H_T|^2) exp(-j omega grid_size/2)
    sampled on the grid and inverse transformed, so f has grid_size taps and
    shares that delay. Both complementarity conditions then hold on the grid,
    and the defect is re-measured on a finer grid. L = 1 is the identity filter.
    """
    _check_design_args(L, bandwidth, allow_single=True)
    if L == 1:
        return all_pass()
    if grid_size < 4 * L or grid_size % 2:
        raise ValueError(f"grid_size must be even and >= 4 L = {4 * L}, got {grid_size}")
    taps, matched = lowpass_taps(L, bandwidth, window, 1.0 - headroom, grid_size)
    scale = _scale_to_unit(taps, grid_size, 1.0 - headroom)
    taps = taps * scale
    centre = grid_size // 2
    d = np.zeros(grid_size, dtype=complex)
    start = centre - (L - 1) // 2
    d[start : start + L] = taps
    amp = np.abs(np.fft.fft(taps, grid_size))
    comp = np.real(np.fft.ifft(np.sqrt(1.0 - amp**2)))
    f = 1j * np.roll(comp, centre)
    notes = () if matched else ("3-dB point not reachable with this window and L; plain cutoff used",)
    return from_taps(
        d, f, q_delay=centre, mode="grid-complementary", grid_size=grid_size,
        bandwidth=bandwidth, window=window, design_taps=L, scale=scale, notes=notes,
    )


DIRECT_CONV_LIMIT = 50_000_000


def _convolve(taps: np.ndarray, seq: np.ndarray) -> np.ndarray:
    """Direct sums up to DIRECT_CONV_LIMIT products, FFT beyond."""
    if taps.size * seq.size <= DIRECT_CONV_LIMIT:
        return np.convolve(taps, seq.astype(complex))
    return sps.fftconvolve(taps, seq.astype(complex))


def coded_coefficients(fp: FilterPair, encode: SpreadingCode, decode: SpreadingCode) -> CoefficientSeries:
    """D~ = d * Pi and F~ = f * Pi for the chip product of the two codes."""
    pi = chip_product(encode, decode).values
    return CoefficientSeries(_freeze(_convolve(fp.d, pi)), _freeze(_convolve(fp.f, pi)))


def plain_coefficients(fp: FilterPair, n_c: int) -> CoefficientSeries:
    ones = all_ones(n_c)
    return coded_coefficients(fp, ones, ones)


def user_coefficients(fp: FilterPair, codes: list[SpreadingCode], s: int, r: int) -> CoefficientSeries:
    """D^{s,r}, F^{s,r}: user s's code decoded by receiver r's code."""
    return coded_coefficients(fp, codes[s], codes[r])


def correlation_identity_lhs(fp: FilterPair, code_s: SpreadingCode, code_s2: SpreadingCode, code_r: SpreadingCode) -> complex:
    a = coded_coefficients(fp, code_s, code_r)
    b = coded_coefficients(fp, code_s2, code_r)
    return complex(np.vdot(a.d_series, b.d_series) + np.vdot(a.f_series, b.f_series))


def correlation_identity_check(fp: FilterPair, code_s: SpreadingCode, code_s2: SpreadingCode, code_r: SpreadingCode) -> float:
    """|sum_q (D^{s,r*} D^{s',r} + F^{s,r*} F^{s',r}) - <s|s'>|."""
    return abs(correlation_identity_lhs(fp, code_s, code_s2, code_r) - correlation(code_s, code_s2))


def correlation_identity_bound(fp: FilterPair, n_c: int) -> float:
    """Documented contract L N_c defect + 1e-9; the power defect alone already bounds it."""
    return fp.n_taps * n_c * fp.unitarity_defect + 1e-9


def frequency_response(fp: FilterPair, n_points: int = 1024) -> np.ndarray:
    """Rows (omega T_c / pi, |H_T|^2, |H_R|^2) on [0, pi]."""
    omega = np.linspace(0.0, np.pi, n_points)
    ht, hr = fp.response(omega)
    return np.column_stack([omega / np.pi, np.abs(ht) ** 2, np.abs(hr) ** 2])


def filter_csv(fp: FilterPair) -> str:
    """Tap table with '#' metadata lines (L, bandwidth, defect) ahead of the header."""
    buf = io.StringIO()
    bw = "" if fp.bandwidth is None else _fmt(fp.bandwidth)
    buf.write(f"# mode={fp.mode}\n# L={fp.design_taps or fp.n_taps}\n# n_taps={fp.n_taps}\n")
    buf.write(f"# bandwidth_rad_per_chip={bw}\n# q_delay={fp.q_delay}\n")
    buf.write(f"# unitarity_defect={_fmt(fp.unitarity_defect)}\n")
    buf.write(f"# power_defect={_fmt(fp.power_defect)}\n# cross_defect={_fmt(fp.cross_defect)}\n")
    buf.write("l,re_d,im_d,re_f,im_f\n")
    for l, (dl, fl) in enumerate(zip(fp.d, fp.f)):
        buf.write(f"{l},{_fmt(dl.real)},{_fmt(dl.imag)},{_fmt(fl.real)},{_fmt(fl.imag)}\n")
    return buf.getvalue()


def response_csv(fp: FilterPair, n_points: int = 1024) -> str:
    buf = io.StringIO()
    buf.write("omega_tc_over_pi,abs_ht_sq,abs_hr_sq\n")
    for row in frequency_response(fp, n_points):
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def coefficients_csv(series: dict[str, CoefficientSeries]) -> str:
    """Columns q followed by re/im of each named D and F series."""
    names = list(series)
    n = max(len(s) for s in series.values())
    cols = ["q"]
    for name in names:
        cols += [f"re_d_{name}", f"im_d_{name}", f"re_f_{name}", f"im_f_{name}"]
    buf = io.StringIO()
    buf.write(",".join(cols) + "\n")
    padded = {k: (_pad(v.d_series, n), _pad(v.f_series, n)) for k, v in series.items()}
    for q in range(n):
        row = [str(q)]
        for name in names:
            dq, fq = padded[name][0][q], padded[name][1][q]
            row += [_fmt(dq.real), _fmt(dq.imag), _fmt(fq.real), _fmt(fq.imag)]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()
