"""Independent reference computations used by the invariant suite.

Each routine reaches its answer by a different road from the closed forms:
a fine time grid with frequency-domain filtering, naive loops, quadrature,
sampling, or the exact Fock engine.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy import integrate

from . import fock
from .channel import BroadcastMatrix, balanced_two_user
from .chipgrid import ChipGrid, RectWavepacket, chip_wavepacket
from .codes import SpreadingCode
from .filters import FilterPair


def naive_convolution(taps: np.ndarray, seq: np.ndarray) -> np.ndarray:
    out = np.zeros(taps.size + seq.size - 1, dtype=complex)
    for l, t in enumerate(taps):
        for k, v in enumerate(seq):
            out[l + k] += t * v
    return out


def chip_norm_quadrature(grid: ChipGrid, k: int) -> float:
    """Integral of |xi_k|^2 over its chip, integrated in chip units u = (t - t_k) / T_c."""
    w = chip_wavepacket(RectWavepacket(grid), k)
    dt = w.stop - w.start
    val, _ = integrate.quad(lambda u: float(w(w.start + u * dt)) ** 2, 0.0, 1.0, epsabs=1e-13, epsrel=1e-13)
    return val * dt


def time_domain_field(
    alphas: Sequence[complex],
    codes: Sequence[SpreadingCode],
    coupler: BroadcastMatrix,
    fp: FilterPair,
    receiver: int,
    grid: ChipGrid,
    oversample: int = 8,
) -> tuple[np.ndarray, np.ndarray]:
    """Transmitted field envelope at receiver ``receiver`` and its sample times.

    The decoded pulse is sampled ``oversample`` times per chip and filtered by
    multiplying its spectrum with the spectrum of the impulse train
    sum_l d_l delta(t - l T_c).
    """
    n_c = grid.n_c
    n_seg = n_c + fp.n_taps - 1
    n = int(2 ** np.ceil(np.log2(n_seg * oversample + 1)))
    dt = grid.t_c / oversample
    t = np.arange(n) * dt
    chip = np.floor(t / grid.t_c).astype(int)
    inside = chip < n_c
    pulse = np.where(inside, 1.0 / np.sqrt(grid.t_p), 0.0)
    x = np.zeros(n, dtype=complex)
    decode = np.zeros(n)
    decode[inside] = codes[receiver].chips[chip[inside]]
    for s, a in enumerate(alphas):
        lam = np.zeros(n)
        lam[inside] = codes[s].chips[chip[inside]]
        x += coupler.entries[receiver, s] * a * lam * decode * pulse
    impulse = np.zeros(n, dtype=complex)
    impulse[: fp.n_taps * oversample : oversample] = fp.d
    ht = np.fft.fft(impulse)
    y = np.fft.ifft(np.fft.fft(x) * ht)
    return t, y


def oracle_beta(alphas, codes, coupler, fp, receiver, grid, oversample: int = 8) -> np.ndarray:
    """Per-segment amplitudes read off the time-domain field at chip midpoints."""
    t, y = time_domain_field(alphas, codes, coupler, fp, receiver, grid, oversample)
    n_seg = grid.n_c + fp.n_taps - 1
    mid = np.arange(n_seg) * oversample + oversample // 2
    return y[mid] / np.sqrt(grid.n_c / grid.t_p)


def sampled_poisson_counts(beta: np.ndarray, draws: int, seed: int) -> np.ndarray:
    """Total counts from independent per-segment Poisson detectors."""
    rng = np.random.default_rng(seed)
    return rng.poisson(np.abs(beta) ** 2, size=(draws, beta.size)).sum(axis=1)


def engine_single_photon(encode: SpreadingCode, decode: SpreadingCode, fp: FilterPair) -> tuple[np.ndarray, np.ndarray]:
    """T and R amplitudes per segment after encode, decode and filter of |1_xi>."""
    one = BroadcastMatrix(np.eye(1))
    psi = fock.apply_code(fock.input_state([1], encode.n_c, 1), encode, 0)
    psi = fock.apply_linear_map(psi, fock.broadcast_map(one, encode.n_c))
    psi = fock.apply_code(psi, decode, 0, fock.CHANNEL, conjugate=True)
    out = fock.apply_linear_map(psi, fock.filter_map(fp, encode.n_c, [0]))
    n_seg = encode.n_c + fp.n_taps - 1
    t = np.array([out.amplitude({fock.Mode.output(0, fock.PORT_T, q): 1}) for q in range(n_seg)])
    r = np.array([out.amplitude({fock.Mode.output(0, fock.PORT_R, q): 1}) for q in range(n_seg)])
    return t, r


def _split(label):
    other = tuple((m, c) for m, c in label if m.stage == fock.CHANNEL)
    refl = tuple((m, c) for m, c in label if m.stage == fock.OUTPUT)
    return other, refl


def _count(occ) -> int:
    return sum(c for _, c in occ)


def engine_two_user(codes: Sequence[SpreadingCode], fp: FilterPair, receiver: int = 0) -> dict:
    """Two-user weights read from exact partial traces at one receiver.

    Only ``receiver`` is filtered; the other receiver stays at its decoded
    chips. Tracing the other receiver at the decoded stage gives the decoded
    weights, and tracing it together with the R port gives the filtered ones.
    """
    r, o = receiver, 1 - receiver
    n_c = codes[0].n_c
    run = fock.propagate([1, 1], list(codes), balanced_two_user(), fp, receivers=[r], n_max=2)
    dec = fock.partial_trace(run.decoded, lambda m: m.unit == r)
    at_other = lambda k: ((fock.Mode.channel(o, k), 1),)
    out = {
        "c_1p1": dec.weight_where(lambda lab: not lab),
        "c_1k": np.array([dec.weight_where(lambda lab, k=k: lab == at_other(k)) for k in range(n_c)]),
        "c_0": dec.weight_where(lambda lab: _count(lab) == 2),
        "decoded_hom": np.array([fock.hom_amplitude(run.decoded, k) for k in range(n_c)]),
    }
    keep_t = lambda m: m.stage == fock.OUTPUT and m.unit == r and m.port == fock.PORT_T
    mix = fock.partial_trace(run.filtered, keep_t)
    n_seg = n_c + fp.n_taps - 1
    tests = {
        "c_dd": lambda a, b: not a and not b,
        "c_ff": lambda a, b: not a and _count(b) == 2,
        "c_0_filtered": lambda a, b: _count(a) == 2,
    }
    for name, test in tests.items():
        out[name] = mix.weight_where(lambda lab, test=test: test(*_split(lab)))
    refl = lambda q: ((fock.Mode.output(r, fock.PORT_R, q), 1),)
    out["c_fqd"] = np.array([mix.weight_where(lambda lab, q=q: _split(lab) == ((), refl(q))) for q in range(n_seg)])
    out["c_d1k"] = np.array([mix.weight_where(lambda lab, k=k: _split(lab) == (at_other(k), ())) for k in range(n_c)])
    out["c_f0k"] = np.array([
        mix.weight_where(lambda lab, k=k: _split(lab)[0] == at_other(k) and _count(_split(lab)[1]) == 1)
        for k in range(n_c)
    ])
    out["pmf"] = fock.photon_distribution(mix, keep_t)
    return out
