"""Closed-form two-user single-photon receiver with the balanced coupler.

Both users send one photon. Receiver 0 decodes with its own code and filters.
The weights below split its output by what the unobserved modes hold:
receiver 1's decoded chips and receiver 0's reflection port.
Receiver 1 is analysed by swapping the code arguments.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codes import SpreadingCode, correlation
from .filters import FilterPair, coded_coefficients, plain_coefficients


@dataclass(frozen=True, eq=False)
class DecodedMixture:
    """Receiver-0 state after decoding, with receiver 1 traced out.

    c_1p1: both photons at receiver 0; c_1k[k]: one photon at receiver 0,
    the other in receiver 1's chip k; c_0: receiver 0 empty.
    """

    c_1p1: float
    c_1k: np.ndarray
    c_0: float
    rho: float

    @property
    def total(self) -> float:
        return self.c_1p1 + float(np.sum(self.c_1k)) + self.c_0


@dataclass(frozen=True, eq=False)
class TwoUserCoefficients:
    c_1p1: float
    c_1k: np.ndarray
    c_0: float
    c_dd: float
    c_fqd: np.ndarray
    c_d1k: np.ndarray
    c_f0k: np.ndarray
    c_ff: float
    rho: float
    d_total: float
    d_cross: float
    residual_d: complex
    residual_f: complex
    extras: dict = field(default_factory=dict)

    @property
    def c_fd(self) -> float:
        return float(np.sum(self.c_fqd))

    @property
    def c_d(self) -> float:
        return float(np.sum(self.c_d1k))

    @property
    def c_f(self) -> float:
        return float(np.sum(self.c_f0k))

    @property
    def cc_0(self) -> float:
        return self.c_0 + self.c_ff + self.c_f

    def exact_pmf(self) -> np.ndarray:
        """Counts n = 0, 1, 2 at the T-port detector of receiver 0."""
        return np.array([self.cc_0, self.c_fd + self.c_d, self.c_dd])

    def c_dd_random_phase(self) -> float:
        return 0.25 * self.d_total * self.d_cross

    def record(self) -> dict:
        return {
            "rho": self.rho,
            "d_total": self.d_total,
            "d_cross": self.d_cross,
            "c_1p1": self.c_1p1,
            "c_1k": self.c_1k.tolist(),
            "c_0": self.c_0,
            "c_dd": self.c_dd,
            "c_dd_random_phase": self.c_dd_random_phase(),
            "c_fqd": self.c_fqd.tolist(),
            "c_d1k": self.c_d1k.tolist(),
            "c_f0k": self.c_f0k.tolist(),
            "c_ff": self.c_ff,
            "c_f": self.c_f,
            "c_d": self.c_d,
            "c_fd": self.c_fd,
            "cc_0": self.cc_0,
            "residual_d": [self.residual_d.real, self.residual_d.imag],
            "residual_f": [self.residual_f.real, self.residual_f.imag],
        }


def _mu(code0: SpreadingCode, code1: SpreadingCode) -> np.ndarray:
    if code0.n_c != code1.n_c:
        raise ValueError(f"code lengths differ: {code0.n_c} vs {code1.n_c}")
    return code0.chips.astype(float) * code1.chips.astype(float)


def decoded_mixture(code0: SpreadingCode, code1: SpreadingCode) -> DecodedMixture:
    """Weights evaluated from the chip sums, before any simplification."""
    mu = _mu(code0, code1)
    n_c = mu.size
    rho = correlation(code0, code1)
    upper = np.triu(np.ones((n_c, n_c), dtype=bool), 1)
    pair_sum = np.add.outer(mu, mu)[upper]
    pair_prod = np.multiply.outer(mu, mu)[upper]
    c_1p1 = (np.sum(pair_sum**2) + 2 * n_c) / (4 * n_c**2)
    c_0 = np.sum(1 + pair_prod) / (2 * n_c**2) + n_c / (2 * n_c**2)
    c_1k = (1 - mu * rho) / (2 * n_c)
    return DecodedMixture(float(c_1p1), c_1k, float(c_0), rho)


def _pair_weight(a: np.ndarray, b: np.ndarray) -> float:
    """1/4 sum_{q1>q0} |b_q0 a_q1 + a_q0 b_q1|^2 + 1/2 sum_q |a_q b_q|^2, row by row.

    Segments where both series vanish contribute nothing and are dropped first.
    """
    keep = np.flatnonzero((a != 0) | (b != 0))
    a, b = a[keep], b[keep]
    total = 0.0
    for q0 in range(a.size - 1):
        total += np.sum(np.abs(b[q0] * a[q0 + 1 :] + a[q0] * b[q0 + 1 :]) ** 2)
    return float(0.25 * total + 0.5 * np.sum(np.abs(a * b) ** 2))


def _reflected_single(f, f01, d, d01, block: int = 256) -> np.ndarray:
    """C_{F_q D} = 1/4 sum_q0 |F01_q D_q0 + F_q D01_q0|^2 for every q, in row blocks.

    Segments where both D and D01 vanish add nothing and are skipped.
    """
    keep = np.flatnonzero((d != 0) | (d01 != 0))
    d, d01 = d[keep], d01[keep]
    out = np.empty(f.size)
    for start in range(0, f.size, block):
        sl = slice(start, start + block)
        rows = np.multiply.outer(f01[sl], d) + np.multiply.outer(f[sl], d01)
        out[sl] = 0.25 * np.sum(np.abs(rows) ** 2, axis=1)
    return out


def filtered_coefficients(code0: SpreadingCode, code1: SpreadingCode, fp: FilterPair) -> TwoUserCoefficients:
    n_c = code0.n_c
    mu = _mu(code0, code1)
    dec = decoded_mixture(code0, code1)
    own = plain_coefficients(fp, n_c)
    cross = coded_coefficients(fp, code1, code0)
    d, f = own.d_series, own.f_series
    d01, f01 = cross.d_series, cross.f_series
    c_dd = _pair_weight(d, d01)
    c_ff = _pair_weight(f, f01)
    c_fqd = _reflected_single(f, f01, d, d01)
    c_d1k = np.array([np.sum(np.abs(d - m * d01) ** 2) for m in mu]) / (4 * n_c)
    c_f0k = np.array([np.sum(np.abs(f - m * f01) ** 2) for m in mu]) / (4 * n_c)
    return TwoUserCoefficients(
        c_1p1=dec.c_1p1,
        c_1k=dec.c_1k,
        c_0=dec.c_0,
        c_dd=c_dd,
        c_fqd=c_fqd,
        c_d1k=c_d1k,
        c_f0k=c_f0k,
        c_ff=c_ff,
        rho=dec.rho,
        d_total=own.transmitted,
        d_cross=cross.transmitted,
        residual_d=complex(np.sum(d * d01)),
        residual_f=complex(np.sum(f * f01)),
    )


def photon_stats(active: set[int] | frozenset[int], coeffs: TwoUserCoefficients) -> np.ndarray:
    """Approximate counts n = 0, 1, 2 at receiver 0 for the set of users switched on.

    A user that is off contributes vacuum, so with one user on the
    transmitted probability is exactly half the relevant D energy.
    """
    active = set(active)
    if not active <= {0, 1}:
        raise ValueError(f"active users must be a subset of {{0, 1}}, got {sorted(active)}")
    dd, dx = coeffs.d_total, coeffs.d_cross
    if not active:
        return np.array([1.0, 0.0, 0.0])
    if active == {0}:
        return np.array([1 - dd / 2, dd / 2, 0.0])
    if active == {1}:
        return np.array([1 - dx / 2, dx / 2, 0.0])
    p2 = dd * dx / 4
    p1 = (dd + dx) / 2 - dd * dx / 2
    return np.array([1 - p1 - p2, p1, p2])


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    n = max(p.size, q.size)
    return 0.5 * float(np.sum(np.abs(np.pad(p, (0, n - p.size)) - np.pad(q, (0, n - q.size)))))
