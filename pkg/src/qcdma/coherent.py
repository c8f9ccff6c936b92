"""Closed-form coherent-state pipeline and the shared intensity formulas.

A coherent input stays a product of coherent states through the encoder,
coupler, decoder and filter, so the output is fully described by the
per-segment amplitudes at both filter ports.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .channel import BroadcastMatrix
from .chipgrid import ChipGrid
from .codes import SpreadingCode
from .filters import CoefficientSeries, FilterPair, user_coefficients

PMF_TAIL = 1e-12


@dataclass(frozen=True)
class CoherentScenario:
    alphas: tuple[complex, ...]
    codes: tuple[SpreadingCode, ...]
    coupler: BroadcastMatrix
    filter: FilterPair
    grid: ChipGrid
    receiver: int = 0
    active: tuple[bool, ...] | None = None

    def __post_init__(self) -> None:
        m = self.coupler.m
        if len(self.alphas) != m or len(self.codes) != m:
            raise ValueError(f"need {m} alphas and codes, got {len(self.alphas)} and {len(self.codes)}")
        if any(c.n_c != self.grid.n_c for c in self.codes):
            raise ValueError("every code length must equal n_c")
        if not 0 <= self.receiver < m:
            raise ValueError(f"receiver {self.receiver} outside [0, {m})")
        if self.active is not None and len(self.active) != m:
            raise ValueError("active flags must match the user count")

    @property
    def effective_alphas(self) -> np.ndarray:
        a = np.asarray(self.alphas, dtype=complex)
        if self.active is None:
            return a
        return np.where(np.asarray(self.active, dtype=bool), a, 0.0)

    def with_receiver(self, r: int) -> "CoherentScenario":
        return CoherentScenario(self.alphas, self.codes, self.coupler, self.filter, self.grid, r, self.active)


@dataclass(frozen=True, eq=False)
class CoherentOutput:
    """Product of coherent states; beta on the T port, gamma on the R port."""

    receiver: int
    beta: np.ndarray
    gamma: np.ndarray
    grid: ChipGrid
    q_delay: int

    @property
    def is_pure(self) -> bool:
        return True

    @property
    def chip_intensity(self) -> np.ndarray:
        """Mean photons I_{r,q} = |beta_q|^2 detected in each T-port segment."""
        return np.abs(self.beta) ** 2

    @property
    def intensity_per_second(self) -> np.ndarray:
        """I_r(t) = (N_c/T_p) |beta_q|^2 for t in segment q."""
        return self.chip_intensity * self.grid.n_c / self.grid.t_p

    def intensity(self, t: np.ndarray | float) -> np.ndarray:
        """Piecewise-constant intensity in photons per second at times ``t``."""
        q = np.floor(np.asarray(t, dtype=float) / self.grid.t_c).astype(int)
        inside = (q >= 0) & (q < self.beta.size)
        out = np.zeros(q.shape)
        out[inside] = self.intensity_per_second[q[inside]]
        return out

    @property
    def mean_total_energy(self) -> float:
        """Poisson mean when the detector integrates every segment: sum_q |beta_q|^2."""
        return float(np.sum(self.chip_intensity))

    @property
    def mean_mode_projected(self) -> float:
        """Mean photons in the delayed signal mode: |sum_q beta_q <xi_q|xi(t - T_delay)>|^2."""
        n_c = self.grid.n_c
        seg = self.beta[self.q_delay : self.q_delay + n_c]
        return float(np.abs(np.sum(seg) / np.sqrt(n_c)) ** 2)

    @property
    def reflected_energy(self) -> float:
        return float(np.sum(np.abs(self.gamma) ** 2))

    def segment_state(self, q: int, n_max: int) -> np.ndarray:
        """Truncated Fock vector of the coherent state in T-port segment q."""
        n = np.arange(n_max + 1)
        b = complex(self.beta[q])
        return np.sqrt(stats.poisson.pmf(n, abs(b) ** 2)) * np.exp(1j * n * np.angle(b))


@dataclass(frozen=True)
class PoissonStats:
    mean: float
    estimator: str

    def n_max(self, tail: float = PMF_TAIL) -> int:
        if self.mean == 0:
            return 0
        return int(stats.poisson.isf(tail, self.mean)) + 1

    def pmf(self, n_max: int | None = None) -> np.ndarray:
        n_max = self.n_max() if n_max is None else n_max
        return stats.poisson.pmf(np.arange(n_max + 1), self.mean)

    def record(self) -> dict:
        return {"estimator": self.estimator, "mean": self.mean, "pmf": self.pmf().tolist()}


def _series(sc: CoherentScenario, s: int, r: int) -> CoefficientSeries:
    return user_coefficients(sc.filter, list(sc.codes), s, r)


def propagate(sc: CoherentScenario) -> CoherentOutput:
    """beta_q = sum_s B_rs D_q^{s,r} alpha_s at receiver r, and likewise gamma with F."""
    r = sc.receiver
    alphas = sc.effective_alphas
    b = sc.coupler.entries
    beta = 0
    gamma = 0
    for s in range(sc.coupler.m):
        cs = _series(sc, s, r)
        beta = beta + b[r, s] * alphas[s] * cs.d_series
        gamma = gamma + b[r, s] * alphas[s] * cs.f_series
    return CoherentOutput(r, np.asarray(beta, dtype=complex), np.asarray(gamma, dtype=complex), sc.grid, sc.filter.q_delay)


def propagate_all(sc: CoherentScenario) -> list[CoherentOutput]:
    return [propagate(sc.with_receiver(r)) for r in range(sc.coupler.m)]


def photon_statistics(out: CoherentOutput, estimator: str = "total_energy") -> PoissonStats:
    """Poisson count distribution of the T-port detector at one receiver."""
    if estimator == "total_energy":
        return PoissonStats(out.mean_total_energy, estimator)
    if estimator == "mode_projected":
        return PoissonStats(out.mean_mode_projected, estimator)
    raise ValueError(f"unknown estimator {estimator!r}")


def number_state_intensity(
    photons: Sequence[int],
    codes: Sequence[SpreadingCode],
    coupler: BroadcastMatrix,
    fp: FilterPair,
    receiver: int,
    port: str = "T",
) -> np.ndarray:
    """Mean photons per segment I_{r,q} = sum_s n_s |B_rs X_q^{s,r}|^2 for X = D (T) or F (R)."""
    total = 0.0
    for s, n_s in enumerate(photons):
        if n_s == 0:
            continue
        cs = user_coefficients(fp, list(codes), s, receiver)
        x = cs.d_series if port == "T" else cs.f_series
        total = total + n_s * np.abs(coupler.entries[receiver, s] * x) ** 2
    if np.isscalar(total):
        n = user_coefficients(fp, list(codes), 0, receiver).d_series.size
        return np.zeros(n)
    return total
