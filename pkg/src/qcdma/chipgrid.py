"""Chip time axis and the rectangular wavepacket decomposition.

Internally time is measured in chips (T_c = 1). Physical seconds only enter
through ``t_p`` when intensities are reported per second.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ChipGrid:
    t_p: float
    n_c: int

    def __post_init__(self) -> None:
        if self.n_c < 1:
            raise ValueError(f"n_c must be >= 1, got {self.n_c}")
        if not self.t_p > 0:
            raise ValueError(f"t_p must be positive, got {self.t_p}")

    @property
    def t_c(self) -> float:
        return self.t_p / self.n_c

    def boundary(self, k: int) -> float:
        """Start time t_k of chip k in seconds."""
        return k * self.t_c

    def boundaries(self) -> np.ndarray:
        return np.arange(self.n_c + 1) * self.t_c

    def time_of_segment(self, q: np.ndarray | int) -> np.ndarray:
        """Physical start time of output segment q."""
        return np.asarray(q, dtype=float) * self.t_c


@dataclass(frozen=True)
class ChipWavepacket:
    """Normalized wavepacket confined to one chip interval [start, stop)."""

    k: int
    start: float
    stop: float
    amplitude: float

    def __call__(self, t: np.ndarray | float) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.where((t >= self.start) & (t < self.stop), self.amplitude, 0.0)

    def norm_squared(self) -> float:
        return self.amplitude**2 * (self.stop - self.start)


@dataclass(frozen=True)
class RectWavepacket:
    """Rectangular pulse of height 1/sqrt(T_p) on [0, T_p)."""

    grid: ChipGrid
    filterable: bool = field(default=True)

    @property
    def amplitude(self) -> float:
        return 1.0 / np.sqrt(self.grid.t_p)

    @property
    def chip_amplitude(self) -> float:
        """Height sqrt(N_c / T_p) of each normalized chip wavepacket."""
        return float(np.sqrt(self.grid.n_c / self.grid.t_p))

    def __call__(self, t: np.ndarray | float) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.where((t >= 0) & (t < self.grid.t_p), self.amplitude, 0.0)

    def chip_probability(self, k: int) -> float:
        """Integral of |xi|^2 over chip k, which is 1/N_c."""
        _check_chip(self.grid, k)
        return self.amplitude**2 * self.grid.t_c


@dataclass(frozen=True)
class PiecewiseWavepacket:
    """General piecewise-constant pulse on the chip grid.

    Admitted for the Fock oracle only; the filter path accepts rectangular
    pulses exclusively, so ``filterable`` is always False.
    """

    grid: ChipGrid
    heights: np.ndarray
    filterable: bool = field(default=False, init=False)

    def __post_init__(self) -> None:
        h = np.asarray(self.heights, dtype=complex)
        if h.shape != (self.grid.n_c,):
            raise ValueError("need one height per chip")
        norm = float(np.sum(np.abs(h) ** 2) * self.grid.t_c)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"wavepacket norm is {norm}, expected 1")
        object.__setattr__(self, "heights", h)

    def decomposition_weights(self) -> np.ndarray:
        """Amplitudes of the chip operators: sqrt(integral of |xi|^2 over chip k)."""
        return self.heights * np.sqrt(self.grid.t_c)


def _check_chip(grid: ChipGrid, k: int) -> None:
    if not 0 <= k < grid.n_c:
        raise ValueError(f"chip index {k} outside [0, {grid.n_c})")


def chip_wavepacket(w: RectWavepacket, k: int) -> ChipWavepacket:
    _check_chip(w.grid, k)
    return ChipWavepacket(
        k=k,
        start=w.grid.boundary(k),
        stop=w.grid.boundary(k + 1),
        amplitude=np.sqrt(w.grid.n_c) * w.amplitude,
    )


def decomposition_weights(n_c: int) -> np.ndarray:
    """Weights 1/sqrt(N_c) of the chip operators in the pulse operator."""
    if n_c < 1:
        raise ValueError(f"n_c must be >= 1, got {n_c}")
    return np.full(n_c, 1.0 / np.sqrt(n_c))
