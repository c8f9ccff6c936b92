"""Broadcasting star coupler."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

UNITARY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class BroadcastMatrix:
    """M x M unitary: entry B[r, s] couples user s into receiver r."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        b = np.array(self.entries, dtype=complex)
        if b.ndim != 2 or b.shape[0] != b.shape[1] or b.shape[0] < 1:
            raise ValueError(f"broadcast matrix must be square and non-empty, got {b.shape}")
        err = unitarity_error(b)
        if err > UNITARY_TOL:
            raise ValueError(f"broadcast matrix is not unitary (error {err:.3e})")
        b.flags.writeable = False
        object.__setattr__(self, "entries", b)

    @property
    def m(self) -> int:
        return int(self.entries.shape[0])


def unitarity_error(b: np.ndarray) -> float:
    return float(np.abs(b.conj().T @ b - np.eye(b.shape[0])).max())


def balanced_two_user() -> BroadcastMatrix:
    return BroadcastMatrix(np.array([[1.0, 1.0], [-1.0, 1.0]]) / np.sqrt(2.0))


def balanced_m_user(m: int) -> BroadcastMatrix:
    """Normalized DFT matrix, whose entries all have |B_rs|^2 = 1/m."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    r, s = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    return BroadcastMatrix(np.exp(-2j * np.pi * r * s / m) / np.sqrt(m))


def broadcast_map(b: BroadcastMatrix, amplitudes: np.ndarray) -> np.ndarray:
    """Map per-user chip amplitudes (M, ...) to per-receiver amplitudes (M, ...)."""
    a = np.asarray(amplitudes)
    if a.shape[0] != b.m:
        raise ValueError(f"expected {b.m} users, got {a.shape[0]}")
    return np.tensordot(b.entries, a, axes=(1, 0))
