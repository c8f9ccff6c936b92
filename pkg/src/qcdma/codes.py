"""Direct-sequence spreading codes, their correlations and chip products.

Codes are stored as ``int8`` arrays of +1/-1. Random codes use numpy's
``default_rng`` (PCG64), so a seed reproduces a code bit-exactly across
platforms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class SpreadingCode:
    """A +1/-1 chip sequence of length N_c."""

    chips: np.ndarray

    def __post_init__(self) -> None:
        chips = np.asarray(self.chips)
        if chips.ndim != 1 or chips.size < 1:
            raise ValueError("a spreading code needs at least one chip")
        if not np.all((chips == 1) | (chips == -1)):
            raise ValueError("every chip must be exactly +1 or -1")
        object.__setattr__(self, "chips", _frozen(chips.astype(np.int8)))

    @classmethod
    def from_sequence(cls, chips: Sequence[int]) -> "SpreadingCode":
        return cls(np.asarray(list(chips)))

    @property
    def n_c(self) -> int:
        return int(self.chips.size)

    @property
    def phases(self) -> np.ndarray:
        """Phases theta_k in {0, pi} with lambda_k = exp(j theta_k)."""
        return np.where(self.chips == 1, 0.0, np.pi)

    def tolist(self) -> list[int]:
        return [int(c) for c in self.chips]

    def __len__(self) -> int:
        return self.n_c

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SpreadingCode):
            return NotImplemented
        return bool(np.array_equal(self.chips, other.chips))

    def __hash__(self) -> int:
        return hash(self.chips.tobytes())


@dataclass(frozen=True, eq=False)
class ChipProductSequence:
    """Entries lambda~_q lambda_q / sqrt(N_c) for q in [0, N_c)."""

    values: np.ndarray

    @property
    def n_c(self) -> int:
        return int(self.values.size)


def generate_random_code(n_c: int, seed: int, balanced: bool = False) -> SpreadingCode:
    """Draw i.i.d. uniform chips, or a zero-sum permutation when ``balanced``."""
    if n_c < 1:
        raise ValueError(f"n_c must be >= 1, got {n_c}")
    rng = np.random.default_rng(seed)
    if balanced:
        if n_c % 2:
            raise ValueError("balanced codes need an even n_c")
        chips = np.repeat(np.array([1, -1], dtype=np.int8), n_c // 2)
        return SpreadingCode(rng.permutation(chips))
    return SpreadingCode(rng.integers(0, 2, size=n_c, dtype=np.int8) * 2 - 1)


def all_ones(n_c: int) -> SpreadingCode:
    return SpreadingCode(np.ones(n_c, dtype=np.int8))


def _check_lengths(a: SpreadingCode, b: SpreadingCode) -> None:
    if a.n_c != b.n_c:
        raise ValueError(f"code lengths differ: {a.n_c} vs {b.n_c}")


def correlation(a: SpreadingCode, b: SpreadingCode) -> float:
    """Normalized correlation (1/N_c) sum_k a_k b_k."""
    _check_lengths(a, b)
    return int(np.dot(a.chips.astype(np.int64), b.chips.astype(np.int64))) / a.n_c


def chip_product(encode: SpreadingCode, decode: SpreadingCode) -> ChipProductSequence:
    """Per-chip product of the encoding and decoding codes, scaled by 1/sqrt(N_c).

    Codes are real, so the conjugate applied at the decoder is the code itself.
    """
    _check_lengths(encode, decode)
    prod = encode.chips.astype(np.float64) * decode.chips.astype(np.float64)
    return ChipProductSequence(_frozen(prod / np.sqrt(encode.n_c)))
