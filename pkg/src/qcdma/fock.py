"""Exact bosonic algebra over labeled modes.

A state is a dict from canonical occupations to complex amplitudes in the
orthonormal number basis, so ``norm2`` is a plain sum of squares. Passive
linear optics acts by substituting creation operators; photon number is
capped at ``n_max`` and exceeding it raises ``CapacityError`` rather than
truncating.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .channel import BroadcastMatrix
from .codes import SpreadingCode
from .errors import CapacityError
from .filters import FilterPair

DEFAULT_N_MAX = 3
PRUNE = 1e-15
DEFAULT_TERM_CAP = 2_000_000

SOURCE, INPUT, CHANNEL, OUTPUT = -1, 0, 1, 2
PORT_T, PORT_R = 0, 1
_STAGE_NAMES = {SOURCE: "src", INPUT: "in", CHANNEL: "rx", OUTPUT: "out"}


@dataclass(frozen=True, order=True)
class Mode:
    """Mode label ordered lexicographically by (stage, unit, port, index).

    ``unit`` is the user at the input stage and the receiver afterwards;
    ``index`` is the chip k, or the output segment q at the filter output.
    """

    stage: int
    unit: int
    port: int
    index: int

    @classmethod
    def input(cls, s: int, k: int) -> "Mode":
        return cls(INPUT, s, 0, k)

    @classmethod
    def channel(cls, r: int, k: int) -> "Mode":
        return cls(CHANNEL, r, 0, k)

    @classmethod
    def output(cls, r: int, port: int, q: int) -> "Mode":
        return cls(OUTPUT, r, port, q)

    def __str__(self) -> str:
        return f"{_STAGE_NAMES[self.stage]}:{self.unit}:{self.port}:{self.index}"


Occupation = tuple[tuple[Mode, int], ...]


def occupation(counts: Mapping[Mode, int]) -> Occupation:
    return tuple(sorted((m, c) for m, c in counts.items() if c))


@dataclass(frozen=True, eq=False)
class FockState:
    terms: Mapping[Occupation, complex]
    n_max: int = DEFAULT_N_MAX

    def __post_init__(self) -> None:
        for occ in self.terms:
            n = sum(c for _, c in occ)
            if n > self.n_max:
                raise CapacityError(f"state holds {n} photons, above n_max={self.n_max}")

    @classmethod
    def vacuum(cls, n_max: int = DEFAULT_N_MAX) -> "FockState":
        return cls({(): 1.0 + 0j}, n_max)

    def norm2(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.terms.values()))

    def amplitude(self, counts: Mapping[Mode, int] | Occupation) -> complex:
        key = counts if isinstance(counts, tuple) else occupation(counts)
        return complex(self.terms.get(key, 0j))

    def modes(self) -> set[Mode]:
        return {m for occ in self.terms for m, _ in occ}

    def photon_numbers(self) -> set[int]:
        return {sum(c for _, c in occ) for occ in self.terms}

    def normalized(self) -> "FockState":
        n = math.sqrt(self.norm2())
        return FockState({k: v / n for k, v in self.terms.items()}, self.n_max)

    def tensor(self, other: "FockState") -> "FockState":
        """Product of states on disjoint modes."""
        if self.modes() & other.modes():
            raise ValueError("tensor product needs disjoint modes")
        n_max = max(self.n_max, other.n_max)
        out = {}
        for ka, va in self.terms.items():
            for kb, vb in other.terms.items():
                out[tuple(sorted(ka + kb))] = va * vb
        return FockState(_prune(out), n_max)

    def distance(self, other: "FockState") -> float:
        keys = set(self.terms) | set(other.terms)
        return max((abs(self.terms.get(k, 0) - other.terms.get(k, 0)) for k in keys), default=0.0)


def _prune(terms: Mapping[Occupation, complex]) -> dict[Occupation, complex]:
    return {k: complex(v) for k, v in terms.items() if abs(v) >= PRUNE}


def estimate_terms(n_modes: int, n_photons: int) -> int:
    """Upper bound on basis states with ``n_photons`` spread over ``n_modes`` modes."""
    return math.comb(n_modes + n_photons - 1, n_photons) if n_photons else 1


LinearMap = Mapping[Mode, Sequence[tuple[Mode, complex]]]


def apply_linear_map(
    state: FockState,
    mapping: LinearMap,
    unitary: bool = False,
    term_cap: int = DEFAULT_TERM_CAP,
) -> FockState:
    """Substitute a+_m -> sum_j u_jm a+_j for every mapped mode m.

    Unmapped modes pass through unchanged. With ``unitary=True`` the mapped
    columns are checked to be orthonormal within 1e-10.
    """
    if unitary:
        _check_isometry(mapping)
    out: dict[tuple[Mode, ...], complex] = defaultdict(complex)
    for occ, amp in state.terms.items():
        photons = [m for m, c in occ for _ in range(c)]
        scale = amp / math.sqrt(math.prod(math.factorial(c) for _, c in occ))
        partial: dict[tuple[Mode, ...], complex] = {(): scale}
        for m in photons:
            targets = mapping.get(m, ((m, 1.0),))
            nxt: dict[tuple[Mode, ...], complex] = defaultdict(complex)
            for key, c in partial.items():
                for t, u in targets:
                    nxt[tuple(sorted(key + (t,)))] += c * u
            partial = nxt
        for key, c in partial.items():
            out[key] += c
        if len(out) > term_cap:
            raise CapacityError(f"expansion exceeds the term cap of {term_cap}")
    terms = {}
    for key, c in out.items():
        counts: dict[Mode, int] = defaultdict(int)
        for m in key:
            counts[m] += 1
        boost = math.sqrt(math.prod(math.factorial(v) for v in counts.values()))
        terms[occupation(counts)] = c * boost
    return FockState(_prune(terms), state.n_max)


def _check_isometry(mapping: LinearMap, tol: float = 1e-10) -> None:
    cols = list(mapping)
    rows = sorted({t for m in cols for t, _ in mapping[m]})
    index = {t: i for i, t in enumerate(rows)}
    u = np.zeros((len(rows), len(cols)), dtype=complex)
    for j, m in enumerate(cols):
        for t, c in mapping[m]:
            u[index[t], j] += c
    err = np.abs(u.conj().T @ u - np.eye(len(cols))).max() if cols else 0.0
    if err > tol:
        raise ValueError(f"map claimed unitary has column Gram error {err:.3e}")


def number_state(modes: Sequence[Mode], weights: Sequence[complex], n: int, n_max: int = DEFAULT_N_MAX) -> FockState:
    """(sum_k w_k a+_k)^n / sqrt(n!) |0> expanded in the number basis."""
    w = np.asarray(weights, dtype=complex)
    if len(modes) != w.size:
        raise ValueError("one weight per mode")
    if abs(np.sum(np.abs(w) ** 2) - 1.0) > 1e-12:
        raise ValueError("mode weights must be normalized")
    if n > n_max:
        raise CapacityError(f"n={n} exceeds n_max={n_max}")
    src = Mode(SOURCE, 0, 0, 0)
    start = FockState({occupation({src: n}): 1.0 + 0j} if n else {(): 1.0 + 0j}, n_max)
    return apply_linear_map(start, {src: list(zip(modes, w))})


def apply_code(
    state: FockState,
    code: SpreadingCode,
    unit: int,
    stage: int = INPUT,
    conjugate: bool = False,
) -> FockState:
    """Multiply each occupation by prod_k lambda_k^{n_k} over the chips of one unit.

    Chips are real, so ``conjugate`` changes nothing numerically; it records
    that the decoder applies lambda*.
    """
    chips = code.chips.astype(float)
    if conjugate:
        chips = np.conj(chips)
    out = {}
    for occ, amp in state.terms.items():
        phase = 1.0
        for m, c in occ:
            if m.stage == stage and m.unit == unit:
                if m.index >= code.n_c:
                    raise ValueError(f"mode {m} has no chip in a length-{code.n_c} code")
                phase *= chips[m.index] ** c
        out[occ] = amp * phase
    return FockState(out, state.n_max)


@dataclass(frozen=True)
class Component:
    weight: float
    state: FockState
    label: Occupation


@dataclass(frozen=True)
class DensityMixture:
    components: tuple[Component, ...]

    def __post_init__(self) -> None:
        total = sum(c.weight for c in self.components)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"mixture weights sum to {total}")

    def weight_where(self, label_test: Callable[[Occupation], bool]) -> float:
        return float(sum(c.weight for c in self.components if label_test(c.label)))


def partial_trace(
    state: FockState,
    keep: Callable[[Mode], bool],
    tol: float = 1e-9,
) -> DensityMixture:
    """Project the traced modes onto their number basis and renormalize.

    Each component is labeled by the traced-mode occupation it came from.
    """
    norm2 = state.norm2()
    if abs(norm2 - 1.0) > tol:
        raise ValueError(f"state norm^2 is {norm2}, expected 1")
    groups: dict[Occupation, dict[Occupation, complex]] = defaultdict(dict)
    for occ, amp in state.terms.items():
        kept = tuple((m, c) for m, c in occ if keep(m))
        traced = tuple((m, c) for m, c in occ if not keep(m))
        groups[traced][kept] = amp
    comps = []
    for label in sorted(groups):
        sub = groups[label]
        w = sum(abs(a) ** 2 for a in sub.values())
        if w == 0:
            continue
        st = FockState({k: v / math.sqrt(w) for k, v in sub.items()}, state.n_max)
        comps.append(Component(w / norm2, st, label))
    return DensityMixture(tuple(comps))


def photon_distribution(obj: FockState | DensityMixture, port: Callable[[Mode], bool]) -> np.ndarray:
    """p_n for the total photon count in the modes selected by ``port``."""
    parts = [(c.weight, c.state) for c in obj.components] if isinstance(obj, DensityMixture) else [(1.0, obj)]
    top = max((n for _, st in parts for n in st.photon_numbers()), default=0)
    p = np.zeros(top + 1)
    for w, st in parts:
        for occ, amp in st.terms.items():
            p[sum(c for m, c in occ if port(m))] += w * abs(amp) ** 2
    return p


def mean_photons(obj: FockState | DensityMixture, port: Callable[[Mode], bool]) -> float:
    p = photon_distribution(obj, port)
    return float(np.dot(np.arange(p.size), p))


def hom_amplitude(state: FockState, k: int) -> complex:
    """Amplitude of one photon in chip k at each of receivers 0 and 1."""
    return state.amplitude({Mode.channel(0, k): 1, Mode.channel(1, k): 1})


def dump(state: FockState) -> str:
    """Canonical text form: 'amp_re amp_im : mode=count,...' per term."""
    lines = []
    for occ in sorted(state.terms):
        a = state.terms[occ]
        modes = ",".join(f"{m}={c}" for m, c in occ) or "vacuum"
        lines.append(f"{a.real:.17g} {a.imag:.17g} : {modes}")
    return "\n".join(lines) + "\n"


# Pipeline stages on the chip grid.


def input_state(photons: Sequence[int], n_c: int, n_max: int = DEFAULT_N_MAX) -> FockState:
    """Product of user number states, each spread uniformly over its chips."""
    if sum(photons) > n_max:
        raise CapacityError(f"{sum(photons)} photons exceed n_max={n_max}")
    w = np.full(n_c, 1.0 / math.sqrt(n_c))
    state = FockState.vacuum(n_max)
    for s, n in enumerate(photons):
        if n:
            state = state.tensor(number_state([Mode.input(s, k) for k in range(n_c)], w, n, n_max))
    return state


def encode(state: FockState, codes: Sequence[SpreadingCode]) -> FockState:
    for s, code in enumerate(codes):
        state = apply_code(state, code, s, INPUT)
    return state


def broadcast_map(coupler: BroadcastMatrix, n_c: int) -> dict[Mode, list[tuple[Mode, complex]]]:
    b = coupler.entries
    return {
        Mode.input(s, k): [(Mode.channel(r, k), b[r, s]) for r in range(coupler.m) if b[r, s] != 0]
        for s in range(coupler.m)
        for k in range(n_c)
    }


def decode(state: FockState, codes: Sequence[SpreadingCode]) -> FockState:
    for r, code in enumerate(codes):
        state = apply_code(state, code, r, CHANNEL, conjugate=True)
    return state


def filter_map(fp: FilterPair, n_c: int, receivers: Iterable[int]) -> dict[Mode, list[tuple[Mode, complex]]]:
    """Chip k of receiver r -> sum_l d_l T_{k+l} + f_l R_{k+l}."""
    out = {}
    for r in receivers:
        for k in range(n_c):
            col = [(Mode.output(r, PORT_T, k + l), c) for l, c in enumerate(fp.d) if c != 0]
            col += [(Mode.output(r, PORT_R, k + l), c) for l, c in enumerate(fp.f) if c != 0]
            out[Mode.channel(r, k)] = col
    return out


def mode_budget(fp: FilterPair, n_c: int, m: int) -> int:
    """Output modes (L + N_c - 1) * 2 * M produced when every receiver is filtered."""
    return (fp.n_taps + n_c - 1) * 2 * m


@dataclass(frozen=True)
class FockRun:
    input: FockState
    encoded: FockState
    received: FockState
    decoded: FockState
    filtered: FockState


def propagate(
    photons: Sequence[int],
    codes: Sequence[SpreadingCode],
    coupler: BroadcastMatrix,
    fp: FilterPair,
    receivers: Iterable[int] | None = None,
    n_max: int = DEFAULT_N_MAX,
    mode_cap: int = 512,
    term_cap: int = DEFAULT_TERM_CAP,
) -> FockRun:
    """Encode, broadcast, decode and filter a product of user number states.

    Receivers left out of ``receivers`` keep their decoded chip modes, which
    lets callers trace them out at the decoded stage.
    """
    n_c = codes[0].n_c
    receivers = list(range(coupler.m)) if receivers is None else list(receivers)
    modes = (fp.n_taps + n_c - 1) * 2 * len(receivers) + n_c * (coupler.m - len(receivers))
    if modes > mode_cap:
        raise CapacityError(f"oracle needs {modes} modes, above the mode cap of {mode_cap}")
    if estimate_terms(modes, sum(photons)) > term_cap:
        raise CapacityError(f"oracle may need {estimate_terms(modes, sum(photons))} terms, above the term cap of {term_cap}")
    psi = input_state(photons, n_c, n_max)
    enc = encode(psi, codes)
    rec = apply_linear_map(enc, broadcast_map(coupler, n_c), term_cap=term_cap)
    dec = decode(rec, codes)
    out = apply_linear_map(dec, filter_map(fp, n_c, receivers), term_cap=term_cap)
    return FockRun(psi, enc, rec, dec, out)
