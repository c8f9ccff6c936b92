"""Scenario files: pydantic models, validation and construction of core objects."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .channel import BroadcastMatrix, balanced_m_user, balanced_two_user
from .chipgrid import ChipGrid
from .codes import SpreadingCode, generate_random_code
from .errors import ConfigError
from .filters import FilterPair, all_pass, design_grid_complementary, design_windowed, signal_bandwidth

SCHEMA_PATH = Path(__file__).with_name("scenario.schema.json")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class CouplerConfig(_Strict):
    kind: Literal["balanced", "matrix"] = "balanced"
    entries: Optional[list[list[tuple[float, float]]]] = Field(
        default=None, description="Row-major [re, im] pairs; required when kind is 'matrix'."
    )


class SystemConfig(_Strict):
    m: int = Field(ge=1)
    n_c: int = Field(ge=1)
    t_p: float = Field(default=1.0, gt=0, description="Pulse duration in seconds.")
    coupler: CouplerConfig = CouplerConfig()


class CodeConfig(_Strict):
    chips: Optional[list[Literal[-1, 1]]] = None
    seed: Optional[int] = None
    balanced: bool = False
    same_as: Optional[int] = Field(default=None, description="Reuse another user's code.")

    @model_validator(mode="after")
    def _one_source(self) -> "CodeConfig":
        given = [x is not None for x in (self.chips, self.seed, self.same_as)]
        if sum(given) != 1:
            raise ValueError("give exactly one of chips, seed or same_as")
        return self


class StateConfig(_Strict):
    kind: Literal["coherent", "single-photon", "off"]
    alpha: tuple[float, float] = (1.0, 0.0)


class UserConfig(_Strict):
    state: StateConfig
    code: CodeConfig


class FilterConfig(_Strict):
    mode: Literal["windowed", "grid-complementary", "all-pass"]
    L: int = 101
    bandwidth: float = Field(default=1.0, gt=0)
    bandwidth_unit: Literal["signal", "rad_per_chip"] = "signal"
    window: str = "hamming"
    grid_size: int = 8192
    headroom: float = Field(default=1e-3, ge=0, lt=1)


Output = Literal["filter", "intensity", "photon_stats", "coefficients"]


class RunConfig(_Strict):
    receivers: Optional[list[int]] = None
    outputs: list[Output] = ["filter", "intensity", "photon_stats", "coefficients"]
    n_max: int = Field(default=3, ge=1)
    seeds: list[int] = []
    engine: Literal["closed-form", "fock"] = "closed-form"
    mode_cap: int = Field(default=512, ge=1)


class Scenario(_Strict):
    system: SystemConfig
    users: list[UserConfig]
    filter: FilterConfig
    run: RunConfig = RunConfig()

    @model_validator(mode="after")
    def _cross_refs(self) -> "Scenario":
        m, n_c = self.system.m, self.system.n_c
        if len(self.users) != m:
            raise ValueError(f"users: expected {m} entries, got {len(self.users)}")
        for s, u in enumerate(self.users):
            c = u.code
            if c.chips is not None and len(c.chips) != n_c:
                raise ValueError(f"users.{s}.code.chips: expected {n_c} chips, got {len(c.chips)}")
            if c.same_as is not None and not (0 <= c.same_as < m and self.users[c.same_as].code.same_as is None):
                raise ValueError(f"users.{s}.code.same_as: must name a user with its own code")
            if c.balanced and n_c % 2:
                raise ValueError(f"users.{s}.code.balanced: needs an even n_c")
        kinds = {u.state.kind for u in self.users} - {"off"}
        if len(kinds) > 1:
            raise ValueError("users: coherent and single-photon users cannot be mixed in one scenario")
        for r in self.run.receivers or []:
            if not 0 <= r < m:
                raise ValueError(f"run.receivers: receiver {r} outside [0, {m})")
        cp = self.system.coupler
        if cp.kind == "matrix":
            if cp.entries is None or len(cp.entries) != m or any(len(row) != m for row in cp.entries):
                raise ValueError(f"system.coupler.entries: need an {m}x{m} matrix")
        f = self.filter
        if f.mode != "all-pass" and (f.L < 1 or f.L % 2 == 0):
            raise ValueError("filter.L: must be odd and >= 1")
        if f.mode == "grid-complementary" and (f.grid_size < 4 * f.L or f.grid_size % 2):
            raise ValueError("filter.grid_size: must be even and >= 4 L")
        return self

    @property
    def receivers(self) -> list[int]:
        return list(range(self.system.m)) if self.run.receivers is None else list(self.run.receivers)

    @property
    def state_kind(self) -> str:
        kinds = {u.state.kind for u in self.users} - {"off"}
        return kinds.pop() if kinds else "off"

    @property
    def grid(self) -> ChipGrid:
        return ChipGrid(self.system.t_p, self.system.n_c)

    def bandwidth_rad_per_chip(self) -> float:
        f = self.filter
        return f.bandwidth * signal_bandwidth(self.system.n_c) if f.bandwidth_unit == "signal" else f.bandwidth

    def build_codes(self, seed_offset: int = 0) -> list[SpreadingCode]:
        n_c = self.system.n_c
        own: list[SpreadingCode | None] = []
        for u in self.users:
            c = u.code
            if c.chips is not None:
                own.append(SpreadingCode.from_sequence(c.chips))
            elif c.seed is not None:
                own.append(generate_random_code(n_c, c.seed + seed_offset, c.balanced))
            else:
                own.append(None)
        return [own[u.code.same_as] if u.code.same_as is not None else own[s] for s, u in enumerate(self.users)]

    def build_coupler(self) -> BroadcastMatrix:
        cp = self.system.coupler
        if cp.kind == "balanced":
            return balanced_two_user() if self.system.m == 2 else balanced_m_user(self.system.m)
        mat = np.array([[complex(re, im) for re, im in row] for row in cp.entries])
        try:
            return BroadcastMatrix(mat)
        except ValueError as exc:
            raise ConfigError(f"system.coupler.entries: {exc}") from exc

    def build_filter(self) -> FilterPair:
        f = self.filter
        if f.mode == "all-pass":
            return all_pass()
        bw = self.bandwidth_rad_per_chip()
        try:
            if f.mode == "windowed":
                return design_windowed(self.system.n_c, f.L, bw, f.window, f.grid_size)
            return design_grid_complementary(self.system.n_c, f.L, bw, f.grid_size, f.window, f.headroom)
        except ValueError as exc:
            raise ConfigError(f"filter: {exc}") from exc

    def alphas(self) -> tuple[complex, ...]:
        return tuple(complex(*u.state.alpha) if u.state.kind == "coherent" else 0j for u in self.users)

    def photons(self) -> list[int]:
        return [1 if u.state.kind == "single-photon" else 0 for u in self.users]

    def active(self) -> tuple[bool, ...]:
        return tuple(u.state.kind != "off" for u in self.users)


def _loc(err: dict) -> str:
    return ".".join(str(p) for p in err["loc"])


def parse_scenario(data: dict) -> Scenario:
    try:
        return Scenario.model_validate(data)
    except ValidationError as exc:
        msgs = []
        for e in exc.errors():
            msg = e["msg"].removeprefix("Value error, ")
            msgs.append(msg if not e["loc"] else f"{_loc(e)}: {msg}")
        raise ConfigError("; ".join(msgs)) from exc


def load_scenario(path: str | Path) -> Scenario:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    return parse_scenario(data)


def schema_text() -> str:
    return json.dumps(Scenario.model_json_schema(), indent=2, sort_keys=True) + "\n"
