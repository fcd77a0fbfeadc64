"""Sweep configuration: JSON schema, validation and CLI overrides."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from ..errors import ConfigError
from ..operators import SpinLattice

DEFAULT_SIGMAS = (1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3)


@dataclass(frozen=True)
class EpsilonRule:
    """``standard``: 0.1*D*sigma; ``scaled``: value*D*sigma; ``fixed``: value."""

    kind: str = "standard"
    value: float = 0.1

    def __post_init__(self):
        if self.kind not in ("standard", "scaled", "fixed"):
            raise ConfigError(f"unknown epsilon rule {self.kind!r}")
        if not self.value > 0:
            raise ConfigError("epsilon rule value must be positive")

    def epsilon(self, D: int, sigma: float) -> float:
        if self.kind == "fixed":
            return self.value
        factor = 0.1 if self.kind == "standard" else self.value
        return factor * D * sigma

    def to_json(self):
        return "standard" if self.kind == "standard" else {self.kind: self.value}

    @classmethod
    def parse(cls, raw) -> "EpsilonRule":
        if isinstance(raw, EpsilonRule):
            return raw
        if raw is None or raw == "standard":
            return cls()
        if isinstance(raw, dict) and len(raw) == 1:
            (kind, value), = raw.items()
            return cls(kind, float(value))
        if isinstance(raw, str) and ":" in raw:
            kind, value = raw.split(":", 1)
            try:
                return cls(kind.strip(), float(value))
            except ValueError as exc:
                raise ConfigError(f"bad epsilon rule {raw!r}") from exc
        raise ConfigError(f"bad epsilon rule {raw!r}; use 'standard', 'fixed:<v>' or 'scaled:<c>'")


@dataclass(frozen=True)
class SweepConfig:
    rows: int = 3
    cols: int = 3
    boundary: str = "open"
    j: float = 1.0
    h: float = 0.2
    up_is_even_sublattice: bool = False
    sigmas: tuple[float, ...] = DEFAULT_SIGMAS
    d_min: int = 1
    d_max: int = 35
    trials: int = 1000
    master_seed: int = 20240601
    dt: float | str = "auto"
    epsilon_rule: EpsilonRule = field(default_factory=EpsilonRule)
    converged_window: tuple[int, int] = (26, 35)
    sector: bool = True
    out_dir: str = "out"
    workers: int = 1

    def __post_init__(self):
        if not self.sigmas or any(not (s > 0) for s in self.sigmas):
            raise ConfigError("sigmas must be a nonempty list of positive values")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not 0 <= self.d_min <= self.d_max:
            raise ConfigError("need 0 <= d_min <= d_max")
        lo, hi = self.converged_window
        if not (1 <= lo <= hi <= self.d_max):
            raise ConfigError(f"converged window {self.converged_window} not within [1, {self.d_max}]")
        if self.dt != "auto" and not (isinstance(self.dt, (int, float)) and self.dt > 0):
            raise ConfigError(f"dt must be 'auto' or a positive number, got {self.dt!r}")
        try:
            SpinLattice(self.rows, self.cols, self.boundary)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def lattice(self) -> SpinLattice:
        return SpinLattice(self.rows, self.cols, self.boundary)

    @property
    def ds(self) -> range:
        return range(self.d_min, self.d_max + 1)

    def to_json(self) -> dict:
        out = asdict(self)
        out["sigmas"] = list(self.sigmas)
        out["converged_window"] = list(self.converged_window)
        out["epsilon_rule"] = self.epsilon_rule.to_json()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        data = dict(data)
        lattice = data.pop("lattice", None)
        if lattice is not None:
            data.setdefault("rows", lattice.get("rows", 3))
            data.setdefault("cols", lattice.get("cols", 3))
            data.setdefault("boundary", lattice.get("boundary", "open"))
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "sigmas" in data:
            data["sigmas"] = tuple(float(s) for s in data["sigmas"])
        if "converged_window" in data:
            w = data["converged_window"]
            if len(w) != 2:
                raise ConfigError("converged_window must be a pair")
            data["converged_window"] = (int(w[0]), int(w[1]))
        if "epsilon_rule" in data:
            data["epsilon_rule"] = EpsilonRule.parse(data["epsilon_rule"])
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path: str | Path) -> "SweepConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config root must be an object")
        return cls.from_dict(data)

    def with_overrides(self, **kw) -> "SweepConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        if "epsilon_rule" in kw:
            kw["epsilon_rule"] = EpsilonRule.parse(kw["epsilon_rule"])
        if "sigmas" in kw:
            kw["sigmas"] = tuple(kw["sigmas"])
        if "d_max" in kw and "converged_window" not in kw:
            lo, hi = self.converged_window
            if hi > kw["d_max"]:
                kw["converged_window"] = (min(lo, kw["d_max"]), kw["d_max"])
        try:
            return replace(self, **kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
