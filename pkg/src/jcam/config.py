"""System parameters and the flat ``key = value`` config format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class ConfigError(ValueError):
    """Raised for malformed or inconsistent configuration input."""


FORMULAS = ("corrected", "printed")


@dataclass(frozen=True)
class SystemConfig:
    M: int
    N: int
    K: int
    U: int
    area_side_m: float = 1000.0
    p_ap_watts: float = 1.0
    p_untrusted_watts: tuple[float, ...] = ()
    p_user_pilot_watts: float = 0.2
    noise_dbm: float = -92.0
    bandwidth_hz: float = 50e6
    tau: int | None = None
    T: int = 200
    grouping_threshold: float = 0.05
    d_min_m: float = 5.0
    e_min: float = 1e-4
    qos_se: float = 0.0
    seed: int = 0
    formula: str = "corrected"

    def __post_init__(self):
        # fill derived defaults on a frozen instance
        if self.tau is None:
            object.__setattr__(self, "tau", max(self.K + self.U, 1))
        p_u = self.p_untrusted_watts
        if np.isscalar(p_u):
            p_u = (float(p_u),) * self.U
        elif len(p_u) == 0:
            p_u = (0.2,) * self.U
        elif len(p_u) == 1 and self.U > 1:
            p_u = (float(p_u[0]),) * self.U
        object.__setattr__(self, "p_untrusted_watts", tuple(float(p) for p in p_u))
        self.validate()

    def validate(self) -> None:
        if self.M < 1:
            raise ConfigError("M must be >= 1")
        if self.N < 2:
            raise ConfigError("N must be >= 2")
        if self.K < 0 or self.U < 0:
            raise ConfigError("K and U must be >= 0")
        if not self.K + self.U <= self.tau <= self.T:
            raise ConfigError(
                f"pilot length must satisfy K+U <= tau <= T (got K+U={self.K + self.U}, "
                f"tau={self.tau}, T={self.T})"
            )
        if self.tau < 1:
            raise ConfigError("tau must be >= 1")
        if len(self.p_untrusted_watts) != self.U:
            raise ConfigError(
                f"p_untrusted_watts needs {self.U} entries, got {len(self.p_untrusted_watts)}"
            )
        powers = (self.p_ap_watts, self.p_user_pilot_watts, *self.p_untrusted_watts)
        if any(p <= 0 for p in powers):
            raise ConfigError("all powers must be > 0")
        if not 0.0 < self.grouping_threshold < 1.0:
            raise ConfigError("grouping_threshold must lie in (0, 1)")
        if self.d_min_m <= 0 or self.area_side_m <= 0:
            raise ConfigError("d_min_m and area_side_m must be > 0")
        if self.e_min < 0:
            raise ConfigError("e_min must be >= 0")
        if self.formula not in FORMULAS:
            raise ConfigError(f"formula must be one of {FORMULAS}, got {self.formula!r}")

    # normalized powers ---------------------------------------------------

    @property
    def noise_watts(self) -> float:
        return 10.0 ** ((self.noise_dbm - 30.0) / 10.0)

    @property
    def rho_d(self) -> float:
        return self.p_ap_watts / self.noise_watts

    @property
    def rho_u(self) -> np.ndarray:
        return np.asarray(self.p_untrusted_watts, dtype=float) / self.noise_watts

    @property
    def rho_pilot_user(self) -> float:
        return self.p_user_pilot_watts / self.noise_watts

    @property
    def eta(self) -> float:
        return 1.0 / (self.K + self.U) if self.K + self.U > 0 else 1.0

    @property
    def se_prefactor(self) -> float:
        return (self.T - self.tau) / self.T

    def replace(self, **changes) -> "SystemConfig":
        # tau follows K+U unless it was pinned explicitly by the caller
        if ("K" in changes or "U" in changes) and "tau" not in changes:
            K = changes.get("K", self.K)
            U = changes.get("U", self.U)
            if self.tau == self.K + self.U or self.tau < K + U:
                changes["tau"] = max(K + U, 1)
        if "U" in changes and "p_untrusted_watts" not in changes:
            p = self.p_untrusted_watts[0] if self.p_untrusted_watts else 0.2
            changes["p_untrusted_watts"] = (p,) * changes["U"]
        return dataclasses.replace(self, **changes)


# ---------------------------------------------------------------------------
# key = value parsing

_INT_KEYS = {"M", "N", "K", "U", "tau", "T", "seed", "drops", "trials", "n_total", "jobs"}
_FLOAT_KEYS = {
    "area_side_m", "p_ap_watts", "p_user_pilot_watts", "noise_dbm", "bandwidth_hz",
    "grouping_threshold", "d_min_m", "e_min", "qos_se", "tol",
}
_LIST_KEYS = {"p_untrusted_watts", "sweep_values", "strategies"}
_STR_KEYS = {"formula", "sweep_var", "out"}
REQUIRED_KEYS = ("M", "N", "K", "U")
KNOWN_KEYS = _INT_KEYS | _FLOAT_KEYS | _LIST_KEYS | _STR_KEYS

_CONFIG_FIELDS = {f.name for f in dataclasses.fields(SystemConfig)}


def parse_kv_text(text: str, source: str = "<config>") -> dict:
    """Parse ``key = value`` lines (``#`` comments) into typed values."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"{source}:{lineno}: empty value for {key!r}")
        try:
            if key in _INT_KEYS:
                values[key] = int(value)
            elif key in _FLOAT_KEYS:
                values[key] = float(value)
            elif key in _LIST_KEYS:
                items = [s.strip() for s in value.split(",") if s.strip()]
                if key == "strategies":
                    values[key] = tuple(items)
                else:
                    values[key] = tuple(float(s) for s in items)
            else:
                values[key] = value
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {value!r}") from None
    return values


def config_from_values(values: dict, source: str = "<config>") -> SystemConfig:
    for key in REQUIRED_KEYS:
        if key not in values:
            raise ConfigError(f"{source}: missing required key {key!r}")
    kwargs = {k: v for k, v in values.items() if k in _CONFIG_FIELDS}
    try:
        return SystemConfig(**kwargs)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path: str | Path) -> tuple[SystemConfig, dict]:
    """Read a config file; returns the system config and the raw key map."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    values = parse_kv_text(text, source=str(path))
    return config_from_values(values, source=str(path)), values


@dataclass(frozen=True)
class ExperimentSpec:
    """A sweep over one config variable, several drops per point."""

    base: SystemConfig
    sweep_var: str
    values: tuple[float, ...]
    drops: int = 50
    strategies: tuple[str, ...] = ("greedy", "random")
    n_total: int | None = None
    out: str | None = None
    extra: dict = field(default_factory=dict)

    SWEEPABLE = ("M", "N", "K", "U", "grouping_threshold")
    STRATEGIES = ("greedy", "random", "brute", "colocated")

    def __post_init__(self):
        if self.sweep_var not in self.SWEEPABLE:
            raise ConfigError(f"sweep_var must be one of {self.SWEEPABLE}, got {self.sweep_var!r}")
        if not self.values:
            raise ConfigError("sweep_values must not be empty")
        if self.drops < 1:
            raise ConfigError("drops must be >= 1")
        bad = [s for s in self.strategies if s not in self.STRATEGIES]
        if bad:
            raise ConfigError(f"unknown strategies {bad}")
        if self.n_total is not None:
            if self.sweep_var != "N":
                raise ConfigError("n_total is only meaningful when sweeping N")
            for v in self.values:
                if v != int(v) or self.n_total % int(v):
                    raise ConfigError(f"n_total={self.n_total} is not divisible by N={v}")

    def point_config(self, value: float) -> SystemConfig:
        if self.sweep_var == "grouping_threshold":
            return self.base.replace(grouping_threshold=float(value))
        changes = {self.sweep_var: int(value)}
        if self.n_total is not None:
            changes["M"] = self.n_total // int(value)
        return self.base.replace(**changes)

    @classmethod
    def from_values(cls, values: dict, source: str = "<config>") -> "ExperimentSpec":
        base = config_from_values(values, source)
        if "sweep_var" not in values:
            raise ConfigError(f"{source}: missing required key 'sweep_var'")
        try:
            return cls(
                base=base,
                sweep_var=values["sweep_var"],
                values=tuple(values.get("sweep_values", ())),
                drops=values.get("drops", 50),
                strategies=values.get("strategies", ("greedy", "random")),
                n_total=values.get("n_total"),
                out=values.get("out"),
            )
        except ConfigError as exc:
            raise ConfigError(f"{source}: {exc}") from None
