"""Physical data model: statistics, system and bath parameters, derived constants.

Units follow hbar = k = 1 with all frequencies, rates and temperatures given
in units of a reference frequency (the renormalized frequency by default).
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, PreconditionError, UnitsError


class Statistics(enum.Enum):
    FERMI = "fermi"
    BOSE = "bose"

    @property
    def sign(self) -> int:
        """+1 for bosons, -1 for fermions."""
        return 1 if self is Statistics.BOSE else -1

    @property
    def opposite(self) -> "Statistics":
        return Statistics.FERMI if self is Statistics.BOSE else Statistics.BOSE

    @classmethod
    def parse(cls, value) -> "Statistics":
        if isinstance(value, Statistics):
            return value
        if isinstance(value, (int, np.integer)) and int(value) in (-1, 1):
            return cls.BOSE if int(value) == 1 else cls.FERMI
        text = str(value).strip().lower()
        aliases = {"fermi": cls.FERMI, "f": cls.FERMI, "fermion": cls.FERMI,
                   "fermionic": cls.FERMI, "bose": cls.BOSE, "b": cls.BOSE,
                   "boson": cls.BOSE, "bosonic": cls.BOSE}
        if text not in aliases:
            raise ConfigError(f"unknown statistics {value!r}; expected fermi or bose")
        return aliases[text]


class FrequencyMode(enum.Enum):
    BARE = "bare"
    RENORMALIZED = "renormalized"

    @classmethod
    def parse(cls, value) -> "FrequencyMode":
        if isinstance(value, FrequencyMode):
            return value
        text = str(value).strip().lower()
        for mode in cls:
            if mode.value == text:
                return mode
        raise ConfigError(f"unknown omega_mode {value!r}; expected bare or renormalized")


def _real(value, name, section=None) -> float:
    if isinstance(value, bool):
        raise ConfigError(f"{name} must be a real number", section=section)
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a real number, got {value!r}", section=section) from None
    if not math.isfinite(out):
        raise ConfigError(f"{name} must be finite, got {value!r}", section=section)
    return out


@dataclass(frozen=True)
class SystemSpec:
    statistics: Statistics
    frequency_mode: FrequencyMode
    frequency_value: float
    n0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "statistics", Statistics.parse(self.statistics))
        object.__setattr__(self, "frequency_mode", FrequencyMode.parse(self.frequency_mode))
        freq = _real(self.frequency_value, "frequency", "system")
        n0 = _real(self.n0, "n0", "system")
        if freq <= 0:
            raise ConfigError("frequency must be positive", section="system")
        if self.statistics is Statistics.FERMI and not 0.0 <= n0 <= 1.0:
            raise ConfigError("fermionic n0 must lie in [0, 1]", section="system")
        if self.statistics is Statistics.BOSE and n0 < 0.0:
            raise ConfigError("bosonic n0 must be nonnegative", section="system")
        object.__setattr__(self, "frequency_value", freq)
        object.__setattr__(self, "n0", n0)


@dataclass(frozen=True)
class BathSpec:
    statistics: Statistics
    alpha: float
    gamma: float
    temperature: float

    def __post_init__(self):
        object.__setattr__(self, "statistics", Statistics.parse(self.statistics))
        alpha = _real(self.alpha, "alpha", "bath")
        gamma = _real(self.gamma, "gamma", "bath")
        temperature = _real(self.temperature, "temperature", "bath")
        if alpha < 0:
            raise ConfigError("alpha must be nonnegative", section="bath")
        if gamma <= 0:
            raise ConfigError("gamma must be positive", section="bath")
        if temperature < 0:
            raise ConfigError("temperature must be nonnegative", section="bath")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "temperature", temperature)

    @property
    def eps(self) -> int:
        return self.statistics.sign


@dataclass(frozen=True)
class Scenario:
    """System plus ordered baths, with derived constants.

    Baths are stored opposite-statistics first, then same-statistics, each
    block in the order supplied.
    """

    system: SystemSpec
    baths: tuple
    omega: float = field(init=False)
    Omega: float = field(init=False)
    n_opposite: int = field(init=False)
    p: float = field(init=False)
    g0: float = field(init=False)

    def __post_init__(self):
        baths = tuple(self.baths)
        if not baths:
            raise ConfigError("at least one bath is required")
        for b in baths:
            if not isinstance(b, BathSpec):
                raise ConfigError(f"bath entries must be BathSpec, got {type(b).__name__}")
        sys_stat = self.system.statistics
        opposite = [b for b in baths if b.statistics is not sys_stat]
        same = [b for b in baths if b.statistics is sys_stat]
        baths = tuple(opposite + same)
        object.__setattr__(self, "baths", baths)

        shift = 2.0 * math.fsum(b.alpha * b.gamma for b in baths)
        if self.system.frequency_mode is FrequencyMode.RENORMALIZED:
            Omega = self.system.frequency_value
            omega = Omega + shift
        else:
            omega = self.system.frequency_value
            Omega = omega - shift
        if not Omega > 0:
            raise UnitsError(f"renormalized frequency must be positive, got {Omega!r}")
        g0 = math.fsum(b.alpha for b in baths)
        g_opp = math.fsum(b.alpha for b in opposite)
        p = g_opp / g0 if g0 > 0 else (1.0 if not same else 0.0)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "Omega", Omega)
        object.__setattr__(self, "n_opposite", len(opposite))
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "g0", g0)

    @property
    def N(self) -> int:
        return len(self.baths)

    @property
    def n_same(self) -> int:
        return self.N - self.n_opposite

    @property
    def eps_a(self) -> int:
        return self.system.statistics.sign

    @property
    def n0(self) -> float:
        return self.system.n0

    @property
    def alphas(self) -> np.ndarray:
        return np.array([b.alpha for b in self.baths])

    @property
    def gammas(self) -> np.ndarray:
        return np.array([b.gamma for b in self.baths])

    @property
    def temperatures(self) -> np.ndarray:
        return np.array([b.temperature for b in self.baths])

    @property
    def bath_signs(self) -> np.ndarray:
        return np.array([b.eps for b in self.baths], dtype=int)

    @property
    def is_pure(self) -> bool:
        """All baths share the oscillator's statistics."""
        return self.n_opposite == 0

    @property
    def is_all_opposite(self) -> bool:
        return self.n_same == 0

    def to_config(self, mode: str | None = None) -> dict:
        """Plain-dict form accepted by :func:`build_scenario`.

        ``mode`` of ``"bare"`` or ``"renormalized"`` re-expresses the
        frequency; by default the mode the scenario was built with is kept.
        """
        sys = self.system
        if mode is None:
            fmode, fval = sys.frequency_mode, sys.frequency_value
        else:
            fmode = FrequencyMode.parse(mode)
            fval = self.omega if fmode is FrequencyMode.BARE else self.Omega
        return {
            "system": {
                "statistics": sys.statistics.value,
                "omega_mode": fmode.value,
                "frequency": fval,
                "n0": sys.n0,
            },
            "baths": [
                {"statistics": b.statistics.value, "alpha": b.alpha,
                 "gamma": b.gamma, "temperature": b.temperature}
                for b in self.baths
            ],
        }

    @property
    def digest(self) -> str:
        """Short stable hash of the resolved scenario."""
        text = json.dumps(self.to_config(), sort_keys=True, default=repr)
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def replace(self, **changes) -> "Scenario":
        """Copy with system-level fields or whole bath tuple replaced."""
        sys_fields = {k: changes.pop(k) for k in
                      ("statistics", "frequency_mode", "frequency_value", "n0")
                      if k in changes}
        baths = changes.pop("baths", self.baths)
        if changes:
            raise TypeError(f"unknown fields {sorted(changes)}")
        system = self.system
        if sys_fields:
            kwargs = dict(statistics=system.statistics, frequency_mode=system.frequency_mode,
                          frequency_value=system.frequency_value, n0=system.n0)
            kwargs.update(sys_fields)
            system = SystemSpec(**kwargs)
        return Scenario(system, tuple(baths))


_SYSTEM_KEYS = {"statistics", "omega_mode", "frequency", "n0"}
_BATH_KEYS = {"statistics", "alpha", "gamma", "temperature"}


def build_scenario(raw: dict) -> Scenario:
    """Validate a plain-dict configuration and derive all constants."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a mapping")
    unknown = set(raw) - {"system", "baths"}
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}")
    if "system" not in raw:
        raise ConfigError("missing [system] section")
    sys_raw = raw["system"]
    extra = set(sys_raw) - _SYSTEM_KEYS
    if extra:
        raise ConfigError(f"unknown keys {sorted(extra)}", section="system")
    for key in ("statistics", "frequency"):
        if key not in sys_raw:
            raise ConfigError(f"missing key {key!r}", section="system")
    system = SystemSpec(
        statistics=Statistics.parse(sys_raw["statistics"]),
        frequency_mode=FrequencyMode.parse(sys_raw.get("omega_mode", "renormalized")),
        frequency_value=_real(sys_raw["frequency"], "frequency", "system"),
        n0=_real(sys_raw.get("n0", 0.0), "n0", "system"),
    )
    baths = []
    for i, b in enumerate(raw.get("baths", []), start=1):
        name = f"bath.{i}"
        extra = set(b) - _BATH_KEYS
        if extra:
            raise ConfigError(f"unknown keys {sorted(extra)}", section=name)
        missing = [k for k in ("statistics", "alpha", "gamma", "temperature") if k not in b]
        if missing:
            raise ConfigError(f"missing key {missing[0]!r}", section=name)
        try:
            baths.append(BathSpec(Statistics.parse(b["statistics"]), b["alpha"],
                                  b["gamma"], b["temperature"]))
        except ConfigError as exc:
            raise ConfigError(exc.detail, section=name) from None
    return Scenario(system, tuple(baths))


def thermal_occupation_reference(scenario: Scenario) -> float:
    """Equilibrium occupation at the bare frequency for a common bath temperature."""
    temps = scenario.temperatures
    if not np.all(temps == temps[0]) or temps[0] <= 0:
        raise PreconditionError("all bath temperatures must be equal and positive")
    x = scenario.omega / temps[0]
    if scenario.eps_a == 1:
        return float(1.0 / math.expm1(x))
    return float(1.0 / (math.exp(x) + 1.0)) if x < 700 else 0.0


def reference_scenario(system: str = "fermi", baths: tuple = ("fermi", "fermi"),
                      n0: float = 0.0, Omega: float = 1.0,
                      temperatures: tuple = (1.0, 0.1)) -> Scenario:
    """Two-bath reference setup: gamma = (10, 15), alpha = (0.1, 0.05)."""
    system_spec = SystemSpec(system, FrequencyMode.RENORMALIZED, Omega, n0)
    specs = (BathSpec(baths[0], 0.1, 10.0, temperatures[0]),
             BathSpec(baths[1], 0.05, 15.0, temperatures[1]))
    return Scenario(system_spec, specs)
