"""Optical parameters of the beam splitter + mirror setup.

All lengths share one arbitrary unit; ``k`` is in radians per that unit.
The reflectance is always derived from the transmittance so ``R + T == 1``
cannot be violated.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

from .errors import ConfigError, NegativeWeight, NonPositive, OutOfRange

CONFIG_KEYS = (
    "T", "k", "omega", "z1", "z2", "Z1", "Z2",
    "alpha_re", "alpha_im", "E_unit", "v_b2", "v_1sq", "v_2sq",
)


@dataclass(frozen=True)
class VacuumWeights:
    """Per-mode vacuum weights ``<a a^dag>`` on the empty mode.

    The physical value is 1 for every mode. Other values are a bookkeeping
    device: zeroing one weight removes that source from every variance.
    """

    v_b2: float = 1.0
    v_1sq: float = 1.0
    v_2sq: float = 1.0

    def __post_init__(self) -> None:
        for name in ("v_b2", "v_1sq", "v_2sq"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise NegativeWeight(f"{name} must be a finite value >= 0, got {value!r}")


@dataclass(frozen=True)
class OpticalConfig:
    """Physical parameters of the beam splitter with a mirror on its unused port.

    Attributes
    ----------
    T : float
        Power transmittance of the beam splitter, ``0 <= T <= 1``.
    k, omega : float
        Wavenumber and angular frequency. ``omega`` only enters phases.
    z1, z2 : float
        Optical path from the mirror-side reference to the probes at ports
        a1 and a2.
    Z1, Z2 : float
        Propagation distance of the coherent field to ports a1 and a2.
    alpha : complex
        Coherent amplitude of the input mode b.
    E_unit : float
        Single-photon field scale.
    weights : VacuumWeights
    """

    T: float = 0.5
    k: float = 1.0
    omega: float = 1.0
    z1: float = 0.0
    z2: float = 0.0
    Z1: float = 0.0
    Z2: float = 0.0
    alpha: complex = 0j
    E_unit: float = 1.0
    weights: VacuumWeights = field(default_factory=VacuumWeights)

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", complex(self.alpha))
        validate(self)

    @property
    def R(self) -> float:
        return 1.0 - self.T

    @property
    def theta(self) -> float:
        """Phase of the coherent amplitude."""
        return math.atan2(self.alpha.imag, self.alpha.real)

    def with_(self, **changes: Any) -> "OpticalConfig":
        """Copy with some fields replaced; weight keys may be passed flat."""
        wkeys = {k: changes.pop(k) for k in ("v_b2", "v_1sq", "v_2sq") if k in changes}
        if wkeys:
            changes["weights"] = replace(self.weights, **wkeys)
        return replace(self, **changes)

    def to_mapping(self) -> dict[str, float]:
        return {
            "T": self.T, "k": self.k, "omega": self.omega,
            "z1": self.z1, "z2": self.z2, "Z1": self.Z1, "Z2": self.Z2,
            "alpha_re": self.alpha.real, "alpha_im": self.alpha.imag,
            "E_unit": self.E_unit,
            "v_b2": self.weights.v_b2, "v_1sq": self.weights.v_1sq,
            "v_2sq": self.weights.v_2sq,
        }

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "OpticalConfig":
        """Build from the flat key-value form (keys in ``CONFIG_KEYS``).

        Missing keys take their defaults; unknown keys are rejected.
        """
        unknown = set(data) - set(CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            values = {key: float(value) for key, value in data.items()}
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"config values must be numeric: {exc}") from None
        weights = VacuumWeights(**{k: values.pop(k) for k in ("v_b2", "v_1sq", "v_2sq") if k in values})
        alpha = complex(values.pop("alpha_re", 0.0), values.pop("alpha_im", 0.0))
        return cls(alpha=alpha, weights=weights, **values)

    def to_json(self) -> str:
        return json.dumps(self.to_mapping(), indent=2, sort_keys=False)

    @classmethod
    def from_json(cls, text: str) -> "OpticalConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid config JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config JSON must be an object")
        return cls.from_mapping(data)

    @classmethod
    def load(cls, path: str | Path) -> "OpticalConfig":
        return cls.from_json(Path(path).read_text())


def validate(cfg: OpticalConfig) -> OpticalConfig:
    """Return ``cfg`` unchanged if every invariant holds, else raise.

    Raises
    ------
    OutOfRange
        ``T`` outside ``[0, 1]``, a negative length or frequency, or a
        non-finite value.
    NonPositive
        ``k <= 0`` or ``E_unit <= 0``.
    """
    for name in ("T", "k", "omega", "z1", "z2", "Z1", "Z2", "E_unit"):
        if not math.isfinite(getattr(cfg, name)):
            raise OutOfRange(f"{name} must be finite")
    if not (math.isfinite(cfg.alpha.real) and math.isfinite(cfg.alpha.imag)):
        raise OutOfRange("alpha must be finite")
    if not 0.0 <= cfg.T <= 1.0:
        raise OutOfRange(f"T must lie in [0, 1], got {cfg.T!r}")
    if cfg.k <= 0:
        raise NonPositive(f"k must be > 0, got {cfg.k!r}")
    if cfg.E_unit <= 0:
        raise NonPositive(f"E_unit must be > 0, got {cfg.E_unit!r}")
    for name in ("omega", "z1", "z2", "Z1", "Z2"):
        if getattr(cfg, name) < 0:
            raise OutOfRange(f"{name} must be >= 0, got {getattr(cfg, name)!r}")
    if not isinstance(cfg.weights, VacuumWeights):
        raise ConfigError("weights must be a VacuumWeights instance")
    return cfg


def sql_baseline(cfg: OpticalConfig) -> float:
    """Field variance of the free coherent input, used as the SQL reference.

    The backward-going vacuum of mode b is made of the port-a1 and port-a2
    vacua recombined at the beam splitter, so it carries ``T v1^2 + R v2^2``.
    """
    w = cfg.weights
    return 0.5 * cfg.E_unit**2 * (w.v_b2 + cfg.R * w.v_2sq + cfg.T * w.v_1sq)


def common_mode_bracket(cfg: OpticalConfig) -> float:
    """``v_b^2 + R v2^2 + T v1^2``: total vacuum noise carried by mode b."""
    w = cfg.weights
    return w.v_b2 + cfg.R * w.v_2sq + cfg.T * w.v_1sq
