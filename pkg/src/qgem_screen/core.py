"""Physical constants, configuration types and the key = value config format.

Everything inside the package is SI. Convenience units (``e_cm``, ``um``,
``mm``, ``fm``) are accepted only as key suffixes in config files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path


class ConfigError(ValueError):
    """Invalid configuration value, key, or file."""


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA 2018 values (SI)."""

    G: float = 6.67430e-11
    hbar: float = 1.054571817e-34
    c: float = 299792458.0
    mu_B: float = 9.2740100783e-24
    eps0: float = 8.8541878128e-12
    k_B: float = 1.380649e-23
    e_charge: float = 1.602176634e-19
    g_factor: float = 2.0

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ConfigError(f"constant {f.name} must be positive")


CONSTANTS = PhysicalConstants()


def convert_dipole(value_e_cm: float, constants: PhysicalConstants = CONSTANTS) -> float:
    """Convert a dipole moment given in e*cm to C*m."""
    if value_e_cm < 0:
        raise ConfigError(f"dipole moment must be non-negative, got {value_e_cm}")
    return value_e_cm * constants.e_charge * 1e-2


DEFAULT_DIPOLE = convert_dipole(1e-2)


@dataclass(frozen=True)
class TestMassSpec:
    """Spherical dielectric test mass carrying a permanent dipole."""

    __test__ = False  # keep pytest from collecting this as a test class

    mass: float = 1e-14
    density: float = 3500.0
    epsilon: float = 5.1
    dipole_moment: float = DEFAULT_DIPOLE
    dipole_angle_theta: float = 0.0

    def __post_init__(self):
        if not self.mass > 0:
            raise ConfigError("mass must be positive")
        if not self.density > 0:
            raise ConfigError("density must be positive")
        if not self.epsilon > 1:
            raise ConfigError("epsilon must exceed 1")
        if not self.dipole_moment >= 0:
            raise ConfigError("dipole_moment must be non-negative")
        if not 0 <= self.dipole_angle_theta <= math.pi:
            raise ConfigError("dipole_angle_theta must lie in [0, pi]")

    @property
    def radius(self) -> float:
        return (3 * self.mass / (4 * math.pi * self.density)) ** (1 / 3)

    @property
    def clausius_mossotti(self) -> float:
        return (self.epsilon - 1) / (self.epsilon + 2)

    @property
    def polarizability_volume(self) -> float:
        """alpha = R^3 (eps - 1)/(eps + 2), in m^3."""
        return self.radius**3 * self.clausius_mossotti


@dataclass(frozen=True)
class PlateSpec:
    """Clamped square conducting plate (silicon nitride defaults)."""

    thickness_W: float = 1e-6
    side_length_L: float = 1e-3
    youngs_modulus_E: float = 270e9
    poisson_mu: float = 0.2
    density: float = 3100.0
    temperature_T: float = 1.0
    mode_coefficient_K12: float = 74.296
    biaxial_stress_sigma: float | None = None

    def __post_init__(self):
        if not 0 < self.thickness_W < self.side_length_L:
            raise ConfigError("plate thickness must be positive and below the side length")
        for name in ("youngs_modulus_E", "density", "mode_coefficient_K12"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if not self.temperature_T >= 0:
            raise ConfigError("temperature_T must be non-negative")
        if not 0 <= self.poisson_mu < 0.5:
            raise ConfigError("poisson_mu must lie in [0, 0.5)")
        if self.biaxial_stress_sigma is not None and not self.biaxial_stress_sigma > 0:
            raise ConfigError("biaxial_stress_sigma must be positive when given")

    @property
    def mass(self) -> float:
        return self.density * self.thickness_W * self.side_length_L**2


@dataclass(frozen=True)
class ProtocolSchedule:
    tau_a: float = 0.25
    tau: float = 0.5
    dB_dz: float = 5e5
    initial_distance_d: float = 41e-6
    decoherence_rate_gamma: float = 0.05

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) >= 0:
                raise ConfigError(f"{f.name} must be non-negative")

    @property
    def total_time(self) -> float:
        return 2 * self.tau_a + self.tau


TILT_MODES = ("symmetric", "asymmetric")


@dataclass(frozen=True)
class ImbalanceSpec:
    """Run-to-run offsets from the nominal configuration.

    ``delta_d1`` shifts both masses' plate distance, ``delta_d2`` splits the
    two arms of each mass to ``d -/+ delta_d2`` (tilted superposition),
    ``delta_dB`` offsets the field gradient and ``delta_theta`` the dipole angle.
    """

    delta_d1: float = 0.0
    delta_d2: float = 0.0
    delta_dB: float = 0.0
    delta_theta: float = 0.0
    tilt_mode: str = "symmetric"

    def __post_init__(self):
        if self.tilt_mode not in TILT_MODES:
            raise ConfigError(f"tilt_mode must be one of {TILT_MODES}, got {self.tilt_mode!r}")

    @property
    def is_zero(self) -> bool:
        return not (self.delta_d1 or self.delta_d2 or self.delta_dB or self.delta_theta)


@dataclass(frozen=True)
class GeometryState:
    t: float
    z: float
    v: float
    dx: float


@dataclass(frozen=True)
class ExperimentConfig:
    mass: TestMassSpec = field(default_factory=TestMassSpec)
    plate: PlateSpec = field(default_factory=PlateSpec)
    schedule: ProtocolSchedule = field(default_factory=ProtocolSchedule)
    imbalance: ImbalanceSpec = field(default_factory=ImbalanceSpec)

    def with_imbalance(self, **kwargs) -> ExperimentConfig:
        return replace(self, imbalance=replace(self.imbalance, **kwargs))

    def with_schedule(self, **kwargs) -> ExperimentConfig:
        return replace(self, schedule=replace(self.schedule, **kwargs))

    def with_mass(self, **kwargs) -> ExperimentConfig:
        return replace(self, mass=replace(self.mass, **kwargs))

    def to_text(self) -> str:
        return dump_config(self)

    @classmethod
    def from_text(cls, text: str) -> ExperimentConfig:
        return parse_config(text)

    @classmethod
    def from_file(cls, path: str | Path) -> ExperimentConfig:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return parse_config(text)


# ---------------------------------------------------------------------------
# key = value format

# key -> (section attribute, field name, is_length)
_KEYS: dict[str, tuple[str, str, bool]] = {
    "mass": ("mass", "mass", False),
    "density": ("mass", "density", False),
    "epsilon": ("mass", "epsilon", False),
    "dipole_moment": ("mass", "dipole_moment", False),
    "dipole_angle_theta": ("mass", "dipole_angle_theta", False),
    "plate_thickness_W": ("plate", "thickness_W", True),
    "plate_side_length_L": ("plate", "side_length_L", True),
    "youngs_modulus_E": ("plate", "youngs_modulus_E", False),
    "poisson_mu": ("plate", "poisson_mu", False),
    "plate_density": ("plate", "density", False),
    "temperature_T": ("plate", "temperature_T", False),
    "mode_coefficient_K12": ("plate", "mode_coefficient_K12", False),
    "biaxial_stress_sigma": ("plate", "biaxial_stress_sigma", False),
    "tau_a": ("schedule", "tau_a", False),
    "tau": ("schedule", "tau", False),
    "dB_dz": ("schedule", "dB_dz", False),
    "initial_distance_d": ("schedule", "initial_distance_d", True),
    "decoherence_rate_gamma": ("schedule", "decoherence_rate_gamma", False),
    "delta_d1": ("imbalance", "delta_d1", True),
    "delta_d2": ("imbalance", "delta_d2", True),
    "delta_dB": ("imbalance", "delta_dB", False),
    "delta_theta": ("imbalance", "delta_theta", False),
    "tilt_mode": ("imbalance", "tilt_mode", False),
}

_LENGTH_SUFFIXES = {"_um": 1e-6, "_mm": 1e-3, "_fm": 1e-15}


def _resolve_key(key: str) -> tuple[str, str, float]:
    """Map a (possibly unit-suffixed) key to (section, field, SI scale)."""
    if key in _KEYS:
        section, name, _ = _KEYS[key]
        return section, name, 1.0
    if key.endswith("_e_cm") and key[: -len("_e_cm")] == "dipole_moment":
        return "mass", "dipole_moment", convert_dipole(1.0)
    for suffix, scale in _LENGTH_SUFFIXES.items():
        base = key[: -len(suffix)]
        if key.endswith(suffix) and base in _KEYS and _KEYS[base][2]:
            section, name, _ = _KEYS[base]
            return section, name, scale
    raise ConfigError(f"unknown config key: {key!r}")


def parse_config(text: str) -> ExperimentConfig:
    values: dict[str, dict[str, object]] = {s: {} for s in ("mass", "plate", "schedule", "imbalance")}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        section, name, scale = _resolve_key(key)
        if name in values[section]:
            raise ConfigError(f"line {lineno}: duplicate key for {name!r}")
        if name == "tilt_mode":
            values[section][name] = value
            continue
        if name == "biaxial_stress_sigma" and value.lower() in ("none", ""):
            values[section][name] = None
            continue
        try:
            number = float(value)
        except ValueError:
            raise ConfigError(f"line {lineno}: {key} is not a number: {value!r}") from None
        if name == "dipole_moment" and scale != 1.0:
            values[section][name] = convert_dipole(number)
        else:
            values[section][name] = number * scale
    try:
        return ExperimentConfig(
            mass=TestMassSpec(**values["mass"]),
            plate=PlateSpec(**values["plate"]),
            schedule=ProtocolSchedule(**values["schedule"]),
            imbalance=ImbalanceSpec(**values["imbalance"]),
        )
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def dump_config(config: ExperimentConfig) -> str:
    lines = []
    for key, (section, name, _) in _KEYS.items():
        value = getattr(getattr(config, section), name)
        if value is None:
            continue
        lines.append(f"{key} = {value}" if isinstance(value, str) else f"{key} = {float(value)!r}")
    return "\n".join(lines) + "\n"
