"""Scenario configuration: defaults, TOML parsing, and key=value overrides."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .channel import GeometryScenario
from .errors import ConfigError
from .power import AM_POWER_MODES, PowerModelParams
from .precoding import Architecture, ArchitectureSpec
from .waveform import SUPPORTED_ORDERS

_ARCH_NAMES = tuple(a.value for a in Architecture)


@dataclass(frozen=True)
class ScenarioConfig:
    """Every scalar parameter of a run; defaults are the headline evaluation setting."""

    architecture: str = "digital"
    n_antennas: int = 64
    n_users: int = 4
    chains: int = 64  # physical RF chains, or virtual chains for the switched design
    active_antennas: int | None = None  # antenna muting only; defaults to `chains`
    bandwidth_hz: float = 100e6
    center_frequency_hz: float = 4.2e9
    subcarriers: int = 64
    modulation_order: int = 64
    ofdm_symbols: int = 8
    noise_dbm: float = -100.0
    eirp_dbm: float = 77.0
    sinr_cap_db: float = 40.0
    acpr_penalty_db: float = 0.5
    apply_acpr_penalty: bool = False
    compensate_spreading: bool = False
    noiseless: bool = False
    # power model
    pa_efficiency: float = 0.6
    baseband_w_per_chain: float = 1.683
    gflops_per_chain: float = 15.0
    am_power_mode: str = "cap"
    # channel source: synthetic geometry or a CFR file path
    channel_file: str | None = None
    element_spacing_wavelengths: float = 0.5
    paths_per_user: int = 6
    distance_min_m: float = 100.0
    distance_max_m: float = 300.0
    pathloss_exponent: float = 2.0
    angle_spread_deg: float = 60.0
    muting_rule: str = "highest_index"
    # run control
    repetitions: int = 10
    seed: int = 1
    mcs_table_path: str | None = None
    oversample: int = 32  # time-domain oracle only

    def validate(self) -> "ScenarioConfig":
        if self.architecture not in _ARCH_NAMES:
            raise ConfigError("architecture", f"must be one of {_ARCH_NAMES}")
        for name in ("n_antennas", "n_users", "chains", "subcarriers", "ofdm_symbols", "repetitions"):
            if getattr(self, name) < 1:
                raise ConfigError(name, "must be >= 1")
        if not (1 <= self.chains <= self.n_antennas):
            raise ConfigError("chains", f"must be in [1, {self.n_antennas}]")
        if self.architecture == "digital" and self.chains != self.n_antennas:
            raise ConfigError("chains", "digital beamforming requires chains == n_antennas")
        if self.architecture == "analog" and (self.chains != 1 or self.n_users != 1):
            raise ConfigError("chains", "analog beamforming requires chains=1 and n_users=1")
        if self.architecture != "analog" and self.n_users > self.chains:
            raise ConfigError("n_users", f"zero forcing needs n_users <= chains ({self.chains})")
        if self.active_antennas is not None and not (1 <= self.active_antennas <= self.n_antennas):
            raise ConfigError("active_antennas", f"must be in [1, {self.n_antennas}]")
        if self.modulation_order not in SUPPORTED_ORDERS:
            raise ConfigError("modulation_order", f"must be one of {SUPPORTED_ORDERS}")
        if self.bandwidth_hz <= 0 or self.center_frequency_hz <= 0:
            raise ConfigError("bandwidth_hz", "bandwidth and center frequency must be positive")
        if not (0 < self.pa_efficiency <= 1):
            raise ConfigError("pa_efficiency", "must be in (0, 1]")
        if self.am_power_mode not in AM_POWER_MODES:
            raise ConfigError("am_power_mode", f"must be one of {AM_POWER_MODES}")
        if not (0 < self.distance_min_m <= self.distance_max_m):
            raise ConfigError("distance_min_m", "need 0 < distance_min_m <= distance_max_m")
        if self.oversample < 8:
            raise ConfigError("oversample", "time-domain oracle needs oversample >= 8")
        if self.muting_rule not in ("highest_index", "random"):
            raise ConfigError("muting_rule", "must be 'highest_index' or 'random'")
        return self

    def replace(self, **kwargs) -> "ScenarioConfig":
        return dataclasses.replace(self, **kwargs).validate()

    # -- derived views -----------------------------------------------------

    @property
    def subcarrier_spacing_hz(self) -> float:
        return self.bandwidth_hz / self.subcarriers

    def architecture_spec(self) -> ArchitectureSpec:
        return ArchitectureSpec(
            kind=Architecture(self.architecture),
            n_antennas=self.n_antennas,
            n_users=self.n_users,
            chains=self.chains,
            active_antennas=self.active_antennas,
        )

    def geometry(self, seed: int | None = None) -> GeometryScenario:
        return GeometryScenario(
            n_antennas=self.n_antennas,
            n_users=self.n_users,
            center_frequency_hz=self.center_frequency_hz,
            subcarrier_spacing_hz=self.subcarrier_spacing_hz,
            n_subcarriers=self.subcarriers,
            element_spacing_wavelengths=self.element_spacing_wavelengths,
            paths_per_user=self.paths_per_user,
            distance_min_m=self.distance_min_m,
            distance_max_m=self.distance_max_m,
            pathloss_exponent=self.pathloss_exponent,
            angle_spread_deg=self.angle_spread_deg,
            seed=self.seed if seed is None else seed,
        )

    def power_params(self) -> PowerModelParams:
        return PowerModelParams(
            pa_efficiency=self.pa_efficiency,
            max_eirp_dbm=self.eirp_dbm,
            baseband_w_per_chain=self.baseband_w_per_chain,
            gflops_per_chain=self.gflops_per_chain,
        )

    def config_hash(self) -> str:
        payload = json.dumps(dataclasses.asdict(self), sort_keys=True, default=str)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ScenarioConfig)}


def _coerce(name: str, value):
    """Coerce a raw TOML/CLI value onto the field's declared type."""
    if name not in _FIELD_TYPES:
        raise ConfigError(name, "unknown configuration field")
    ftype = _FIELD_TYPES[name]
    try:
        if ftype == "bool":
            if isinstance(value, bool):
                return value
            return str(value).strip().lower() in ("1", "true", "yes", "on")
        if ftype == "int":
            return int(value)
        if ftype == "float":
            return float(value)
        if ftype.startswith("int |"):
            if value in (None, "", "none"):
                return None
            return int(value)
        if ftype.startswith("str |"):
            if value in (None, "", "none"):
                return None
            return str(value)
        return str(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(name, f"cannot coerce {value!r}: {e}") from e


def _flatten(tree: dict, prefix: str = "") -> dict:
    flat = {}
    for key, value in tree.items():
        path = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, f"{path}."))
        else:
            # nested section names are organizational; fields resolve by leaf name
            flat[key] = value
    return flat


def load_config(path: str | None = None, overrides: list[str] | None = None) -> ScenarioConfig:
    """Build a validated config from an optional TOML file plus key=value overrides."""
    values: dict = {}
    if path is not None:
        try:
            with open(path, "rb") as f:
                tree = tomllib.load(f)
        except FileNotFoundError as e:
            raise ConfigError("config", f"file not found: {path}") from e
        except tomllib.TOMLDecodeError as e:
            raise ConfigError("config", f"TOML parse error: {e}") from e
        values.update(_flatten(tree))
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError("--set", f"expected key=value, got {item!r}")
        key, _, raw = item.partition("=")
        values[key.strip()] = raw.strip()
    kwargs = {name: _coerce(name, value) for name, value in values.items()}
    try:
        cfg = ScenarioConfig(**kwargs)
    except TypeError as e:
        raise ConfigError("config", str(e)) from e
    return cfg.validate()
