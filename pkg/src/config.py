"""
Scenario configuration.

A scenario is a flat JSON object. Values are in the units radio datasheets
use (mW, dBm/Hz, dB, Hz, s) and are converted to SI only when the domain
objects are built. Resolution order, later wins:

    built-in defaults < profile < environment (.env) < config file < CLI flags
"""

import json
import logging
import os
from dataclasses import MISSING, asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional

from src.channel import (
    RICIAN_NORMALIZATIONS,
    FadingModel,
    LinkBudget,
    Rayleigh,
    Rician,
    dbm_to_watts,
)
from src.frame import FrameTiming
from src.oracle import OOK_DETECTORS
from src.optimizer import Scenario
from src.reference import calibrated_circuit_scale
from src.schemes import SCHEME_FAMILIES, Ook, RadioParameters, scheme_from_name

logger = logging.getLogger(__name__)

PROFILES = ("nominal", "calibrated")
SCHEME_CHOICES = ("all",) + tuple(SCHEME_FAMILIES)
SWEEP_AXES = ("m", "d", "eta", "beff")
FADING_CHOICES = ("rayleigh", "rician")

ENV_VARIABLES = {
    "GREENMOD_PROFILE": "profile",
    "GREENMOD_OUTPUT_DIR": "output_dir",
    "GREENMOD_SEED": "seed",
}


class ConfigError(ValueError):
    """Raised for unknown keys, ill-typed values or invalid scenarios."""


@dataclass
class ScenarioConfig:
    """Every knob of a run. Defaults are the nominal carrier and OOK parameter sets."""
    profile: str = "nominal"
    scheme: str = "all"
    ps: float = 1e-3

    # link
    d: float = 10.0
    eta: float = 3.5
    margin_db: float = 40.0
    l1_db: float = 30.0

    # fading
    fading: str = "rayleigh"
    k_db: float = 10.0
    omega: float = 1.0
    rician_normalization: str = "total"

    # carrier timing
    n_bits: int = 8192
    frame_period: float = 1.4
    transient: float = 5e-6
    bandwidth: float = 62500.0
    zeta: int = 1

    # carrier radio
    chi_e: float = 0.8
    n0_dbm_hz: float = -180.0
    p_sy_mw: float = 10.0
    p_filt_mw: float = 2.5
    p_filr_mw: float = 2.5
    p_lna_mw: float = 9.0
    p_ifa_mw: float = 3.0
    p_ed_mw: float = 3.0
    p_adc_mw: float = 7.0
    p_dac_mw: float = 7.0
    p_mix_mw: float = 7.0
    alpha_fsk: float = 0.33
    alpha_oqpsk: float = 0.33
    vartheta: float = 0.35
    coherent_circuit_scale: float = 1.0

    # OOK timing and radio
    ook_n_bits: int = 20000
    ook_frame_period: float = 0.1
    ook_transient: float = 2e-9
    ook_bandwidth: float = 500e6
    ook_duty_cycle: float = 0.5
    ook_detector: str = "matched"
    ook_chi_e: float = 0.8
    ook_n0_dbm_hz: float = -180.0
    ook_p_pg_mw: float = 0.675
    ook_p_lna_mw: float = 3.1
    ook_p_ed_mw: float = 3.0
    ook_p_filt_mw: float = 2.5
    ook_p_filr_mw: float = 2.5
    ook_p_int_mw: float = 3.0
    ook_p_adc_mw: float = 7.0
    alpha_ook: float = 0.33

    # grids
    axis: str = "m"
    d_grid: List[float] = field(
        default_factory=lambda: [1.0, 10.0, 20.0, 40.0, 80.0, 100.0, 150.0, 200.0]
    )
    eta_grid: List[float] = field(default_factory=lambda: [2.5, 3.0, 4.0, 5.0, 6.0])
    m_grid: List[int] = field(default_factory=list)
    k_grid_db: List[float] = field(default_factory=lambda: [1.0, 10.0, 15.0])
    gamma_grid: List[float] = field(default_factory=lambda: [0.0, 10.0, 100.0, 1000.0])
    validation_fadings: List[str] = field(
        default_factory=lambda: ["rayleigh", "rician:1", "rician:10"]
    )

    # Monte Carlo and output
    n_symbols: int = 1_000_000
    seed: int = 20240601
    output_dir: str = "output"
    out: str = ""

    def __post_init__(self):
        self.validate()

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "ScenarioConfig":
        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(values) - set(known))
        if unknown:
            raise ConfigError(f"Unknown config keys: {', '.join(unknown)}")

        coerced = {}
        for name, value in values.items():
            default = _default_value(known[name])
            coerced[name] = _coerce(name, value, default)
        try:
            return cls(**coerced)
        except ConfigError:
            raise
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e)) from e

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        try:
            values = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config is not valid JSON: {e}") from e
        if not isinstance(values, dict):
            raise ConfigError("Config must be a flat JSON object")
        return cls.from_dict(values)

    # -- validation --------------------------------------------------------

    def validate(self):
        choices = {
            "profile": PROFILES,
            "scheme": SCHEME_CHOICES,
            "fading": FADING_CHOICES,
            "rician_normalization": RICIAN_NORMALIZATIONS,
            "axis": SWEEP_AXES,
            "ook_detector": OOK_DETECTORS,
        }
        for name, allowed in choices.items():
            value = getattr(self, name)
            if value not in allowed:
                raise ConfigError(f"{name} must be one of {allowed}, got {value!r}")

        if not 0 < self.ps < 1:
            raise ConfigError(f"ps must lie in (0, 1), got {self.ps}")
        if self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed}")

        try:
            self.timing()
            self.radio()
            self.ook_timing()
            self.ook_radio()
            self.ook_scheme()
            self.link()
            self.fading_model()
            for label in self.validation_fadings:
                self.parse_fading(label)
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(f"Invalid scenario: {e}") from e

    # -- domain objects ----------------------------------------------------

    def timing(self) -> FrameTiming:
        return FrameTiming(
            n_bits=self.n_bits,
            frame_period=self.frame_period,
            transient=self.transient,
            bandwidth=self.bandwidth,
        )

    def radio(self) -> RadioParameters:
        return RadioParameters(
            chi_e=self.chi_e,
            n0=dbm_to_watts(self.n0_dbm_hz),
            p_sy=self.p_sy_mw * 1e-3,
            p_filt=self.p_filt_mw * 1e-3,
            p_filr=self.p_filr_mw * 1e-3,
            p_lna=self.p_lna_mw * 1e-3,
            p_ifa=self.p_ifa_mw * 1e-3,
            p_ed=self.p_ed_mw * 1e-3,
            p_adc=self.p_adc_mw * 1e-3,
            p_dac=self.p_dac_mw * 1e-3,
            p_mix=self.p_mix_mw * 1e-3,
            alpha_fsk=self.alpha_fsk,
            alpha_oqpsk=self.alpha_oqpsk,
            alpha_ook=self.alpha_ook,
            vartheta=self.vartheta,
            coherent_circuit_scale=self.coherent_circuit_scale,
        )

    def ook_timing(self) -> FrameTiming:
        return FrameTiming(
            n_bits=self.ook_n_bits,
            frame_period=self.ook_frame_period,
            transient=self.ook_transient,
            bandwidth=self.ook_bandwidth,
        )

    def ook_radio(self) -> RadioParameters:
        return RadioParameters(
            chi_e=self.ook_chi_e,
            n0=dbm_to_watts(self.ook_n0_dbm_hz),
            p_sy=0.0, p_dac=0.0, p_mix=0.0, p_ifa=0.0,
            p_pg=self.ook_p_pg_mw * 1e-3,
            p_lna=self.ook_p_lna_mw * 1e-3,
            p_ed=self.ook_p_ed_mw * 1e-3,
            p_filt=self.ook_p_filt_mw * 1e-3,
            p_filr=self.ook_p_filr_mw * 1e-3,
            p_int=self.ook_p_int_mw * 1e-3,
            p_adc=self.ook_p_adc_mw * 1e-3,
            alpha_ook=self.alpha_ook,
        )

    def ook_scheme(self) -> Ook:
        return scheme_from_name("ook", duty_cycle=self.ook_duty_cycle)

    def carrier_scenario(self) -> Scenario:
        return Scenario(self.timing(), self.radio(), self.margin_db, self.l1_db)

    def ook_scenario(self) -> Scenario:
        return Scenario(self.ook_timing(), self.ook_radio(), self.margin_db, self.l1_db)

    def link(self, d: Optional[float] = None, eta: Optional[float] = None) -> LinkBudget:
        return LinkBudget(
            d=self.d if d is None else d,
            eta=self.eta if eta is None else eta,
            margin_db=self.margin_db,
            l1_db=self.l1_db,
        )

    def fading_model(self, k_db: Optional[float] = None) -> FadingModel:
        if self.fading == "rayleigh" and k_db is None:
            return Rayleigh(self.omega)
        return Rician(
            k_db=self.k_db if k_db is None else k_db,
            omega=self.omega,
            normalization=self.rician_normalization,
        )

    def parse_fading(self, label: str) -> FadingModel:
        """Model for a grid label such as "rayleigh" or "rician:10" (K in dB)."""
        name, _, k_text = label.partition(":")
        if name == "rayleigh" and not k_text:
            return Rayleigh(self.omega)
        if name == "rician" and k_text:
            try:
                k_db = float(k_text)
            except ValueError:
                raise ConfigError(f"Bad Rician K factor in {label!r}") from None
            return Rician(k_db, self.omega, self.rician_normalization)
        raise ConfigError(f"Fading label must be 'rayleigh' or 'rician:<K dB>', got {label!r}")

    def selected_families(self, default: tuple = ("nc-mfsk", "mqam", "oqpsk")) -> List[str]:
        return list(default) if self.scheme == "all" else [self.scheme]


def _default_value(f):
    if f.default_factory is not MISSING:
        return f.default_factory()
    return f.default


def _coerce(name: str, value: Any, default: Any) -> Any:
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{name} must be true or false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name} must be an integer, got {value!r}")
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{name} must be an integer, got {value!r}")
        return int(value)
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name} must be a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{name} must be a string, got {value!r}")
        return value
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"{name} must be a list, got {value!r}")
        element = _LIST_ELEMENT_TYPES[name]
        return [_coerce(f"{name}[{i}]", item, element) for i, item in enumerate(value)]
    raise ConfigError(f"Unsupported config value for {name}: {value!r}")


_LIST_ELEMENT_TYPES = {
    "d_grid": 0.0,
    "eta_grid": 0.0,
    "m_grid": 0,
    "k_grid_db": 0.0,
    "gamma_grid": 0.0,
    "validation_fadings": "",
}


def profile_overrides(profile: str) -> Dict[str, Any]:
    """Values a named profile sets on top of the built-in defaults.

    "calibrated" switches Rician fading to the diffuse normalization and scales
    coherent circuit energy to the tabulated DOQPSK frame energy.
    """
    if profile == "nominal":
        return {}
    if profile == "calibrated":
        base = ScenarioConfig()
        return {
            "rician_normalization": "diffuse",
            "coherent_circuit_scale": calibrated_circuit_scale(base.radio(), base.timing()),
        }
    raise ConfigError(f"profile must be one of {PROFILES}, got {profile!r}")


def env_overrides() -> Dict[str, Any]:
    """Config values taken from GREENMOD_* environment variables."""
    values = {}
    for variable, key in ENV_VARIABLES.items():
        raw = os.getenv(variable)
        if not raw:
            continue
        if key == "seed":
            try:
                values[key] = int(raw)
            except ValueError:
                raise ConfigError(f"{variable} must be an integer, got {raw!r}") from None
        else:
            values[key] = raw
    return values


def read_config_file(path: str) -> Dict[str, Any]:
    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigError(f"Config file not found: {config_path}")
    try:
        values = json.loads(config_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{config_path} is not valid JSON: {e}") from e
    if not isinstance(values, dict):
        raise ConfigError(f"{config_path} must hold a flat JSON object")
    return values


def load_config(
    path: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> ScenarioConfig:
    """Resolve a scenario from defaults, profile, environment, file and flags.

    Args:
        path: Optional JSON config file.
        overrides: CLI values; None entries are ignored.

    Raises:
        ConfigError: On any unknown key, bad type or invalid scenario.
    """
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    file_values = read_config_file(path) if path else {}
    env_values = env_overrides()

    profile = overrides.get("profile") or file_values.get("profile") \
        or env_values.get("profile") or "nominal"
    profile_values = profile_overrides(profile)

    values = ScenarioConfig().to_dict()
    # a file written by --emit-defaults carries every key; profile keys it
    # leaves at the built-in default must not undo the profile
    file_values = {
        key: value for key, value in file_values.items()
        if not (key in profile_values and value == values.get(key))
    }
    values["profile"] = profile
    values.update(profile_values)
    values.update(env_values)
    values.update(file_values)
    values.update(overrides)

    config = ScenarioConfig.from_dict(values)
    logger.debug(f"Resolved config (profile={config.profile}, file={path or '-'})")
    return config
