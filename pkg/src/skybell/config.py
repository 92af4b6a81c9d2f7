"""YAML run configuration: parsing, validation, and degree conversion.

Config files are human-written, so angles are given in degrees and every
validation failure names the offending field.  Internally everything is
radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import yaml

from .background import BackgroundSpec
from .errors import ConfigError
from .polarization import ChshConfiguration, PolarizerAxis
from .propagation import Geometry
from .scenarios import ExperimentConfig

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class LoadedConfig:
    """An experiment plus the run-level settings carried in the same file."""

    experiment: ExperimentConfig
    chsh: ChshConfiguration
    seed: int


def _section(doc: dict, name: str, required: bool = True) -> dict:
    if name not in doc:
        if required:
            raise ConfigError(f"{name}: missing required section")
        return {}
    value = doc[name]
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{name}: must be a mapping")
    return value


def _number(section: dict, path: str, key: str, default=None) -> float:
    label = f"{path}.{key}" if path else key
    if key not in section:
        if default is None:
            raise ConfigError(f"{label}: missing required value")
        return float(default)
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{label}: must be a number, got {value!r}")
    return float(value)


def _point(section: dict, path: str, key: str) -> np.ndarray:
    if key not in section:
        raise ConfigError(f"{path}.{key}: missing required value")
    value = section[key]
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ConfigError(f"{path}.{key}: must be a list of 3 numbers")
    try:
        return np.array([float(v) for v in value])
    except (TypeError, ValueError):
        raise ConfigError(f"{path}.{key}: must be a list of 3 numbers") from None


def parse_config(doc: dict) -> LoadedConfig:
    """Validate a parsed YAML document and build the typed configuration."""
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a mapping")

    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"schema_version: expected {SCHEMA_VERSION}, got {version!r}"
        )

    scenario = doc.get("scenario")
    if scenario not in ("I", "II"):
        raise ConfigError(f"scenario: must be 'I' or 'II', got {scenario!r}")

    bell_kind = doc.get("bell_kind", 1)
    if bell_kind not in (1, 2):
        raise ConfigError(f"bell_kind: must be 1 or 2, got {bell_kind!r}")

    fraction = _number(doc, "", "entangled_fraction")
    if not 0.0 <= fraction <= 1.0:
        raise ConfigError(f"entangled_fraction: must lie in [0, 1], got {fraction}")

    geo = _section(doc, "geometry")
    try:
        geometry = Geometry(
            source1=_point(geo, "geometry", "source1"),
            source2=_point(geo, "geometry", "source2"),
            detector_a=_point(geo, "geometry", "detector_a"),
            detector_b=_point(geo, "geometry", "detector_b"),
            wavenumber=_number(geo, "geometry", "wavenumber"),
        )
    except ValueError as exc:
        raise ConfigError(f"geometry: {exc}") from exc

    bg = _section(doc, "background")
    weights = bg.get("weights") or {}
    if not isinstance(weights, dict):
        raise ConfigError("background.weights: must be a mapping")
    for key in weights:
        if key not in ("w12", "w21", "w11", "w22"):
            raise ConfigError(f"background.weights.{key}: unknown weight")
    try:
        background = BackgroundSpec(
            axis1=PolarizerAxis(math.radians(_number(bg, "background", "axis1_deg"))),
            axis2=PolarizerAxis(math.radians(_number(bg, "background", "axis2_deg"))),
            alpha1=_number(bg, "background", "alpha1"),
            alpha2=_number(bg, "background", "alpha2"),
            w12=_number(weights, "background.weights", "w12", default=0.5),
            w21=_number(weights, "background.weights", "w21", default=0.5),
            w11=_number(weights, "background.weights", "w11", default=0.0),
            w22=_number(weights, "background.weights", "w22", default=0.0),
        )
    except ValueError as exc:
        raise ConfigError(f"background: {exc}") from exc

    prop = _section(doc, "propagation", required=False)
    normalization = prop.get("normalization", "phase-only")

    try:
        experiment = ExperimentConfig(
            scenario=scenario,
            bell_kind=bell_kind,
            entangled_fraction=fraction,
            background=background,
            geometry=geometry,
            propagator_normalization=normalization,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    chsh_section = _section(doc, "chsh", required=False)
    if chsh_section:
        chsh = ChshConfiguration(
            a=PolarizerAxis(math.radians(_number(chsh_section, "chsh", "a_deg"))),
            a_prime=PolarizerAxis(
                math.radians(_number(chsh_section, "chsh", "a_prime_deg"))
            ),
            b=PolarizerAxis(math.radians(_number(chsh_section, "chsh", "b_deg"))),
            b_prime=PolarizerAxis(
                math.radians(_number(chsh_section, "chsh", "b_prime_deg"))
            ),
        )
    else:
        chsh = ChshConfiguration.saturating()

    rng = _section(doc, "rng", required=False)
    seed = rng.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError(f"rng.seed: must be an integer in [0, 2^64), got {seed!r}")

    return LoadedConfig(experiment=experiment, chsh=chsh, seed=seed)


def load_config(path) -> LoadedConfig:
    """Load and validate a YAML config file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"could not parse config file: {exc}") from exc
    return parse_config(doc)


def dump_config(loaded: LoadedConfig) -> str:
    """Serialize a configuration back to YAML (angles in degrees)."""
    exp = loaded.experiment
    bg = exp.background
    geo = exp.geometry
    doc = {
        "schema_version": SCHEMA_VERSION,
        "scenario": exp.scenario,
        "bell_kind": exp.bell_kind,
        "entangled_fraction": exp.entangled_fraction,
        "geometry": {
            "source1": [float(v) for v in geo.source1],
            "source2": [float(v) for v in geo.source2],
            "detector_a": [float(v) for v in geo.detector_a],
            "detector_b": [float(v) for v in geo.detector_b],
            "wavenumber": geo.wavenumber,
        },
        "propagation": {"normalization": exp.propagator_normalization},
        "background": {
            "axis1_deg": math.degrees(bg.axis1.angle),
            "axis2_deg": math.degrees(bg.axis2.angle),
            "alpha1": bg.alpha1,
            "alpha2": bg.alpha2,
            "weights": {"w12": bg.w12, "w21": bg.w21, "w11": bg.w11, "w22": bg.w22},
        },
        "chsh": {
            "a_deg": math.degrees(loaded.chsh.a.angle),
            "a_prime_deg": math.degrees(loaded.chsh.a_prime.angle),
            "b_deg": math.degrees(loaded.chsh.b.angle),
            "b_prime_deg": math.degrees(loaded.chsh.b_prime.angle),
        },
        "rng": {"seed": loaded.seed},
    }
    return yaml.safe_dump(doc, sort_keys=False)


def default_config() -> LoadedConfig:
    """A ready-to-run wide-separation example configuration."""
    geometry = Geometry(
        source1=np.array([-5.0, 0.0, 1000.0]),
        source2=np.array([5.0, 0.0, 1000.0]),
        detector_a=np.array([-1.0, 0.0, 0.0]),
        detector_b=np.array([1.0, 0.0, 0.0]),
        wavenumber=2.0 * math.pi,
    )
    background = BackgroundSpec(
        axis1=PolarizerAxis(0.0),
        axis2=PolarizerAxis(0.0),
        alpha1=1.0,
        alpha2=1.0,
    )
    experiment = ExperimentConfig(
        scenario="II",
        bell_kind=1,
        entangled_fraction=0.3,
        background=background,
        geometry=geometry,
    )
    return LoadedConfig(
        experiment=experiment, chsh=ChshConfiguration.saturating(), seed=0
    )
