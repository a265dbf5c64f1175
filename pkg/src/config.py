"""
Experiment configuration.

A run is described by one JSON document loaded into frozen dataclasses.
Every field can be overridden on the command line with a flag mirroring its
path (--tolerances.min-tol 1e-7); the flags are generated from the dataclass
fields. Process-wide settings come from the environment (.env supported):

    GEOLAB_THREADS     worker thread cap (default: CPU count)
    GEOLAB_LOG_LEVEL   logging level name (default: INFO)
"""

import argparse
import json
import logging
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from .errors import ConfigError, GeolabError
from .geometry.deck_groups import (
    QuotientSpace,
    generic_basis,
    hexagonal_basis,
    lattice_group,
    octagon_group,
    square_basis,
)
from .geometry.quotient_metric import SearchSettings

logger = logging.getLogger(__name__)

EXPERIMENTS = ("torus", "hyperbolic", "convexity", "halfspace")
NAMED_LATTICES = {
    "square": square_basis,
    "hexagonal": hexagonal_basis,
    "generic": generic_basis,
}
SURFACES = ("octagon",)
SECTIONS = ("space", "samples", "tolerances", "search")


@dataclass(frozen=True)
class SpaceConfig:
    """
    Attributes:
        lattice: torus lattice, a name from NAMED_LATTICES or basis rows
        surface: hyperbolic surface; "octagon" is the genus-2 surface
        curvature: curvature of the hyperbolic surface
        expected_max_order: when set, the torus run asserts this maximal sampled order
    """
    lattice: Union[str, list] = "square"
    surface: str = "octagon"
    curvature: float = -1.0
    expected_max_order: Optional[int] = None


@dataclass(frozen=True)
class SampleConfig:
    seed: int = 0
    seeds: int = 8
    grid: int = 100
    trials: int = 100_000
    comparison_trials: int = 10_000
    systems: int = 1_000
    halfspace_samples: int = 10_000
    max_dim: int = 5
    probe_directions: int = 64
    profile_samples: int = 101


@dataclass(frozen=True)
class ToleranceConfig:
    """min_tol is relative: segments tie within min_tol * (1 + d)."""
    min_tol: float = 1e-7
    sep_tol: float = 1e-6
    tol_conv: float = 1e-9
    dir_tol: float = 1e-6
    probe_radius: float = 1e-3


@dataclass(frozen=True)
class SearchConfig:
    max_iterations: int = 20_000
    step_floor: float = 1e-8
    extra_directions: int = 32
    node_budget: int = 200_000


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "torus"
    space: SpaceConfig = field(default_factory=SpaceConfig)
    samples: SampleConfig = field(default_factory=SampleConfig)
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)
    search: SearchConfig = field(default_factory=SearchConfig)
    out: str = "report.json"
    csv: Optional[str] = None
    record_timing: bool = True

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> "ExperimentConfig":
        """
        Check invariants and return self.

        Raises:
            ConfigError: unknown experiment, non-positive tolerance or count,
                or an unusable lattice/surface.
        """
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"Unknown experiment '{self.experiment}', expected one of {EXPERIMENTS}")
        for name, value in asdict(self.tolerances).items():
            if not isinstance(value, (int, float)) or not value > 0:
                raise ConfigError(f"tolerances.{name} must be positive, got {value!r}")
        for name, value in asdict(self.samples).items():
            if name == "seed":
                continue
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"samples.{name} must be an integer >= 1, got {value!r}")
        if self.samples.max_dim < 2:
            raise ConfigError("samples.max_dim must be >= 2")
        for name, value in asdict(self.search).items():
            if not value > 0:
                raise ConfigError(f"search.{name} must be positive, got {value!r}")
        if self.space.surface not in SURFACES:
            raise ConfigError(f"Unknown surface '{self.space.surface}', expected one of {SURFACES}")
        if not self.space.curvature < 0:
            raise ConfigError(f"space.curvature must be negative, got {self.space.curvature}")
        self.lattice_space()
        return self

    def lattice_space(self) -> QuotientSpace:
        lattice = self.space.lattice
        if isinstance(lattice, str):
            if lattice not in NAMED_LATTICES:
                raise ConfigError(f"Unknown lattice '{lattice}', expected one of {sorted(NAMED_LATTICES)} or a basis")
            return lattice_group(NAMED_LATTICES[lattice](), name=lattice)
        try:
            return lattice_group(np.array(lattice, dtype=float), name="custom")
        except (GeolabError, ValueError) as exc:
            raise ConfigError(f"Invalid lattice basis: {exc}") from exc

    def surface_space(self) -> QuotientSpace:
        return octagon_group(self.space.curvature)

    def search_settings(self) -> SearchSettings:
        return SearchSettings(
            step_floor=self.search.step_floor,
            max_iterations=self.search.max_iterations,
            extra_directions=self.search.extra_directions,
            node_budget=self.search.node_budget,
            sep_tol=self.tolerances.sep_tol,
        )

    def with_overrides(self, overrides: dict[str, Any]) -> "ExperimentConfig":
        """Apply {"section.field": value} or {"field": value} overrides."""
        config = self
        for path, value in overrides.items():
            section, _, name = path.rpartition(".")
            if section:
                if section not in SECTIONS:
                    raise ConfigError(f"Unknown config section '{section}'")
                current = getattr(config, section)
                if name not in {f.name for f in fields(current)}:
                    raise ConfigError(f"Unknown config field '{path}'")
                config = replace(config, **{section: replace(current, **{name: value})})
            else:
                if name not in {f.name for f in fields(config)} or name in SECTIONS:
                    raise ConfigError(f"Unknown config field '{path}'")
                config = replace(config, **{name: value})
        return config


def config_from_dict(doc: dict) -> ExperimentConfig:
    """
    Build a config from a parsed JSON document; missing fields take defaults.

    Raises:
        ConfigError: unknown keys or a section that is not an object.
    """
    if not isinstance(doc, dict):
        raise ConfigError("Config document must be a JSON object")
    section_types = {f.name: f.default_factory for f in fields(ExperimentConfig) if f.name in SECTIONS}
    kwargs: dict[str, Any] = {}
    for key, value in doc.items():
        if key in section_types:
            if not isinstance(value, dict):
                raise ConfigError(f"Config section '{key}' must be an object")
            try:
                kwargs[key] = section_types[key](**value)
            except TypeError as exc:
                raise ConfigError(f"Bad field in section '{key}': {exc}") from exc
        elif key in {f.name for f in fields(ExperimentConfig)}:
            kwargs[key] = value
        else:
            raise ConfigError(f"Unknown config key '{key}'")
    return ExperimentConfig(**kwargs)


def load_config(path: Optional[str | Path] = None) -> ExperimentConfig:
    """Load a JSON config; None gives the defaults."""
    if path is None:
        return ExperimentConfig()
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"Cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(doc)


# -----------------------------------------------------------------------------
# Command-line overrides
# -----------------------------------------------------------------------------

def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"Expected a boolean, got '{text}'")


def _parse_json_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _parser_for(default: Any):
    if isinstance(default, bool):
        return _parse_bool
    if isinstance(default, int):
        return int
    if isinstance(default, float):
        return float
    return _parse_json_value


def _flag(path: str) -> str:
    return "--" + path.replace("_", "-")


def add_override_arguments(parser: argparse.ArgumentParser) -> None:
    """Add one optional flag per config field (sections first, then top-level fields)."""
    defaults = ExperimentConfig()
    for section in SECTIONS:
        group = parser.add_argument_group(f"{section} overrides")
        for f in fields(getattr(defaults, section)):
            path = f"{section}.{f.name}"
            group.add_argument(
                _flag(path), dest=path, type=_parser_for(getattr(getattr(defaults, section), f.name)),
                default=None, metavar=f.name.upper(),
            )
    for f in fields(defaults):
        if f.name in SECTIONS or f.name == "experiment":
            continue
        parser.add_argument(_flag(f.name), dest=f.name, type=_parser_for(getattr(defaults, f.name)), default=None)


def collect_overrides(namespace: argparse.Namespace) -> dict[str, Any]:
    """The override flags that were actually given."""
    known = {f"{s}.{f.name}" for s in SECTIONS for f in fields(getattr(ExperimentConfig(), s))}
    known |= {f.name for f in fields(ExperimentConfig) if f.name not in SECTIONS and f.name != "experiment"}
    return {k: v for k, v in vars(namespace).items() if k in known and v is not None}


# -----------------------------------------------------------------------------
# Environment
# -----------------------------------------------------------------------------

def thread_count() -> int:
    """GEOLAB_THREADS, or the CPU count."""
    raw = os.getenv("GEOLAB_THREADS")
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"GEOLAB_THREADS must be a positive integer, got '{raw}'")
    if value < 1:
        raise ConfigError(f"GEOLAB_THREADS must be a positive integer, got {value}")
    return value


def configure_logging(level: Optional[str] = None) -> None:
    """Configure root logging once from GEOLAB_LOG_LEVEL (or `level`)."""
    name = (level or os.getenv("GEOLAB_LOG_LEVEL", "INFO")).upper()
    numeric = logging.getLevelName(name)
    if not isinstance(numeric, int):
        raise ConfigError(f"Unknown log level '{name}'")
    logging.basicConfig(level=numeric, format="%(asctime)s %(levelname)s %(name)s %(message)s")
    logging.getLogger().setLevel(numeric)
