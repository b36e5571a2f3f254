"""
Run configuration.

A run is described by a TOML file with the sections [run], [geometry],
[physics], [band], [study], [models] and [tolerances]. Every section maps
onto a frozen dataclass whose defaults describe the acceptance suite; the
file only needs the values it changes. Validation runs as a chain of
conditions before any computation and stops at the first bad field.
"""
import tomllib
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from types import NoneType, UnionType
from typing import Any, Literal, Mapping, Optional, Union, get_args, get_origin

import numpy as np

from robin_scope.implementations.datastructures import (
    FailedResult,
    HalfLineDiscretization,
    Result,
    SuccessResult,
)
from robin_scope.implementations.errors import HarnessErrors, SpectralException
from robin_scope.implementations.harness.helpers.condition_executor import ConditionChain
from robin_scope.implementations.harness.templates.base import Condition

EXPERIMENTS = ("band", "limits", "models", "disk-converge", "square-count", "lt-check", "validate")
BUDGETS = ("quick", "full")
SHAPES = ("circle", "ellipse", "square")


@dataclass(kw_only=True, slots=True, frozen=True)
class RunSection:
    experiment: str = "validate"
    out: str = "runs"
    budget: Literal["quick", "full"] = "quick"
    threads: int = 1
    seed: int = 20240611
    log_format: Literal["console", "json"] = "console"
    log_level: str = "info"
    snapshot: Optional[str] = None


@dataclass(kw_only=True, slots=True, frozen=True)
class GeometrySection:
    shape: str = "circle"
    # radius of the circle, semi-axis a of the ellipse, side of the square
    size: float = 1.0
    aspect: float = 1.0
    nodes: int = 256


@dataclass(kw_only=True, slots=True, frozen=True)
class PhysicsSection:
    b: float = 1.0
    # B(r) = b + field_slope r^2 on the disk
    field_slope: float = 0.0
    gamma: float = -1.0
    alpha: float = 0.5
    lam: float = 1.0
    count_lam: float = 0.9
    spike_height: float = -50.0
    spike_arc: float = 0.05
    spike_softness: float = 0.005
    probe_h: float = 0.1
    probe_alpha: float = 1.0


@dataclass(kw_only=True, slots=True, frozen=True)
class BandSection:
    gamma_grid: tuple[float, ...] = (-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0)
    xi_min: float = -6.0
    xi_max: float = 8.0
    xi_step: float = 0.025
    p_max: int = 4
    spacing: float = 0.005
    margin: float = 12.0
    scheme: Literal["finite-difference", "shooting"] = "finite-difference"
    oracle_nodes: int = 100
    table: Optional[str] = None

    @property
    def xi_grid(self) -> np.ndarray:
        n = int(round((self.xi_max - self.xi_min) / self.xi_step))
        return np.linspace(self.xi_min, self.xi_max, n + 1)

    @property
    def discretization(self) -> HalfLineDiscretization:
        return HalfLineDiscretization(spacing=self.spacing, margin=self.margin, scheme=self.scheme)


@dataclass(kw_only=True, slots=True, frozen=True)
class StudySection:
    h_list: tuple[float, ...] = (0.1, 0.05, 0.025)
    points_per_length: int = 48
    budget_unknowns: int = 400_000
    # square sides are scaled so that 1 / (2 pi h) is an integer flux
    square_flux: tuple[int, ...] = (4, 8, 16)
    square_points_per_length: int = 16


@dataclass(kw_only=True, slots=True, frozen=True)
class ModelsSection:
    torus_flux: tuple[int, ...] = (1, 5, 20)
    torus_spacing: float = 0.05
    cylinder_h: float = 0.1
    cylinder_S: float = 2.0
    cylinder_T: float = 3.0
    cylinder_n_s: int = 64
    cylinder_count: int = 20
    dirichlet_side: float = 10.0
    dirichlet_levels: tuple[float, ...] = (1.0, 2.9)
    lt_alphas: tuple[float, ...] = (0.5, 1.0, 2.0)
    lt_gammas: tuple[float, ...] = (0.5, 1.0, 2.0)
    lt_bump_alphas: tuple[float, ...] = (1.0, 2.0)
    lt_bump_height: float = 2.0
    lt_bump_half_width: float = 2.0


@dataclass(kw_only=True, slots=True, frozen=True)
class TolerancesSection:
    anchor: float = 1e-7
    boundary_value: float = 1e-6
    oracle: float = 1e-6
    theta_identity: float = 1e-5
    fiber: float = 1e-3
    disk_oracle: float = 5e-3
    gauge: float = 1e-8
    quadrature: float = 1e-3
    energy_neumann: float = 0.10
    energy_robin: float = 0.15
    count_robin: float = 0.15
    square: float = 0.15
    bracket: float = 0.5
    consistency: float = 0.01
    probe: float = 0.05
    snapshot: float = 1e-10


@dataclass(kw_only=True, slots=True, frozen=True)
class RunConfig:
    run: RunSection = field(default_factory=RunSection)
    geometry: GeometrySection = field(default_factory=GeometrySection)
    physics: PhysicsSection = field(default_factory=PhysicsSection)
    band: BandSection = field(default_factory=BandSection)
    study: StudySection = field(default_factory=StudySection)
    models: ModelsSection = field(default_factory=ModelsSection)
    tolerances: TolerancesSection = field(default_factory=TolerancesSection)

    def with_overrides(self, **run_values: Any) -> "RunConfig":
        values = {k: v for k, v in run_values.items() if v is not None}
        return replace(self, run=replace(self.run, **values)) if values else self

    def as_dict(self) -> dict[str, dict[str, Any]]:
        return {
            f.name: {g.name: getattr(getattr(self, f.name), g.name) for g in fields(getattr(self, f.name))}
            for f in fields(self)
        }


SECTIONS = {f.name: f.default_factory for f in fields(RunConfig)}


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def _fail(run_id: str, message: str, code: str = HarnessErrors.CONFIG_INVALID) -> FailedResult:
    return FailedResult(run_id=run_id, message=message, error_code=code)


class KnownFieldsCondition(Condition):
    """Every section and key in the file must exist on the dataclasses."""

    def validate(self, *, context: Mapping[str, Any], run_id: str) -> Result:
        raw = context["raw"]
        for section, values in raw.items():
            if section not in SECTIONS:
                return _fail(run_id, f"{section}: unknown section")
            if not isinstance(values, dict):
                return _fail(run_id, f"{section}: expected a table")
            known = {f.name for f in fields(SECTIONS[section]())}
            for key in values:
                if key not in known:
                    return _fail(run_id, f"{section}.{key}: unknown field")
        return SuccessResult(run_id=run_id)


def _matches(value: Any, annotation: Any) -> bool:
    origin = get_origin(annotation)
    if origin is Literal:
        # membership is checked by the section conditions
        return any(isinstance(value, type(option)) for option in get_args(annotation))
    if origin in (Union, UnionType):
        return any(_matches(value, arg) for arg in get_args(annotation))
    if origin is tuple:
        item = get_args(annotation)[0]
        return isinstance(value, tuple) and all(_matches(v, item) for v in value)
    if annotation is NoneType:
        return value is None
    if isinstance(value, bool):
        return annotation is bool
    if annotation is float:
        return isinstance(value, (int, float))
    return isinstance(value, annotation)


def _describe(annotation: Any) -> str:
    origin = get_origin(annotation)
    if origin is Literal:
        return type(get_args(annotation)[0]).__name__
    if origin in (Union, UnionType):
        return " or ".join(_describe(arg) for arg in get_args(annotation))
    if origin is tuple:
        return f"list of {_describe(get_args(annotation)[0])}"
    if annotation is NoneType:
        return "None"
    return annotation.__name__


class FieldTypesCondition(Condition):
    """Every value must have the type its dataclass field declares."""

    def validate(self, *, context: Mapping[str, Any], run_id: str) -> Result:
        config: RunConfig = context["config"]
        for section in fields(config):
            values = getattr(config, section.name)
            for f in fields(values):
                value = getattr(values, f.name)
                if not _matches(value, f.type):
                    return _fail(
                        run_id, f"{section.name}.{f.name}: expected {_describe(f.type)}, got {value!r}"
                    )
        return SuccessResult(run_id=run_id)


class KnownExperimentCondition(Condition):

    def validate(self, *, context: Mapping[str, Any], run_id: str) -> Result:
        run = context["config"].run
        if run.experiment not in EXPERIMENTS:
            return _fail(
                run_id,
                f"run.experiment: '{run.experiment}' is not one of {', '.join(EXPERIMENTS)}",
                HarnessErrors.UNKNOWN_EXPERIMENT,
            )
        if run.budget not in BUDGETS:
            return _fail(run_id, f"run.budget: '{run.budget}' is not one of {', '.join(BUDGETS)}")
        if run.threads < 1:
            return _fail(run_id, f"run.threads: must be >= 1, got {run.threads}")
        if run.log_format not in ("console", "json"):
            return _fail(run_id, f"run.log_format: '{run.log_format}' is not console or json")
        return SuccessResult(run_id=run_id)


class PositiveValuesCondition(Condition):
    """Tolerances, sizes and grid controls must be positive."""

    POSITIVE = {
        "geometry": ("size", "aspect", "nodes"),
        "physics": ("b", "spike_arc", "spike_softness", "probe_h"),
        "band": ("xi_step", "p_max", "spacing", "margin", "oracle_nodes"),
        "study": ("points_per_length", "budget_unknowns", "square_points_per_length"),
        "models": (
            "torus_spacing", "cylinder_h", "cylinder_S", "cylinder_T", "cylinder_n_s",
            "cylinder_count", "dirichlet_side", "lt_bump_height", "lt_bump_half_width",
        ),
    }

    def validate(self, *, context: Mapping[str, Any], run_id: str) -> Result:
        config: RunConfig = context["config"]
        checks = dict(self.POSITIVE)
        checks["tolerances"] = tuple(f.name for f in fields(TolerancesSection))
        for section, names in checks.items():
            for name in names:
                value = getattr(getattr(config, section), name)
                if not isinstance(value, (int, float)) or isinstance(value, bool) or not value > 0:
                    return _fail(run_id, f"{section}.{name}: must be a positive number, got {value!r}")
        return SuccessResult(run_id=run_id)


class PhysicsCondition(Condition):

    def validate(self, *, context: Mapping[str, Any], run_id: str) -> Result:
        config: RunConfig = context["config"]
        p, g = config.physics, config.geometry
        if g.shape not in SHAPES:
            return _fail(run_id, f"geometry.shape: '{g.shape}' is not one of {', '.join(SHAPES)}")
        for name in ("alpha", "probe_alpha"):
            if getattr(p, name) < 0.5:
                return _fail(run_id, f"physics.{name}: must be >= 1/2, got {getattr(p, name)}")
        if p.field_slope < 0:
            return _fail(run_id, f"physics.field_slope: must be >= 0 so that inf B = b, got {p.field_slope}")
        if p.lam > p.b:
            return _fail(run_id, f"physics.lam: must not exceed b={p.b}, got {p.lam}")
        if p.count_lam >= p.b:
            return _fail(run_id, f"physics.count_lam: must be below b={p.b}, got {p.count_lam}")
        return SuccessResult(run_id=run_id)


class GridsCondition(Condition):

    def validate(self, *, context: Mapping[str, Any], run_id: str) -> Result:
        config: RunConfig = context["config"]
        band, study = config.band, config.study
        if band.xi_max <= band.xi_min:
            return _fail(run_id, f"band.xi_max: must exceed band.xi_min={band.xi_min}")
        if len(band.gamma_grid) == 0 or list(band.gamma_grid) != sorted(set(band.gamma_grid)):
            return _fail(run_id, "band.gamma_grid: must be a non-empty increasing list")
        if band.scheme not in ("finite-difference", "shooting"):
            return _fail(run_id, f"band.scheme: '{band.scheme}' is not finite-difference or shooting")
        h = list(study.h_list)
        if not h or any(x <= 0 for x in h) or any(b >= a for a, b in zip(h, h[1:])):
            return _fail(run_id, f"study.h_list: must be positive and strictly decreasing, got {h}")
        if study.points_per_length < 8 or study.square_points_per_length < 8:
            return _fail(run_id, "study.points_per_length: at least 8 points per magnetic length are needed")
        if any(n < 1 for n in study.square_flux) or any(n < 1 for n in config.models.torus_flux):
            return _fail(run_id, "study.square_flux: flux quanta must be positive integers")
        return SuccessResult(run_id=run_id)


VALIDATION = ConditionChain([
    FieldTypesCondition(),
    KnownExperimentCondition(),
    PositiveValuesCondition(),
    PhysicsCondition(),
    GridsCondition(),
])


def _coerce(section: str, raw: Mapping[str, Any]):
    defaults = SECTIONS[section]()
    values = {}
    for key, value in raw.items():
        if isinstance(value, list):
            value = tuple(value)
        values[key] = value
    return replace(defaults, **values)


def validate_config(config: RunConfig, run_id: str = "config") -> RunConfig:
    result = VALIDATION.execute(context={"config": config}, run_id=run_id)
    if not result.status:
        raise SpectralException(result.error_code, result.message)
    return config


def parse_config(raw: Mapping[str, Any], run_id: str = "config") -> RunConfig:
    known = KnownFieldsCondition().validate(context={"raw": raw}, run_id=run_id)
    if not known.status:
        raise SpectralException(known.error_code, known.message)
    config = RunConfig(**{name: _coerce(name, values) for name, values in raw.items()})
    return validate_config(config, run_id)


def load_config(path: str | Path | None, run_id: str = "config") -> RunConfig:
    """Read and validate a TOML run file; ``None`` gives the default suite."""
    if path is None:
        return validate_config(RunConfig(), run_id)
    path = Path(path)
    try:
        with path.open("rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise SpectralException(HarnessErrors.CONFIG_INVALID, f"{path}: no such file")
    except tomllib.TOMLDecodeError as exc:
        raise SpectralException(HarnessErrors.CONFIG_INVALID, f"{path}: {exc}")
    return parse_config(raw, run_id)
