"""Campaign configuration files.

One JSON document describes a whole campaign: the plant under test, the
required inputs (frequency range, amplitude cap and resolution), the shapes
to generate, and the analysis knobs.  Parsing is strict -- unknown keys are
rejected rather than ignored, so a typo fails loudly instead of silently
running with a default.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .campaign import RequiredInput
from .plants import NonlinearBlock, PlantSpec
from .signals import ShapeKind

CONFIG_VERSION = 1

DEFAULT_SHAPES = (
    ShapeKind.SQUARE,
    ShapeKind.SAWTOOTH,
    ShapeKind.TRIANGLE,
    ShapeKind.TRAPEZOID,
)


class ConfigError(ValueError):
    """The configuration file is invalid."""


@dataclass(frozen=True)
class CampaignConfig:
    plant: PlantSpec
    inputs: RequiredInput
    shapes: tuple[ShapeKind, ...] = DEFAULT_SHAPES
    seed: int = 0
    workers: int = 1
    max_periods: int = 10
    calibration_shape: ShapeKind = ShapeKind.SINE
    beta_params: tuple[float, float] = (2.0, 1.0)
    mr2_bin_tolerance: float | None = None
    mr2_equality_tolerance: float = 1e-6
    mr3_epsilon: float | None = None
    boundary_factor: float = 0.5
    max_frequencies: int = 256

    def __post_init__(self):
        if not self.shapes:
            raise ConfigError("shapes must not be empty")
        if len(set(self.shapes)) != len(self.shapes):
            raise ConfigError("shapes must not repeat")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.max_periods < 1:
            raise ConfigError("max_periods must be at least 1")
        if self.plant.sample_interval != self.inputs.sample_interval:
            raise ConfigError(
                "plant and campaign sample intervals differ "
                f"({self.plant.sample_interval} vs {self.inputs.sample_interval})"
            )


def _take(d: dict, key, default=None, required=False):
    if required and key not in d:
        raise ConfigError(f"missing required key {key!r}")
    return d.pop(key, default)


def _parse_block(raw: dict) -> NonlinearBlock:
    raw = dict(raw)
    kind = _take(raw, "kind", required=True)
    try:
        return NonlinearBlock(kind=kind, params=raw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_plant(raw: dict, sample_interval: float) -> PlantSpec:
    raw = dict(raw)
    model = _take(raw, "model", required=True)
    physical = _take(raw, "physical", {})
    controller = _take(raw, "controller", {})
    blocks_raw = _take(raw, "blocks", [])
    plant_dt = _take(raw, "sample_interval", sample_interval)
    if raw:
        raise ConfigError(f"unknown plant keys: {sorted(raw)}")
    if plant_dt != sample_interval:
        raise ConfigError(
            "plant sample_interval must match the campaign sample_interval"
        )
    if not isinstance(blocks_raw, list):
        raise ConfigError("plant blocks must be a list")
    try:
        return PlantSpec(
            model=model,
            physical=dict(physical),
            controller=dict(controller),
            blocks=tuple(_parse_block(b) for b in blocks_raw),
            sample_interval=sample_interval,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def config_from_dict(raw: dict) -> CampaignConfig:
    raw = dict(raw)
    version = _take(raw, "schema_version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        raise ConfigError(f"unsupported config schema_version {version!r}")

    try:
        inputs = RequiredInput(
            f_min=float(_take(raw, "f_min", required=True)),
            f_max=float(_take(raw, "f_max", required=True)),
            a_max=float(_take(raw, "a_max", required=True)),
            delta_a=float(_take(raw, "delta_a", required=True)),
            dnl_threshold=float(_take(raw, "dnl_threshold", 0.15)),
            rho=float(_take(raw, "rho", 0.1)),
            base_periods=int(_take(raw, "base_periods", 5)),
            sample_interval=float(_take(raw, "sample_interval", 0.001)),
            dnl_includes_mean=bool(_take(raw, "dnl_includes_mean", True)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    plant_raw = _take(raw, "plant", required=True)
    if not isinstance(plant_raw, dict):
        raise ConfigError("plant must be an object")
    plant = _parse_plant(plant_raw, inputs.sample_interval)

    shapes_raw = _take(raw, "shapes", [s.value for s in DEFAULT_SHAPES])
    try:
        shapes = tuple(ShapeKind(s) for s in shapes_raw)
    except ValueError as exc:
        raise ConfigError(f"unknown shape in {shapes_raw!r}") from exc

    try:
        calibration_shape = ShapeKind(_take(raw, "calibration_shape", "sine"))
    except ValueError as exc:
        raise ConfigError("unknown calibration_shape") from exc

    mr2_bin = _take(raw, "mr2_bin_tolerance")
    mr3_eps = _take(raw, "mr3_epsilon")
    cfg_kwargs = dict(
        plant=plant,
        inputs=inputs,
        shapes=shapes,
        seed=int(_take(raw, "seed", 0)),
        workers=int(_take(raw, "workers", 1)),
        max_periods=int(_take(raw, "max_periods", 10)),
        calibration_shape=calibration_shape,
        beta_params=(
            float(_take(raw, "beta_alpha", 2.0)),
            float(_take(raw, "beta_beta", 1.0)),
        ),
        mr2_bin_tolerance=None if mr2_bin is None else float(mr2_bin),
        mr2_equality_tolerance=float(_take(raw, "mr2_equality_tolerance", 1e-6)),
        mr3_epsilon=None if mr3_eps is None else float(mr3_eps),
        boundary_factor=float(_take(raw, "boundary_factor", 0.5)),
        max_frequencies=int(_take(raw, "max_frequencies", 256)),
    )
    if raw:
        raise ConfigError(f"unknown config keys: {sorted(raw)}")
    try:
        return CampaignConfig(**cfg_kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> CampaignConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return config_from_dict(raw)
