"""Run configuration: JSON documents <-> validated :class:`RunConfig`.

Document layout (every key optional unless noted)::

    {
      "preset": "fig1",
      "seed": 1,
      "overrides": {"groups": [{"half_width": 0.0}, null], "randomize_phases": false},
      "environment": {"n": 100, "randomize_phases": false,
                      "groups": [{"count": 100, "label": "g=0.5",
                                  "coupling": {"kind": "fixed", "mean": 0.5, "half_width": 0.0},
                                  "alpha": "random-uniform"}]},
      "system": {"a": 0.7071067811865476, "b": [0.7071067811865476, 0.0]},
      "observable": {"s_uu": 0, "s_ud": 1, "s_du": 1, "s_dd": 0},
      "grid": {"t_start": 0, "t_end": 100, "samples": 10000},
      "metrics": {"epsilon": 0.01, "sustain": 1.0, "peak_floor": 0.5, "tail_start": 5.0},
      "poincare": {"max_denominator": 1000000},
      "output": "out"
    }

Either ``preset`` or ``environment`` must be present. When both are, the
environment must equal the expanded preset with overrides applied; that is
the form :func:`emit_config` writes, so emitted documents parse back to the
same config.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Any, Optional

from .model import ModelError, ObservableSpec, SystemCoefficients, TimeGrid
from .metrics import DEFAULT_EPSILON, DEFAULT_PEAK_FLOOR, DEFAULT_SUSTAIN, DEFAULT_TAIL_START
from .recurrence import DEFAULT_MAX_DENOMINATOR
from .sampling import (
    DEFAULT_SEED,
    PRESETS,
    RANDOM_ALPHA,
    CouplingDistribution,
    EnvironmentSpec,
    Group,
)

DEFAULT_GRID = TimeGrid(0.0, 100.0, 10_000)
DEFAULT_OUTPUT = "out"

_TOP_KEYS = {"preset", "seed", "overrides", "environment", "system", "observable",
             "grid", "metrics", "poincare", "output"}
_ENV_KEYS = {"n", "groups", "randomize_phases"}
_GROUP_KEYS = {"count", "coupling", "alpha", "label"}
_COUPLING_KEYS = {"kind", "mean", "half_width"}
_OVERRIDE_KEYS = {"groups", "randomize_phases"}
_GROUP_PATCH_KEYS = {"count", "mean", "half_width", "alpha"}
_SYSTEM_KEYS = {"a", "b"}
_OBS_KEYS = {"s_uu", "s_ud", "s_du", "s_dd"}
_GRID_KEYS = {"t_start", "t_end", "samples"}
_METRIC_KEYS = {"epsilon", "sustain", "peak_floor", "tail_start"}
_POINCARE_KEYS = {"max_denominator"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    spec: EnvironmentSpec
    preset: Optional[str] = None
    overrides: dict = field(default_factory=dict, compare=True)
    system: SystemCoefficients = field(default_factory=SystemCoefficients.balanced)
    observable: Optional[ObservableSpec] = None
    grid: TimeGrid = DEFAULT_GRID
    epsilon: float = DEFAULT_EPSILON
    sustain: float = DEFAULT_SUSTAIN
    peak_floor: float = DEFAULT_PEAK_FLOOR
    tail_start: float = DEFAULT_TAIL_START
    max_denominator: int = DEFAULT_MAX_DENOMINATOR
    output: str = DEFAULT_OUTPUT

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError(f"metrics.epsilon must lie in (0, 1), got {self.epsilon!r}")
        if not self.sustain > 0:
            raise ConfigError("metrics.sustain must be positive")
        if not 0.0 < self.peak_floor < 1.0:
            raise ConfigError("metrics.peak_floor must lie in (0, 1)")
        if int(self.max_denominator) != self.max_denominator or self.max_denominator < 1:
            raise ConfigError("poincare.max_denominator must be a positive integer")

    @property
    def seed(self) -> int:
        return self.spec.seed


def _check_keys(obj: Any, allowed: set, where: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object, got {type(obj).__name__}")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")
    return obj


def _number(x: Any, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {x!r}")
    return float(x)


def _integer(x: Any, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ConfigError(f"{where}: expected an integer, got {x!r}")
    return x


def _complex(x: Any, where: str) -> complex:
    if isinstance(x, list):
        if len(x) != 2:
            raise ConfigError(f"{where}: complex values are [re, im]")
        return complex(_number(x[0], where), _number(x[1], where))
    return complex(_number(x, where))


def _complex_out(z: complex) -> list:
    return [z.real, z.imag]


def _parse_group(obj: Any, where: str) -> Group:
    _check_keys(obj, _GROUP_KEYS, where)
    if "count" not in obj or "coupling" not in obj:
        raise ConfigError(f"{where}: 'count' and 'coupling' are required")
    c = _check_keys(obj["coupling"], _COUPLING_KEYS, f"{where}.coupling")
    if "mean" not in c:
        raise ConfigError(f"{where}.coupling: 'mean' is required")
    kind = c.get("kind", "fixed")
    alpha = obj.get("alpha", RANDOM_ALPHA)
    if not isinstance(alpha, str):
        alpha = _number(alpha, f"{where}.alpha")
    try:
        dist = CouplingDistribution(kind, _number(c["mean"], f"{where}.coupling.mean"),
                                    _number(c.get("half_width", 0.0), f"{where}.coupling.half_width"))
        return Group(_integer(obj["count"], f"{where}.count"), dist, alpha, str(obj.get("label", "")))
    except ModelError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _emit_group(g: Group) -> dict:
    return {
        "count": g.count,
        "label": g.label,
        "coupling": {"kind": g.coupling.kind, "mean": g.coupling.mean, "half_width": g.coupling.half_width},
        "alpha": g.alpha,
    }


def _parse_environment(obj: Any, seed: int) -> EnvironmentSpec:
    _check_keys(obj, _ENV_KEYS, "environment")
    groups = obj.get("groups")
    if not isinstance(groups, list) or not groups:
        raise ConfigError("environment.groups: expected a non-empty list")
    parsed = tuple(_parse_group(g, f"environment.groups[{j}]") for j, g in enumerate(groups))
    total = sum(g.count for g in parsed)
    if "n" in obj:
        n = _integer(obj["n"], "environment.n")
        if n != total:
            raise ConfigError(
                f"environment: group counts sum to {total} but declared N = {n} "
                "(groups must partition the environment)"
            )
    randomize = obj.get("randomize_phases", False)
    if not isinstance(randomize, bool):
        raise ConfigError("environment.randomize_phases: expected true/false")
    try:
        return EnvironmentSpec(parsed, seed, randomize)
    except ModelError as exc:
        raise ConfigError(f"environment: {exc}") from None


def apply_overrides(spec: EnvironmentSpec, overrides: dict) -> EnvironmentSpec:
    """Patch a preset-expanded spec; ``groups`` patches align with the preset's groups by index."""
    _check_keys(overrides, _OVERRIDE_KEYS, "overrides")
    groups = list(spec.groups)
    patches = overrides.get("groups", [])
    if not isinstance(patches, list):
        raise ConfigError("overrides.groups: expected a list")
    if len(patches) > len(groups):
        raise ConfigError(f"overrides.groups: preset has only {len(groups)} group(s)")
    for j, patch in enumerate(patches):
        if patch is None:
            continue
        where = f"overrides.groups[{j}]"
        _check_keys(patch, _GROUP_PATCH_KEYS, where)
        g = groups[j]
        mean = _number(patch.get("mean", g.coupling.mean), f"{where}.mean")
        hw = _number(patch.get("half_width", g.coupling.half_width), f"{where}.half_width")
        count = _integer(patch.get("count", g.count), f"{where}.count")
        alpha = patch.get("alpha", g.alpha)
        if not isinstance(alpha, str):
            alpha = _number(alpha, f"{where}.alpha")
        try:
            groups[j] = Group(count, CouplingDistribution.uniform(mean, hw), alpha, g.label)
        except ModelError as exc:
            raise ConfigError(f"{where}: {exc}") from None
    randomize = overrides.get("randomize_phases", spec.randomize_phases)
    if not isinstance(randomize, bool):
        raise ConfigError("overrides.randomize_phases: expected true/false")
    return EnvironmentSpec(tuple(groups), spec.seed, randomize)


def _parse_doc(doc: Any, base_dir=None) -> RunConfig:
    _check_keys(doc, _TOP_KEYS, "config")
    seed = _integer(doc.get("seed", DEFAULT_SEED), "seed")
    if not 0 <= seed < 2**64:
        raise ConfigError("seed: must be an unsigned 64-bit integer")
    preset = doc.get("preset")
    overrides = doc.get("overrides", {})
    if overrides and preset is None:
        raise ConfigError("overrides: only allowed together with a preset")
    spec = None
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"preset: unknown preset {preset!r}; known: {', '.join(PRESETS)}")
        spec = apply_overrides(PRESETS[preset].spec(seed), overrides)
    if "environment" in doc:
        inline = _parse_environment(doc["environment"], seed)
        if spec is not None and inline != spec:
            raise ConfigError("environment: does not match preset expansion with overrides")
        spec = inline
    if spec is None:
        raise ConfigError("config: either 'preset' or 'environment' is required")

    system = SystemCoefficients.balanced()
    if "system" in doc:
        s = _check_keys(doc["system"], _SYSTEM_KEYS, "system")
        if "a" not in s or "b" not in s:
            raise ConfigError("system: both 'a' and 'b' are required")
        try:
            system = SystemCoefficients(_complex(s["a"], "system.a"), _complex(s["b"], "system.b"))
        except ModelError as exc:
            raise ConfigError(f"system: {exc}") from None

    observable = None
    if doc.get("observable") is not None:
        o = _check_keys(doc["observable"], _OBS_KEYS, "observable")
        observable = ObservableSpec(**{k: _complex(o.get(k, 0.0), f"observable.{k}") for k in _OBS_KEYS})

    grid_default = PRESETS[preset].grid if preset is not None else DEFAULT_GRID
    grid = grid_default
    if "grid" in doc:
        gd = _check_keys(doc["grid"], _GRID_KEYS, "grid")
        try:
            grid = TimeGrid(
                _number(gd.get("t_start", grid_default.t_start), "grid.t_start"),
                _number(gd.get("t_end", grid_default.t_end), "grid.t_end"),
                _integer(gd.get("samples", grid_default.samples), "grid.samples"),
            )
        except ModelError as exc:
            raise ConfigError(f"grid: {exc}") from None

    m = _check_keys(doc.get("metrics", {}), _METRIC_KEYS, "metrics")
    p = _check_keys(doc.get("poincare", {}), _POINCARE_KEYS, "poincare")
    output = doc.get("output", DEFAULT_OUTPUT)
    if not isinstance(output, str):
        raise ConfigError("output: expected a path string")
    return RunConfig(
        spec=spec,
        preset=preset,
        overrides=overrides,
        system=system,
        observable=observable,
        grid=grid,
        epsilon=_number(m.get("epsilon", DEFAULT_EPSILON), "metrics.epsilon"),
        sustain=_number(m.get("sustain", DEFAULT_SUSTAIN), "metrics.sustain"),
        peak_floor=_number(m.get("peak_floor", DEFAULT_PEAK_FLOOR), "metrics.peak_floor"),
        tail_start=_number(m.get("tail_start", DEFAULT_TAIL_START), "metrics.tail_start"),
        max_denominator=_integer(p.get("max_denominator", DEFAULT_MAX_DENOMINATOR), "poincare.max_denominator"),
        output=output,
    )


def parse_config(text: str) -> RunConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return _parse_doc(doc)


def config_from_dict(doc: dict) -> RunConfig:
    return _parse_doc(doc)


def to_document(cfg: RunConfig) -> dict:
    doc = {}
    if cfg.preset is not None:
        doc["preset"] = cfg.preset
        doc["overrides"] = cfg.overrides
    doc["seed"] = cfg.seed
    doc["environment"] = {
        "n": cfg.spec.n,
        "randomize_phases": cfg.spec.randomize_phases,
        "groups": [_emit_group(g) for g in cfg.spec.groups],
    }
    doc["system"] = {"a": _complex_out(cfg.system.a), "b": _complex_out(cfg.system.b)}
    if cfg.observable is not None:
        doc["observable"] = {k: _complex_out(getattr(cfg.observable, k)) for k in ("s_uu", "s_ud", "s_du", "s_dd")}
    doc["grid"] = {"t_start": cfg.grid.t_start, "t_end": cfg.grid.t_end, "samples": cfg.grid.samples}
    doc["metrics"] = {"epsilon": cfg.epsilon, "sustain": cfg.sustain,
                      "peak_floor": cfg.peak_floor, "tail_start": cfg.tail_start}
    doc["poincare"] = {"max_denominator": cfg.max_denominator}
    doc["output"] = cfg.output
    return doc


def emit_config(cfg: RunConfig) -> str:
    return json.dumps(to_document(cfg), indent=2, sort_keys=False) + "\n"


def with_overrides(cfg: RunConfig, **changes) -> RunConfig:
    """Copy of ``cfg`` with top-level fields replaced (CLI flag handling)."""
    return replace(cfg, **changes)
