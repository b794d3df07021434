"""Seeded construction of bath realizations from grouped specs, plus figure presets.

Generator contract (this is what makes runs reproducible):

* bit generator: numpy ``PCG64``;
* stream splitting: ``SeedSequence(seed).spawn(n_groups)``, child ``j`` feeds group ``j``;
* draw order inside a group: particle-minor, and for each particle the coupling
  is drawn before ``|alpha|^2``, followed by the two phases when phases are
  randomized. A draw happens only for random quantities, each via ``Generator.random()``
  (one double in [0, 1)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Tuple, Union

import numpy as np

from .model import EnvironmentParticle, EnvironmentRealization, ModelError, TimeGrid

GENERATOR_NAME = "numpy.random.PCG64 / SeedSequence.spawn per group"
ALPHA_DISTRIBUTION = "uniform on [0, 1] for |alpha_i|^2"
RANDOM_ALPHA = "random-uniform"
FIXED = "fixed"
UNIFORM = "uniform-interval"
DEFAULT_SEED = 1
_U64 = 2**64


@dataclass(frozen=True)
class CouplingDistribution:
    kind: str
    mean: float
    half_width: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "mean", float(self.mean))
        object.__setattr__(self, "half_width", float(self.half_width))
        if self.kind not in (FIXED, UNIFORM):
            raise ModelError(f"unknown coupling distribution kind {self.kind!r}")
        if not math.isfinite(self.mean) or self.mean <= 0:
            raise ModelError(f"coupling mean must be positive, got {self.mean!r}")
        if self.half_width < 0:
            raise ModelError("half_width must be >= 0")
        if self.kind == FIXED and self.half_width != 0.0:
            raise ModelError("fixed couplings have half_width 0")
        if not self.mean - self.half_width > 0:
            raise ModelError(
                f"interval [{self.mean - self.half_width}, {self.mean + self.half_width}] "
                "must stay positive"
            )

    @classmethod
    def fixed(cls, g: float) -> "CouplingDistribution":
        return cls(FIXED, g, 0.0)

    @classmethod
    def uniform(cls, mean: float, half_width: float) -> "CouplingDistribution":
        if half_width == 0:
            return cls.fixed(mean)
        return cls(UNIFORM, mean, half_width)

    @property
    def low(self) -> float:
        return self.mean - self.half_width

    @property
    def high(self) -> float:
        return self.mean + self.half_width


@dataclass(frozen=True)
class Group:
    count: int
    coupling: CouplingDistribution
    alpha: Union[str, float] = RANDOM_ALPHA
    label: str = ""

    def __post_init__(self):
        if isinstance(self.count, bool) or int(self.count) != self.count or self.count < 1:
            raise ModelError(f"group count must be a positive integer, got {self.count!r}")
        object.__setattr__(self, "count", int(self.count))
        if isinstance(self.alpha, str):
            if self.alpha != RANDOM_ALPHA:
                raise ModelError(f"unknown alpha mode {self.alpha!r}")
        else:
            a = float(self.alpha)
            if not 0.0 <= a <= 1.0:
                raise ModelError(f"fixed alpha_sq must lie in [0, 1], got {a!r}")
            object.__setattr__(self, "alpha", a)


@dataclass(frozen=True)
class EnvironmentSpec:
    groups: Tuple[Group, ...]
    seed: int = DEFAULT_SEED
    randomize_phases: bool = False

    def __post_init__(self):
        groups = tuple(self.groups)
        if not groups:
            raise ModelError("environment spec needs at least one group")
        object.__setattr__(self, "groups", groups)
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or not 0 <= self.seed < _U64:
            raise ModelError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def n(self) -> int:
        return sum(g.count for g in self.groups)

    def with_seed(self, seed: int) -> "EnvironmentSpec":
        return replace(self, seed=seed)


def _group_label(j: int, group: Group) -> str:
    return group.label or f"kind{j + 1}"


def sample_environment(spec: EnvironmentSpec) -> EnvironmentRealization:
    children = np.random.SeedSequence(spec.seed).spawn(len(spec.groups))
    particles = []
    bounds = []
    for j, (group, child) in enumerate(zip(spec.groups, children)):
        rng = np.random.Generator(np.random.PCG64(child))
        dist = group.coupling
        for _ in range(group.count):
            if dist.kind == UNIFORM:
                g = dist.low + (dist.high - dist.low) * rng.random()
                # guards the closed-interval contract against rounding at the top end
                g = min(max(g, dist.low), dist.high)
            else:
                g = dist.mean
            alpha_sq = rng.random() if group.alpha == RANDOM_ALPHA else group.alpha
            pa = pb = 0.0
            if spec.randomize_phases:
                pa = 2.0 * math.pi * rng.random()
                pb = 2.0 * math.pi * rng.random()
            particles.append(EnvironmentParticle(alpha_sq, g, pa, pb))
        bounds.append((_group_label(j, group), group.count))
    return EnvironmentRealization(tuple(particles), tuple(bounds))


@dataclass(frozen=True)
class Preset:
    name: str
    caption: str
    groups: Tuple[Group, ...]
    grid: TimeGrid
    notes: str = ""

    def spec(self, seed: int = DEFAULT_SEED) -> EnvironmentSpec:
        return EnvironmentSpec(self.groups, seed)


def _kinds(means, half_widths):
    counts = (91, 3, 3, 3)
    return tuple(
        Group(n, CouplingDistribution.uniform(m, h), RANDOM_ALPHA, f"g={m}")
        for n, m, h in zip(counts, means, half_widths)
    )


_CONTAMINATED_MEANS = (2.4, 1.2, 0.6, 0.3)
# Printed half-widths; 30% of the means would give 0.72 / 0.36 / 0.18 / 0.09.
_CONTAMINATED_HALF_WIDTHS = (0.8, 0.4, 0.2, 0.1)

# Grids for fig1/fig3 put the exact recurrence time (2*pi and 10*pi/3) on a node.
PRESETS = {
    "fig1": Preset(
        "fig1",
        "|r(t)|^2 for N=100 and g_i=g=0.5 (homogeneous environment)",
        (Group(100, CouplingDistribution.fixed(0.5), RANDOM_ALPHA, "g=0.5"),),
        TimeGrid(0.0, 32 * math.pi, 10001),
    ),
    "fig2": Preset(
        "fig2",
        "|r(t)|^2 for N=100 and random g_i in [0.4, 0.6]",
        (Group(100, CouplingDistribution.uniform(0.5, 0.1), RANDOM_ALPHA, "g~U[0.4,0.6]"),),
        TimeGrid(0.0, 100.0, 10001),
    ),
    "fig3": Preset(
        "fig3",
        "|r(t)|^2 for N=100, N1=91, N2=N3=N4=3, g1=2.4, g2=1.2, g3=0.6, g4=0.3",
        _kinds(_CONTAMINATED_MEANS, (0.0,) * 4),
        TimeGrid(0.0, 100 * math.pi / 3, 10001),
    ),
    "fig4": Preset(
        "fig4",
        "|r(t)|^2 for N=100, N1=91, N2=N3=N4=3, random g1i in [1.6,3.2], "
        "g2i in [0.8,1.6], g3i in [0.4,0.8], g4i in [0.2,0.4]",
        _kinds(_CONTAMINATED_MEANS, _CONTAMINATED_HALF_WIDTHS),
        TimeGrid(0.0, 100.0, 10001),
    ),
    "fig5": Preset(
        "fig5",
        "same environment as fig4 on a short time scale (decoherence time)",
        _kinds(_CONTAMINATED_MEANS, _CONTAMINATED_HALF_WIDTHS),
        TimeGrid(0.0, 1.0, 1001),
        notes="not one of the four core presets; shares fig4's environment",
    ),
}


def preset(name: str, seed: int = DEFAULT_SEED) -> EnvironmentSpec:
    try:
        return PRESETS[name].spec(seed)
    except KeyError:
        raise ModelError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}") from None


def preset_grid(name: str) -> TimeGrid:
    if name not in PRESETS:
        raise ModelError(f"unknown preset {name!r}")
    return PRESETS[name].grid
