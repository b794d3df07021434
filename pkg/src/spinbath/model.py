"""Domain types for the spin-bath model.

All types are frozen dataclasses validated at construction. Amplitude
normalization is checked, never silently repaired.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence, Tuple

import numpy as np

NORM_TOL = 1e-12


class ModelError(ValueError):
    """Raised when a model object violates one of its invariants."""


@dataclass(frozen=True)
class SystemCoefficients:
    """Amplitudes a (up) and b (down) of the central spin."""

    a: complex
    b: complex

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        norm = abs(self.a) ** 2 + abs(self.b) ** 2
        if abs(norm - 1.0) > NORM_TOL:
            raise ModelError(
                f"normalization violated: |a|^2 + |b|^2 = {norm!r}, expected 1"
            )

    @classmethod
    def balanced(cls) -> "SystemCoefficients":
        s = 1.0 / math.sqrt(2.0)
        return cls(s, s)


@dataclass(frozen=True)
class EnvironmentParticle:
    """One bath spin: |alpha|^2, coupling g and the (optional) amplitude phases."""

    alpha_sq: float
    g: float
    phase_alpha: float = 0.0
    phase_beta: float = 0.0

    def __post_init__(self):
        alpha_sq = float(self.alpha_sq)
        g = float(self.g)
        if not 0.0 <= alpha_sq <= 1.0:
            raise ModelError(f"alpha_sq must lie in [0, 1], got {alpha_sq!r}")
        if not g > 0.0 or not math.isfinite(g):
            raise ModelError(f"coupling g must be positive and finite, got {g!r}")
        object.__setattr__(self, "alpha_sq", alpha_sq)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "phase_alpha", float(self.phase_alpha))
        object.__setattr__(self, "phase_beta", float(self.phase_beta))

    @property
    def beta_sq(self) -> float:
        return derive_beta_sq(self)

    @property
    def alpha(self) -> complex:
        return math.sqrt(self.alpha_sq) * complex(math.cos(self.phase_alpha), math.sin(self.phase_alpha))

    @property
    def beta(self) -> complex:
        return math.sqrt(self.beta_sq) * complex(math.cos(self.phase_beta), math.sin(self.phase_beta))


def derive_beta_sq(p: EnvironmentParticle) -> float:
    """|beta|^2, always derived from |alpha|^2."""
    return 1.0 - p.alpha_sq


@dataclass(frozen=True)
class EnvironmentRealization:
    """Concrete bath: an ordered tuple of particles, optionally partitioned into kinds.

    ``group_boundaries`` is a sequence of ``(label, count)`` pairs covering the
    particle list in order.
    """

    particles: Tuple[EnvironmentParticle, ...]
    group_boundaries: Optional[Tuple[Tuple[str, int], ...]] = None

    def __post_init__(self):
        particles = tuple(self.particles)
        if not particles:
            raise ModelError("environment must contain at least one particle")
        object.__setattr__(self, "particles", particles)
        if self.group_boundaries is not None:
            groups = tuple((str(label), int(count)) for label, count in self.group_boundaries)
            if any(count < 1 for _, count in groups):
                raise ModelError("group counts must be positive")
            total = sum(count for _, count in groups)
            if total != len(particles):
                raise ModelError(
                    f"group counts sum to {total} but environment has {len(particles)} particles"
                )
            object.__setattr__(self, "group_boundaries", groups)

    @classmethod
    def from_arrays(cls, alpha_sq: Sequence[float], g: Sequence[float],
                    phase_alpha=None, phase_beta=None, group_boundaries=None):
        n = len(alpha_sq)
        if len(g) != n:
            raise ModelError("alpha_sq and g must have the same length")
        pa = phase_alpha if phase_alpha is not None else [0.0] * n
        pb = phase_beta if phase_beta is not None else [0.0] * n
        particles = tuple(
            EnvironmentParticle(a2, gi, x, y) for a2, gi, x, y in zip(alpha_sq, g, pa, pb)
        )
        return cls(particles, group_boundaries)

    def __len__(self) -> int:
        return len(self.particles)

    @property
    def n(self) -> int:
        return len(self.particles)

    @cached_property
    def alpha_sq(self) -> np.ndarray:
        out = np.array([p.alpha_sq for p in self.particles], dtype=float)
        out.flags.writeable = False
        return out

    @cached_property
    def couplings(self) -> np.ndarray:
        out = np.array([p.g for p in self.particles], dtype=float)
        out.flags.writeable = False
        return out

    def group_slices(self) -> list[tuple[str, slice]]:
        """Index ranges of each kind; a single unnamed group when none are declared."""
        if self.group_boundaries is None:
            return [("all", slice(0, self.n))]
        out, start = [], 0
        for label, count in self.group_boundaries:
            out.append((label, slice(start, start + count)))
            start += count
        return out


@dataclass(frozen=True)
class ObservableSpec:
    """Coefficients of the system observable O_S; the bath part is the identity."""

    s_uu: complex = 0.0
    s_ud: complex = 0.0
    s_du: complex = 0.0
    s_dd: complex = 0.0

    def __post_init__(self):
        for name in ("s_uu", "s_ud", "s_du", "s_dd"):
            object.__setattr__(self, name, complex(getattr(self, name)))

    def is_hermitian(self, tol: float = NORM_TOL) -> bool:
        return (
            abs(self.s_uu.imag) <= tol
            and abs(self.s_dd.imag) <= tol
            and abs(self.s_ud - self.s_du.conjugate()) <= tol
        )

    def matrix(self) -> np.ndarray:
        """2x2 matrix in the (up, down) basis."""
        return np.array([[self.s_uu, self.s_ud], [self.s_du, self.s_dd]], dtype=complex)

    @classmethod
    def sigma_x(cls) -> "ObservableSpec":
        return cls(0.0, 1.0, 1.0, 0.0)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid of ``samples`` points from ``t_start`` to ``t_end`` inclusive."""

    t_start: float
    t_end: float
    samples: int

    def __post_init__(self):
        object.__setattr__(self, "t_start", float(self.t_start))
        object.__setattr__(self, "t_end", float(self.t_end))
        if isinstance(self.samples, bool) or int(self.samples) != self.samples:
            raise ModelError(f"samples must be an integer, got {self.samples!r}")
        object.__setattr__(self, "samples", int(self.samples))
        if not self.t_start >= 0.0:
            raise ModelError(f"t_start must be >= 0, got {self.t_start!r}")
        if not self.t_end > self.t_start:
            raise ModelError("t_end must exceed t_start")
        if self.samples < 2:
            raise ModelError("a time grid needs at least 2 samples")

    @property
    def step(self) -> float:
        return (self.t_end - self.t_start) / (self.samples - 1)

    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.samples)

    def nearest_index(self, t: float) -> int:
        k = int(round((t - self.t_start) / self.step))
        return min(max(k, 0), self.samples - 1)


@dataclass(frozen=True)
class TimeSeries:
    """Sampled decoherence factor over a grid.

    ``log_abs_r2`` holds ln|r|^2 and stays finite where ``abs_r2`` underflows to 0.
    """

    grid: TimeGrid
    r_values: np.ndarray
    abs_r2: np.ndarray
    log_abs_r2: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        n = self.grid.samples
        if len(self.abs_r2) != n or (self.r_values is not None and len(self.r_values) != n):
            raise ModelError("series length does not match grid")
        if np.any(self.abs_r2 < 0.0) or np.any(self.abs_r2 > 1.0 + 1e-12):
            raise ModelError("|r|^2 values must lie in [0, 1]")

    @property
    def times(self) -> np.ndarray:
        return self.grid.times()

    def __len__(self) -> int:
        return self.grid.samples
