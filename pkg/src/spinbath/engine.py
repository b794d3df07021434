"""Decoherence factor r(t), its squared modulus, and relevant-observable expectations.

Every time point is evaluated from scratch with direct trig calls, so there is
no error accumulation along the grid. Work is chunked over time so memory
stays bounded at ``_CHUNK_ELEMENTS`` doubles per temporary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .model import (
    EnvironmentRealization,
    ModelError,
    ObservableSpec,
    SystemCoefficients,
    TimeGrid,
    TimeSeries,
    NORM_TOL,
)

_CHUNK_ELEMENTS = 1 << 21
_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class DecoherenceSample:
    t: float
    r: complex
    abs_r2: float


def _check_alpha_sq(alpha_sq):
    a = np.asarray(alpha_sq, dtype=float)
    if np.any(a < 0.0) or np.any(a > 1.0) or np.any(np.isnan(a)):
        raise ModelError(f"alpha_sq outside [0, 1]: {alpha_sq!r}")
    return a


def factor_f(alpha_sq, g, t):
    """|alpha|^4 + |beta|^4 + 2|alpha|^2|beta|^2 cos(2 g t); broadcasts over arrays."""
    a2 = _check_alpha_sq(alpha_sq)
    b2 = 1.0 - a2
    out = a2 * a2 + b2 * b2 + 2.0 * a2 * b2 * np.cos(2.0 * np.asarray(g, dtype=float) * np.asarray(t, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def factor_r(alpha_sq, g, t):
    """Single bracket |alpha|^2 e^{-igt} + |beta|^2 e^{igt}."""
    a2 = _check_alpha_sq(alpha_sq)
    phase = np.asarray(g, dtype=float) * np.asarray(t, dtype=float)
    # a2 e^{-ix} + b2 e^{ix} = cos x + i (b2 - a2) sin x
    out = np.cos(phase) + 1j * ((1.0 - a2) - a2) * np.sin(phase)
    return complex(out) if np.ndim(out) == 0 else out


def _chunks(n_particles: int, n_times: int):
    width = max(1, _CHUNK_ELEMENTS // max(n_particles, 1))
    for start in range(0, n_times, width):
        yield slice(start, min(start + width, n_times))


def _evaluate(alpha_sq: np.ndarray, g: np.ndarray, times: np.ndarray, want_r: bool = True):
    """Flat-order products over particles for every time in ``times``.

    Returns ``(r, abs_r2, log_abs_r2)``; ``r`` is None when not requested.
    """
    a2 = alpha_sq[:, None]
    b2 = 1.0 - a2
    const = a2 * a2 + b2 * b2
    osc = 2.0 * a2 * b2
    gg = g[:, None]
    n_t = times.shape[0]
    abs_r2 = np.empty(n_t)
    log_abs_r2 = np.empty(n_t)
    r = np.empty(n_t, dtype=complex) if want_r else None
    for sl in _chunks(len(alpha_sq), n_t):
        phase = gg * times[None, sl]
        f = const + osc * np.cos(2.0 * phase)
        # |f| guards tiny negative rounding at exact zeros of a factor
        np.abs(f, out=f)
        prod = np.prod(f, axis=0)
        with np.errstate(divide="ignore"):
            logp = np.log(prod)
        low = prod < _TINY
        if np.any(low):
            with np.errstate(divide="ignore"):
                logsum = np.sum(np.log(f[:, low]), axis=0)
            logp[low] = logsum
            prod[low] = np.exp(logsum)
        abs_r2[sl] = np.minimum(prod, 1.0)
        log_abs_r2[sl] = np.minimum(logp, 0.0)
        if want_r:
            fr = np.cos(phase) + 1j * (b2 - a2) * np.sin(phase)
            r[sl] = np.prod(fr, axis=0)
    return r, abs_r2, log_abs_r2


def decoherence_factor(env: EnvironmentRealization, t: float) -> complex:
    """r(t) as the product of single-particle brackets in particle order."""
    r, _, _ = _evaluate(env.alpha_sq, env.couplings, np.array([float(t)]))
    return complex(r[0])


def sample(env: EnvironmentRealization, t: float) -> DecoherenceSample:
    r, abs_r2, _ = _evaluate(env.alpha_sq, env.couplings, np.array([float(t)]))
    return DecoherenceSample(float(t), complex(r[0]), float(abs_r2[0]))


def abs_r2_at(env: EnvironmentRealization, times) -> np.ndarray:
    """|r(t)|^2 at arbitrary times (no complex factor)."""
    t = np.atleast_1d(np.asarray(times, dtype=float))
    _, abs_r2, _ = _evaluate(env.alpha_sq, env.couplings, t, want_r=False)
    return abs_r2


def abs_r2_series(env: EnvironmentRealization, grid: TimeGrid, with_r: bool = True) -> TimeSeries:
    """Evaluate r(t) and |r(t)|^2 = prod_i f_i(t) on every grid point."""
    r, abs_r2, log_abs_r2 = _evaluate(env.alpha_sq, env.couplings, grid.times(), want_r=with_r)
    return TimeSeries(grid, r, abs_r2, log_abs_r2)


def grouped_abs_r2(env: EnvironmentRealization, times) -> tuple[np.ndarray, dict]:
    """|r|^2 reorganized as a product of per-kind products.

    Returns the total and a mapping ``label -> partial product`` for each kind.
    """
    t = np.atleast_1d(np.asarray(times, dtype=float))
    parts = {}
    total = np.ones_like(t)
    for label, sl in env.group_slices():
        _, part, _ = _evaluate(env.alpha_sq[sl], env.couplings[sl], t, want_r=False)
        parts[label] = part
        total = total * part
    return total, parts


def expectation_relevant(sys: SystemCoefficients, obs: ObservableSpec, r: complex) -> Union[float, complex]:
    """<O_S (x) I_E> given the decoherence factor r.

    For Hermitian observables this is |a|^2 s_uu + |b|^2 s_dd + 2 Re[a b* s_du r]
    and a float is returned; otherwise the conjugate-pair terms are kept
    separately and a complex value is returned.
    """
    a, b = sys.a, sys.b
    norm = abs(a) ** 2 + abs(b) ** 2
    if abs(norm - 1.0) > NORM_TOL:
        raise ModelError(f"normalization violated: |a|^2 + |b|^2 = {norm!r}")
    r = complex(r)
    if obs.is_hermitian():
        value = (
            abs(a) ** 2 * obs.s_uu.real
            + abs(b) ** 2 * obs.s_dd.real
            + 2.0 * (a * b.conjugate() * obs.s_du * r).real
        )
        return float(value)
    return (
        abs(a) ** 2 * obs.s_uu
        + abs(b) ** 2 * obs.s_dd
        + a * b.conjugate() * obs.s_du * r
        + a.conjugate() * b * obs.s_ud * r.conjugate()
    )


def expectation_series(sys: SystemCoefficients, obs: ObservableSpec, series: TimeSeries) -> np.ndarray:
    if series.r_values is None:
        raise ModelError("series was evaluated without complex r(t)")
    vals = [expectation_relevant(sys, obs, r) for r in series.r_values]
    return np.asarray(vals)


def recurrence_period(g: float) -> float:
    """Period pi/g of a single factor f_i."""
    return math.pi / g
