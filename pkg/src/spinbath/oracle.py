"""Brute-force reference on the full 2^(N+1)-dimensional Hilbert space.

Basis index layout: the system bit is the most significant bit, followed by
environment bits 1..N; bit value 0 means spin up. The Hamiltonian is diagonal
in this basis, so it is never built as a matrix: each amplitude picks up
exp(-i E t) with

    E = sum_i s * e_i * g_i / 2,   s, e_i = +1 (up) or -1 (down).

Nothing here uses the product formulas of the engine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    EnvironmentRealization,
    ObservableSpec,
    SystemCoefficients,
    NORM_TOL,
)

N_MAX = 14


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class FullState:
    amplitudes: np.ndarray
    n_env: int
    system: SystemCoefficients

    def __post_init__(self):
        if self.amplitudes.shape != (2 ** (self.n_env + 1),):
            raise OracleError("amplitude vector has the wrong dimension")
        norm = np.vdot(self.amplitudes, self.amplitudes).real
        if abs(norm - 1.0) > NORM_TOL:
            raise OracleError(f"state is not normalized: {norm!r}")

    @property
    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def up_slice(self) -> np.ndarray:
        return self.amplitudes[: 2**self.n_env]

    def down_slice(self) -> np.ndarray:
        return self.amplitudes[2**self.n_env:]


def _check_size(n: int, n_max: int):
    if n > n_max:
        raise OracleError(f"oracle limited to N <= {n_max}, got N = {n}")


def _particle_vector(p) -> np.ndarray:
    return np.array([p.alpha, p.beta], dtype=complex)


def build_initial(sys: SystemCoefficients, env: EnvironmentRealization, n_max: int = N_MAX) -> FullState:
    _check_size(env.n, n_max)
    psi = np.array([sys.a, sys.b], dtype=complex)
    for p in env.particles:
        psi = np.kron(psi, _particle_vector(p))
    return FullState(psi, env.n, sys)


def energies(env: EnvironmentRealization) -> np.ndarray:
    """Diagonal of H over all 2^(N+1) basis states."""
    n = env.n
    idx = np.arange(2 ** (n + 1))
    s = 1 - 2 * ((idx >> n) & 1)
    total = np.zeros(idx.shape, dtype=float)
    for i, p in enumerate(env.particles):
        e_i = 1 - 2 * ((idx >> (n - 1 - i)) & 1)
        # S_S (x) 2 g_i S_i with S = +-1/2
        total += (0.5 * s) * (2.0 * p.g) * (0.5 * e_i)
    return total


def evolve(state: FullState, env: EnvironmentRealization, t: float) -> FullState:
    if env.n != state.n_env:
        raise OracleError("environment size does not match state")
    phases = np.exp(-1j * energies(env) * float(t))
    return FullState(state.amplitudes * phases, state.n_env, state.system)


def branch_overlap(state: FullState) -> complex:
    """<E_down(t)|E_up(t)> from the conditional slices.

    The raw slices are a|E_up> and b|E_down>; their inner product is divided
    by conj(b)*a, not renormalized, to avoid cancellation for small |a|.
    """
    a, b = state.system.a, state.system.b
    if a == 0 or b == 0:
        raise OracleError("a branch vanishes (a = 0 or b = 0); r(t) is undefined")
    return complex(np.vdot(state.down_slice(), state.up_slice()) / (b.conjugate() * a))


def reduced_system_matrix(state: FullState) -> np.ndarray:
    """Partial trace over the environment; rows/columns ordered (up, down)."""
    psi = state.amplitudes.reshape(2, 2**state.n_env)
    return psi @ psi.conj().T


def oracle_expectation(state: FullState, obs: ObservableSpec) -> complex:
    """<psi| O_S (x) I_E |psi> summed over every amplitude."""
    psi = state.amplitudes.reshape(2, 2**state.n_env)
    o = obs.matrix()
    acted = o @ psi
    return complex(np.vdot(psi.ravel(), acted.ravel()))


def factored_up_branch(env: EnvironmentRealization, t: float) -> np.ndarray:
    """|E_up(t)> built as a tensor product of rotated single-particle states."""
    v = np.array([1.0 + 0j])
    for p in env.particles:
        ph = np.exp(-0.5j * p.g * t)
        v = np.kron(v, np.array([p.alpha * ph, p.beta / ph]))
    return v
