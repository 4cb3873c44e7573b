"""Ideal coined quantum walk on a circle in phase space.

One step is ``E (I_w (x) C)``: flip the coin with ``C`` (Hadamard by
default), then rotate the walker phase by ``+delta_theta`` on coin |0>
and ``-delta_theta`` on coin |1> via ``E = exp(i n sigma_z delta_theta)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .quantum_core import (
    StateVector,
    UnitaryOperator,
    coherent_state,
    phase_basis,
    tensor,
)

BALANCED_COIN = (1 / math.sqrt(2), 1j / math.sqrt(2))


@dataclass(frozen=True)
class IdealWalkConfig:
    """Ideal walk setup.

    The walker starts in ``|alpha>`` unless ``phase_index`` is set, in
    which case it starts in the phase state ``|theta_k>`` of the
    ``fock_dim``-point grid.
    """

    delta_theta: float = 0.3
    steps: int = 25
    fock_dim: int = 64
    alpha: complex = 3.0
    phase_index: int | None = None
    coin: tuple[complex, complex] = BALANCED_COIN

    def __post_init__(self):
        if not 0 < self.delta_theta < math.pi:
            raise ValueError(f"delta_theta must lie in (0, pi), got {self.delta_theta}")
        if self.steps < 0:
            raise ValueError(f"steps must be >= 0, got {self.steps}")
        if self.fock_dim < 1:
            raise ValueError(f"fock_dim must be >= 1, got {self.fock_dim}")
        c0, c1 = (complex(c) for c in self.coin)
        if abs(abs(c0) ** 2 + abs(c1) ** 2 - 1) > 1e-12:
            raise ValueError(f"coin amplitudes {self.coin} are not normalized")

    def initial_state(self) -> StateVector:
        coin = np.array(self.coin, dtype=complex)
        if self.phase_index is None:
            return coherent_state(self.alpha, self.fock_dim, coin)
        walker = phase_basis(self.fock_dim)[:, self.phase_index % self.fock_dim]
        return StateVector(np.kron(walker, coin), self.fock_dim, 2)


def hadamard_coin() -> UnitaryOperator:
    return UnitaryOperator(np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2), "H")


def conditional_phase(delta_theta: float, fock_dim: int) -> UnitaryOperator:
    """Diagonal ``exp(i n sigma_z delta_theta)`` on the walker (x) coin space."""
    n = np.arange(fock_dim)
    diag = np.exp(1j * delta_theta * np.kron(n, [1, -1]))
    return UnitaryOperator(np.diag(diag), "E")


def step_unitary(delta_theta: float, fock_dim: int, coin: UnitaryOperator | None = None) -> UnitaryOperator:
    coin = hadamard_coin() if coin is None else coin
    identity = UnitaryOperator(np.eye(fock_dim, dtype=complex), "I_w")
    return conditional_phase(delta_theta, fock_dim) @ tensor(identity, coin)


def run_ideal(config: IdealWalkConfig, coin: UnitaryOperator | None = None) -> list[StateVector]:
    """States after steps ``0..config.steps``."""
    state = config.initial_state()
    step = step_unitary(config.delta_theta, config.fock_dim, coin)
    states = [state]
    for _ in range(config.steps):
        state = step.apply(state)
        states.append(state)
    return states


def oracle_step(state: StateVector, delta_theta: float) -> StateVector:
    """One Hadamard-coined step done amplitude by amplitude, no matrices."""
    if state.coin_dim != 2:
        raise ValueError("oracle_step needs a state with a coin")
    src = state.amplitudes
    out = [0j] * src.size
    r = 1 / math.sqrt(2)
    for n in range(state.fock_dim):
        up, down = complex(src[2 * n]), complex(src[2 * n + 1])
        out[2 * n] = r * (up + down) * cmath.exp(1j * n * delta_theta)
        out[2 * n + 1] = r * (up - down) * cmath.exp(-1j * n * delta_theta)
    return state.with_amplitudes(np.array(out))
