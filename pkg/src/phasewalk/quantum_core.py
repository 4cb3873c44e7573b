"""Dense linear algebra on the truncated Fock (x) coin space.

Composite states and operators use a fixed ordering: the walker (Fock)
index is slow and the coin index is fast, so the amplitude of
``|n> (x) |c>`` lives at flat index ``n * coin_dim + c``.

Frequencies handed to this module are angular (rad/ns) and times are ns.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

NORM_TOL = 1e-9
HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-9
LEAKAGE_TOL = 1e-6


class TruncationError(ValueError):
    """Fock truncation drops more probability than allowed."""


class DimensionError(ValueError):
    pass


class NumericalError(RuntimeError):
    pass


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class StateVector:
    """Normalized pure state of the walker (and optionally the coin).

    ``leakage`` records the probability discarded by Fock truncation when
    the state was built (zero unless it came from :func:`coherent_state`).
    """

    amplitudes: np.ndarray
    fock_dim: int
    coin_dim: int = 2
    leakage: float = field(default=0.0, compare=False)

    def __post_init__(self):
        amps = _frozen(self.amplitudes).reshape(-1)
        object.__setattr__(self, "amplitudes", amps)
        if self.fock_dim < 1:
            raise DimensionError(f"fock_dim must be >= 1, got {self.fock_dim}")
        if self.coin_dim not in (1, 2):
            raise DimensionError(f"coin_dim must be 1 or 2, got {self.coin_dim}")
        if amps.size != self.fock_dim * self.coin_dim:
            raise DimensionError(
                f"{amps.size} amplitudes for fock_dim={self.fock_dim}, "
                f"coin_dim={self.coin_dim}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm!r} deviates from 1")

    @property
    def dim(self) -> int:
        return self.fock_dim * self.coin_dim

    def as_grid(self) -> np.ndarray:
        """Amplitudes reshaped to ``(fock_dim, coin_dim)``."""
        return self.amplitudes.reshape(self.fock_dim, self.coin_dim)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def expectation(self, op: "HermitianOperator | np.ndarray") -> float:
        m = op.matrix if isinstance(op, (HermitianOperator, UnitaryOperator)) else op
        return float(np.real(np.vdot(self.amplitudes, m @ self.amplitudes)))

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def with_amplitudes(self, amplitudes: np.ndarray) -> "StateVector":
        return StateVector(amplitudes, self.fock_dim, self.coin_dim)


@dataclass(frozen=True)
class HermitianOperator:
    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"operator must be square, got shape {m.shape}")
        resid = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        if resid > HERMITIAN_TOL:
            raise ValueError(f"operator {self.label!r} not Hermitian (residual {resid:.3e})")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        return HermitianOperator(self.matrix + other.matrix, f"{self.label}+{other.label}")

    def scaled(self, factor: float, label: str | None = None) -> "HermitianOperator":
        return HermitianOperator(float(factor) * self.matrix, label or self.label)

    def apply(self, state: StateVector) -> np.ndarray:
        # A Hermitian operator does not map states to states; return raw amplitudes.
        _check_dims(self.dim, state)
        return self.matrix @ state.amplitudes


@dataclass(frozen=True)
class UnitaryOperator:
    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"operator must be square, got shape {m.shape}")
        dev = unitarity_defect(m)
        if dev > UNITARY_TOL:
            raise NumericalError(f"operator {self.label!r} not unitary (max|U^dag U - I| = {dev:.3e})")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other: "UnitaryOperator") -> "UnitaryOperator":
        if not isinstance(other, UnitaryOperator):
            return NotImplemented
        if other.dim != self.dim:
            raise DimensionError(f"cannot compose {self.dim}x{self.dim} with {other.dim}x{other.dim}")
        return UnitaryOperator(self.matrix @ other.matrix, f"{self.label}*{other.label}")

    def apply(self, state: StateVector) -> StateVector:
        _check_dims(self.dim, state)
        return state.with_amplitudes(self.matrix @ state.amplitudes)

    def dagger(self) -> "UnitaryOperator":
        return UnitaryOperator(self.matrix.conj().T, f"{self.label}^dag")


def _check_dims(dim: int, state: StateVector) -> None:
    if state.dim != dim:
        raise DimensionError(f"operator dim {dim} does not match state dim {state.dim}")


def unitarity_defect(matrix: np.ndarray) -> float:
    """``max |U^dag U - I|`` entrywise."""
    matrix = np.asarray(matrix)
    return float(np.max(np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[0]))))


def coherent_state(alpha: complex, fock_dim: int, coin: np.ndarray | None = None) -> StateVector:
    """Truncated coherent state ``|alpha>``, renormalized after truncation.

    If ``coin`` is given the result is ``|alpha> (x) coin``.  Raises
    :class:`TruncationError` when the discarded Poisson tail exceeds
    ``LEAKAGE_TOL``.
    """
    if fock_dim < 1:
        raise DimensionError(f"fock_dim must be >= 1, got {fock_dim}")
    alpha = complex(alpha)
    c = np.empty(fock_dim, dtype=complex)
    c[0] = np.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, fock_dim):
        c[n] = c[n - 1] * alpha / np.sqrt(n)
    leakage = max(0.0, 1.0 - float(np.sum(np.abs(c) ** 2)))
    if leakage > LEAKAGE_TOL:
        raise TruncationError(
            f"coherent state alpha={alpha} loses {leakage:.3e} probability at "
            f"fock_dim={fock_dim}; increase fock_dim"
        )
    c /= np.linalg.norm(c)
    if coin is None:
        return StateVector(c, fock_dim, 1, leakage=leakage)
    coin = np.asarray(coin, dtype=complex)
    return StateVector(np.kron(c, coin), fock_dim, coin.size, leakage=leakage)


def fock_state(n: int, fock_dim: int, coin: np.ndarray | None = None) -> StateVector:
    if not 0 <= n < fock_dim:
        raise DimensionError(f"|{n}> outside truncation fock_dim={fock_dim}")
    c = np.zeros(fock_dim, dtype=complex)
    c[n] = 1.0
    if coin is None:
        return StateVector(c, fock_dim, 1)
    coin = np.asarray(coin, dtype=complex)
    return StateVector(np.kron(c, coin), fock_dim, coin.size)


def product_state(walker: StateVector, coin: np.ndarray) -> StateVector:
    if walker.coin_dim != 1:
        raise DimensionError("walker state already carries a coin")
    coin = np.asarray(coin, dtype=complex)
    return StateVector(np.kron(walker.amplitudes, coin), walker.fock_dim, coin.size)


def phase_basis(s: int, fock_dim: int | None = None) -> np.ndarray:
    """Matrix whose column k is the phase state |theta_k>, theta_k = 2 pi k / s.

    Rows index Fock number n < fock_dim (default s).
    """
    if s < 1:
        raise DimensionError(f"need s >= 1, got {s}")
    fock_dim = s if fock_dim is None else fock_dim
    n = np.arange(fock_dim)
    theta = 2 * np.pi * np.arange(s) / s
    return np.exp(1j * np.outer(n, theta)) / np.sqrt(s)


def phase_states(s: int) -> list[StateVector]:
    """The s orthonormal phase states on the s-dimensional walker space."""
    basis = phase_basis(s)
    return [StateVector(basis[:, k], s, 1) for k in range(s)]


@dataclass(frozen=True)
class LadderOps:
    """Walker ladder operators and coin Pauli matrices.

    Pauli matrices use the coin basis (|0>, |1>) with sigma_z|0> = +|0>;
    ``sigma_plus`` = |0><1| raises towards |0>.
    """

    a: np.ndarray
    a_dagger: np.ndarray
    n_op: np.ndarray
    sigma_x: np.ndarray
    sigma_y: np.ndarray
    sigma_z: np.ndarray
    sigma_plus: np.ndarray
    sigma_minus: np.ndarray

    def __getitem__(self, key: str) -> np.ndarray:
        return getattr(self, key)


def ladder_and_pauli(fock_dim: int) -> LadderOps:
    if fock_dim < 2:
        raise DimensionError(f"ladder operators need fock_dim >= 2, got {fock_dim}")
    a = np.diag(np.sqrt(np.arange(1, fock_dim, dtype=float)), 1).astype(complex)
    a_dag = a.conj().T
    sp = np.array([[0, 1], [0, 0]], dtype=complex)
    return LadderOps(
        a=a,
        a_dagger=a_dag,
        n_op=np.diag(np.arange(fock_dim, dtype=float)).astype(complex),
        sigma_x=np.array([[0, 1], [1, 0]], dtype=complex),
        sigma_y=np.array([[0, -1j], [1j, 0]], dtype=complex),
        sigma_z=np.array([[1, 0], [0, -1]], dtype=complex),
        sigma_plus=sp,
        sigma_minus=sp.T.copy(),
    )


def tensor(op_walker, op_coin, fock_dim: int | None = None, coin_dim: int | None = None):
    """Kronecker product ``op_walker (x) op_coin`` (walker slow, coin fast).

    Accepts two Hermitian operators, two unitaries, or raw arrays; the
    result has the same kind as the inputs.
    """
    kinds = {type(op_walker), type(op_coin)}
    mw = getattr(op_walker, "matrix", np.asarray(op_walker))
    mc = getattr(op_coin, "matrix", np.asarray(op_coin))
    if fock_dim is not None and mw.shape != (fock_dim, fock_dim):
        raise DimensionError(f"walker operator has shape {mw.shape}, expected fock_dim={fock_dim}")
    if coin_dim is not None and mc.shape != (coin_dim, coin_dim):
        raise DimensionError(f"coin operator has shape {mc.shape}, expected coin_dim={coin_dim}")
    product = np.kron(mw, mc)
    if kinds == {HermitianOperator}:
        return HermitianOperator(product, f"{op_walker.label}(x){op_coin.label}")
    if kinds == {UnitaryOperator}:
        return UnitaryOperator(product, f"{op_walker.label}(x){op_coin.label}")
    if kinds & {HermitianOperator, UnitaryOperator}:
        raise TypeError("tensor operands must be of the same kind")
    return product


def propagator(H: HermitianOperator, t: float) -> UnitaryOperator:
    """``exp(-i H t)`` via the eigendecomposition of Hermitian ``H``."""
    m = H.matrix
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"eigh failed for {H.label!r}: dim={H.dim}, "
            f"max|H|={np.max(np.abs(m)):.3e}, finite={np.isfinite(m).all()}"
        ) from exc
    u = (v * np.exp(-1j * w * t)) @ v.conj().T
    return UnitaryOperator(u, f"exp(-i {H.label} t)")


def rotate_walker(state: StateVector, angle: float) -> StateVector:
    """Rigidly rotate the walker phase by ``angle``: applies exp(i n angle)."""
    phases = np.exp(1j * np.arange(state.fock_dim) * angle)
    grid = state.as_grid() * phases[:, None]
    return state.with_amplitudes(grid.reshape(-1))
