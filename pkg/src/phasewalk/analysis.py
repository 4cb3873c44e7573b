"""Phase-space observables: reduced walker state, phase distribution,
circular spread, power-law fits and the classical random-walk baseline."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import binom

from .quantum_core import StateVector, phase_basis, rotate_walker

DEGENERATE_RESULTANT = 1e-12


class DegenerateMeanWarning(RuntimeWarning):
    """Circular mean undefined (resultant length ~ 0); spread taken about 0."""


class FitDomainError(ValueError):
    pass


@dataclass(frozen=True)
class PhaseDistribution:
    """Probabilities on the grid theta_j = 2 pi j / s, j = 0..s-1."""

    probs: np.ndarray
    s: int

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).copy()
        if p.shape != (self.s,):
            raise ValueError(f"expected {self.s} probabilities, got shape {p.shape}")
        if np.any(p < -1e-12):
            raise ValueError(f"negative probability {p.min():.3e}")
        p[p < 0] = 0.0
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def grid(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.s) / self.s

    def rolled(self, shift: int) -> "PhaseDistribution":
        """Rigid rotation by ``shift`` grid spacings."""
        return PhaseDistribution(np.roll(self.probs, shift), self.s)


@dataclass(frozen=True)
class FitResult:
    zeta: float
    xi: float
    window: tuple[int, ...]
    residual_rms: float

    def as_dict(self) -> dict:
        return {
            "zeta": self.zeta,
            "xi": self.xi,
            "window": list(self.window),
            "residual_rms": self.residual_rms,
        }


def reduce_walker(state: StateVector) -> np.ndarray:
    """Partial trace over the coin: ``rho_w = Tr_c |psi><psi|``."""
    if state.coin_dim != 2:
        raise ValueError("reduce_walker needs a walker (x) coin state")
    grid = state.as_grid()
    return grid @ grid.conj().T


def phase_distribution(rho_w: np.ndarray, s: int | None = None, renormalize: bool = False) -> PhaseDistribution:
    """``P(theta_j) = <theta_j| rho_w |theta_j>``.

    ``s`` defaults to the walker dimension, where the phase states resolve
    the identity and P sums to one.  Any other ``s`` requires
    ``renormalize=True``; the phase vectors are then truncated or
    zero-padded to the walker dimension and P is rescaled to unit sum.
    """
    rho_w = np.asarray(rho_w)
    dim = rho_w.shape[0]
    s = dim if s is None else s
    if s != dim and not renormalize:
        raise ValueError(f"grid s={s} differs from walker dim {dim}; pass renormalize=True")
    basis = phase_basis(s, dim)
    probs = np.real(np.einsum("nk,nm,mk->k", basis.conj(), rho_w, basis))
    if renormalize:
        probs = probs / probs.sum()
    return PhaseDistribution(probs, s)


def state_phase_distribution(state: StateVector, s: int | None = None, renormalize: bool = False) -> PhaseDistribution:
    """Same as ``phase_distribution(reduce_walker(state), s)`` without forming rho."""
    s = state.fock_dim if s is None else s
    if s != state.fock_dim and not renormalize:
        raise ValueError(f"grid s={s} differs from walker dim {state.fock_dim}; pass renormalize=True")
    basis = phase_basis(s, state.fock_dim)
    amps = basis.conj().T @ state.as_grid()
    probs = np.sum(np.abs(amps) ** 2, axis=1)
    if renormalize:
        probs = probs / probs.sum()
    return PhaseDistribution(probs, s)


def wrap(angle):
    """Wrap to (-pi, pi]."""
    wrapped = np.mod(np.asarray(angle, dtype=float) + np.pi, 2 * np.pi) - np.pi
    return np.where(wrapped == -np.pi, np.pi, wrapped)


def circular_mean(dist: PhaseDistribution) -> tuple[float, float]:
    """Mean direction and resultant length."""
    z = np.sum(dist.probs * np.exp(1j * dist.grid))
    return float(np.angle(z)), float(abs(z))


def circular_std(dist: PhaseDistribution, center: float | None = None) -> float:
    """Root-mean-square wrapped deviation about ``center``.

    With no ``center`` the circular mean is used; if that is undefined a
    :class:`DegenerateMeanWarning` is emitted and 0 is used instead.
    """
    if center is None:
        center, resultant = circular_mean(dist)
        if resultant < DEGENERATE_RESULTANT:
            warnings.warn("resultant length ~0, spread taken about 0", DegenerateMeanWarning, stacklevel=2)
            center = 0.0
    d = wrap(dist.grid - center)
    return float(math.sqrt(np.sum(dist.probs * d * d)))


def spreading(
    states: Sequence[StateVector],
    s: int | None = None,
    frame_angles: Sequence[float] | None = None,
    renormalize: bool = False,
) -> tuple[list[PhaseDistribution], list[float]]:
    """Phase distributions and spreads along a trajectory.

    ``frame_angles[k]`` is a rigid rotation accrued by step k that is not
    part of the walk (e.g. the drive-frame drift); it is undone before the
    distribution is taken.  Spreads are measured about the circular mean
    of the initial distribution, so the two lobes of the walk are tracked
    continuously after they pass +-pi/2 and through the wrap-around.
    """
    dists = []
    for k, state in enumerate(states):
        if frame_angles is not None:
            state = rotate_walker(state, -frame_angles[k])
        dists.append(state_phase_distribution(state, s, renormalize))
    center, _ = circular_mean(dists[0])
    return dists, [circular_std(d, center) for d in dists]


def _select(points: Iterable[tuple[float, float]], window) -> list[tuple[float, float]]:
    pts = sorted((float(t), float(sig)) for t, sig in points)
    if window is None:
        return pts
    start, stop, *rest = window
    stride = rest[0] if rest else 1
    return [
        (t, sig)
        for t, sig in pts
        if start <= t <= stop and abs((t - start) / stride - round((t - start) / stride)) < 1e-9
    ]


def fit_power_law(sigmas: Iterable[tuple[float, float]], window=None) -> FitResult:
    """Least-squares fit of ``ln sigma = zeta ln t + xi``.

    ``window`` is ``(start, stop)`` or ``(start, stop, stride)`` over the
    step axis, inclusive; ``None`` uses every point.
    """
    pts = _select(sigmas, window)
    if len(pts) < 3:
        raise FitDomainError(f"need at least 3 points in window {window}, got {len(pts)}")
    t = np.array([p[0] for p in pts])
    sig = np.array([p[1] for p in pts])
    if np.any(t <= 0) or np.any(sig <= 0):
        raise FitDomainError("power-law fit needs t > 0 and sigma > 0 in the window")
    x, y = np.log(t), np.log(sig)
    A = np.column_stack([x, np.ones_like(x)])
    (zeta, xi), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (zeta * x + xi)
    used = tuple(int(v) if float(v).is_integer() else v for v in t)
    return FitResult(float(zeta), float(xi), used, float(math.sqrt(np.mean(resid**2))))


def classical_rw_distribution(steps: int, delta_theta: float, s: int) -> PhaseDistribution:
    """Exact wrapped binomial distribution of a +-delta_theta random walk.

    Each endpoint (2k - steps) delta_theta is assigned to its nearest grid
    point; a point exactly halfway between two grid points is split evenly.
    """
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    probs = np.zeros(s)
    spacing = 2 * np.pi / s
    weights = binom.pmf(np.arange(steps + 1), steps, 0.5)
    for k, w in enumerate(weights):
        x = ((2 * k - steps) * delta_theta) / spacing
        lo = math.floor(x)
        frac = x - lo
        if abs(frac - 0.5) < 1e-12:
            probs[lo % s] += w / 2
            probs[(lo + 1) % s] += w / 2
        else:
            probs[round(x) % s] += w
    return PhaseDistribution(probs, s)


def local_maxima(dist: PhaseDistribution, rel_height: float = 0.25) -> list[int]:
    """Indices of circular local maxima at least ``rel_height`` times the global max.

    Flat-topped peaks count once (at their first index).
    """
    p = dist.probs
    left = np.roll(p, 1)
    right = np.roll(p, -1)
    peaks = np.flatnonzero((p > left) & (p >= right) & (p >= rel_height * p.max()))
    return peaks.tolist()


def total_variation(p: PhaseDistribution, q: PhaseDistribution) -> float:
    return 0.5 * float(np.sum(np.abs(p.probs - q.probs)))
