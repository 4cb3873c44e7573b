"""Circuit-QED walk: a driven qubit dispersively coupled to a resonator.

All user-facing frequencies are linear frequencies in GHz (the value of
``f = omega / 2 pi``); Hamiltonians are assembled in angular units
(rad/ns) and durations are in ns.

The drive frame rotates at ``omega_d`` for both the qubit and the field.
Each walk step is a drive-on segment (coin rotation through the sigma_x
term) followed by a drive-off segment (conditional phase through
chi n sigma_z).  Both segments use the full effective Hamiltonian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize_scalar

from .quantum_core import (
    HermitianOperator,
    StateVector,
    UnitaryOperator,
    ladder_and_pauli,
    propagator,
)

TWO_PI = 2 * math.pi
DISPERSIVE_RATIO = 0.1
DRIVE_ON = "drive_on"
DRIVE_OFF = "drive_off"


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class QubitCircuitParams:
    E_c: float
    N_g: float
    Delta_t: float

    def __post_init__(self):
        if not 0 <= self.N_g <= 1:
            raise ConfigurationError(f"N_g must lie in [0, 1], got {self.N_g}")
        if self.E_c <= 0:
            raise ConfigurationError(f"E_c must be > 0, got {self.E_c}")
        if self.Delta_t < 0:
            raise ConfigurationError(f"Delta_t must be >= 0, got {self.Delta_t}")


def qubit_splitting(p: QubitCircuitParams) -> float:
    """Qubit splitting sqrt(E_c^2 (1 - 2 N_g)^2 + 4 Delta^2), same units as inputs."""
    return math.sqrt(p.E_c**2 * (1 - 2 * p.N_g) ** 2 + 4 * p.Delta_t**2)


@dataclass(frozen=True)
class CqedParams:
    """Device and drive parameters (GHz, linear frequency).

    ``omega_d`` defaults to the qubit splitting ``omega_q``.
    """

    omega_c: float = 0.5
    omega_q: float = 0.7
    g: float = 0.01
    omega_d: float | None = None
    epsilon: float = 0.01
    fock_dim: int = 64
    allow_nondispersive: bool = False

    def __post_init__(self):
        if self.omega_d is None:
            object.__setattr__(self, "omega_d", self.omega_q)
        for name in ("omega_c", "omega_q", "omega_d"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.g < 0 or self.epsilon < 0:
            raise ConfigurationError("g and epsilon must be >= 0")
        if self.fock_dim < 2:
            raise ConfigurationError(f"fock_dim must be >= 2, got {self.fock_dim}")
        if self.omega_q == self.omega_c:
            raise ConfigurationError("omega_q == omega_c: detuning is zero, dispersive shift undefined")
        if not self.allow_nondispersive and not self.is_dispersive:
            raise ConfigurationError(
                f"g/|delta| = {self.dispersive_ratio:.3g} exceeds {DISPERSIVE_RATIO}; "
                "set allow_nondispersive to run anyway"
            )

    @property
    def delta(self) -> float:
        return self.omega_q - self.omega_c

    @property
    def delta1(self) -> float:
        return self.omega_d - self.omega_q

    @property
    def delta2(self) -> float:
        return self.omega_d - self.omega_c

    @property
    def chi(self) -> float:
        return self.g**2 / self.delta

    @property
    def omega2(self) -> float:
        if self.delta2 == 0:
            raise ConfigurationError("omega_d == omega_c: drive-induced qubit Rabi rate undefined")
        return 2 * self.g * self.epsilon / self.delta2

    @property
    def dispersive_ratio(self) -> float:
        return self.g / abs(self.delta)

    @property
    def is_dispersive(self) -> bool:
        return abs(self.delta) >= self.g / DISPERSIVE_RATIO

    def derived(self) -> dict:
        out = {
            "delta": self.delta,
            "delta1": self.delta1,
            "delta2": self.delta2,
            "chi": self.chi,
            "dispersive_ratio": self.dispersive_ratio,
        }
        if self.delta2 != 0:
            out["omega2"] = self.omega2
        return out


@dataclass(frozen=True)
class Segment:
    kind: str
    duration: float


@dataclass(frozen=True)
class PulseSchedule:
    """Segments of one walk step, plus the quantities they were built from.

    ``omega_d`` is the drive frequency the segments assume (GHz).
    """

    segments: tuple[Segment, ...]
    t_pulse: float
    t_free: float
    nominal_delta_theta: float
    omega_d: float
    coin_angle: float = math.pi / 4

    def __post_init__(self):
        for seg in self.segments:
            if not seg.duration > 0:
                raise ConfigurationError(f"segment {seg.kind} has non-positive duration {seg.duration}")
            if seg.kind not in (DRIVE_ON, DRIVE_OFF):
                raise ConfigurationError(f"unknown segment kind {seg.kind!r}")

    @property
    def step_duration(self) -> float:
        return sum(seg.duration for seg in self.segments)

    def as_dict(self) -> dict:
        return {
            "segments": [{"kind": s.kind, "duration": s.duration} for s in self.segments],
            "t_pulse": self.t_pulse,
            "t_free": self.t_free,
            "nominal_delta_theta": self.nominal_delta_theta,
            "omega_d": self.omega_d,
            "coin_angle": self.coin_angle,
        }


@lru_cache(maxsize=8)
def _operators(fock_dim: int) -> dict[str, np.ndarray]:
    ops = ladder_and_pauli(fock_dim)
    eye_w = np.eye(fock_dim)
    eye_c = np.eye(2)
    mats = {
        "n": np.kron(ops.n_op, eye_c),
        "x_field": np.kron(ops.a + ops.a_dagger, eye_c),
        "sz": np.kron(eye_w, ops.sigma_z),
        "sx": np.kron(eye_w, ops.sigma_x),
        "n_sz": np.kron(ops.n_op, ops.sigma_z),
        "jc": np.kron(ops.a_dagger, ops.sigma_minus) + np.kron(ops.a, ops.sigma_plus),
    }
    for m in mats.values():
        m.setflags(write=False)
    return mats


def build_jc(p: CqedParams) -> HermitianOperator:
    """omega_c a^dag a + (Omega/2) sigma_z + g (a^dag sigma_- + a sigma_+), rad/ns."""
    o = _operators(p.fock_dim)
    m = TWO_PI * (p.omega_c * o["n"] + 0.5 * p.omega_q * o["sz"] + p.g * o["jc"])
    return HermitianOperator(m, "H_JC")


def build_rotating_full(p: CqedParams, epsilon: float | None = None) -> HermitianOperator:
    """Driven JC model in the frame rotating at omega_d (qubit and field).

    ``epsilon`` overrides ``p.epsilon`` (0 gives the drive-off Hamiltonian).
    """
    eps = p.epsilon if epsilon is None else epsilon
    o = _operators(p.fock_dim)
    m = TWO_PI * (
        (p.omega_c - p.omega_d) * o["n"]
        + 0.5 * (p.omega_q - p.omega_d) * o["sz"]
        + p.g * o["jc"]
        + eps * o["x_field"]
    )
    return HermitianOperator(m, "H_rot")


def build_effective(p: CqedParams, epsilon: float | None = None, displacement: bool = True) -> HermitianOperator:
    """Dispersive effective Hamiltonian in the drive frame, rad/ns.

    chi n sigma_z - (delta1/2) sigma_z - delta2 n + (Omega2/2) sigma_x + eps (a^dag + a)

    ``displacement=False`` drops the eps (a^dag + a) term only (test hook).
    """
    if not p.allow_nondispersive and not p.is_dispersive:
        raise ConfigurationError(f"not dispersive: g/|delta| = {p.dispersive_ratio:.3g}")
    eps = p.epsilon if epsilon is None else epsilon
    if p.delta2 == 0:
        raise ConfigurationError("omega_d == omega_c: delta2 = 0 in the effective Hamiltonian")
    omega2 = 2 * p.g * eps / p.delta2
    o = _operators(p.fock_dim)
    m = (
        p.chi * o["n_sz"]
        - 0.5 * p.delta1 * o["sz"]
        - p.delta2 * o["n"]
        + 0.5 * omega2 * o["sx"]
    )
    if displacement:
        m = m + eps * o["x_field"]
    return HermitianOperator(TWO_PI * m, "H_eff")


def make_schedule(p: CqedParams, delta_theta: float, coin_angle: float = math.pi / 4) -> PulseSchedule:
    """One step: drive on until (Omega2/2) t_pulse = coin_angle, then drive
    off until chi t_free = delta_theta (angular units)."""
    if p.epsilon <= 0:
        raise ConfigurationError("a coin pulse needs epsilon > 0")
    if p.chi <= 0:
        raise ConfigurationError(f"need chi > 0 (omega_q > omega_c, g > 0), got chi = {p.chi}")
    omega2 = TWO_PI * p.omega2
    if omega2 == 0:
        raise ConfigurationError("Omega2 vanishes; the drive cannot rotate the coin")
    chi = TWO_PI * p.chi
    t_pulse = 2 * coin_angle / abs(omega2)
    t_free = delta_theta / chi
    return PulseSchedule(
        segments=(Segment(DRIVE_ON, t_pulse), Segment(DRIVE_OFF, t_free)),
        t_pulse=t_pulse,
        t_free=t_free,
        nominal_delta_theta=chi * t_free,
        omega_d=p.omega_d,
        coin_angle=coin_angle,
    )


def compensated_drive_frequency(p: CqedParams, predicted_n: float) -> float:
    """Drive frequency tracking the photon-number shifted qubit line, Omega + 2 chi n."""
    if predicted_n < 0:
        raise ValueError(f"predicted_n must be >= 0, got {predicted_n}")
    return p.omega_q + 2 * p.chi * predicted_n


def compensated_schedule(
    p: CqedParams, delta_theta: float, predicted_n: float, coin_angle: float = math.pi / 4
) -> PulseSchedule:
    """Experimental: retune the drive to Omega + 2 chi n and re-time the pulse.

    This is one reading of "adjust the pulse to the predicted photon
    number"; it is not used by the default pipeline.
    """
    retuned = replace(p, omega_d=compensated_drive_frequency(p, predicted_n))
    return make_schedule(retuned, delta_theta, coin_angle)


def _segment_hamiltonian(p: CqedParams, kind: str, displacement: bool) -> HermitianOperator:
    eps = p.epsilon if kind == DRIVE_ON else 0.0
    return build_effective(p, eps, displacement)


def step_propagators(p: CqedParams, schedule: PulseSchedule, displacement: bool = True) -> list[UnitaryOperator]:
    """One propagator per schedule segment, in application order."""
    p = replace(p, omega_d=schedule.omega_d)
    cache: dict[tuple[str, float], UnitaryOperator] = {}
    out = []
    for seg in schedule.segments:
        key = (seg.kind, seg.duration)
        if key not in cache:
            cache[key] = propagator(_segment_hamiltonian(p, seg.kind, displacement), seg.duration)
        out.append(cache[key])
    return out


def run_cqed(
    p: CqedParams,
    schedule: PulseSchedule,
    steps: int,
    initial: StateVector,
    displacement: bool = True,
) -> list[StateVector]:
    """States after steps ``0..steps`` (drive-frame amplitudes)."""
    if initial.fock_dim != p.fock_dim or initial.coin_dim != 2:
        raise ValueError(
            f"initial state ({initial.fock_dim}x{initial.coin_dim}) does not match fock_dim={p.fock_dim} x coin"
        )
    segs = step_propagators(p, schedule, displacement)
    step = segs[0]
    for u in segs[1:]:
        step = u @ step
    states = [initial]
    state = initial
    for _ in range(steps):
        state = step.apply(state)
        states.append(state)
    return states


def run_cqed_compensated(
    p: CqedParams,
    delta_theta: float,
    steps: int,
    initial: StateVector,
    coin_angle: float = math.pi / 4,
) -> tuple[list[StateVector], list[PulseSchedule]]:
    """Experimental per-step retuning using <n> of the state entering each step."""
    n_op = _operators(p.fock_dim)["n"]
    states = [initial]
    schedules = []
    state = initial
    for _ in range(steps):
        schedule = compensated_schedule(p, delta_theta, state.expectation(n_op), coin_angle)
        for u in step_propagators(p, schedule):
            state = u.apply(state)
        states.append(state)
        schedules.append(schedule)
    return states, schedules


def frame_angles(p: CqedParams, schedules: list[PulseSchedule] | PulseSchedule, steps: int | None = None) -> list[float]:
    """Rigid walker rotation from the -delta2 n term accrued by each step.

    Accepts one schedule repeated ``steps`` times or a per-step list.
    """
    if isinstance(schedules, PulseSchedule):
        schedules = [schedules] * (steps or 0)
    angles = [0.0]
    for sch in schedules:
        delta2 = sch.omega_d - p.omega_c
        angles.append(angles[-1] + TWO_PI * delta2 * sch.step_duration)
    return angles


def mean_photon_numbers(states: list[StateVector]) -> list[float]:
    n_op = _operators(states[0].fock_dim)["n"]
    return [s.expectation(n_op) for s in states]


@dataclass(frozen=True)
class FidelityReport:
    fidelity: float
    raw_fidelity: float
    global_phase: float
    rotation_angle: float
    extra: dict = field(default_factory=dict)


def _evolve(hams: dict[str, HermitianOperator], schedule: PulseSchedule, state: StateVector) -> StateVector:
    for seg in schedule.segments:
        state = propagator(hams[seg.kind], seg.duration).apply(state)
    return state


def dispersive_fidelity(p: CqedParams, schedule: PulseSchedule, initial: StateVector) -> FidelityReport:
    """One-step overlap between the full rotating-frame model and the
    effective model, after optimizing a global phase and a uniform walker
    rotation exp(-i phi n) applied to the effective-model state."""
    p = replace(p, omega_d=schedule.omega_d)
    full = {DRIVE_ON: build_rotating_full(p), DRIVE_OFF: build_rotating_full(p, 0.0)}
    eff = {DRIVE_ON: build_effective(p), DRIVE_OFF: build_effective(p, 0.0)}
    psi_a = _evolve(full, schedule, initial).as_grid()
    psi_b = _evolve(eff, schedule, initial).as_grid()
    n = np.arange(p.fock_dim)

    def overlap(phi: float) -> complex:
        return complex(np.vdot(psi_a, psi_b * np.exp(-1j * phi * n)[:, None]))

    grid = np.linspace(-math.pi, math.pi, 73)
    coarse = [abs(overlap(phi)) for phi in grid]
    i = int(np.argmax(coarse))
    h = grid[1] - grid[0]
    res = minimize_scalar(
        lambda phi: -abs(overlap(phi)),
        bounds=(grid[i] - h, grid[i] + h),
        method="bounded",
        options={"xatol": 1e-10},
    )
    phi = float(res.x) if -res.fun >= coarse[i] else float(grid[i])
    ov = overlap(phi)
    return FidelityReport(
        fidelity=min(1.0, abs(ov) ** 2),
        raw_fidelity=min(1.0, abs(overlap(0.0)) ** 2),
        global_phase=float(np.angle(ov)),
        rotation_angle=phi,
    )
