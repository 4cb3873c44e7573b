"""Run configured experiments and write their result files.

Every run directory holds:

``distributions.csv``
    header ``theta,step_0,...,step_N``; one row per grid angle.
``sigma.csv``
    header ``step,time,sigma``; ``time`` is ns for the cqed engine and the
    step count otherwise.
``fit.json``
    ``{"zeta", "xi", "window", "residual_rms"}`` (or ``"error"`` when the
    window holds fewer than three points).
``manifest.json``
    ``{"manifest_version": 1, "config": {...}, "derived": {...}}``; the
    ``config`` object is the fully resolved configuration and can be
    loaded back with :func:`phasewalk.config.load_config`.

Sweeps write one such directory per value (``<parameter>=<value>``) plus
``sweep.json`` listing each point's fit.  CSV numbers carry 17
significant digits.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import analysis, cqed_walk, ideal_walk
from .config import ExperimentConfig
from .quantum_core import coherent_state

MANIFEST_VERSION = 1


@dataclass
class RunResult:
    config: ExperimentConfig
    distributions: list[analysis.PhaseDistribution]
    sigmas: list[float]
    times: list[float]
    fit: analysis.FitResult | None
    fit_error: str | None
    derived: dict

    def fit_dict(self) -> dict:
        if self.fit is None:
            return {"zeta": None, "xi": None, "window": [], "residual_rms": None, "error": self.fit_error}
        return self.fit.as_dict()


def _initial(cfg: ExperimentConfig):
    return coherent_state(cfg.walk.alpha, cfg.fock_dim, np.array(cfg.walk.coin, dtype=complex))


def _run_ideal(cfg: ExperimentConfig):
    states = ideal_walk.run_ideal(cfg.ideal_config())
    dists, sigmas = analysis.spreading(states, cfg.grid, renormalize=cfg.grid != cfg.fock_dim)
    derived = {
        "initial_leakage": states[0].leakage,
        "mean_n": cqed_walk.mean_photon_numbers(states),
    }
    return dists, sigmas, [float(k) for k in range(len(states))], derived


def _run_cqed(cfg: ExperimentConfig):
    p = cfg.cqed_params()
    w = cfg.walk
    initial = _initial(cfg)
    if cfg.cqed.compensate:
        states, schedules = cqed_walk.run_cqed_compensated(p, w.delta_theta, w.steps, initial, cfg.cqed.coin_angle)
        angles = cqed_walk.frame_angles(p, schedules)
        times = np.concatenate([[0.0], np.cumsum([s.step_duration for s in schedules])]).tolist()
        schedule_info = {"compensated": True, "schedules": [s.as_dict() for s in schedules]}
    else:
        schedule = cqed_walk.make_schedule(p, w.delta_theta, cfg.cqed.coin_angle)
        states = cqed_walk.run_cqed(p, schedule, w.steps, initial)
        angles = cqed_walk.frame_angles(p, schedule, w.steps)
        times = [k * schedule.step_duration for k in range(w.steps + 1)]
        schedule_info = {"compensated": False, "schedule": schedule.as_dict()}
    dists, sigmas = analysis.spreading(
        states, cfg.grid, frame_angles=angles, renormalize=cfg.grid != cfg.fock_dim
    )
    derived = {
        "omega_d": p.omega_d,
        **p.derived(),
        **schedule_info,
        "initial_leakage": initial.leakage,
        "frame_angles": angles,
        "mean_n": cqed_walk.mean_photon_numbers(states),
    }
    return dists, sigmas, times, derived


def _run_classical(cfg: ExperimentConfig):
    w = cfg.walk
    dists = [analysis.classical_rw_distribution(k, w.delta_theta, cfg.grid) for k in range(w.steps + 1)]
    sigmas = [analysis.circular_std(d, 0.0) for d in dists]
    return dists, sigmas, [float(k) for k in range(w.steps + 1)], {}


ENGINES = {"ideal": _run_ideal, "cqed": _run_cqed, "classical": _run_classical}


def run_single(cfg: ExperimentConfig) -> RunResult:
    dists, sigmas, times, derived = ENGINES[cfg.engine](cfg)
    fit, fit_error = None, None
    try:
        fit = analysis.fit_power_law(list(enumerate(sigmas)), cfg.analysis.fit_window)
    except analysis.FitDomainError as exc:
        fit_error = str(exc)
    return RunResult(cfg, dists, sigmas, times, fit, fit_error, derived)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_run(result: RunResult, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = result.distributions[0].grid
    header = ["theta"] + [f"step_{k}" for k in range(len(result.distributions))]
    table = np.column_stack([grid] + [d.probs for d in result.distributions])
    lines = [",".join(header)] + [",".join(_fmt(v) for v in row) for row in table]
    (out_dir / "distributions.csv").write_text("\n".join(lines) + "\n")

    lines = ["step,time,sigma"] + [
        f"{k},{_fmt(t)},{_fmt(s)}" for k, (t, s) in enumerate(zip(result.times, result.sigmas))
    ]
    (out_dir / "sigma.csv").write_text("\n".join(lines) + "\n")

    _write_json(out_dir / "fit.json", result.fit_dict())
    manifest = {
        "manifest_version": MANIFEST_VERSION,
        "config": result.config.to_dict(),
        "derived": result.derived,
    }
    _write_json(out_dir / "manifest.json", manifest)


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _point_dir(parameter: str, value) -> str:
    return f"{parameter}={value!r}".replace(" ", "")


def run_experiment(cfg: ExperimentConfig, out_dir: str | Path | None = None, max_workers: int = 4):
    """Run a config (single run or sweep) and write its result files.

    Returns the :class:`RunResult` of a single run, or a list of them for a
    sweep, in sweep order.
    """
    out = Path(out_dir if out_dir is not None else cfg.output.dir)
    if cfg.sweep is None:
        result = run_single(cfg)
        write_run(result, out)
        return result
    points = [cfg.with_value(cfg.sweep.parameter, v) for v in cfg.sweep.values]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        results = list(pool.map(run_single, points))
    summary = []
    for value, result in zip(cfg.sweep.values, results):
        name = _point_dir(cfg.sweep.parameter, value)
        write_run(result, out / name)
        summary.append({"value": value if not isinstance(value, complex) else [value.real, value.imag],
                        "dir": name, "fit": result.fit_dict()})
    _write_json(out / "sweep.json", {
        "parameter": cfg.sweep.parameter,
        "config": cfg.to_dict(),
        "points": summary,
    })
    return results


def refit(sigma_csv: str | Path, window) -> analysis.FitResult:
    """Fit an existing ``sigma.csv`` with a new step window."""
    rows = Path(sigma_csv).read_text().strip().splitlines()
    if not rows or rows[0].strip() != "step,time,sigma":
        raise ValueError(f"{sigma_csv}: expected header 'step,time,sigma'")
    points = []
    for line in rows[1:]:
        step, _, sigma = line.split(",")
        points.append((int(step), float(sigma)))
    return analysis.fit_power_law(points, window)


def validate_dispersive(cfg: ExperimentConfig) -> dict:
    """Dispersive-regime report: g/|delta| against the threshold and, when
    allowed to run, the one-step fidelity of the effective model."""
    c = cfg.cqed
    p = replace(cfg, cqed=replace(c, allow_nondispersive=True)).cqed_params()
    ratio = p.dispersive_ratio
    passed = p.is_dispersive
    report = {
        "g_over_delta": ratio,
        "threshold": cqed_walk.DISPERSIVE_RATIO,
        "passed": passed,
        "regime_violated": not passed,
        "override": c.allow_nondispersive,
        "fidelity": None,
    }
    if not passed and not c.allow_nondispersive:
        report["status"] = "fail"
        return report
    schedule = cqed_walk.make_schedule(p, cfg.walk.delta_theta, c.coin_angle)
    fid = cqed_walk.dispersive_fidelity(p, schedule, _initial(cfg))
    report.update(
        fidelity=fid.fidelity,
        raw_fidelity=fid.raw_fidelity,
        global_phase=fid.global_phase,
        rotation_angle=fid.rotation_angle,
        schedule=schedule.as_dict(),
        status="pass" if passed else "regime violated",
    )
    return report
