"""Experiment orchestration and CSV emission.

Each runner produces one CSV (deterministic row order, '#'-prefixed
metadata lines carrying the config hash and seed, byte-identical across
reruns of the same config) plus a JSON manifest with runtime details.
Trial randomness is derived from SeedSequence entropy tuples (seed plus
task indices), so any subset of the work can be redone independently and
lands on the same numbers.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .ao import SolveReport, ao_solve, initialize
from .channel import Geometry, build_geometry, generate_channels
from .config import ExperimentConfig, SystemConfig, config_hash, config_to_dict
from .system_model import beam_gain_matrix, beampattern, effective_channels

GAIN_MATRIX_HEADER = ["row", "eta", "i", "k", "F_ik", "dominance_ratio"]
BEAMPATTERN_HEADER = ["eta", "azimuth_deg", "gain_linear", "gain_db"]
TRADEOFF_HEADER = [
    "architecture",
    "eta",
    "mean_rate",
    "mean_sensing_gain",
    "std_rate",
    "std_gain",
    "trials",
    "mean_sensing_gain_db",
]


def trial_rng(*entropy: int) -> np.random.Generator:
    """Deterministic per-task generator from an integer entropy tuple."""
    return np.random.default_rng(np.random.SeedSequence(entropy))


def azimuth_grid_deg(cfg: ExperimentConfig) -> np.ndarray:
    """Inclusive azimuth sweep grid in degrees."""
    n = int(round((cfg.azimuth_stop_deg - cfg.azimuth_start_deg) / cfg.azimuth_step_deg))
    return cfg.azimuth_start_deg + cfg.azimuth_step_deg * np.arange(n + 1)


def _reference_scales(cfg: ExperimentConfig, geometry: Geometry) -> tuple[float, float, float]:
    """Gain targets and natural target-link amplitude of a reference init.

    Computed once per experiment on the shared geometry so every chain,
    weight and architecture is measured against the same target pair.
    """
    system = dataclasses.replace(cfg.system, architecture="fbd")
    rng = trial_rng(system.seed, 0xE7A)
    channels = generate_channels(system, rng, geometry)
    W0, phase0, _, targets = initialize(system, channels, rng)
    natural = float(
        np.mean(np.abs(channels.f_target.conj() @ phase0.matrix @ channels.G @ W0))
    )
    return targets.C, targets.p_t, natural


def tradeoff_etas(cfg: ExperimentConfig, geometry: Geometry | None = None) -> np.ndarray:
    """Weight grid resolving the communication/sensing transition.

    The two objective terms live on very different energy scales: user
    links carry path loss while the target link is a unit-norm steering
    vector, so their balance point sits within a factor-of-ten of
    eta = 1 - comm_scale / sens_scale rather than mid-interval. The
    default grid is therefore geometric in (1 - eta), spanning one
    decade below to three decades above the balance decade estimated
    from a reference initialization, with eta = 1 appended. A uniform
    grid would put every point on the sensing-dominated plateau.
    """
    if geometry is None:
        geometry = build_geometry(cfg.system, trial_rng(cfg.system.seed, 0xE7A))
    C, p_t, natural = _reference_scales(cfg, geometry)
    k = cfg.system.k_users
    comm_scale = k * k * C ** 2
    sens_scale = k * max(p_t - natural, 0.1 * p_t) ** 2
    d_star = max(math.log10(sens_scale / comm_scale), 1.0)
    decades = np.linspace(d_star - 1.0, d_star + 3.0, cfg.tradeoff_points - 1)
    return np.append(1.0 - 10.0 ** (-decades), 1.0)


def dominance_ratio(F: np.ndarray) -> float:
    """Sum of desired-gain diagonal over total interference leakage."""
    diag = float(np.trace(F))
    off = float(F.sum() - diag)
    return diag / off if off > 0 else math.inf


def _write_csv(path: Path, cfg: ExperimentConfig, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="") as fh:
        fh.write(f"# config_hash={config_hash(cfg)}\n")
        fh.write(f"# seed={cfg.system.seed}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _write_manifest(
    path: Path, cfg: ExperimentConfig, experiment: str, csv_name: str, rows: int, wall: float
) -> None:
    manifest = {
        "experiment": experiment,
        "config_hash": config_hash(cfg),
        "config": config_to_dict(cfg),
        "csv": csv_name,
        "rows": rows,
        "wall_time_s": wall,
    }
    path.write_text(json.dumps(manifest, indent=2, default=list) + "\n")


def _out_paths(cfg: ExperimentConfig, experiment: str) -> tuple[Path, Path]:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{experiment}_{config_hash(cfg)}"
    return out / f"{stem}.csv", out / f"{stem}.json"


def run_gain_matrix_experiment(cfg: ExperimentConfig) -> Path:
    """Beam-gain matrix entries and diagonal-dominance summary per eta.

    One shared channel realization is solved once per weight; data rows
    carry (eta, i, k, F_ik) with 1-based user indices and summary rows
    carry the dominance ratio.
    """
    cfg.validate()
    t0 = time.perf_counter()
    channels = generate_channels(cfg.system, np.random.default_rng(cfg.system.seed))
    rows: list[list] = []
    for eta in cfg.eta_list:
        system = dataclasses.replace(cfg.system, eta=float(eta))
        report = ao_solve(system, channels)
        F = beam_gain_matrix(effective_channels(channels, report.phase.matrix), report.W)
        k = F.shape[0]
        for i in range(k):
            for j in range(k):
                rows.append(["gain", float(eta), i + 1, j + 1, float(F[i, j]), ""])
        rows.append(["summary", float(eta), "", "", "", dominance_ratio(F)])
    csv_path, manifest_path = _out_paths(cfg, "gain_matrix")
    _write_csv(csv_path, cfg, GAIN_MATRIX_HEADER, rows)
    _write_manifest(
        manifest_path, cfg, "gain_matrix", csv_path.name, len(rows), time.perf_counter() - t0
    )
    return csv_path


def run_beampattern_experiment(cfg: ExperimentConfig) -> Path:
    """Azimuth-swept composite beam gain per eta at the target elevation."""
    cfg.validate()
    t0 = time.perf_counter()
    channels = generate_channels(cfg.system, np.random.default_rng(cfg.system.seed))
    grid_deg = azimuth_grid_deg(cfg)
    rows: list[list] = []
    for eta in cfg.eta_list:
        system = dataclasses.replace(cfg.system, eta=float(eta))
        report = ao_solve(system, channels)
        pattern = beampattern(
            report.phase.matrix,
            channels.G,
            report.W,
            system.target_elevation,
            np.radians(grid_deg),
            system.n1,
            system.n2,
        )
        for az_deg, (_, gain) in zip(grid_deg, pattern):
            rows.append([float(eta), float(az_deg), gain, 10.0 * math.log10(gain) if gain > 0 else -math.inf])
    csv_path, manifest_path = _out_paths(cfg, "beampattern")
    _write_csv(csv_path, cfg, BEAMPATTERN_HEADER, rows)
    _write_manifest(
        manifest_path, cfg, "beampattern", csv_path.name, len(rows), time.perf_counter() - t0
    )
    return csv_path


def _tradeoff_chain(
    args: tuple[SystemConfig, Geometry, tuple[float, ...], int, int]
) -> list[tuple[int, int, int, float, float]]:
    """One (architecture, trial) homotopy sweep over the whole eta grid.

    The chain draws its fading once, fixes the gain targets at the pure
    communication end, then re-solves while lowering eta, warm-starting
    every solve from the previous optimum. Warm starts keep the traced
    frontier on one solution branch; independent random restarts per
    point would scatter across local optima of the nonconvex objective.
    """
    system, geometry, etas, arch_idx, trial = args
    rng = trial_rng(system.seed, arch_idx, trial)
    channels = generate_channels(system, rng, geometry)
    out = []
    start = None
    for eta_idx in reversed(range(len(etas))):
        # The anchor solve is the only cold start; give it a deeper budget
        # so the chain inherits a converged communication endpoint.
        budget = system.max_outer if start is not None else 3 * system.max_outer
        cfg_eta = dataclasses.replace(system, eta=float(etas[eta_idx]), max_outer=budget)
        report = ao_solve(cfg_eta, channels, rng, start=start)
        start = (report.W, report.phase, report.aux, report.targets)
        out.append((arch_idx, eta_idx, trial, report.sum_rate, report.sensing_gain))
    return out


def run_tradeoff_experiment(cfg: ExperimentConfig) -> Path:
    """Rate/sensing-gain frontier per architecture over an eta grid.

    One user drop (from the experiment seed) is shared by every task so
    architectures and weights are compared on the same scenario; trials
    average over small-scale fading. Chains are independent and may run
    on a worker pool without changing any emitted number.
    """
    cfg.validate()
    t0 = time.perf_counter()
    geometry = build_geometry(cfg.system, trial_rng(cfg.system.seed, 0x6E0))
    etas = tuple(float(e) for e in tradeoff_etas(cfg, geometry))
    ref_c, ref_pt, _ = _reference_scales(cfg, geometry)
    tasks = []
    for arch_idx, arch in enumerate(cfg.architectures):
        for trial in range(cfg.num_trials):
            # Shared targets: chains differ only in fading and architecture.
            system = dataclasses.replace(
                cfg.system,
                architecture=arch,
                gain_target_c=ref_c if cfg.system.gain_target_c is None else cfg.system.gain_target_c,
                gain_target_pt=ref_pt if cfg.system.gain_target_pt is None else cfg.system.gain_target_pt,
            )
            tasks.append((system, geometry, etas, arch_idx, trial))
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chains = list(pool.map(_tradeoff_chain, tasks, chunksize=1))
    else:
        chains = [_tradeoff_chain(t) for t in tasks]
    results = sorted(r for chain in chains for r in chain)

    by_point: dict[tuple[int, int], list[tuple[float, float]]] = {}
    for arch_idx, eta_idx, _, rate, gain in results:
        by_point.setdefault((arch_idx, eta_idx), []).append((rate, gain))
    rows: list[list] = []
    for arch_idx, arch in enumerate(cfg.architectures):
        for eta_idx, eta in enumerate(etas):
            samples = by_point[(arch_idx, eta_idx)]
            rates = np.array([s[0] for s in samples])
            gains = np.array([s[1] for s in samples])
            mean_gain = float(gains.mean())
            rows.append(
                [
                    arch,
                    float(eta),
                    float(rates.mean()),
                    mean_gain,
                    float(rates.std(ddof=1)) if len(samples) > 1 else 0.0,
                    float(gains.std(ddof=1)) if len(samples) > 1 else 0.0,
                    len(samples),
                    10.0 * math.log10(mean_gain) if mean_gain > 0 else -math.inf,
                ]
            )
    csv_path, manifest_path = _out_paths(cfg, "tradeoff")
    _write_csv(csv_path, cfg, TRADEOFF_HEADER, rows)
    _write_manifest(
        manifest_path, cfg, "tradeoff", csv_path.name, len(rows), time.perf_counter() - t0
    )
    return csv_path


def _complex_to_jsonable(arr: np.ndarray) -> dict:
    return {"real": arr.real.tolist(), "imag": arr.imag.tolist()}


def report_to_dict(report: SolveReport) -> dict:
    """JSON-compatible rendering of a SolveReport."""
    return {
        "objective_trajectory": report.objective_trajectory,
        "initial_objective": report.initial_objective,
        "steps": [dataclasses.asdict(s) for s in report.steps],
        "W": _complex_to_jsonable(report.W),
        "Theta": _complex_to_jsonable(report.phase.matrix),
        "architecture": report.phase.architecture.label,
        "aux_theta": report.aux.theta.tolist(),
        "aux_phi": report.aux.phi.tolist(),
        "targets": {"C": report.targets.C, "p_t": report.targets.p_t, "eta": report.targets.eta},
        "sum_rate": report.sum_rate,
        "sinr": report.sinr.tolist(),
        "sensing_gain": report.sensing_gain,
        "constraint_residuals": report.constraint_residuals,
        "converged": report.converged,
        "iterations": report.iterations,
        "wall_time": report.wall_time,
        "power_multiplier": report.power_multiplier,
    }


def run_single_solve(cfg: ExperimentConfig) -> Path:
    """Solve the configured scenario once and dump the full report as JSON."""
    cfg.validate()
    channels = generate_channels(cfg.system, np.random.default_rng(cfg.system.seed))
    report = ao_solve(cfg.system, channels)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"solve_{config_hash(cfg)}.json"
    payload = {"config_hash": config_hash(cfg), "config": config_to_dict(cfg)}
    payload.update(report_to_dict(report))
    path.write_text(json.dumps(payload, indent=2, default=list) + "\n")
    return path
