"""Outer alternating optimization over precoders, phase shifts and targets.

One outer pass solves the precoder quadratic exactly, runs the splitting
iteration for the phase-shift matrix, then refreshes the target phases in
closed form. The precoder and target-phase steps are exact minimizers of
the shared objective; the phase step is an inexact penalized solve, so
the trajectory is recorded at every sub-step boundary for auditing.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .aux_phases import optimal_aux_phases
from .channel import ChannelSet
from .config import SystemConfig
from .phase_solver import assemble_psi_quadratic, project, splitting_solve
from .precoder import assemble_precoder_quadratic, solve_precoders
from .system_model import (
    Architecture,
    AuxPhases,
    GainTargets,
    PhaseShift,
    beam_gain_matrix,
    default_gain_targets,
    effective_channels,
    feasibility_residuals,
    objective,
    sensing_gain,
    sinr_and_rate,
)


def architecture_from_config(config: SystemConfig) -> Architecture:
    if config.architecture == "gbd":
        return Architecture("gbd", config.group_size)
    return Architecture(config.architecture)


@dataclass
class StepObjectives:
    """Objective value at each sub-step boundary of one outer iteration."""

    start: float
    after_precoder: float
    after_phase: float
    after_aux: float
    splitting_converged: bool
    splitting_iterations: int


@dataclass
class SolveReport:
    """Everything observable about one alternating-optimization run."""

    objective_trajectory: list[float]
    initial_objective: float
    steps: list[StepObjectives]
    W: np.ndarray
    phase: PhaseShift
    aux: AuxPhases
    targets: GainTargets
    sum_rate: float
    sinr: np.ndarray
    sensing_gain: float
    constraint_residuals: dict[str, float]
    converged: bool
    iterations: int
    wall_time: float
    power_multiplier: float = 0.0


def initialize(
    config: SystemConfig, channels: ChannelSet, rng: np.random.Generator
) -> tuple[np.ndarray, PhaseShift, AuxPhases, GainTargets]:
    """Feasible starting point: projected random phases, matched filters.

    The initial precoder columns are G^H Theta^H f_k scaled to spend the
    whole power budget; targets default to the amplitudes this point
    already achieves unless pinned in the config.
    """
    n = config.n_elements
    arch = architecture_from_config(config)
    raw = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    phase0 = project(raw, arch)
    w0 = effective_channels(channels, phase0.matrix).conj().T
    w0 = w0 * np.sqrt(config.p_max_w / np.sum(np.abs(w0) ** 2))
    aux0 = optimal_aux_phases(channels, phase0.matrix, w0)
    targets = default_gain_targets(
        channels,
        phase0.matrix,
        w0,
        eta=config.eta,
        C=config.gain_target_c,
        p_t=config.gain_target_pt,
    )
    return w0, phase0, aux0, targets


def ao_solve(
    config: SystemConfig,
    channels: ChannelSet,
    rng: np.random.Generator | None = None,
    start: tuple[np.ndarray, PhaseShift, AuxPhases, GainTargets] | None = None,
) -> SolveReport:
    """Alternate precoder, phase-shift and target-phase updates to a report.

    Convergence is declared on the relative change of the objective across
    outer passes, each evaluated after the target-phase refresh. The
    returned iterate is feasible whether or not the budget was reached.
    A previous solution can be passed as the starting point (weight sweeps
    warm-start from the neighbouring weight); its eta is overridden by the
    configured one.
    """
    config.validate()
    if rng is None:
        rng = np.random.default_rng(config.seed)
    t_start = time.perf_counter()
    arch = architecture_from_config(config)
    if start is None:
        W, phase, aux, targets = initialize(config, channels, rng)
    else:
        W, phase, aux, targets = start
        targets = GainTargets(C=targets.C, p_t=targets.p_t, eta=config.eta)
    theta = phase.matrix
    f_current = objective(W, theta, aux, targets, channels)
    initial_objective = f_current
    trajectory: list[float] = []
    steps: list[StepObjectives] = []
    nu = None
    lam = 0.0
    converged = False
    iterations = 0
    for iterations in range(1, config.max_outer + 1):
        f_start = f_current
        quad_w = assemble_precoder_quadratic(channels, theta, aux, targets)
        W, lam = solve_precoders(quad_w, config.p_max_w)
        f_precoder = objective(W, theta, aux, targets, channels)
        quad_psi = assemble_psi_quadratic(
            channels, W, aux, targets, max_elements=config.max_elements
        )
        split = splitting_solve(
            quad_psi,
            arch,
            theta,
            mu=config.penalty_mu,
            tol=config.splitting_tol,
            max_iter=config.splitting_max_iter,
            nu_init=nu,
        )
        phase = split.phase
        theta = phase.matrix
        if config.preserve_dual:
            nu = split.nu
        f_phase = objective(W, theta, aux, targets, channels)
        aux = optimal_aux_phases(channels, theta, W)
        f_current = objective(W, theta, aux, targets, channels)
        steps.append(
            StepObjectives(
                start=f_start,
                after_precoder=f_precoder,
                after_phase=f_phase,
                after_aux=f_current,
                splitting_converged=split.converged,
                splitting_iterations=split.iterations,
            )
        )
        trajectory.append(f_current)
        previous = trajectory[-2] if len(trajectory) > 1 else initial_objective
        if abs(previous - f_current) <= config.outer_tol * max(abs(previous), 1e-300):
            converged = True
            break

    H = effective_channels(channels, theta)
    F = beam_gain_matrix(H, W)
    sinr, rate = sinr_and_rate(F, config.noise_w)
    gain = sensing_gain(channels.f_target, theta, channels.G, W)
    residuals = feasibility_residuals(phase)
    residuals["power_margin"] = config.p_max_w - float(np.sum(np.abs(W) ** 2))
    return SolveReport(
        objective_trajectory=trajectory,
        initial_objective=initial_objective,
        steps=steps,
        W=W,
        phase=phase,
        aux=aux,
        targets=targets,
        sum_rate=rate,
        sinr=sinr,
        sensing_gain=gain,
        constraint_residuals=residuals,
        converged=converged,
        iterations=iterations,
        wall_time=time.perf_counter() - t_start,
        power_multiplier=lam,
    )
