"""Precoding subproblem: quadratic assembly and the bisection solution.

With the phase-shift matrix and the target phases held fixed, the
objective in the beamformers separates into K quadratics sharing one
Hermitian PSD matrix A. The minimizer under the sum power budget is
w_k = (A + lam I)^-1 b_k with a single multiplier found by bisection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet
from .errors import DimensionMismatch, NonConvergence
from .system_model import AuxPhases, GainTargets, effective_channels, target_matrix

RIDGE_SCALE = 1e-12  # relative ridge applied when A is singular at lam = 0
LAMBDA_RTOL = 1e-10
MAX_BISECT = 200


@dataclass(frozen=True)
class PrecoderQuadratic:
    """Quadratic data sum_k (w_k^H A w_k - 2 Re b_k^H w_k)."""

    A: np.ndarray  # (M, M) Hermitian PSD
    b: np.ndarray  # (M, K), column k is b_k

    @property
    def m_antennas(self) -> int:
        return self.A.shape[0]


def assemble_precoder_quadratic(
    channels: ChannelSet,
    Theta: np.ndarray,
    aux: AuxPhases,
    targets: GainTargets,
) -> PrecoderQuadratic:
    """Fold channels, phases and targets into (A, {b_k}).

    A = eta * sum_i g_i g_i^H + (1-eta) g_t g_t^H and
    b_k = eta * sum_i P_ik exp(j theta_ik) g_i + (1-eta) p_t exp(j phi_k) g_t,
    where g_i = G^H Theta^H f_i and g_t = G^H Theta^H f_t.
    """
    k = channels.k_users
    if aux.theta.shape != (k, k) or aux.phi.shape != (k,):
        raise DimensionMismatch("aux phases sized for the wrong user count")
    g_users = effective_channels(channels, Theta).conj().T  # (M, K), col i = g_i
    g_target = (channels.f_target.conj() @ Theta @ channels.G).conj()  # (M,)
    eta = targets.eta
    A = eta * (g_users @ g_users.conj().T) + (1.0 - eta) * np.outer(
        g_target, g_target.conj()
    )
    A = 0.5 * (A + A.conj().T)
    b = eta * (g_users @ target_matrix(targets, k, aux)) + (
        1.0 - eta
    ) * targets.p_t * np.outer(g_target, np.exp(1j * aux.phi))
    return PrecoderQuadratic(A=A, b=b)


def _modal(quad: PrecoderQuadratic):
    """Eigendecomposition of A plus b expressed in the eigenbasis."""
    d, U = np.linalg.eigh(quad.A)
    d = np.clip(d, 0.0, None)
    c = U.conj().T @ quad.b
    energy = (np.abs(c) ** 2).sum(axis=1)  # per-mode sum over users
    return d, U, c, energy


def total_power(quad: PrecoderQuadratic, lam: float) -> float:
    """Transmit power sum_k ||(A + lam I)^-1 b_k||^2 at a given multiplier."""
    d, _, _, energy = _modal(quad)
    with np.errstate(divide="ignore"):
        return float(np.sum(energy / (d + lam) ** 2))


def solve_precoders(quad: PrecoderQuadratic, p_max: float) -> tuple[np.ndarray, float]:
    """Power-constrained minimizer of the precoder quadratic.

    Returns (W, lam) with either lam = 0 and the unconstrained solution
    already inside the budget, or lam > 0 making the power constraint
    active. All solves run through the Hermitian eigendecomposition of A;
    a singular A at lam = 0 is regularized with a trace-scaled ridge.
    """
    if p_max <= 0:
        raise ValueError("p_max must be > 0")
    d, U, c, energy = _modal(quad)
    if not np.any(energy > 0):
        return np.zeros_like(quad.b), 0.0

    d_max = d.max()
    ridge = RIDGE_SCALE * d.sum() / quad.m_antennas
    denom0 = d + ridge if d.min() <= 1e-12 * max(d_max, 1e-300) else d
    power0 = float(np.sum(energy / denom0 ** 2))
    if power0 <= p_max:
        return U @ (c / denom0[:, None]), 0.0

    def power(lam: float) -> float:
        return float(np.sum(energy / (d + lam) ** 2))

    iterations = 0
    hi = 1.0
    while power(hi) > p_max:
        hi *= 2.0
        iterations += 1
        if iterations > MAX_BISECT:
            raise NonConvergence("bisection bracket expansion exceeded budget")
    lo = hi / 2.0 if hi > 1.0 else 0.0
    while hi - lo > LAMBDA_RTOL * hi:
        iterations += 1
        if iterations > MAX_BISECT:
            raise NonConvergence("bisection exceeded iteration budget")
        mid = 0.5 * (lo + hi)
        if power(mid) > p_max:
            lo = mid
        else:
            hi = mid
            if power(hi) >= p_max * (1.0 - LAMBDA_RTOL):
                break
    lam = hi  # feasible side of the bracket, so the budget always holds
    return U @ (c / (d + lam)[:, None]), lam
