"""Signal-model quantities: effective channels, gains, objective, rates.

Everything here is a pure evaluator over explicit arrays. The precoder is
passed around as a plain complex (M, K) matrix whose columns are the
per-user beamformers; the phase-shift matrix travels together with its
architecture tag in PhaseShift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet, target_steering
from .errors import DimensionMismatch


@dataclass(frozen=True)
class Architecture:
    """Feasible set of the phase-shift matrix.

    kind is one of "fbd" (full symmetric unitary), "gbd" (block-diagonal
    with symmetric unitary blocks of size group_size) or "dris"
    (unit-modulus diagonal).
    """

    kind: str
    group_size: int | None = None

    def __post_init__(self):
        if self.kind not in ("fbd", "gbd", "dris"):
            raise ValueError(f"unknown architecture kind {self.kind!r}")
        if self.kind == "gbd" and (self.group_size is None or self.group_size < 1):
            raise ValueError("gbd architecture needs a positive group_size")

    @property
    def label(self) -> str:
        if self.kind == "gbd":
            return f"gbd{self.group_size}"
        return self.kind


FULLY_CONNECTED = Architecture("fbd")
DIAGONAL = Architecture("dris")


def group_connected(group_size: int) -> Architecture:
    return Architecture("gbd", group_size)


@dataclass(frozen=True)
class PhaseShift:
    """An N x N scattering matrix plus the architecture it must satisfy."""

    matrix: np.ndarray
    architecture: Architecture

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class AuxPhases:
    """Free phases of the gain targets: theta is (K, K), phi is (K,)."""

    theta: np.ndarray
    phi: np.ndarray


@dataclass(frozen=True)
class GainTargets:
    """Desired amplitudes and the communication/sensing weight.

    The per-user target matrix is C on the diagonal and zero elsewhere;
    the sensing target amplitude is p_t. eta = 1 is pure communication.
    """

    C: float
    p_t: float
    eta: float

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")
        if self.C < 0 or self.p_t < 0:
            raise ValueError("C and p_t must be >= 0")


def effective_channels(channels: ChannelSet, Theta: np.ndarray) -> np.ndarray:
    """(K, M) matrix whose row k is f_k^H Theta G."""
    n = channels.n_elements
    if Theta.shape != (n, n):
        raise DimensionMismatch(f"Theta must be ({n}, {n}), got {Theta.shape}")
    return channels.f_users.conj() @ Theta @ channels.G


def beam_gain_matrix(H: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Entrywise |HW|^2: desired power on the diagonal, leakage off it."""
    if H.shape[1] != W.shape[0]:
        raise DimensionMismatch(f"H is {H.shape} but W is {W.shape}")
    hw = H @ W
    return (hw * hw.conj()).real


def sensing_gain(f_target: np.ndarray, Theta: np.ndarray, G: np.ndarray, W: np.ndarray) -> float:
    """Power |f_t^H Theta G sum_k w_k|^2 projected toward the target."""
    n = f_target.shape[0]
    if Theta.shape != (n, n) or G.shape[0] != n or G.shape[1] != W.shape[0]:
        raise DimensionMismatch("f_target, Theta, G, W dimensions disagree")
    val = f_target.conj() @ Theta @ G @ W.sum(axis=1)
    return float(np.abs(val) ** 2)


def target_matrix(targets: GainTargets, k_users: int, aux: AuxPhases) -> np.ndarray:
    """Complex (K, K) target C*exp(j theta_kk) on the diagonal, zero off it."""
    t = np.zeros((k_users, k_users), dtype=complex)
    np.fill_diagonal(t, targets.C * np.exp(1j * np.diag(aux.theta)))
    return t


def objective(
    W: np.ndarray,
    Theta: np.ndarray,
    aux: AuxPhases,
    targets: GainTargets,
    channels: ChannelSet,
) -> float:
    """Weighted squared mismatch of beam gains against their targets.

    eta times the communication term sum_{i,k} |f_i^H Theta G w_k -
    P_ik exp(j theta_ik)|^2 plus (1 - eta) times the sensing term
    sum_k |f_t^H Theta G w_k - p_t exp(j phi_k)|^2.
    """
    k = channels.k_users
    if W.shape != (channels.m_antennas, k):
        raise DimensionMismatch(f"W must be ({channels.m_antennas}, {k}), got {W.shape}")
    if aux.theta.shape != (k, k) or aux.phi.shape != (k,):
        raise DimensionMismatch("aux phases sized for the wrong user count")
    inner = effective_channels(channels, Theta) @ W
    comm = np.abs(inner - target_matrix(targets, k, aux)) ** 2
    sens_inner = channels.f_target.conj() @ Theta @ channels.G @ W
    sens = np.abs(sens_inner - targets.p_t * np.exp(1j * aux.phi)) ** 2
    return float(targets.eta * comm.sum() + (1.0 - targets.eta) * sens.sum())


def sinr_and_rate(F: np.ndarray, noise_powers) -> tuple[np.ndarray, float]:
    """Per-user SINR F_kk / (sum_{i != k} F_ki + sigma_k^2) and Shannon sum rate."""
    k = F.shape[0]
    sigma2 = np.broadcast_to(np.asarray(noise_powers, dtype=float), (k,))
    desired = np.diag(F)
    interference = F.sum(axis=1) - desired
    sinr = desired / (interference + sigma2)
    rate = float(np.log2(1.0 + sinr).sum())
    return sinr, rate


def beampattern(
    Theta: np.ndarray,
    G: np.ndarray,
    W: np.ndarray,
    elevation: float,
    azimuth_grid,
    n1: int,
    n2: int,
) -> list[tuple[float, float]]:
    """Composite beam gain swept over azimuth at a fixed elevation.

    Each grid point a maps to |f(elevation, a)^H Theta G sum_k w_k|^2,
    with f the same planar-array response used for the target link.
    """
    wsum = W.sum(axis=1)
    reflected = Theta @ G @ wsum
    out = []
    for az in azimuth_grid:
        f = target_steering(elevation, float(az), n1, n2)
        out.append((float(az), float(np.abs(f.conj() @ reflected) ** 2)))
    return out


def default_gain_targets(
    channels: ChannelSet,
    Theta: np.ndarray,
    W: np.ndarray,
    eta: float,
    C: float | None = None,
    p_t: float | None = None,
) -> GainTargets:
    """Targets on the scale the starting point already achieves.

    C defaults to the mean direct-link amplitude |f_k^H Theta G w_k| and
    p_t to sqrt(N) times the mean target-link amplitude, keeping the
    least-squares objective well conditioned. Both can be pinned.
    """
    inner = effective_channels(channels, Theta) @ W
    if C is None:
        C = float(np.mean(np.abs(np.diag(inner))))
    if p_t is None:
        sens = channels.f_target.conj() @ Theta @ channels.G @ W
        p_t = float(np.sqrt(channels.n_elements) * np.mean(np.abs(sens)))
    return GainTargets(C=C, p_t=p_t, eta=eta)


def feasibility_residuals(phase: PhaseShift) -> dict[str, float]:
    """Constraint residuals of a phase-shift matrix under its architecture.

    Always reports unitarity and symmetry defects; adds the structural
    leakage outside the allowed support for gbd and dris.
    """
    theta = phase.matrix
    n = theta.shape[0]
    res = {
        "unitarity": float(np.linalg.norm(theta.conj().T @ theta - np.eye(n))),
        "symmetry": float(np.linalg.norm(theta - theta.T)),
    }
    arch = phase.architecture
    if arch.kind == "gbd":
        mask = np.ones((n, n), dtype=bool)
        L = arch.group_size
        for b in range(n // L):
            mask[b * L : (b + 1) * L, b * L : (b + 1) * L] = False
        res["off_block"] = float(np.linalg.norm(theta[mask]))
    elif arch.kind == "dris":
        res["off_diagonal"] = float(np.linalg.norm(theta - np.diag(np.diag(theta))))
        res["diag_modulus"] = float(np.max(np.abs(np.abs(np.diag(theta)) - 1.0)))
    return res
