"""Channel and geometry synthesis for the RIS-aided downlink.

The surface is an n1 x n2 planar array of half-wavelength-spaced elements
in the y-z plane. User links are spatially correlated Rayleigh, the
target link is a pure line-of-sight steering vector, and the BS-RIS link
is Rician with a configurable K-factor. Every generator is a pure
function of its inputs and an explicit rng handle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .errors import DimensionMismatch, NotPSD, ZeroDistance


@dataclass(frozen=True)
class Geometry:
    """Positions and array layout of one scenario."""

    bs_position: np.ndarray  # (3,) meters
    ris_position: np.ndarray  # (3,) meters
    user_positions: np.ndarray  # (K, 3) meters
    target_elevation: float  # radians
    target_azimuth: float  # radians
    wavelength: float  # meters
    n1: int
    n2: int

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("n1 and n2 must be >= 1")
        if self.wavelength <= 0:
            raise ValueError("wavelength must be > 0")
        dists = np.linalg.norm(self.user_positions - self.ris_position, axis=1)
        if np.any(dists <= 0):
            raise ZeroDistance("user positions must be distinct from the RIS")

    @property
    def n_elements(self) -> int:
        return self.n1 * self.n2

    @property
    def user_distances(self) -> np.ndarray:
        return np.linalg.norm(self.user_positions - self.ris_position, axis=1)


@dataclass(frozen=True)
class ChannelSet:
    """One realization of all links feeding the optimizer."""

    G: np.ndarray  # (N, M) BS -> RIS
    f_users: np.ndarray  # (K, N) rows are RIS -> user-k vectors
    f_target: np.ndarray  # (N,) RIS -> target, unit norm
    betas: np.ndarray  # (K,) user path-loss factors, linear power

    def __post_init__(self):
        if self.G.shape[0] != self.f_target.shape[0]:
            raise DimensionMismatch("G and f_target disagree on N")
        if self.f_users.shape != (self.betas.shape[0], self.G.shape[0]):
            raise DimensionMismatch("f_users must be (K, N)")
        if not math.isclose(np.linalg.norm(self.f_target), 1.0, rel_tol=1e-9):
            raise ValueError("f_target must have unit norm")
        if np.any(self.betas <= 0):
            raise ValueError("betas must be > 0")

    @property
    def n_elements(self) -> int:
        return self.G.shape[0]

    @property
    def m_antennas(self) -> int:
        return self.G.shape[1]

    @property
    def k_users(self) -> int:
        return self.f_users.shape[0]


def element_positions(n1: int, n2: int, wavelength: float) -> np.ndarray:
    """Positions of the N = n1*n2 elements, half-wavelength grid in y-z.

    Element i (1-based) sits at [0, mod(i-1, n1)*lam/2, floor((i-1)/n1)*lam/2],
    so the index runs fastest along the n1 axis.
    """
    i = np.arange(n1 * n2)
    pos = np.zeros((n1 * n2, 3))
    pos[:, 1] = np.mod(i, n1) * wavelength / 2.0
    pos[:, 2] = np.floor_divide(i, n1) * wavelength / 2.0
    return pos


def spatial_correlation(n1: int, n2: int, wavelength: float) -> np.ndarray:
    """Isotropic-scattering correlation sinc(2*d_ij/lam) between elements.

    Uses the normalized sinc, so half-wavelength neighbours are exactly
    uncorrelated and the diagonal is exactly one.
    """
    pos = element_positions(n1, n2, wavelength)
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.linalg.norm(diff, axis=2)
    return np.sinc(2.0 * dist / wavelength)


def sqrt_psd(R: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition, S @ S = R.

    Eigenvalues below -tol * max_eig raise NotPSD; round-off negatives
    are clamped to zero.
    """
    eigvals, eigvecs = np.linalg.eigh(R)
    scale = max(eigvals.max(initial=0.0), 0.0)
    if eigvals.min() < -tol * max(scale, 1e-300):
        raise NotPSD(f"min eigenvalue {eigvals.min():.3e} below -{tol:.0e} * max")
    root = np.sqrt(np.clip(eigvals, 0.0, None))
    return (eigvecs * root) @ eigvecs.conj().T


def rayleigh_user_channel(beta: float, S: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Correlated Rayleigh vector sqrt(beta) * S @ z with z ~ CSCG(0, I)."""
    n = S.shape[0]
    z = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
    return np.sqrt(beta) * (S @ z)


def target_steering(elevation: float, azimuth: float, n1: int, n2: int) -> np.ndarray:
    """Unit-norm planar-array response toward (elevation, azimuth).

    Kronecker product of the n1-length ramp in sin(el)*sin(az) with the
    n2-length ramp in cos(el), scaled by 1/sqrt(N).
    """
    ramp1 = np.exp(-1j * np.pi * np.arange(n1) * np.sin(elevation) * np.sin(azimuth))
    ramp2 = np.exp(-1j * np.pi * np.arange(n2) * np.cos(elevation))
    return np.kron(ramp1, ramp2) / np.sqrt(n1 * n2)


def ula_steering(m: int, angle: float) -> np.ndarray:
    """Unit-norm half-wavelength ULA response, angle measured from broadside."""
    return np.exp(-1j * np.pi * np.arange(m) * np.sin(angle)) / np.sqrt(m)


def elevation_azimuth(direction: np.ndarray) -> tuple[float, float]:
    """Spherical angles of a direction vector: elevation from +z, azimuth from +x."""
    r = np.linalg.norm(direction)
    if r <= 0:
        raise ZeroDistance("direction vector must be nonzero")
    elevation = math.acos(float(np.clip(direction[2] / r, -1.0, 1.0)))
    azimuth = math.atan2(float(direction[1]), float(direction[0]))
    return elevation, azimuth


def pathloss_user(distance_m: float) -> float:
    """User-link path loss 1e-3 * d^-2 on the linear power scale."""
    if distance_m <= 0:
        raise ZeroDistance("user distance must be > 0")
    return 1e-3 * distance_m ** -2


def bs_ris_pathloss_db(distance_m: float) -> float:
    """BS-RIS large-scale fading 37.3 + 22.0 log10(d) in dB."""
    if distance_m <= 0:
        raise ZeroDistance("BS-RIS distance must be > 0")
    return 37.3 + 22.0 * math.log10(distance_m)


def bs_ris_channel(
    distance_m: float,
    rician_kappa: float,
    steering_pair: tuple[np.ndarray, np.ndarray],
    rng: np.random.Generator,
) -> np.ndarray:
    """Rician BS -> RIS matrix with equal average power in both terms.

    The LOS rank-1 term uses the unit-norm responses in steering_pair
    scaled by sqrt(N*M); the scattered term is i.i.d. CSCG with unit
    entry power. Both are shaded by the large-scale loss.
    """
    a_ris, a_bs = steering_pair
    n, m = a_ris.shape[0], a_bs.shape[0]
    amp = math.sqrt(10.0 ** (-bs_ris_pathloss_db(distance_m) / 10.0))
    los = math.sqrt(n * m) * np.outer(a_ris, a_bs.conj())
    scatter = (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) / np.sqrt(2.0)
    w_los = math.sqrt(rician_kappa / (1.0 + rician_kappa))
    w_nlos = math.sqrt(1.0 / (1.0 + rician_kappa))
    return amp * (w_los * los + w_nlos * scatter)


def sample_user_positions(
    k_users: int,
    rng: np.random.Generator,
    r_min: float,
    r_max: float,
    center: np.ndarray,
) -> np.ndarray:
    """Drop users uniformly in the ground-plane annulus [r_min, r_max]."""
    u = rng.uniform(size=k_users)
    radius = np.sqrt(u * (r_max ** 2 - r_min ** 2) + r_min ** 2)
    angle = rng.uniform(0.0, 2.0 * np.pi, size=k_users)
    pos = np.zeros((k_users, 3))
    pos[:, 0] = center[0] + radius * np.cos(angle)
    pos[:, 1] = center[1] + radius * np.sin(angle)
    return pos


def build_geometry(config: SystemConfig, rng: np.random.Generator) -> Geometry:
    """Sample the unspecified user drop and freeze the rest from config."""
    ris = np.asarray(config.ris_position, dtype=float)
    users = sample_user_positions(
        config.k_users, rng, config.user_radius_min, config.user_radius_max, ris
    )
    return Geometry(
        bs_position=np.asarray(config.bs_position, dtype=float),
        ris_position=ris,
        user_positions=users,
        target_elevation=config.target_elevation,
        target_azimuth=config.target_azimuth,
        wavelength=config.wavelength,
        n1=config.n1,
        n2=config.n2,
    )


def generate_channels(
    config: SystemConfig,
    rng: np.random.Generator,
    geometry: Geometry | None = None,
) -> ChannelSet:
    """Draw one full channel realization for a scenario.

    The rng is consumed in a fixed order (user drop, user fading in index
    order, BS-RIS scattering) so identical seeds give identical channels.
    """
    if geometry is None:
        geometry = build_geometry(config, rng)
    n1, n2 = geometry.n1, geometry.n2
    S = sqrt_psd(spatial_correlation(n1, n2, geometry.wavelength))
    betas = np.array([pathloss_user(d) for d in geometry.user_distances])
    f_users = np.stack(
        [rayleigh_user_channel(beta, S, rng) for beta in betas]
    )
    f_target = target_steering(
        geometry.target_elevation, geometry.target_azimuth, n1, n2
    )
    bs_vec = geometry.bs_position - geometry.ris_position
    bs_distance = float(np.linalg.norm(bs_vec))
    el, az = elevation_azimuth(bs_vec)
    a_ris = target_steering(el, az, n1, n2)
    a_bs = ula_steering(config.m_antennas, 0.0)  # BS array broadside to the RIS
    G = bs_ris_channel(bs_distance, config.rician_kappa, (a_ris, a_bs), rng)
    return ChannelSet(G=G, f_users=f_users, f_target=f_target, betas=betas)
