"""Phase-shift subproblem: splitting iteration with manifold projection.

The objective is quadratic in psi = vec(Theta) with a data matrix P + Q
that is a sum of K^2 + K rank-one outer products of Kronecker vectors
conj(G w_k) kron f. The splitting alternates a regularized least-squares
step in psi with a projection of mat(psi + nu) onto the architecture's
feasible set, followed by a dual update.

P + Q is never assembled densely on the solve path: the factored form
makes each psi step O(N^2 (K^2 + K)) instead of O(N^6). The dense
matrices remain available as properties for small-scale checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSet
from .errors import (
    DimensionMismatch,
    IndivisibleGroups,
    MemoryGuard,
    NonSquare,
    SingularSystem,
)
from .system_model import (
    Architecture,
    AuxPhases,
    GainTargets,
    PhaseShift,
    target_matrix,
)

RANK_TOL = 1e-10  # relative singular-value cutoff in the projection
RESIDUAL_RTOL = 1e-8


def vec(X: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return X.ravel(order="F")


def unvec(x: np.ndarray, n: int) -> np.ndarray:
    """Inverse of vec for an n x n matrix."""
    return x.reshape((n, n), order="F")


@dataclass(frozen=True)
class PsiQuadratic:
    """Quadratic data psi^H (P+Q) psi - 2 Re{(p+q)^H psi} + constant.

    P and Q are carried in factored form: P = comm_factors @ comm_factors^H
    and Q = sens_factors @ sens_factors^H, with the objective weights
    already folded into the factors.
    """

    comm_factors: np.ndarray  # (N^2, K^2)
    sens_factors: np.ndarray  # (N^2, K)
    p: np.ndarray  # (N^2,)
    q: np.ndarray  # (N^2,)
    constant: float

    @property
    def n(self) -> int:
        return int(round(np.sqrt(self.comm_factors.shape[0])))

    @property
    def Pmat(self) -> np.ndarray:
        return self.comm_factors @ self.comm_factors.conj().T

    @property
    def Qmat(self) -> np.ndarray:
        return self.sens_factors @ self.sens_factors.conj().T

    @property
    def trace_total(self) -> float:
        """trace(P + Q), from the factors."""
        return float(
            np.sum(np.abs(self.comm_factors) ** 2)
            + np.sum(np.abs(self.sens_factors) ** 2)
        )

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """(P + Q) @ x without densifying."""
        return self.comm_factors @ (self.comm_factors.conj().T @ x) + (
            self.sens_factors @ (self.sens_factors.conj().T @ x)
        )


def quadratic_objective(quad: PsiQuadratic, psi: np.ndarray) -> float:
    """Value of the quadratic at psi, including the analytic constant."""
    comm = np.abs(quad.comm_factors.conj().T @ psi) ** 2
    sens = np.abs(quad.sens_factors.conj().T @ psi) ** 2
    lin = (quad.p + quad.q).conj() @ psi
    return float(comm.sum() + sens.sum() - 2.0 * lin.real + quad.constant)


def assemble_psi_quadratic(
    channels: ChannelSet,
    W: np.ndarray,
    aux: AuxPhases,
    targets: GainTargets,
    max_elements: int = 64,
) -> PsiQuadratic:
    """Build the psi-space quadratic for fixed precoders and target phases.

    The factor for user pair (i, k) is conj(G w_k) kron f_i and the
    sensing factor for user k is conj(G w_k) kron f_t, matching the
    column-stacking identity f^H Theta (G w) = ((G w)^T kron f^H) vec(Theta).
    """
    n, m, k = channels.n_elements, channels.m_antennas, channels.k_users
    if n > max_elements:
        raise MemoryGuard(f"N = {n} exceeds the configured cap {max_elements}")
    if W.shape != (m, k):
        raise DimensionMismatch(f"W must be ({m}, {k}), got {W.shape}")
    if aux.theta.shape != (k, k) or aux.phi.shape != (k,):
        raise DimensionMismatch("aux phases sized for the wrong user count")
    gw_conj = (channels.G @ W).conj()  # (N, K)
    # Column (i, k) of raw_comm is kron(conj(G w_k), f_i), flattened index i*K + k.
    raw_comm = np.einsum("pk,iq->pqik", gw_conj, channels.f_users).reshape(n * n, k * k)
    raw_sens = np.einsum("pk,q->pqk", gw_conj, channels.f_target).reshape(n * n, k)
    eta = targets.eta
    T = target_matrix(targets, k, aux)
    p = eta * (raw_comm @ T.ravel())
    q = (1.0 - eta) * targets.p_t * (raw_sens @ np.exp(1j * aux.phi))
    constant = float(
        eta * np.sum(np.abs(T) ** 2) + (1.0 - eta) * k * targets.p_t ** 2
    )
    return PsiQuadratic(
        comm_factors=np.sqrt(eta) * raw_comm,
        sens_factors=np.sqrt(1.0 - eta) * raw_sens,
        p=p,
        q=q,
        constant=constant,
    )


class _PsiSolver:
    """Repeated solves of (P + Q + mu I) x = rhs via a thin SVD of the factors.

    With V the stacked factors and V = U S Wh, the solution splits into
    the factor range (denominators s^2 + mu) and its complement
    (denominator mu), which avoids the cancellation of a naive
    Woodbury difference when mu is small.
    """

    def __init__(self, quad: PsiQuadratic, mu: float):
        if mu <= 0:
            raise ValueError("mu must be > 0")
        self.mu = mu
        V = np.concatenate([quad.comm_factors, quad.sens_factors], axis=1)
        if V.shape[1] == 0 or not np.any(np.abs(V) > 0):
            self.basis = np.zeros((V.shape[0], 0), dtype=complex)
            self.s2 = np.zeros(0)
        else:
            U, s, _ = np.linalg.svd(V, full_matrices=False)
            keep = s > s[0] * 1e-15
            self.basis = U[:, keep]
            self.s2 = s[keep] ** 2

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        coef = self.basis.conj().T @ rhs
        x = rhs / self.mu
        if coef.size:
            x = x + self.basis @ (coef * (1.0 / (self.s2 + self.mu) - 1.0 / self.mu))
        return x


def psi_update(
    quad: PsiQuadratic, mu: float, Theta: np.ndarray, nu: np.ndarray
) -> np.ndarray:
    """Regularized least-squares step (P+Q+mu I)^-1 (p+q+mu(vec(Theta)-nu))."""
    rhs = quad.p + quad.q + mu * (vec(Theta) - nu)
    psi = _PsiSolver(quad, mu).solve(rhs)
    residual = np.linalg.norm(quad.matvec(psi) + mu * psi - rhs)
    if residual > RESIDUAL_RTOL * max(np.linalg.norm(rhs), 1e-300):
        raise SingularSystem(
            f"psi solve residual {residual:.3e} exceeds tolerance"
        )
    return psi


def symuni_projection(theta_hat: np.ndarray) -> np.ndarray:
    """Nearest symmetric unitary matrix in Frobenius norm.

    Symmetrize, take the SVD U S V^H, and rebuild from the rank-R leading
    left singular vectors padded with the conjugated trailing right ones.
    """
    if theta_hat.ndim != 2 or theta_hat.shape[0] != theta_hat.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {theta_hat.shape}")
    sym = 0.5 * (theta_hat + theta_hat.T)
    U, s, Vh = np.linalg.svd(sym)
    rank = int(np.sum(s > RANK_TOL * s[0])) if s.size and s[0] > 0 else 0
    V = Vh.conj().T
    U_tilde = np.concatenate([U[:, :rank], V[:, rank:].conj()], axis=1)
    return U_tilde @ Vh


def group_projection(theta_hat: np.ndarray, group_size: int) -> PhaseShift:
    """Blockwise symmetric unitary projection onto the group-connected set."""
    if theta_hat.ndim != 2 or theta_hat.shape[0] != theta_hat.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {theta_hat.shape}")
    n = theta_hat.shape[0]
    if n % group_size != 0:
        raise IndivisibleGroups(f"group size {group_size} does not divide N = {n}")
    out = np.zeros_like(theta_hat, dtype=complex)
    for b in range(n // group_size):
        sl = slice(b * group_size, (b + 1) * group_size)
        out[sl, sl] = symuni_projection(theta_hat[sl, sl])
    return PhaseShift(out, Architecture("gbd", group_size))


def diagonal_projection(theta_hat: np.ndarray) -> PhaseShift:
    """Per-element phase extraction onto the unit-modulus diagonal set."""
    if theta_hat.ndim != 2 or theta_hat.shape[0] != theta_hat.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {theta_hat.shape}")
    d = np.diag(theta_hat)
    mag = np.abs(d)
    phases = np.where(mag > 0, d / np.where(mag > 0, mag, 1.0), 1.0 + 0.0j)
    return PhaseShift(np.diag(phases), Architecture("dris"))


def project(theta_hat: np.ndarray, architecture: Architecture) -> PhaseShift:
    """Project onto the feasible set selected by the architecture tag."""
    if architecture.kind == "fbd":
        return PhaseShift(symuni_projection(theta_hat), architecture)
    if architecture.kind == "gbd":
        return group_projection(theta_hat, architecture.group_size)
    return diagonal_projection(theta_hat)


@dataclass
class SplittingResult:
    """Outcome of one splitting run; the phase matrix is always feasible."""

    phase: PhaseShift
    converged: bool
    iterations: int
    primal_residuals: list[float] = field(default_factory=list)
    dual_residuals: list[float] = field(default_factory=list)
    nu: np.ndarray | None = None


def splitting_solve(
    quad: PsiQuadratic,
    architecture: Architecture,
    theta_init: np.ndarray,
    mu: float | None = None,
    tol: float | None = None,
    max_iter: int = 100,
    nu_init: np.ndarray | None = None,
) -> SplittingResult:
    """Run the three-step splitting iteration from a feasible start.

    Stops when the primal residual ||psi - vec(Theta)|| drops below tol
    (default 1e-6 sqrt(N)) or after max_iter sweeps. The returned matrix
    comes from the projection step, so it is feasible either way.
    """
    n = quad.n
    if theta_init.shape != (n, n):
        raise DimensionMismatch(f"theta_init must be ({n}, {n})")
    if mu is None:
        trace = quad.trace_total
        mu = trace / (n * n) if trace > 0 else 1.0
    if tol is None:
        tol = 1e-6 * np.sqrt(n)
    solver = _PsiSolver(quad, mu)
    lin = quad.p + quad.q
    theta = theta_init
    nu = np.zeros(n * n, dtype=complex) if nu_init is None else nu_init.copy()
    psi_prev = vec(theta_init).astype(complex)
    phase = project(theta_init, architecture)
    primal_hist: list[float] = []
    dual_hist: list[float] = []
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        psi = solver.solve(lin + mu * (vec(theta) - nu))
        dual_hist.append(float(np.linalg.norm(psi - psi_prev)))
        psi_prev = psi
        phase = project(unvec(psi + nu, n), architecture)
        theta = phase.matrix
        nu = nu + psi - vec(theta)
        primal = float(np.linalg.norm(psi - vec(theta)))
        primal_hist.append(primal)
        if primal <= tol:
            converged = True
            break
    return SplittingResult(
        phase=phase,
        converged=converged,
        iterations=iterations,
        primal_residuals=primal_hist,
        dual_residuals=dual_hist,
        nu=nu,
    )
