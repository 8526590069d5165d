"""Acceptance gate: every criterion at its stated tolerance.

Each test prints one [PASS]/[FAIL] line (run pytest with -s or -rA to see
them). The heavy frontier experiment runs once per session and is shared
between the criteria that consume it. Nothing here imports the plotting
package: this suite is self-contained over the solver library and CLI
runners.
"""

import collections
import csv
import dataclasses
import time

import numpy as np
import pytest

from bdris_isac import (
    ExperimentConfig,
    PrecoderQuadratic,
    SystemConfig,
    ao_solve,
    assemble_psi_quadratic,
    feasibility_residuals,
    generate_channels,
    objective,
    quadratic_objective,
    run_beampattern_experiment,
    run_gain_matrix_experiment,
    run_tradeoff_experiment,
    solve_precoders,
    symuni_projection,
)
from bdris_isac.aux_phases import wrap_phase
from bdris_isac.phase_solver import vec
from bdris_isac.system_model import AuxPhases, GainTargets


def _report(name: str, ok: bool, detail: str = "") -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def _read_rows(path):
    with open(path) as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    return rows[0], rows[1:]


# ------------------------------------------------------------------ 1


def test_criterion_feasibility_suite():
    """100 random seeded solves stay feasible at every return."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    sizes = [(2, 2)] * 45 + [(4, 2)] * 40 + [(8, 4)] * 15  # (n1, n2): N in {4, 8, 32}
    archs = ["fbd", "gbd", "dris"]
    worst = {"unitarity": 0.0, "symmetry": 0.0, "power": 0.0, "structure": 0.0}
    for idx, (n1, n2) in enumerate(sizes):
        n = n1 * n2
        arch = archs[idx % 3]
        cfg = SystemConfig(
            m_antennas=int(rng.integers(2, 5)) if n < 32 else 8,
            k_users=int(rng.integers(1, 4)) if n < 32 else 5,
            n1=n1,
            n2=n2,
            eta=float(rng.uniform()),
            architecture=arch,
            group_size=2 if n % 2 == 0 else 1,
            seed=int(rng.integers(0, 2**31)),
            max_outer=4,
            splitting_max_iter=40,
        )
        channels = generate_channels(cfg, np.random.default_rng(cfg.seed))
        rep = ao_solve(cfg, channels)
        res = rep.constraint_residuals
        worst["unitarity"] = max(worst["unitarity"], res["unitarity"])
        worst["symmetry"] = max(worst["symmetry"], res["symmetry"])
        worst["power"] = max(worst["power"], -res["power_margin"] / cfg.p_max_w)
        if arch == "gbd":
            worst["structure"] = max(worst["structure"], res["off_block"])
        if arch == "dris":
            worst["structure"] = max(
                worst["structure"], res["off_diagonal"], res["diag_modulus"]
            )
    elapsed = time.perf_counter() - t0
    ok = (
        worst["unitarity"] <= 1e-8
        and worst["symmetry"] <= 1e-10
        and worst["power"] <= 1e-9
        and worst["structure"] <= 1e-10
        and elapsed < 300
    )
    _report(
        "feasibility-suite",
        ok,
        f"worst unitarity={worst['unitarity']:.2e} symmetry={worst['symmetry']:.2e} "
        f"power_excess={worst['power']:.2e} structure={worst['structure']:.2e} "
        f"({elapsed:.0f}s over 100 instances)",
    )


# ------------------------------------------------------------------ 2


def test_criterion_projection_optimality():
    """Projection beats 1e5 random symmetric-unitary samples on 50 trials."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    wins, idem_worst = 0, 0.0
    for _ in range(50):
        X = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        T = symuni_projection(X)
        idem_worst = max(idem_worst, np.linalg.norm(symuni_projection(T) - T))
        d_star = np.linalg.norm(T - X)
        best = np.inf
        for _ in range(4):  # 4 x 25k batched samples = 1e5 per trial
            z = rng.standard_normal((25_000, 3, 3)) + 1j * rng.standard_normal(
                (25_000, 3, 3)
            )
            q, r = np.linalg.qr(z)
            diag = np.diagonal(r, axis1=1, axis2=2)
            q = q * (diag / np.abs(diag))[:, None, :]
            samples = q @ np.transpose(q, (0, 2, 1))
            best = min(best, np.linalg.norm(samples - X, axis=(1, 2)).min())
        wins += d_star <= best
    elapsed = time.perf_counter() - t0
    ok = wins == 50 and idem_worst <= 1e-10 and elapsed < 120
    _report(
        "projection-optimality",
        ok,
        f"wins={wins}/50 idempotence={idem_worst:.2e} ({elapsed:.0f}s)",
    )


# ------------------------------------------------------------------ 3


def _pgd_oracle(quad: PrecoderQuadratic, p_max: float, rng) -> float:
    """Projected gradient descent, 1e4 iterations x 20 batched restarts."""
    m, k = quad.b.shape
    restarts = 20
    lip = 2.0 * np.linalg.eigvalsh(quad.A).max() + 1e-12
    step = 1.0 / lip
    W = rng.standard_normal((restarts, m, k)) + 1j * rng.standard_normal((restarts, m, k))
    scale = np.sqrt(p_max / np.sum(np.abs(W) ** 2, axis=(1, 2)))
    W *= scale[:, None, None]
    for _ in range(10_000):
        W = W - step * 2.0 * (np.einsum("ij,rjk->rik", quad.A, W) - quad.b)
        power = np.sum(np.abs(W) ** 2, axis=(1, 2))
        shrink = np.sqrt(np.minimum(1.0, p_max / power))
        W *= shrink[:, None, None]
    vals = (
        np.einsum("rik,ij,rjk->r", W.conj(), quad.A, W)
        - 2.0 * np.einsum("rik,ik->r", W.conj(), quad.b).real
    ).real
    return float(vals.min())


def test_criterion_precoder_oracle():
    """Bisection solver not worse than projected gradient plus 1e-6."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    gap_worst = -np.inf
    for i in range(50):
        m = int(rng.integers(2, 5))
        k = int(rng.integers(1, 3))
        X = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        quad = PrecoderQuadratic(
            A=X @ X.conj().T,
            b=rng.standard_normal((m, k)) + 1j * rng.standard_normal((m, k)),
        )
        p_max = float(rng.uniform(0.05, 1.0))
        W, _ = solve_precoders(quad, p_max)
        value = float(
            sum(
                (
                    W[:, j].conj() @ quad.A @ W[:, j]
                    - 2 * (quad.b[:, j].conj() @ W[:, j]).real
                ).real
                for j in range(k)
            )
        )
        gap_worst = max(gap_worst, value - _pgd_oracle(quad, p_max, rng))
    # Analytic case: A = I forces lam = sqrt(sum||b||^2 / p_max) - 1.
    b = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    quad_eye = PrecoderQuadratic(A=np.eye(4, dtype=complex), b=b)
    p_max = 0.125 * np.sum(np.abs(b) ** 2)
    _, lam = solve_precoders(quad_eye, p_max)
    lam_true = np.sqrt(np.sum(np.abs(b) ** 2) / p_max) - 1.0
    lam_err = abs(lam - lam_true) / lam_true
    elapsed = time.perf_counter() - t0
    ok = gap_worst <= 1e-6 and lam_err <= 1e-8 and elapsed < 120
    _report(
        "precoder-oracle",
        ok,
        f"worst_gap={gap_worst:.2e} analytic_lambda_err={lam_err:.2e} ({elapsed:.0f}s)",
    )


# ------------------------------------------------------------------ 4


def test_criterion_phase_grid_oracle():
    """Closed-form phase matches a 1e5-point grid argmin on 1000 draws."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(13)
    grid = np.linspace(0.0, 2 * np.pi, 100_000, endpoint=False)
    expj = np.exp(1j * grid)
    worst = 0.0
    for _ in range(1000):
        zeta = rng.standard_normal() + 1j * rng.standard_normal()
        best = grid[np.argmin(np.abs(zeta - expj) ** 2)]
        closed = float(wrap_phase(np.angle(np.array(zeta))))
        diff = abs((closed - best + np.pi) % (2 * np.pi) - np.pi)
        worst = max(worst, diff)
    elapsed = time.perf_counter() - t0
    ok = worst <= 2 * np.pi * 1e-5 and elapsed < 60
    _report("phase-grid-oracle", ok, f"worst_diff={worst:.2e} rad ({elapsed:.0f}s)")


# ------------------------------------------------------------------ 5


def test_criterion_quadratic_consistency():
    """psi quadratic reproduces the objective minus the constant, 1e-9 rel."""
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 5))
        m = int(rng.integers(2, 4))
        k = int(rng.integers(1, 4))
        cfg = SystemConfig(m_antennas=m, k_users=k, n1=n, n2=1, seed=seed)
        ch = generate_channels(cfg, np.random.default_rng(seed))
        W = rng.standard_normal((m, k)) + 1j * rng.standard_normal((m, k))
        aux = AuxPhases(
            theta=rng.uniform(0, 2 * np.pi, (k, k)), phi=rng.uniform(0, 2 * np.pi, k)
        )
        targets = GainTargets(
            C=float(rng.uniform(0.1, 2)), p_t=float(rng.uniform(0.1, 2)),
            eta=float(rng.uniform()),
        )
        quad = assemble_psi_quadratic(ch, W, aux, targets)
        theta = symuni_projection(
            rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        )
        lhs = quadratic_objective(quad, vec(theta))
        rhs = objective(W, theta, aux, targets, ch)
        worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-300))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 60
    _report("quadratic-consistency", ok, f"worst_rel_err={worst:.2e} ({elapsed:.0f}s)")


# ------------------------------------------------------------------ 6


def test_criterion_descent_suite():
    """20 full-scale runs descend; exact steps never increase."""
    t0 = time.perf_counter()
    max_frac, max_inc, exact_bad, final_bad = 0.0, 0.0, 0, 0
    for seed in range(20):
        cfg = SystemConfig(seed=seed)
        channels = generate_channels(cfg, np.random.default_rng(seed))
        rep = ao_solve(cfg, channels)
        full = [rep.initial_objective] + rep.objective_trajectory
        final_bad += rep.objective_trajectory[-1] > rep.initial_objective
        incs = [
            (b - a) / max(abs(a), 1e-300)
            for a, b in zip(full[:-1], full[1:])
            if b > a
        ]
        max_frac = max(max_frac, len(incs) / len(rep.objective_trajectory))
        max_inc = max(max_inc, max(incs, default=0.0))
        for s in rep.steps:
            exact_bad += s.after_precoder > s.start * (1 + 1e-9) + 1e-30
            exact_bad += s.after_aux > s.after_phase * (1 + 1e-9) + 1e-30
    elapsed = time.perf_counter() - t0
    ok = (
        final_bad == 0
        and exact_bad == 0
        and max_frac <= 0.10
        and max_inc < 0.01
        and elapsed < 1800
    )
    _report(
        "descent-suite",
        ok,
        f"final_regressions={final_bad} exact_step_increases={exact_bad} "
        f"worst_increase_fraction={max_frac:.2f} worst_increase={max_inc:.2e} "
        f"({elapsed:.0f}s over 20 runs)",
    )


# ------------------------------------------------------------------ 7, 8


def test_criterion_gain_matrix_diagonalization(tmp_path):
    """Diagonal dominance of F strictly increases across eta 0, 0.6, 1."""
    cfg = ExperimentConfig(out_dir=str(tmp_path))
    _, rows = _read_rows(run_gain_matrix_experiment(cfg))
    ratios = [float(r[5]) for r in rows if r[0] == "summary"]
    ok = len(ratios) == 3 and ratios[0] < ratios[1] < ratios[2]
    _report(
        "gain-matrix-diagonalization",
        ok,
        "ratios " + " -> ".join(f"{r:.3g}" for r in ratios),
    )


def test_criterion_beampattern_peak(tmp_path):
    """At eta 0 the beam peak sits within 1 degree of the 45 degree target."""
    cfg = ExperimentConfig(out_dir=str(tmp_path))
    _, rows = _read_rows(run_beampattern_experiment(cfg))
    sweep = [(float(r[1]), float(r[2])) for r in rows if float(r[0]) == 0.0]
    peak_az = max(sweep, key=lambda t: t[1])[0]
    ok = len(sweep) == 181 and abs(peak_az - 45.0) <= 1.0
    _report("beampattern-peak", ok, f"argmax={peak_az:.1f} deg over {len(sweep)} points")


# ------------------------------------------------------------------ 9


@pytest.fixture(scope="session")
def tradeoff_csv(tmp_path_factory):
    out = tmp_path_factory.mktemp("tradeoff")
    t0 = time.perf_counter()
    path = run_tradeoff_experiment(ExperimentConfig(num_trials=20, out_dir=str(out)))
    return path, time.perf_counter() - t0


def _frontier_points(path):
    _, rows = _read_rows(path)
    by = collections.defaultdict(list)
    for r in rows:
        by[r[0]].append((float(r[3]), float(r[2])))
    return {arch: sorted(pts) for arch, pts in by.items()}


def test_criterion_tradeoff_frontier_monotone(tradeoff_csv):
    """Per-architecture rate non-increasing in gain, <= 2 violations."""
    path, elapsed = tradeoff_csv
    by = _frontier_points(path)
    viols = {
        arch: sum(1 for (_, r0), (_, r1) in zip(pts[:-1], pts[1:]) if r1 > r0)
        for arch, pts in by.items()
    }
    ok = (
        set(viols) == {"fbd", "gbd", "dris"}
        and all(v <= 2 for v in viols.values())
        and all(len(p) == 11 for p in by.values())
        and elapsed < 7200
    )
    _report(
        "tradeoff-frontier-monotone",
        ok,
        f"violations={viols} (experiment took {elapsed:.0f}s)",
    )


def test_criterion_tradeoff_architecture_ordering(tradeoff_csv):
    """FBD >= GBD >= D-RIS rate at matched gain for >= 80 percent of points."""
    path, _ = tradeoff_csv
    by = _frontier_points(path)

    def interp(pts, g):
        gains = [p[0] for p in pts]
        rates = [p[1] for p in pts]
        if g < gains[0] or g > gains[-1]:
            return None
        return float(np.interp(g, gains, rates))

    fractions = {}
    for hi, lo in [("fbd", "gbd"), ("gbd", "dris"), ("fbd", "dris")]:
        wins = comps = 0
        for g, r in by[hi]:
            r_lo = interp(by[lo], g)
            if r_lo is not None:
                comps += 1
                wins += r >= r_lo
        for g, r in by[lo]:
            r_hi = interp(by[hi], g)
            if r_hi is not None:
                comps += 1
                wins += r_hi >= r
        fractions[f"{hi}>={lo}"] = wins / max(comps, 1)
    ok = all(frac >= 0.8 for frac in fractions.values())
    _report(
        "tradeoff-architecture-ordering",
        ok,
        " ".join(f"{k}:{v:.2f}" for k, v in fractions.items()),
    )
