"""Acceptance gate: one test, and one pass/fail line, per shipping criterion.

Every tolerance here is pinned. Oracle comparisons use the independent
integrators and arbitrary-precision references from oracles.py, never
the package's own numerics.
"""

import math
import time

import numpy as np
import pytest

from factories import random_system_dissipation
from oracles import coth_reference, rk4_covariance
from qudiff import (HBAR_MEV_S, DissipationParams, SystemParams,
                    algebraic_residuals, asymptotic_energy, diffusion_matrix,
                    drift_matrix, einstein_deviation, gibbs_targets,
                    mean_energy, penetration_probability,
                    propagate_covariance, steady_covariance, trajectory,
                    uncertainty_products, unit_convert)
from qudiff.config import sweep_members
from qudiff.scenarios import get_scenario
from qudiff.transport import (_d_pp_cross, _d_pp_diag, _d_qp_cross,
                              _d_qp_diag, _d_qq_cross, _d_qq_diag)


def test_criterion_01_gibbs_convergence(fig1):
    started = time.perf_counter()
    sigma = steady_covariance(drift_matrix(fig1.system, fig1.dissipation),
                              diffusion_matrix(fig1.system, fig1.dissipation))
    system, d = fig1.system, fig1.dissipation
    for k in range(system.n_modes):
        mw = float(system.eq_mass[k] * system.eq_frequency[k])
        c = coth_reference(float(system.eq_frequency[k]) / (2.0 * d.temperature))
        assert sigma[2 * k, 2 * k] == pytest.approx(c / (2.0 * mw), rel=1e-8)
        assert sigma[2 * k + 1, 2 * k + 1] == pytest.approx(mw * c / 2.0,
                                                            rel=1e-8)
    for a in range(4):
        for b in range(4):
            if a == b:
                continue
            scaled = abs(sigma[a, b]) / math.sqrt(sigma[a, a] * sigma[b, b])
            assert scaled < 1e-8, f"entry ({a},{b})"
    assert time.perf_counter() - started < 1.0


def test_criterion_02_closed_form_matches_rk4_oracle(fig1):
    started = time.perf_counter()
    m = drift_matrix(fig1.system, fig1.dissipation)
    diff = diffusion_matrix(fig1.system, fig1.dissipation)
    t_end = unit_convert(5e-22, "seconds")
    n_steps = 20000
    times, refs = rk4_covariance(m.matrix, diff.matrix, fig1.initial.cov,
                                 t_end, n_steps, sample_every=n_steps // 50)
    worst = 0.0
    for t, ref in zip(times, refs):
        got = propagate_covariance(m, diff, fig1.initial.cov, float(t))
        worst = max(worst, float(np.max(np.abs(got - ref))))
    assert worst <= 1e-6
    assert time.perf_counter() - started < 10.0


def test_criterion_03_off_diagonal_diffusion_necessity(fig1):
    m = drift_matrix(fig1.system, fig1.dissipation)
    full = diffusion_matrix(fig1.system, fig1.dissipation).matrix
    target_qq, _ = gibbs_targets(fig1.system, fig1.dissipation)
    sigma_full = steady_covariance(m, full)
    sigma_zero = steady_covariance(m, np.diag(np.diag(full)))
    rel_full = abs(sigma_full[0, 0] - target_qq[0]) / target_qq[0]
    rel_zero = abs(sigma_zero[0, 0] - target_qq[0]) / target_qq[0]
    assert rel_zero > 0.01
    assert rel_full < 1e-6


def test_criterion_04_stationarity_residuals(fig1):
    report = algebraic_residuals(
        fig1.system, fig1.dissipation,
        diffusion_matrix(fig1.system, fig1.dissipation))
    assert report.max_scaled <= 1e-10
    rng = np.random.default_rng(20260819)
    worst = 0.0
    for i in range(100):
        system, d = random_system_dissipation(
            rng, n=1 + i % 3, distinct_eq=bool(i % 2), with_mu=bool(i % 3))
        rep = algebraic_residuals(system, d, diffusion_matrix(system, d))
        worst = max(worst, rep.max_scaled)
    assert worst <= 1e-10


def test_criterion_05_uncertainty_preservation(fig1):
    traj = trajectory(fig1.system, fig1.dissipation, fig1.initial,
                      fig1.time_grid_internal())
    assert len(traj) == 2000
    floor = 0.25 - 1e-12
    for i in range(len(traj)):
        products = uncertainty_products(traj.state(i))
        assert float(np.min(products)) >= floor, f"sample {i}"


def test_criterion_06_fluctuation_dissipation(fig1):
    hot = DissipationParams(lam=fig1.dissipation.lam,
                            alpha=fig1.dissipation.alpha,
                            eta=fig1.dissipation.eta, temperature=500.0)
    report = einstein_deviation(fig1.system, hot)
    assert all(dev is not None and dev < 1e-3 for dev in report.mode)
    cross = np.array([[2.0, 0.3], [0.3, 2.0]])
    hot_cross = DissipationParams(lam=cross, alpha=fig1.dissipation.alpha,
                                  eta=fig1.dissipation.eta, temperature=500.0)
    pair = einstein_deviation(fig1.system, hot_cross).pair
    defined = [v for row in pair for v in row if v is not None]
    assert defined
    assert max(defined) < 1e-3


def test_criterion_07_trapping_and_ordering(fig10):
    p0_ref = 0.5 * math.erfc(6.0 / math.sqrt(0.8))
    grid = fig10.time_grid_internal()
    finals = []
    for tag, system, d in sweep_members(fig10):
        traj = trajectory(system, d, fig10.initial, grid)
        p0 = penetration_probability(traj.state(0), 0)
        assert p0 == pytest.approx(p0_ref, rel=1e-10), tag
        finals.append(penetration_probability(traj.state(len(traj) - 1), 0))
    assert all(a < b for a, b in zip(finals, finals[1:]))
    assert abs(finals[-1] - 0.5) < 0.02


def test_criterion_08_energy_conventions(fig1, fig10):
    cold = DissipationParams(lam=fig1.dissipation.lam,
                             alpha=fig1.dissipation.alpha,
                             eta=fig1.dissipation.eta, temperature=1e-9)
    zero_point = 0.5 * float(np.sum(fig1.system.eq_frequency))
    assert asymptotic_energy(fig1.system, cold) == pytest.approx(
        zero_point, rel=1e-10)
    e0 = mean_energy(fig10.system, fig10.initial)
    assert e0 == pytest.approx(-115.9, abs=0.5)


def test_criterion_09_reduction_property():
    # Cross-entry formulas with both partners set to one mode's values,
    # and the coupling constants standing in for the potential and
    # kinetic terms, must reproduce the diagonal formulas.
    for big_m, big_w, m, w, lam, mu, arg in (
            (3.0, 2.0, 2.2, 1.5, 1.5, 0.4, 0.5),
            (461.6344, 2.9468, 400.0, 3.1, 2.0, 0.0, 0.29),
            (0.7, 4.0, 1.1, 3.6, 0.9, -0.2, 1.8)):
        mw = m * w
        c = coth_reference(arg)
        assert _d_qq_cross(lam, mu, lam, mu, mw, mw, c, c) == pytest.approx(
            _d_qq_diag(lam, mu, mw, c), rel=1e-12)
        assert _d_pp_cross(lam, mu, lam, mu, mw, mw, c, c) == pytest.approx(
            _d_pp_diag(lam, mu, mw, c), rel=1e-12)
        got = _d_qp_cross(0.0, big_m * big_w**2, 0.0, 1.0 / big_m, mw, mw,
                          c, c)
        want = _d_qp_diag(big_m * big_w, big_m, mw, c)
        assert want != 0.0
        assert got == pytest.approx(want, rel=1e-12)
    # Same collapse through the public API: a cloned pair's cross block
    # equals the single mode's diagonal block.
    big_m, big_w, m, w = 3.0, 2.0, 2.2, 1.5
    single = SystemParams(n_modes=1, mass=[big_m], frequency=[big_w],
                          eq_mass=[m], eq_frequency=[w], mu=[[0.4]])
    pair = SystemParams(
        n_modes=2, mass=[big_m, big_m], frequency=[big_w, big_w],
        eq_mass=[m, m], eq_frequency=[w, w], mu=np.full((2, 2), 0.4),
        nu=[[0.0, big_m * big_w**2], [big_m * big_w**2, 0.0]],
        kappa=[[0.0, 1.0 / big_m], [1.0 / big_m, 0.0]])
    d_one = DissipationParams(lam=[[1.5]], alpha=[[0.0]], eta=[[0.0]],
                              temperature=1.5)
    d_two = DissipationParams(lam=np.full((2, 2), 1.5),
                              alpha=np.zeros((2, 2)), eta=np.zeros((2, 2)),
                              temperature=1.5)
    block_one = diffusion_matrix(single, d_one).matrix
    block_two = diffusion_matrix(pair, d_two).matrix
    assert block_two[0, 2] == pytest.approx(block_one[0, 0], rel=1e-12)
    assert block_two[1, 3] == pytest.approx(block_one[1, 1], rel=1e-12)
    assert block_two[0, 3] == pytest.approx(block_one[0, 1], rel=1e-12)


def test_criterion_10_sign_symmetry_mirrors(fig1):
    mass = fig1.system.mass
    freq = fig1.system.frequency

    def pair_system(nu12=0.0, kappa12=0.0):
        off = np.array([[0.0, 1.0], [1.0, 0.0]])
        return SystemParams(n_modes=2, mass=mass, frequency=freq,
                            nu=nu12 * off, kappa=kappa12 * off)

    grid = np.linspace(0.0, unit_convert(5e-22, "seconds"), 400)

    def cross_trace(system):
        traj = trajectory(system, fig1.dissipation, fig1.initial, grid)
        return np.array([traj.covs[i][0, 2] for i in range(len(traj))])

    kappa12 = 20e38 * HBAR_MEV_S**2
    for make in (lambda s: pair_system(nu12=s * 3000.0),
                 lambda s: pair_system(kappa12=s * kappa12)):
        plus = cross_trace(make(+1.0))
        minus = cross_trace(make(-1.0))
        assert float(np.max(np.abs(plus))) > 1e-6
        assert float(np.max(np.abs(plus + minus))) <= 1e-8


def test_criterion_11_figplots_renders(tmp_path):
    from figplots.density import main as density_main
    from figplots.traces import main as traces_main
    from qudiff.cli import main as qudiff_main
    from qudiff.scenarios import SCENARIO_NAMES

    out = tmp_path / "runs"
    trace_csvs, density_csvs = [], []
    for name in SCENARIO_NAMES:
        cfg = get_scenario(name)
        if cfg.system.barrier_modes:
            rc = qudiff_main(["tunnel", "--scenario", name,
                              "--out", str(out), "--grid", "15"])
        else:
            rc = qudiff_main(["simulate", "--scenario", name,
                              "--out", str(out)])
        assert rc == 0, name
    for path in sorted(out.iterdir()):
        if path.suffix != ".csv":
            continue
        (density_csvs if "_density_" in path.name else trace_csvs).append(path)
    assert len(trace_csvs) >= 10
    assert density_csvs

    images = tmp_path / "img"
    images.mkdir()
    for csv_path in trace_csvs:
        header = csv_path.read_text().splitlines()[0].split(",")
        columns = "P" if "P" in header else "sigma_q1q1"
        svg = images / (csv_path.stem + ".svg")
        rc = traces_main([str(csv_path), "--columns", columns,
                          "--out", str(svg)])
        assert rc == 0, csv_path.name
        assert svg.exists()
    for csv_path in density_csvs:
        svg = images / (csv_path.stem + ".svg")
        assert density_main([str(csv_path), "--out", str(svg)]) == 0
        assert svg.exists()

    # The baseline trace plot must carry its asymptote overlay, read
    # from the summary JSON rather than recomputed.
    fig1_svg = images / "fig1_with_asymptote.svg"
    rc = traces_main([str(out / "fig1.csv"),
                      "--columns", "sigma_q1q1,sigma_q2q2",
                      "--summary", str(out / "fig1_summary.json"),
                      "--out", str(fig1_svg)])
    assert rc == 0
    assert "Gibbs" in fig1_svg.read_text()
