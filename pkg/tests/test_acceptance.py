"""End-to-end acceptance checks.

Each test prints one PASS/FAIL summary line (bypassing capture) so a full
run shows the status of every criterion at a glance.
"""

import time

import numpy as np
import pytest
from click.testing import CliRunner

from rgopkit import (
    AutocorrelationSpec,
    CorrelationKind,
    GrowthQuery,
    Portfolio,
    ProjectedMoments,
    ReturnPaths,
    SimulationConfig,
    actual_growth_rate,
    aggregate_rho,
    approx_growth_rate_general,
    compare_strategies,
    feasibility_margin,
    four_asset_moments,
    industry_moments,
    random_circulant_spec,
    rgop,
    sample_paths,
    worst_case_growth_rate,
)
from rgopkit.circulant import (
    CirculantVector,
    cosine_sum,
    eigenvalues_symmetric,
    materialize,
)
from rgopkit.cli import main as cli_main
from rgopkit.conic import (
    build_socp,
    compound_symmetric_projection,
    evaluate_point,
    sdp_growth_rate,
    solve_conic,
)
from rgopkit.conic.problem import SolveStatus
from rgopkit.fixtures import LOW_VARIANCE_ASSETS


def report(capfd, number, ok, detail):
    with capfd.disabled():
        status = "PASS" if ok else "FAIL"
        print(f"[acceptance {number:2d}] {status}  {detail}")
    assert ok, detail


def draw_feasible_circulant(rng):
    """Random scalar-moment instance on a random valid cyclic lag profile,
    kept clear of the closed form's feasibility boundary."""
    while True:
        T = int(rng.integers(2, 11))
        spec = random_circulant_spec(rng, T)
        mean = float(rng.uniform(0.0, 0.3))
        sd = float(rng.uniform(0.01, 0.3))
        eps = float(rng.uniform(0.05, 0.5))
        p = ProjectedMoments(mean, sd * sd, spec)
        q = GrowthQuery(eps, T)
        if feasibility_margin(p, aggregate_rho(spec), q) > 1e-2:
            return p, q


@pytest.fixture(scope="module")
def oracle_chain():
    """50 shared random instances with closed-form, dense-cone, and
    cone-reduction values plus the raw reduction optimizers."""
    rng = np.random.default_rng(8140001)
    instances = [draw_feasible_circulant(rng) for _ in range(50)]

    t0 = time.perf_counter()
    closed = []
    sdp = []
    for p, q in instances:
        closed.append(approx_growth_rate_general(p, q).growth_rate)
        sdp.append(sdp_growth_rate(p, q))
    sdp_seconds = time.perf_counter() - t0

    socp = []
    for p, q in instances:
        prob = build_socp(p, q)
        sol = solve_conic(prob, tol=1e-9)
        assert sol.status is SolveStatus.OPTIMAL
        socp.append((prob, sol, q.horizon))
    return {
        "instances": instances,
        "closed": closed,
        "sdp": sdp,
        "socp": socp,
        "sdp_seconds": sdp_seconds,
    }


def test_01_closed_form_matches_dense_cone_oracle(oracle_chain, capfd):
    gaps = [
        abs(g_closed - g_sdp) / max(1.0, abs(g_closed))
        for g_closed, g_sdp in zip(oracle_chain["closed"], oracle_chain["sdp"])
    ]
    elapsed = oracle_chain["sdp_seconds"]
    ok = max(gaps) <= 1e-5 and elapsed <= 60.0
    report(
        capfd,
        1,
        ok,
        f"closed form vs dense cone: max scaled gap {max(gaps):.2e} "
        f"(tol 1e-05) on 50 instances in {elapsed:.1f}s (limit 60s)",
    )


def test_02_cone_reduction_value_and_projection(oracle_chain, capfd):
    value_gaps = []
    objective_shifts = []
    worst_residuals = []
    for g_sdp, (prob, sol, T) in zip(oracle_chain["sdp"], oracle_chain["socp"]):
        value_gaps.append(abs(sol.objective_value - g_sdp))
        projected = compound_symmetric_projection(sol.variables, T)
        before = evaluate_point(prob, sol.variables)
        after = evaluate_point(prob, projected)
        objective_shifts.append(
            abs(after.objective_value - before.objective_value)
        )
        worst_residuals.append(after.worst)
    ok = (
        max(value_gaps) <= 1e-5
        and max(objective_shifts) <= 1e-6
        and max(worst_residuals) <= 1e-6
    )
    report(
        capfd,
        2,
        ok,
        f"cone reduction: max value gap {max(value_gaps):.2e} (tol 1e-05); "
        f"projection shifts objective by {max(objective_shifts):.2e} and "
        f"leaves residual {max(worst_residuals):.2e} (tol 1e-06)",
    )


def zero_lag_sum_circulant(rng, T):
    """Positive symmetric spectrum whose zero-frequency eigenvalue equals
    the spectral mean, which forces the nonzero lags to sum to zero."""
    lam = rng.uniform(0.1, 2.0, size=T)
    lam[1:] = 0.5 * (lam[1:] + lam[1:][::-1])
    lam[0] = lam[1:].sum() / (T - 1)
    t = np.arange(T)
    rho = np.cos(2.0 * np.pi * np.outer(t, t) / T) @ lam / T
    return AutocorrelationSpec(rho / rho[0])


def test_03_zero_sum_lags_leave_growth_unchanged(capfd):
    rng = np.random.default_rng(8140003)
    worst = 0.0
    for _ in range(100):
        T = int(rng.integers(2, 13))
        spec = zero_lag_sum_circulant(rng, T)
        mean = float(rng.uniform(0.0, 0.3))
        sd = float(rng.uniform(0.01, 0.3))
        eps = float(rng.uniform(0.05, 0.5))
        q = GrowthQuery(eps, T)
        g = approx_growth_rate_general(
            ProjectedMoments(mean, sd * sd, spec), q
        ).growth_rate
        flat = AutocorrelationSpec.constant(T, 0.0)
        g0 = worst_case_growth_rate(
            ProjectedMoments(mean, sd * sd, flat), 0.0, q
        ).growth_rate
        worst = max(worst, abs(g - g0))
    ok = worst <= 1e-9
    report(
        capfd,
        3,
        ok,
        f"zero-sum lag profiles: max |G - G(rho=0)| = {worst:.2e} "
        f"(tol 1e-09) over 100 instances",
    )


def random_toeplitz(rng, T, lo=0.0, hi=0.2):
    while True:
        rho = np.concatenate([[1.0], rng.uniform(lo, hi, size=T - 1)])
        spec = AutocorrelationSpec(rho, CorrelationKind.TOEPLITZ)
        if np.linalg.eigvalsh(spec.matrix()).min() > 1e-8:
            return spec


def test_04_aggregate_shortcut_is_a_lower_bound(capfd):
    rng = np.random.default_rng(8140004)
    rel_errors = []
    sign_ok = True
    for T in (4, 8, 12):
        q = GrowthQuery(0.15, T)
        for _ in range(20):
            spec = random_toeplitz(rng, T)
            p = ProjectedMoments(0.15, 0.20**2, spec)
            g_apx = approx_growth_rate_general(p, q).growth_rate
            g_exact = sdp_growth_rate(p, q)
            sign_ok = sign_ok and (g_exact >= g_apx - 1e-7)
            rel_errors.append((g_apx - g_exact) / abs(g_exact))
    median = float(np.median(rel_errors))
    report(
        capfd,
        4,
        sign_ok,
        f"non-wrapping profiles: dense value >= shortcut - 1e-07 in all "
        f"60 cases; median relative error {median:.2e}",
    )


def test_05_risk_decomposition_identity(capfd):
    rng = np.random.default_rng(8140005)
    worst = 0.0
    done = 0
    while done < 1000:
        T = int(rng.integers(2, 61))
        rho_bar = float(rng.uniform(-0.95 / (T - 1), 0.95))
        mean = float(rng.uniform(0.0, 0.3))
        sd = float(rng.uniform(0.01, 0.3))
        eps = float(rng.uniform(0.05, 0.5))
        q = GrowthQuery(eps, T)
        spec = AutocorrelationSpec.constant(T, rho_bar)
        p = ProjectedMoments(mean, sd * sd, spec)
        if feasibility_margin(p, rho_bar, q) <= 1e-6:
            continue
        res = worst_case_growth_rate(p, rho_bar, q)
        worst = max(
            worst,
            abs(res.persistent_risk + res.compounding_risk + res.growth_rate),
        )
        done += 1
    ok = worst <= 1e-10
    report(
        capfd,
        5,
        ok,
        f"persistent + compounding = -G: max |residual| = {worst:.2e} "
        f"(tol 1e-10) over 1000 instances",
    )


def test_06_industry_optimum_shifts_to_low_variance(capfd):
    t0 = time.perf_counter()
    m = industry_moments()
    q = GrowthQuery(0.20, 360)
    grid = (0.0, 0.05, 0.10, 0.15, 0.20)
    variances = []
    final_weights = None
    for rho_bar in grid:
        res = rgop(m, rho_bar, q)
        w = res.portfolio.weights
        variances.append(float(w @ m.sigma @ w))
        final_weights = w
    elapsed = time.perf_counter() - t0
    monotone = all(
        variances[i] >= variances[i + 1] - 1e-12 for i in range(len(grid) - 1)
    )
    support = set(np.nonzero(final_weights > 1e-4)[0].tolist())
    concentrated = bool(support) and support <= set(LOW_VARIANCE_ASSETS)
    ok = monotone and concentrated and elapsed <= 30.0
    report(
        capfd,
        6,
        ok,
        f"ten-asset calibration: variance non-increasing {monotone}, "
        f"support at 0.20 = {sorted(support)} within "
        f"{sorted(LOW_VARIANCE_ASSETS)}, {elapsed:.1f}s (limit 30s)",
    )


def test_07_simulated_outperformance_positive_and_fading(capfd):
    t0 = time.perf_counter()
    m = four_asset_moments()
    horizons = (12, 24, 48)
    outs = []
    for T in horizons:
        rho_bar = -1.0 / T
        q = GrowthQuery(0.10, T)
        w_aware = rgop(m, rho_bar, q).portfolio
        w_blind = rgop(m, 0.0, q).portfolio
        cfg = SimulationConfig(
            moments=m,
            spec=AutocorrelationSpec.constant(T, rho_bar),
            epsilon=0.10,
            scenarios=10_000,
            seed=5,
        )
        paths = sample_paths(cfg)
        outs.append(compare_strategies(paths, w_aware, w_blind, 0.10))
    elapsed = time.perf_counter() - t0
    positive = all(o > 0 for o in outs)
    fading = all(outs[i] >= outs[i + 1] for i in range(len(outs) - 1))
    ok = positive and fading and elapsed <= 300.0
    report(
        capfd,
        7,
        ok,
        "four-asset simulation: outperformance "
        + ", ".join(f"T={T}: {o:+.4f}" for T, o in zip(horizons, outs))
        + f"; positive {positive}, non-increasing {fading}, "
        f"{elapsed:.1f}s (limit 300s)",
    )


def test_08_circulant_spectrum_and_cosine_identity(capfd):
    rng = np.random.default_rng(8140008)
    worst_eig = 0.0
    for T in (2, 3, 4, 8, 16, 64):
        for _ in range(100):
            first = rng.normal(size=T)
            first[1:] = 0.5 * (first[1:] + first[1:][::-1])
            c = CirculantVector(first)
            lam = np.sort(eigenvalues_symmetric(c))
            dense = np.sort(np.linalg.eigvalsh(materialize(c)))
            scale = 1e-9 * (1.0 + float(np.linalg.norm(first)))
            worst_eig = max(worst_eig, float(np.abs(lam - dense).max()) / scale)
    eig_ok = worst_eig <= 1.0

    worst_cos = 0.0
    for T in range(1, 1025):
        for j in range(T):
            want = float(T) if j == 0 else 0.0
            worst_cos = max(worst_cos, abs(cosine_sum(j, T) - want) / T)
    cos_ok = worst_cos <= 1e-10

    ok = eig_ok and cos_ok
    report(
        capfd,
        8,
        ok,
        f"spectrum vs dense eigensolver: worst ratio to budget "
        f"{worst_eig:.2e} (<=1); cosine sums off by {worst_cos:.2e}*T "
        f"(tol 1e-10*T) for all T <= 1024",
    )


def constant_paths(returns):
    """One-asset, one-period paths whose per-scenario growth values are
    exactly r - r^2/2 for the given returns."""
    r = np.asarray(returns, dtype=float)
    return ReturnPaths(r.reshape(-1, 1, 1))


def test_09_shortfall_quantile_is_an_order_statistic(capfd):
    rng = np.random.default_rng(8140009)
    solo = Portfolio(np.array([1.0]))
    r = rng.uniform(-0.5, 0.5, size=10)
    growth = np.sort(r - 0.5 * r * r)
    paths = constant_paths(r)
    cases = [
        (0.25, growth[2]),  # ceil(2.5) = 3rd smallest
        (0.30, growth[2]),  # integer 3 stays the 3rd
        (0.05, growth[0]),  # ceil(0.5) = the minimum
        (0.999, growth[9]),  # ceil(9.99) = the maximum
    ]
    exact = all(
        actual_growth_rate(paths, solo, eps) == want for eps, want in cases
    )

    seven = rng.uniform(-0.5, 0.5, size=7)
    g7 = np.sort(seven - 0.5 * seven * seven)
    exact = exact and actual_growth_rate(constant_paths(seven), solo, 0.4) == g7[2]

    invariant = True
    base = actual_growth_rate(paths, solo, 0.25)
    for _ in range(100):
        shuffled = constant_paths(rng.permutation(r))
        invariant = invariant and (
            actual_growth_rate(shuffled, solo, 0.25) == base
        )
    ok = exact and invariant
    report(
        capfd,
        9,
        ok,
        f"shortfall quantile: hand-built order statistics exact {exact}; "
        f"invariant under 100 scenario shuffles {invariant}",
    )


def test_10_simulate_cli_is_byte_deterministic(tmp_path, capfd):
    config = tmp_path / "sim.json"
    config.write_text('{"horizons": [12], "scenarios": 1000}')
    runner = CliRunner()
    args = [
        "simulate",
        "--config",
        str(config),
        "--seed",
        "20260814",
        "--format",
        "csv",
    ]
    first = runner.invoke(cli_main, args)
    second = runner.invoke(cli_main, args)
    ok = (
        first.exit_code == 0
        and second.exit_code == 0
        and len(first.stdout_bytes) > 0
        and first.stdout_bytes == second.stdout_bytes
    )
    report(
        capfd,
        10,
        ok,
        f"simulate CLI rerun: {len(first.stdout_bytes)} bytes, "
        f"identical {first.stdout_bytes == second.stdout_bytes}",
    )
