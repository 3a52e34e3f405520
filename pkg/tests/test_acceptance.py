"""Acceptance criteria, one test per criterion.

Each test records a ``PASS``/``FAIL`` line in ``RESULTS``; the lines are
printed in the pytest terminal summary and by ``python3 tests/test_acceptance.py``.
"""

from dataclasses import replace
import time

import numpy as np
import pytest

from qobserver.bench import load_scenario, robust_control_gain, robust_synthesis_at, run_table
from qobserver.campaigns import bound_campaign, lemma_campaign
from qobserver.estimators import (
    RobustTuning,
    kalman_limit_epsilons,
    kalman_observer_realization,
    kalman_stationary,
    lqg_stationary_gain,
    riccati2_lhs,
    risk_stationary,
    robust_synthesize,
    uncertainty_margin,
)
from qobserver.evaluation import augment, simulate_filter_trajectory, stationary_error
from qobserver.model import SIGMA, UncertaintyBounds, derive_matrices, worst_case_realization

RESULTS = {}

PUBLISHED = {
    "anti-harmonic": {
        "kal": (1.43, 2.38, 40.88, None, None, None),
        "rsk": (1.48, 1.82, 2.21, 3.19, 6.07, 61.27),
        "rob": (1.73, 3.32, 4.74, 7.04, 10.12, 14.13),
    },
    "harmonic": {
        "kal": (1.40, 1.37, 1.40, 1.44, 1.47, 1.50),
        "rsk": (1.44, 1.38, 1.38, 1.39, 1.40, 1.41),
        "rob": (1.68, 3.23, 4.79, 6.84, 9.80, 14.48),
    },
}
SCENARIOS = ("anti-harmonic", "harmonic")


def record(number, title, passed, detail):
    RESULTS[number] = f"{'PASS' if passed else 'FAIL'} criterion {number} ({title}): {detail}"
    return passed


@pytest.fixture(scope="module")
def scenarios():
    return {name: load_scenario(name) for name in SCENARIOS}


# 1 ---------------------------------------------------------------------------

def test_nominal_columns(scenarios):
    start = time.perf_counter()
    rows = {name: run_table(replace(s, g_grid=(0.0,)))[0] for name, s in scenarios.items()}
    elapsed = time.perf_counter() - start
    failures = []
    for name, row in rows.items():
        for column, tol in (("kal", 0.02), ("rsk", 0.02), ("rob", 0.05)):
            got, want = getattr(row, column), PUBLISHED[name][column][0]
            if got is None or abs(got - want) > tol:
                failures.append(f"{name} {column}={got} vs {want}")
    detail = ", ".join(
        f"{name}: KAL {r.kal:.4f} RSK {r.rsk:.4f} ROB {r.rob:.4f}" for name, r in rows.items()
    ) + f"; {elapsed:.2f}s"
    ok = not failures and elapsed < 5.0
    assert record(1, "nominal columns", ok, detail if ok else "; ".join(failures) + f"; {elapsed:.2f}s")


# 2 ---------------------------------------------------------------------------

def _within(got, want, number_tol=0.05):
    return got is not None and abs(got - want) <= max(number_tol * abs(want), 0.05)


def _table_mismatches(name, rows):
    bad = []
    for i, row in enumerate(rows):
        for column in ("kal", "rsk", "rob"):
            want, got = PUBLISHED[name][column][i], getattr(row, column)
            if want is None:
                if got is not None:
                    bad.append(f"{name} g={row.g} {column}: {got:.4g} vs N/A")
                continue
            if name == "anti-harmonic" and column == "rsk" and row.g == 0.97:
                ok = got is not None and got >= 30 and abs(got - want) <= 0.3 * want
            else:
                ok = _within(got, want)
            if not ok:
                bad.append(f"{name} g={row.g} {column}: {got} vs {want}")
    return bad


def test_full_tables(scenarios):
    start = time.perf_counter()
    tables = {name: run_table(s) for name, s in scenarios.items()}
    elapsed = time.perf_counter() - start
    mismatches = [m for name, rows in tables.items() for m in _table_mismatches(name, rows)]
    na = {row.g for row in tables["anti-harmonic"] if row.kal is None}
    # the other documented convention must not also match
    alternate = {name: run_table(replace(s, convention="alternate")) for name, s in scenarios.items()}
    alternate_matches = not any(_table_mismatches(name, rows) for name, rows in alternate.items())
    ok = not mismatches and na == {0.6, 0.8, 0.97} and elapsed < 60.0 and not alternate_matches
    detail = (
        f"primary convention, {sum(len(r) for r in tables.values()) * 3} cells within tolerance, "
        f"anti-harmonic KAL N/A at {sorted(na)}, alternate convention matches: {alternate_matches}; {elapsed:.2f}s"
    )
    assert record(2, "full tables", ok, detail if ok else "; ".join(mismatches) + f"; N/A {sorted(na)}; {elapsed:.2f}s")


# 3 ---------------------------------------------------------------------------

def test_robust_bound_guarantee(scenarios):
    worst_slack, failures = np.inf, []
    for name, s in scenarios.items():
        L = robust_control_gain(s)
        for g in s.g_grid:
            synth = robust_synthesis_at(s, g, L=L)
            result = stationary_error(augment(s.model, worst_case_realization(g, s.deltaG_sign), synth.observer))
            if not result.stable or result.error > synth.trace_bound + 1e-6:
                failures.append(f"{name} g={g}: {result.verdict} {result.error} vs {synth.trace_bound}")
            else:
                worst_slack = min(worst_slack, synth.trace_bound - result.error)
    ok = not failures
    assert record(3, "robust bound", ok, f"12 cells, smallest Tr P2 - error = {worst_slack:.4f}" if ok else "; ".join(failures))


# 4 ---------------------------------------------------------------------------

def test_degeneration(scenarios):
    gaps, distances = [], {}
    for name, s in scenarios.items():
        V0, obs0, K0 = risk_stationary(s.model, s.weights, 0.0)
        V, gain, _ = kalman_stationary(s.model)
        K, L = lqg_stationary_gain(s.model, s.weights)
        kal = kalman_observer_realization(s.model, s.weights)
        gaps += [np.abs(V0 - V).max(), np.abs(K0 - K).max(), np.abs(obs0.k - gain).max(),
                 np.abs(obs0.L - L).max(), np.abs(obs0.R - kal.R).max()]
        Lrob = robust_control_gain(s)
        series = []
        for n in range(1, 7):
            scale = 10.0 ** -n
            bounds = UncertaintyBounds(max(s.g_grid) * scale)
            synth = robust_synthesize(s.model, bounds, Lrob, RobustTuning(scale, scale, kalman_limit_epsilons(bounds)))
            series.append(np.linalg.norm(synth.observer.k - kal.k) + np.linalg.norm(synth.observer.R - kal.R))
        distances[name] = series
    identity_ok = max(gaps) <= 1e-8
    limit_ok = all(np.all(np.diff(d) < 0) and d[-1] <= 1e-2 for d in distances.values())
    detail = f"mu=0 max gap {max(gaps):.2e}; limit distance at 1e-6: " + ", ".join(
        f"{name} {d[-1]:.2e}" for name, d in distances.items()
    )
    assert record(4, "degeneration", identity_ok and limit_ok, detail)


# 5 ---------------------------------------------------------------------------

def test_bound_campaign(scenarios):
    start = time.perf_counter()
    reports = {}
    for name, s in scenarios.items():
        bounds = UncertaintyBounds(max(s.g_grid), 0.05, 0.05)
        reports[name] = bound_campaign(s.model, bounds, n_samples=10_000, n_x=10, seed=s.seed, slack=1e-8)
    elapsed = time.perf_counter() - start
    violations = sum(r.violations for rep in reports.values() for r in rep.values())
    ok = violations == 0 and elapsed < 30.0
    worst = min(r.worst_margin for rep in reports.values() for r in rep.values())
    assert record(5, "perturbation bounds", ok, f"{violations} violations, worst margin {worst:.2e}; {elapsed:.2f}s")


# 6 ---------------------------------------------------------------------------

def test_lemma_campaign():
    report = lemma_campaign(n_instances=100, seed=0, t_end=250.0, t_check=200.0, slack=1e-6)
    assert record(6, "stationary bound lemma", report.passed,
                  f"{report.violations}/{report.checks} violations, worst margin {report.worst_margin:.2e}")


# 7 ---------------------------------------------------------------------------

def _rel(lhs, *terms):
    return np.linalg.norm(lhs) / max(1.0, *(np.linalg.norm(t) for t in terms))


def test_solver_hygiene(scenarios):
    residuals, margins = [], []
    for s in scenarios.values():
        dm, hbar, w = derive_matrices(s.model), s.model.hbar, s.weights
        A, F, D, m, B = dm.A, dm.F, dm.D, dm.m, s.model.B

        V, gain, _ = kalman_stationary(s.model)
        innov = V @ F.T + hbar * m
        residuals.append(_rel(A @ V + V @ A.T + D - innov @ innov.T / hbar, A @ V, D, innov @ innov.T))
        margins.append(uncertainty_margin(V, hbar))

        K, _ = lqg_stationary_gain(s.model, w)
        quad = (2 / w.r) * K @ B @ B.T @ K
        residuals.append(_rel(K @ A + A.T @ K - quad + w.M / 2, K @ A, quad, w.M))

        Vr, obs, Kr = risk_stationary(s.model, w, s.mu)
        innov = Vr @ F.T + hbar * m
        extra = s.mu * (Vr @ w.M @ Vr - hbar ** 2 / 4 * SIGMA.T @ w.M @ SIGMA)
        residuals.append(_rel(A @ Vr + Vr @ A.T + D - innov @ innov.T / hbar + extra, A @ Vr, D, innov @ innov.T, extra))
        margins.append(uncertainty_margin(Vr, hbar))
        b = obs.k
        lhs = (Kr @ A + A.T @ Kr - (2 / w.r) * Kr @ B @ B.T @ Kr + w.M / 2
               + 2 * s.mu * Kr @ b @ b.T @ Kr + s.mu * (Kr @ Vr @ w.M + w.M @ Vr @ Kr))
        residuals.append(_rel(lhs, Kr @ A, (2 / w.r) * Kr @ B @ B.T @ Kr, w.M))

        observers = [kalman_observer_realization(s.model, w), obs]
        L = robust_control_gain(s)
        for g in s.g_grid:
            synth = robust_synthesis_at(s, g, L=L)
            it, P1, P2 = synth.intermediates, synth.P1, synth.P2
            Acl = A + B @ L
            rhs = it["D_prime"] + synth.tuning.delta1 * np.eye(2)
            residuals.append(_rel(Acl @ P1 + P1 @ Acl.T + P1 @ it["Q1"] @ P1 + rhs, Acl @ P1, P1 @ it["Q1"] @ P1, rhs))
            residuals.append(_rel(riccati2_lhs(synth, s.model, synth.tuning), it["A_prime"] @ P2, it["D_prime"]))
            observers.append(synth.observer)
        for g in s.g_grid:
            u = worst_case_realization(g, s.deltaG_sign)
            for observer in observers:
                aug = augment(s.model, u, observer)
                result = stationary_error(aug)
                if result.stable:
                    W = result.Wbar
                    residuals.append(_rel(aug.Abar @ W + W @ aug.Abar.T + aug.Dbar, aug.Abar @ W, aug.Dbar))
                    margins.append(uncertainty_margin(W, hbar))
    ok = max(residuals) <= 1e-8 and min(margins) >= -1e-9
    assert record(7, "solver hygiene", ok,
                  f"{len(residuals)} solutions, max relative residual {max(residuals):.2e}, "
                  f"min uncertainty margin {min(margins):.2e} over {len(margins)} covariances")


# 8 ---------------------------------------------------------------------------

def test_feedback_trajectories(scenarios):
    s = scenarios["anti-harmonic"]
    obs = kalman_observer_realization(s.model, s.weights)
    x0 = np.array([1.0, 0.0])
    threshold = 100 * np.abs(x0).max() + 1
    diverged = bounded = 0
    for seed in range(100):
        t, x = simulate_filter_trajectory(s.model, obs, use_control=False, x0=x0, t_end=20.0, seed=seed)
        diverged += bool((np.abs(x[t < 20.0, 0]) > threshold).any())
        _, x = simulate_filter_trajectory(s.model, obs, use_control=True, x0=x0, t_end=20.0, seed=seed)
        bounded += bool(np.abs(x[:, 0]).max() <= 5.0)
    ok = diverged >= 90 and bounded >= 90
    assert record(8, "feedback trajectories", ok,
                  f"uncontrolled diverged {diverged}/100, controlled bounded {bounded}/100")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
