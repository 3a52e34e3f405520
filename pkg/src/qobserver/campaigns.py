"""Randomized property campaigns behind ``qobserver check``.

Each campaign returns a :class:`CampaignReport`; a campaign passes when no
sample has a margin below ``-slack``.
"""

from dataclasses import dataclass

import numpy as np

from .bounds import barred_bound_matrices, bound_matrices
from .estimators import kalman_stationary
from .evaluation import AugmentedSystem, lemma_b_check, transient_covariance
from .model import delta_diffusion, delta_drift, delta_m, delta_output, sample_admissible
from .riccati import solve_lyapunov

__all__ = ["CampaignReport", "bound_campaign", "lemma_campaign"]

CAMPAIGN_SLACK = 1e-8


@dataclass(frozen=True)
class CampaignReport:
    name: str
    checks: int
    violations: int
    worst_margin: float

    @property
    def passed(self):
        return self.violations == 0


def _report(name, margins, slack):
    margins = np.asarray(margins, dtype=float).ravel()
    return CampaignReport(name, margins.size, int((margins < -slack).sum()), float(margins.min()))


def _random_spd(rng, n, low=0.05):
    Q = np.linalg.qr(rng.standard_normal((n, n)))[0]
    return (Q * rng.uniform(low, 3.0, n)) @ Q.T


def _stacked_deltas(parts, k, hbar):
    # batched delta_abar / delta_dbar
    dA, dF, dD, dm = parts
    n = dA.shape[0]
    zero = np.zeros((n, 2, 2))
    Abar = np.block([[dA, zero], [dA - k @ dF, zero]])
    mk = dm @ k.T
    cross = np.block([[zero, mk], [np.swapaxes(mk, -1, -2), mk + np.swapaxes(mk, -1, -2)]])
    Dbar = np.block([[dD, dD], [dD, dD]]) - hbar * cross
    return Abar, Dbar


def bound_campaign(model, bounds, n_samples=10_000, n_x=10, seed=0, slack=CAMPAIGN_SLACK):
    """Check the three perturbation bounds on sampled admissible uncertainties.

    Every sampled uncertainty is tested against ``n_x`` random positive
    definite ``Xbar``, each paired with random weights ``eps`` and a random
    observer gain ``k`` around the Kalman gain.

    Returns
    -------
    dict of CampaignReport
        Keys ``basic``, ``ineq1`` and ``ineq2``.
    """
    rng = np.random.default_rng(seed)
    _, k0, _ = kalman_stationary(model)
    us = [sample_admissible(bounds, s) for s in rng.integers(0, 2**63 - 1, size=n_samples)]

    basic = []
    for u in us:
        X = rng.standard_normal((2, 2))
        Y = rng.standard_normal((2, 2))
        e = 10.0 ** rng.uniform(-2, 2)
        gap = e * X.T @ X + Y.T @ Y / e - X.T @ Y - Y.T @ X
        basic.append(gap)
    basic = np.linalg.eigvalsh(np.array(basic)).min(axis=-1)

    parts = [
        np.array([delta_drift(model, u) for u in us]),
        np.array([delta_output(u) for u in us]),
        np.array([delta_diffusion(model, u) for u in us]),
        np.array([delta_m(u) for u in us]),
    ]
    ineq1 = np.empty((n_x, n_samples))
    ineq2 = np.empty((n_x, n_samples))
    for j in range(n_x):
        eps = tuple(10.0 ** rng.uniform(-2, 1, size=8))
        k = k0 + 0.5 * rng.standard_normal((2, 1))
        Xbar = _random_spd(rng, 4)
        Qbar1, Qbar2, Qbar3 = barred_bound_matrices(bound_matrices(eps, bounds, model), k, model)
        dA, dD = _stacked_deltas(parts, k, model.hbar)
        lhs1 = dA @ Xbar + Xbar @ np.swapaxes(dA, -1, -2)
        ineq1[j] = np.linalg.eigvalsh(Xbar @ Qbar1 @ Xbar + Qbar2 - lhs1).min(axis=-1)
        ineq2[j] = np.linalg.eigvalsh(Qbar3 - dD).min(axis=-1)
    return {
        "basic": _report("basic", basic, slack),
        "ineq1": _report("ineq1", ineq1, slack),
        "ineq2": _report("ineq2", ineq2, slack),
    }


def _random_hurwitz(rng, n=4, decay=0.1):
    A = rng.standard_normal((n, n))
    shift = np.linalg.eigvals(A).real.max() + decay + rng.uniform(0.0, 1.0)
    return A - shift * np.eye(n)


def lemma_campaign(n_instances=100, seed=0, t_end=250.0, t_check=200.0, dt=1e-2, slack=1e-6):
    """Pair the stationary upper-bound premise with an integrated covariance path.

    For random Hurwitz ``Abar`` and PSD ``Dbar`` the bound ``Xbar`` solves
    ``Abar X + X Abar^T + Dbar + 0.1 I = 0`` so the premise holds strictly; the
    path from a random initial covariance must satisfy ``V_t <= Xbar + slack I``
    for every recorded ``t >= t_check``.
    """
    rng = np.random.default_rng(seed)
    Abars, Dbars, Xbars, V0s = [], [], [], []
    for _ in range(n_instances):
        Abar = _random_hurwitz(rng)
        Dbar = _random_spd(rng, 4, low=0.0)
        Xbar = solve_lyapunov(Abar, Dbar + 0.1 * np.eye(4))
        if not lemma_b_check(Abar, Dbar, Xbar):
            raise RuntimeError("constructed premise does not hold")
        Abars.append(Abar)
        Dbars.append(Dbar)
        Xbars.append(Xbar)
        V0s.append(_random_spd(rng, 4))
    aug = AugmentedSystem(np.array(Abars), np.array(Dbars))
    _, (times, states) = transient_covariance(aug, np.array(V0s), dt=dt, t_end=t_end, record_every=100)
    late = states[times >= t_check - 1e-9]
    margins = np.linalg.eigvalsh(np.array(Xbars)[None] + slack * np.eye(4) - late).min(axis=-1)
    return _report("lemma", margins, 0.0)
