"""Augmented plant/observer error dynamics and their stationary covariance.

The augmented coordinates are ``z = [x_true, x_true - x_est]``. For an
observer ``dx = R x dt + B u dt + k dY`` with ``u = L x`` acting on the true
plant ``(G + dG, Ctilde + dCtilde)``, the symmetrized covariance of ``z``
obeys ``dV/dt = Abar V + V Abar^T + Dbar``.
"""

from dataclasses import dataclass, field
import logging

import numpy as np

from ._validation import min_eig, symmetrize, max_eig
from .exceptions import NumericalError
from .model import SIGMA, delta_diffusion, delta_drift, delta_m, delta_output, derive_matrices
from .riccati import hurwitz, integrate_matrix_ode, solve_lyapunov

__all__ = [
    "SIGMA_BAR",
    "AugmentedSystem",
    "EvalResult",
    "nominal_abar",
    "delta_abar",
    "nominal_dbar",
    "delta_dbar",
    "augment",
    "stationary_error",
    "transient_covariance",
    "lemma_b_check",
    "simulate_filter_trajectory",
]

logger = logging.getLogger(__name__)

SIGMA_BAR = np.block([[SIGMA, SIGMA], [SIGMA, SIGMA]])
SIGMA_BAR.setflags(write=False)

PHYSICAL_SLACK = 1e-9
LEMMA_MARGIN = 1e-10

STABLE = "Stable"
UNSTABLE = "Unstable"
UNPHYSICAL = "Unphysical"


@dataclass(frozen=True, eq=False)
class AugmentedSystem:
    Abar: np.ndarray
    Dbar: np.ndarray
    hbar: float = 1.0
    SigmaBar: np.ndarray = SIGMA_BAR


@dataclass(frozen=True, eq=False)
class EvalResult:
    verdict: str
    error: float = None
    Wbar: np.ndarray = None
    diagnostic: str = field(default="")

    @property
    def stable(self):
        return self.verdict == STABLE


def nominal_abar(model, obs):
    """``[[A + BL, -BL], [A - R - kF, R]]``."""
    dm = derive_matrices(model)
    BL = obs.B @ obs.L
    return np.block([[dm.A + BL, -BL], [dm.A - obs.R - obs.k @ dm.F, obs.R]])


def delta_abar(model, u, k):
    """``[[dA, O], [dA - k dF, O]]``."""
    dA = delta_drift(model, u)
    zero = np.zeros((2, 2))
    return np.block([[dA, zero], [dA - k @ delta_output(u), zero]])


def _gain_blocks(D, m, k, hbar, kk_weight):
    zero = np.zeros((2, 2))
    lower = k @ m.T + m @ k.T - kk_weight * (k @ k.T)
    return np.block([[D, D], [D, D]]) - hbar * np.block([[zero, m @ k.T], [k @ m.T, lower]])


def nominal_dbar(model, k):
    dm = derive_matrices(model)
    return symmetrize(_gain_blocks(dm.D, dm.m, k, model.hbar, 1.0))


def delta_dbar(model, u, k):
    return symmetrize(_gain_blocks(delta_diffusion(model, u), delta_m(u), k, model.hbar, 0.0))


def augment(model, u, obs):
    """Augmented drift and diffusion for observer ``obs`` on the plant perturbed by ``u``."""
    Abar = nominal_abar(model, obs) + delta_abar(model, u, obs.k)
    Dbar = nominal_dbar(model, obs.k) + delta_dbar(model, u, obs.k)
    return AugmentedSystem(Abar=Abar, Dbar=symmetrize(Dbar), hbar=model.hbar)


def stationary_error(aug):
    """Stationary mean square estimation error ``W33 + W44``.

    Returns an :class:`EvalResult` whose verdict is ``Unstable`` when ``Abar``
    is not Hurwitz and ``Unphysical`` when the Lyapunov solution violates
    ``W + i hbar SigmaBar / 2 >= 0``.
    """
    if not hurwitz(aug.Abar):
        rate = np.linalg.eigvals(aug.Abar).real.max()
        return EvalResult(UNSTABLE, diagnostic=f"max real eigenvalue {rate:.4g}")
    try:
        W = solve_lyapunov(aug.Abar, aug.Dbar)
    except NumericalError as exc:
        return EvalResult(UNSTABLE, diagnostic=str(exc))
    margin = min_eig(W + 0.5j * aug.hbar * aug.SigmaBar)
    if margin < -PHYSICAL_SLACK:
        return EvalResult(UNPHYSICAL, Wbar=W, diagnostic=f"uncertainty relation margin {margin:.4g}")
    return EvalResult(STABLE, error=float(W[2, 2] + W[3, 3]), Wbar=W)


def transient_covariance(aug, Vbar0, dt=1e-3, t_end=10.0, record_every=1):
    """RK4 path of ``dV/dt = Abar V + V Abar^T + Dbar`` from ``Vbar0``."""
    Abar, Dbar = aug.Abar, aug.Dbar

    def rhs(V):
        return Abar @ V + V @ np.swapaxes(Abar, -1, -2) + Dbar

    return integrate_matrix_ode(rhs, Vbar0, dt=dt, t_end=t_end, record_every=record_every)


def lemma_b_check(Abar, Dbar, Xbar):
    """Premise of the upper-bound lemma: ``Abar X + X Abar^T + Dbar < 0``."""
    return max_eig(Abar @ Xbar + Xbar @ Abar.T + Dbar) <= -LEMMA_MARGIN


def simulate_filter_trajectory(model, obs, use_control=True, x0=(1.0, 0.0), t_end=20.0,
                               dt=1e-3, seed=0):
    """Euler-Maruyama path of the estimate driven by its innovation process.

    Writing ``dY = F x dt + dW`` with innovation increments ``dW ~ N(0, hbar dt)``
    turns the observer into ``dx = (R + kF + BL [use_control]) x dt + k dW``.

    Returns
    -------
    t : ndarray, shape (n_steps + 1,)
    x : ndarray, shape (n_steps + 1, 2)
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    F = derive_matrices(model).F
    drift = obs.R + obs.k @ F
    if use_control:
        drift = drift + obs.B @ obs.L
    n_steps = int(round(t_end / dt))
    rng = np.random.default_rng(seed)
    dW = rng.normal(0.0, np.sqrt(model.hbar * dt), size=n_steps)
    (a, b), (c, d) = (np.eye(2) + dt * drift).tolist()
    k1, k2 = obs.k.ravel().tolist()
    q, p = (float(v) for v in x0)
    path = [(q, p)]
    for w in dW.tolist():
        q, p = a * q + b * p + k1 * w, c * q + d * p + k2 * w
        path.append((q, p))
    return np.linspace(0.0, n_steps * dt, n_steps + 1), np.array(path)
