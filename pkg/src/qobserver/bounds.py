"""Uncertainty-independent bounds on the perturbation terms of the error dynamics.

For admissible ``(dG, dCtilde)`` and any ``Xbar``,

    dAbar Xbar + Xbar dAbar^T <= Xbar Qbar1 Xbar + Qbar2,    dDbar <= Qbar3,

where the ``Q`` matrices depend only on ``(g, r1, r2)``, the nominal coupling,
the observer gain ``k`` and eight positive weights ``eps``. The checks here
return the smallest eigenvalue of ``RHS - LHS``; a negative value is a violation.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import min_eig, symmetrize
from .evaluation import delta_abar, delta_dbar
from .model import SIGMA, derive_matrices

__all__ = [
    "BoundMatrices",
    "bound_matrices",
    "weighted_cross_bound_check",
    "barred_bound_matrices",
    "verify_ineq1",
    "verify_ineq2",
]


@dataclass(frozen=True, eq=False)
class BoundMatrices:
    Q1: np.ndarray
    Q2: np.ndarray
    Q3: np.ndarray
    mu1: float
    mu2: float
    eps: tuple = ()
    bounds: object = None


def _check_eps(eps):
    eps = tuple(float(e) for e in eps)
    if len(eps) != 8:
        raise ValueError("expected eight weights eps1..eps8")
    if min(eps) <= 0:
        raise ValueError("all weights must be strictly positive")
    return eps


def bound_matrices(eps, bounds, model):
    """``Q1``, ``Q2``, ``Q3``, ``mu1`` and ``mu2`` for weights ``eps = (eps1, ..., eps8)``."""
    e1, e2, e3, e4, e5, e6, e7, e8 = eps = _check_eps(eps)
    g, r1, r2, hbar = bounds.g, bounds.r1, bounds.r2, model.hbar
    C1, C2 = model.Ctilde.real, model.Ctilde.imag
    G1, G2 = C1.T @ C1, C2.T @ C2
    eye = np.eye(2)
    Q1 = (e1 + e2 + e4 + e5) * eye + e3 * (G1 + G2)
    Q2 = (g / e1 + (r1 + r2) / e3 + r1 * r2 / e4 + r1 * r2 / e5) * eye \
        + (2.0 / e2) * SIGMA @ (r2 * G1 + r1 * G2) @ SIGMA.T
    Q3 = hbar * (r1 / e6 + r2 / e7 + r2 / e8 + r1 + r2) * eye \
        + hbar * SIGMA @ (e6 * G1 + e7 * G2) @ SIGMA.T
    mu1 = hbar + 4.0 * r1 / e2
    mu2 = hbar + 8.0 * r1 / e2 + hbar * e8
    return BoundMatrices(symmetrize(Q1), symmetrize(Q2), symmetrize(Q3), mu1, mu2, eps, bounds)


def weighted_cross_bound_check(X, Y, eps):
    """Smallest eigenvalue of ``eps X^T X + Y^T Y / eps - X^T Y - Y^T X`` (never negative in exact arithmetic)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    gap = eps * X.T @ X + (Y.T @ Y) / eps - X.T @ Y - Y.T @ X
    return min_eig(gap)


def barred_bound_matrices(bm, k, model):
    """4x4 ``Qbar1``, ``Qbar2``, ``Qbar3`` for observer gain ``k``.

    The weights and bounds are the ones ``bm`` was built from.
    """
    k = np.asarray(k, dtype=float).reshape(2, 1)
    m = derive_matrices(model).m
    r1, hbar = bm.bounds.r1, model.hbar
    e2, e8 = bm.eps[1], bm.eps[7]
    zero = np.zeros((2, 2))

    def blocks(Q):
        return np.block([[Q, Q], [Q, Q]])

    Qbar1 = np.block([[bm.Q1, zero], [zero, zero]])
    gain = np.block([[zero, m @ k.T], [k @ m.T, k @ m.T + m @ k.T - 2.0 * k @ k.T]])
    Qbar2 = blocks(bm.Q2) - (4.0 * r1 / e2) * gain
    Qbar3 = blocks(bm.Q3) + hbar * e8 * np.block([[zero, zero], [zero, k @ k.T]])
    return symmetrize(Qbar1), symmetrize(Qbar2), symmetrize(Qbar3)


def verify_ineq1(Xbar, u, model, k, bm):
    """Margin of ``Xbar Qbar1 Xbar + Qbar2 - (dAbar Xbar + Xbar dAbar^T)``."""
    k = np.asarray(k, dtype=float).reshape(2, 1)
    Qbar1, Qbar2, _ = barred_bound_matrices(bm, k, model)
    dA = delta_abar(model, u, k)
    return min_eig(Xbar @ Qbar1 @ Xbar + Qbar2 - (dA @ Xbar + Xbar @ dA.T))


def verify_ineq2(u, model, k, bm):
    """Margin of ``Qbar3 - dDbar``."""
    k = np.asarray(k, dtype=float).reshape(2, 1)
    _, _, Qbar3 = barred_bound_matrices(bm, k, model)
    return min_eig(Qbar3 - delta_dbar(model, u, k))
