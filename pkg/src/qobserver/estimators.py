"""Stationary Kalman filter, LQG gain, risk-sensitive observer and robust observer.

Each estimator is reduced to a :class:`LinearObserver`
``dx = R x dt + B u dt + k dY`` with ``u = L x``, the form accepted by
:func:`qobserver.evaluation.augment`.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import as_column, as_real_matrix, as_row, check_symmetric, min_eig, symmetrize
from .bounds import bound_matrices
from .exceptions import InfeasibleP1, InfeasibleP2, NoStabilizingSolution, RiskSingular
from .model import SIGMA, derive_matrices
from .riccati import CareProblem, solve_care, solve_filter_care

__all__ = [
    "LqgWeights",
    "LinearObserver",
    "RobustTuning",
    "RobustSynthesis",
    "uncertainty_margin",
    "kalman_stationary",
    "lqg_stationary_gain",
    "risk_stationary",
    "kalman_observer_realization",
    "kalman_limit_epsilons",
    "robust_synthesize",
    "riccati2_lhs",
]

EPS_FLOOR = 1e-12
HEISENBERG_SLACK = 1e-9
PD_MARGIN = 1e-10


@dataclass(frozen=True, eq=False)
class LqgWeights:
    """Running weight ``M``, terminal weight ``N`` and control penalty ``r``."""

    M: np.ndarray
    N: np.ndarray
    r: float

    def __post_init__(self):
        for name in ("M", "N"):
            mat = check_symmetric(as_real_matrix(getattr(self, name), (2, 2), name), name)
            if np.linalg.eigvalsh(mat).min() < -1e-12:
                raise ValueError(f"{name} must be positive semidefinite")
            object.__setattr__(self, name, mat)
        if not self.r > 0:
            raise ValueError("r must be positive")
        object.__setattr__(self, "r", float(self.r))


@dataclass(frozen=True, eq=False)
class LinearObserver:
    R: np.ndarray
    k: np.ndarray
    L: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "R", as_real_matrix(self.R, (2, 2), "R"))
        object.__setattr__(self, "k", as_column(self.k, name="k"))
        object.__setattr__(self, "L", as_row(self.L, name="L"))
        object.__setattr__(self, "B", as_column(self.B, name="B"))


@dataclass(frozen=True)
class RobustTuning:
    delta1: float = 0.1
    delta2: float = 0.1
    eps: tuple = (1.0,) * 8

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps)
        if len(eps) != 8:
            raise ValueError("eps must hold eight values")
        if min(eps) <= 0 or self.delta1 <= 0 or self.delta2 <= 0:
            raise ValueError("tuning parameters must be strictly positive")
        object.__setattr__(self, "eps", eps)

    def with_eps1(self, eps1):
        return RobustTuning(self.delta1, self.delta2, (float(eps1),) + self.eps[1:])


@dataclass(frozen=True, eq=False)
class RobustSynthesis:
    P1: np.ndarray
    P2: np.ndarray
    observer: LinearObserver
    trace_bound: float
    intermediates: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    tuning: RobustTuning = None


def uncertainty_margin(V, hbar):
    """Smallest eigenvalue of the Hermitian matrix ``V + i hbar Sigma / 2``."""
    n = V.shape[0] // 2
    Sig = np.kron(np.ones((n, n)), SIGMA) if n > 1 else SIGMA
    return min_eig(V + 0.5j * hbar * Sig)


def _covariance_problem(model, extra_quad=0.0, extra_const=0.0):
    # A V + V A^T + D - (V F^T + hbar m)(F V + hbar m^T) / hbar, rearranged to
    # (A - mF) V + V (A - mF)^T - V (F^T F / hbar) V + (D - hbar m m^T)
    dm = derive_matrices(model)
    hbar = model.hbar
    At = dm.A - dm.m @ dm.F
    R = dm.F.T @ dm.F / hbar + extra_quad
    Q = dm.D - hbar * dm.m @ dm.m.T + extra_const
    return dm, At, symmetrize(R), symmetrize(Q)


def _innovation_gain(dm, V, hbar):
    return V @ dm.F.T / hbar + dm.m


def _check_physical(V, hbar, what):
    margin = uncertainty_margin(V, hbar)
    if margin < -HEISENBERG_SLACK:
        raise NoStabilizingSolution(f"{what} violates the uncertainty relation (margin {margin:.3g})")


def kalman_stationary(model):
    """Stationary covariance ``V`` with ``dV/dt = 0`` and the filter gain.

    Returns
    -------
    V : ndarray (2, 2)
    gain : ndarray (2, 1)
        ``V F^T / hbar + Sigma^T Im(Ctilde)^T``.
    report : SolveReport
    """
    dm, At, R, Q = _covariance_problem(model)
    report = solve_filter_care(At, R, Q)
    V = report.solution
    _check_physical(V, model.hbar, "Kalman covariance")
    return V, _innovation_gain(dm, V, model.hbar), report


def _lqg_problem(A, B, w, extra_drift=0.0, extra_quad=0.0):
    # K A + A^T K - (2/r) K B B^T K + M/2 = 0 in control form
    return CareProblem(
        Adrift=A + extra_drift,
        Qconst=0.5 * w.M,
        Rquad=symmetrize((2.0 / w.r) * B @ B.T + extra_quad),
        sign=-1,
    )


def lqg_stationary_gain(model, w, return_report=False):
    """Stationary control Riccati solution ``K`` and gain ``L = -(2/r) B^T K``."""
    dm = derive_matrices(model)
    report = solve_care(_lqg_problem(dm.A, model.B, w))
    K = report.solution
    L = -(2.0 / w.r) * model.B.T @ K
    if return_report:
        return K, L, report
    return K, L


def kalman_observer_realization(model, weights):
    """Stationary Kalman filter with LQG feedback: ``R = A - b F``, ``k = b``."""
    dm = derive_matrices(model)
    _, b, _ = kalman_stationary(model)
    _, L = lqg_stationary_gain(model, weights)
    return LinearObserver(R=dm.A - b @ dm.F, k=b, L=L, B=model.B)


def risk_stationary(model, w, mu, return_reports=False):
    """Stationary risk-sensitive observer at risk parameter ``mu``.

    The covariance equation gains ``mu (V M V - hbar^2 Sigma^T M Sigma / 4)``;
    the control equation gains ``2 mu K b b^T K + mu (K V M + M V K)``, i.e.
    drift ``A + mu V M`` and quadratic weight ``(2/r) B B^T - 2 mu b b^T``.

    Returns
    -------
    V : ndarray (2, 2)
    observer : LinearObserver
        ``R = A + mu V M - b F``, ``k = b``, ``L = -(2/r) B^T K``.
    K : ndarray (2, 2)
    """
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    hbar = model.hbar
    dm, At, R, Q = _covariance_problem(
        model,
        extra_quad=-mu * w.M,
        extra_const=-mu * hbar ** 2 / 4.0 * SIGMA.T @ w.M @ SIGMA,
    )
    v_report = solve_filter_care(At, R, Q)
    V = v_report.solution
    _check_physical(V, hbar, "risk-sensitive covariance")
    gate = np.eye(2) - mu * w.N @ V
    if np.linalg.cond(gate) > 1e12:
        raise RiskSingular("I - mu N V is singular")
    b = _innovation_gain(dm, V, hbar)
    k_report = solve_care(
        _lqg_problem(dm.A, model.B, w, extra_drift=mu * V @ w.M, extra_quad=-2.0 * mu * b @ b.T)
    )
    K = k_report.solution
    L = -(2.0 / w.r) * model.B.T @ K
    observer = LinearObserver(R=dm.A + mu * V @ w.M - b @ dm.F, k=b, L=L, B=model.B)
    if return_reports:
        return V, observer, K, (v_report, k_report)
    return V, observer, K


def kalman_limit_epsilons(bounds):
    """Weights under which the robust observer tends to the Kalman filter as the bounds vanish.

    Zero entries are floored at ``1e-12``.

    >>> from qobserver.model import UncertaintyBounds
    >>> kalman_limit_epsilons(UncertaintyBounds(0.25, 0.04, 0.09))
    (0.5, 0.3, 0.3, 0.04, 0.09, 0.2, 0.3, 0.3)
    """
    g, r1, r2 = bounds.g, bounds.r1, bounds.r2
    top = max(np.sqrt(r1), np.sqrt(r2))
    raw = (np.sqrt(g), top, top, r1, r2, np.sqrt(r1), np.sqrt(r2), np.sqrt(r2))
    return tuple(max(float(e), EPS_FLOOR) for e in raw)


def robust_synthesize(model, bounds, L, tuning):
    """Robust observer with guaranteed stationary error ``Tr P2``.

    ``P1`` solves ``(A+BL) P1 + P1 (A+BL)^T + P1 Q1 P1 + D' + delta1 I = 0``.
    It is obtained through ``X = P1^{-1}``, the stabilizing solution of
    ``X (A+BL) + (A+BL)^T X + X (D' + delta1 I) X + Q1 = 0``; this is the
    branch for which ``P1^{-1} -> 0`` as ``Q1 -> 0``.

    ``P2`` solves the second equation in filter form
    ``At P2 + P2 At^T - P2 R2 P2 + Q = 0`` with

        At = A' - (mu1/mu2) m F'
        R2 = F'^T F' / mu2 + L^T B^T P1^{-1} + P1^{-1} B L
        Q  = D' + delta2 I - (mu1^2 / mu2) m m^T

    Raises
    ------
    InfeasibleP1, InfeasibleP2
        When no positive definite solution exists for the given tuning.
    """
    L = as_row(L, name="L")
    dm = derive_matrices(model)
    bm = bound_matrices(tuning.eps, bounds, model)
    mu1, mu2 = bm.mu1, bm.mu2
    eye = np.eye(2)
    Dp = symmetrize(dm.D + bm.Q2 + bm.Q3)
    Acl = dm.A + model.B @ L

    inverse_problem = CareProblem(Adrift=Acl, Qconst=bm.Q1, Rquad=Dp + tuning.delta1 * eye, sign=1)
    try:
        X = solve_care(inverse_problem).solution
    except NoStabilizingSolution as exc:
        raise InfeasibleP1(f"first Riccati equation: {exc}", equation="P1") from exc
    if np.linalg.eigvalsh(X).min() <= PD_MARGIN * max(1.0, np.abs(X).max()):
        raise InfeasibleP1("first Riccati equation has no positive definite solution", equation="P1")
    P1inv = X
    P1 = symmetrize(np.linalg.inv(X))
    res1 = Acl @ P1 + P1 @ Acl.T + P1 @ bm.Q1 @ P1 + Dp + tuning.delta1 * eye
    scale1 = max(1.0, np.linalg.norm(Dp + tuning.delta1 * eye), np.linalg.norm(P1 @ bm.Q1 @ P1))
    if np.linalg.norm(res1) > 1e-8 * scale1:
        raise InfeasibleP1("first Riccati residual too large", equation="P1",
                           residual=float(np.linalg.norm(res1)))

    imC = model.Ctilde.imag
    Ap = dm.A + Dp @ P1inv
    Fp = dm.F + mu1 * imC @ SIGMA @ P1inv
    m = dm.m
    cross = L.T @ model.B.T @ P1inv
    At = Ap - (mu1 / mu2) * m @ Fp
    R2 = symmetrize(Fp.T @ Fp / mu2 + cross + cross.T)
    Q = symmetrize(Dp + tuning.delta2 * eye - (mu1 ** 2 / mu2) * m @ m.T)
    try:
        report2 = solve_filter_care(At, R2, Q)
    except NoStabilizingSolution as exc:
        raise InfeasibleP2(f"second Riccati equation: {exc}", equation="P2") from exc
    P2 = report2.solution
    if np.linalg.eigvalsh(P2).min() <= PD_MARGIN:
        raise InfeasibleP2("second Riccati equation has no positive definite solution",
                           equation="P2", residual=report2.residual)

    k = (P2 @ Fp.T + mu1 * m) / mu2
    R = Ap - k @ Fp - P2 @ cross
    observer = LinearObserver(R=R, k=k, L=L, B=model.B)
    intermediates = {
        "A_prime": Ap, "D_prime": Dp, "F_prime": Fp,
        "mu1": mu1, "mu2": mu2, "Q1": bm.Q1, "Q2": bm.Q2, "Q3": bm.Q3,
    }
    residuals = {"P1": float(np.linalg.norm(res1)), "P2": report2.residual}
    return RobustSynthesis(P1, P2, observer, float(np.trace(P2)), intermediates, residuals, tuning)


def riccati2_lhs(synthesis, model, tuning):
    """Left-hand side of the second robust Riccati equation, written as in its original form."""
    it = synthesis.intermediates
    P1inv = np.linalg.inv(synthesis.P1)
    P2 = synthesis.P2
    L, B = synthesis.observer.L, model.B
    m = derive_matrices(model).m
    w = P2 @ it["F_prime"].T + it["mu1"] * m
    return (it["A_prime"] @ P2 + P2 @ it["A_prime"].T + it["D_prime"] + tuning.delta2 * np.eye(2)
            - (w @ w.T) / it["mu2"] - P2 @ (L.T @ B.T @ P1inv + P1inv @ B @ L) @ P2)
