"""Lyapunov and algebraic Riccati solvers plus a fixed-step matrix ODE integrator.

Riccati equations are written in the control form

    Adrift^T P + P Adrift + sign * P Rquad P + Qconst = 0

with ``Rquad`` symmetric but not necessarily definite. Filter-type equations
``A P + P A^T -+ P R P + Q = 0`` map onto this form with ``Adrift = A^T``
(see :func:`solve_filter_care`).
"""

from dataclasses import dataclass
import logging

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

from ._validation import as_square, check_symmetric, symmetrize
from .exceptions import Diverged, NonFinite, NoStabilizingSolution, NotHurwitz, SingularSystem

__all__ = [
    "CareProblem",
    "SolveReport",
    "hurwitz",
    "solve_lyapunov",
    "care_residual",
    "solve_care",
    "solve_filter_care",
    "integrate_matrix_ode",
]

logger = logging.getLogger(__name__)

HURWITZ_MARGIN = 1e-10
RESIDUAL_RTOL = 1e-8
STATIONARY_TOL = 1e-12
ODE_HORIZON = 1e6
IMAG_AXIS_TOL = 1e-9


class _ImaginaryAxis(NoStabilizingSolution):
    pass


@dataclass(frozen=True, eq=False)
class CareProblem:
    Adrift: np.ndarray
    Qconst: np.ndarray
    Rquad: np.ndarray
    sign: int = -1

    def __post_init__(self):
        A = as_square(self.Adrift, "Adrift")
        Q = check_symmetric(as_square(self.Qconst, "Qconst"), "Qconst", atol=1e-10)
        R = check_symmetric(as_square(self.Rquad, "Rquad"), "Rquad", atol=1e-10)
        if not (A.shape == Q.shape == R.shape):
            raise ValueError("Adrift, Qconst and Rquad must share one shape")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        object.__setattr__(self, "Adrift", A)
        object.__setattr__(self, "Qconst", symmetrize(Q))
        object.__setattr__(self, "Rquad", symmetrize(R))

    @property
    def n(self):
        return self.Adrift.shape[0]

    def lhs(self, P):
        A = self.Adrift
        return A.T @ P + P @ A + self.sign * P @ self.Rquad @ P + self.Qconst

    def closed_loop(self, P):
        """Drift whose stability defines the stabilizing solution."""
        return self.Adrift + self.sign * self.Rquad @ P

    def tolerance(self):
        return RESIDUAL_RTOL * max(1.0, np.linalg.norm(self.Qconst))


@dataclass(frozen=True, eq=False)
class SolveReport:
    solution: np.ndarray
    residual: float
    method: str
    iterations: int


def hurwitz(A, margin=HURWITZ_MARGIN):
    """True iff every eigenvalue of ``A`` has real part below ``-margin``."""
    return bool(np.linalg.eigvals(np.asarray(A, dtype=float)).real.max() < -margin)


def solve_lyapunov(A, Q):
    """Solve ``A W + W A^T + Q = 0`` for Hurwitz ``A``.

    The equation is vectorized into ``(I kron A + A kron I) vec(W) = -vec(Q)``
    and solved directly.

    Raises
    ------
    NotHurwitz
        If ``A`` has an eigenvalue with real part ``>= -1e-10``.
    SingularSystem
        If the Kronecker system is numerically singular.
    """
    A = as_square(A, "A")
    Q = as_square(Q, "Q")
    if not hurwitz(A):
        raise NotHurwitz(f"max real eigenvalue {np.linalg.eigvals(A).real.max():.3g}")
    return _lyap_direct(A, Q)


def _lyap_direct(A, Q):
    n = A.shape[0]
    eye = np.eye(n)
    K = np.kron(eye, A) + np.kron(A, eye)
    if np.linalg.cond(K) > 1e14:
        raise SingularSystem("Lyapunov operator is numerically singular")
    W = np.linalg.solve(K, -Q.reshape(-1, order="F")).reshape(n, n, order="F")
    return symmetrize(W)


def care_residual(problem, P):
    return float(np.linalg.norm(problem.lhs(P)))


def _hamiltonian(problem):
    n = problem.n
    try:
        T, Z, sdim = scipy.linalg.schur(_hamiltonian_matrix(problem), output="real", sort="lhp")
    except np.linalg.LinAlgError as exc:
        raise NoStabilizingSolution(f"ordered Schur form failed: {exc}") from exc
    eigs = np.linalg.eigvals(T)
    scale = max(1.0, np.abs(eigs).max())
    if np.abs(eigs.real).min() < IMAG_AXIS_TOL * scale or sdim != n:
        raise _ImaginaryAxis("Hamiltonian matrix has eigenvalues on the imaginary axis")
    U1, U2 = Z[:n, :n], Z[n:, :n]
    cond = np.linalg.cond(U1)
    if not np.isfinite(cond) or cond > 1e14:
        raise NoStabilizingSolution("stable subspace is not a graph subspace")
    P = symmetrize(np.linalg.solve(U1.T, U2.T).T)
    return P, cond


def _hamiltonian_matrix(problem):
    # A^T X + X A - X R X + Q = 0 with R = -sign * Rquad
    A, Q = problem.Adrift, problem.Qconst
    R = -problem.sign * problem.Rquad
    return np.block([[A, -R], [-Q, -A.T]])


def _is_stabilizing(problem, P):
    return hurwitz(problem.closed_loop(P))


def _newton(problem, P0, maxiter=50):
    P = symmetrize(P0)
    for it in range(1, maxiter + 1):
        Ac = problem.closed_loop(P)
        if not hurwitz(Ac):
            raise NoStabilizingSolution("Newton iterate lost stability")
        step = _lyap_direct(Ac.T, problem.lhs(P))
        P = symmetrize(P + step)
        if care_residual(problem, P) <= 1e-3 * problem.tolerance():
            break
        if np.linalg.norm(step) <= 1e-15 * max(1.0, np.linalg.norm(P)):
            break
    return P, it


def _ode_fallback(problem):
    n = problem.n

    def rhs(_t, y):
        return symmetrize(problem.lhs(y.reshape(n, n))).ravel()

    def stationary(_t, y):
        return np.linalg.norm(rhs(_t, y)) - STATIONARY_TOL * max(1.0, np.linalg.norm(problem.Qconst))

    def blowup(_t, y):
        return 1e12 - np.abs(y).max()

    stationary.terminal = True
    blowup.terminal = True
    sol = solve_ivp(
        rhs, (0.0, ODE_HORIZON), np.zeros(n * n), method="LSODA",
        rtol=1e-11, atol=1e-13, events=(stationary, blowup),
    )
    if sol.status != 1 or sol.t_events[0].size == 0:
        raise Diverged("Riccati ODE did not reach stationarity")
    return symmetrize(sol.y[:, -1].reshape(n, n)), sol.nfev


def solve_care(problem):
    """Stabilizing solution of a :class:`CareProblem`.

    Tries the ordered-Schur Hamiltonian method first. An ill-conditioned or
    inaccurate result is refined by Newton iteration; filter-type problems
    (``sign = -1`` and ``Rquad >= 0``) may finally fall back to integrating the
    Riccati ODE to stationarity. The returned solution is always checked for
    residual and for stability of ``Adrift + sign * Rquad P``.
    """
    tol = problem.tolerance()
    candidates = []
    try:
        P, cond = _hamiltonian(problem)
    except _ImaginaryAxis:
        raise
    except NoStabilizingSolution as exc:
        logger.debug("Hamiltonian method failed: %s", exc)
        if hurwitz(problem.Adrift):
            try:
                candidates.append(("newton",) + _newton(problem, np.zeros_like(problem.Adrift)))
            except NoStabilizingSolution:
                pass
    else:
        candidates.append(("hamiltonian", P, 0))
        if cond > 1e10 or care_residual(problem, P) > tol:
            try:
                candidates.append(("newton",) + _newton(problem, P))
            except NoStabilizingSolution:
                pass
    for method, P, iterations in reversed(candidates):
        residual = care_residual(problem, P)
        if residual <= tol and _is_stabilizing(problem, P):
            return SolveReport(P, residual, method, iterations)
    filter_type = problem.sign == -1 and np.linalg.eigvalsh(problem.Rquad).min() >= -1e-12
    if filter_type:
        P, nfev = _ode_fallback(problem)
        if care_residual(problem, P) > tol and _is_stabilizing(problem, P):
            P, _ = _newton(problem, P)
        residual = care_residual(problem, P)
        if residual <= tol and _is_stabilizing(problem, P):
            return SolveReport(P, residual, "ode-integration", nfev)
    raise NoStabilizingSolution("no stabilizing solution passed the residual check")


def solve_filter_care(A, R, Q, sign=-1):
    """Stabilizing ``P`` of ``A P + P A^T + sign * P R P + Q = 0``."""
    return solve_care(CareProblem(Adrift=np.asarray(A).T, Qconst=Q, Rquad=R, sign=sign))


def _rk4_step(rhs, X, dt):
    k1 = rhs(X)
    k2 = rhs(X + 0.5 * dt * k1)
    k3 = rhs(X + 0.5 * dt * k2)
    k4 = rhs(X + dt * k3)
    return X + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_matrix_ode(rhs, X0, dt=1e-3, t_end=10.0, stationary_tol=0.0,
                         symmetric=True, record_every=1):
    """Integrate ``dX/dt = rhs(X)`` with classical fixed-step RK4.

    ``X0`` may carry leading batch dimensions; ``rhs`` must then act on the
    stacked array. Integration stops early once every ``||rhs(X)||_F`` is at
    most ``stationary_tol`` (when positive). With ``symmetric`` the state is
    replaced by its symmetric part after each step.

    Returns
    -------
    X_final : ndarray
    series : tuple of (times, states)
        States recorded every ``record_every`` steps, plus the final state.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    X = np.array(X0, dtype=float)
    n_steps = int(np.ceil(t_end / dt - 1e-9))
    times, states = [0.0], [X.copy()]
    t = 0.0
    for step in range(1, n_steps + 1):
        h = min(dt, t_end - t)
        X = _rk4_step(rhs, X, h)
        if symmetric:
            X = symmetrize(X)
        t += h
        if not np.all(np.isfinite(X)):
            raise NonFinite(f"non-finite state at t={t:.6g}")
        done = stationary_tol > 0 and np.linalg.norm(rhs(X), axis=(-2, -1)).max() <= stationary_tol
        if step % record_every == 0 or done or step == n_steps:
            times.append(t)
            states.append(X.copy())
        if done:
            break
    return X, (np.array(times), np.array(states))
