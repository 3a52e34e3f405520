"""Estimator objects with a scikit-learn interface.

``fit`` synthesizes the observer from the hyperparameters (no data needed);
``transform`` runs it on a sequence of measurement increments ``dY`` sampled
every ``dt`` and returns the state estimates::

    >>> import numpy as np
    >>> from qobserver.observers import KalmanObserver
    >>> est = KalmanObserver().fit()
    >>> est.transform(np.zeros((3, 1))).shape
    (3, 2)
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .bench import search_eps1
from .estimators import (
    LqgWeights,
    RobustTuning,
    kalman_limit_epsilons,
    kalman_observer_realization,
    kalman_stationary,
    lqg_stationary_gain,
    risk_stationary,
    robust_synthesize,
)
from .model import SystemModel, UncertaintyBounds

__all__ = ["KalmanObserver", "RiskSensitiveObserver", "RobustObserver"]

_G = ((-0.05, 0.0), (0.0, 2.0))
_M = ((3.0, 0.0), (0.0, 1.0))
_N = ((2.0, 0.0), (0.0, 0.0))


class _ObserverBase(TransformerMixin, BaseEstimator):
    def _model(self, G=None):
        return SystemModel(
            G=np.asarray(self.G if G is None else G, dtype=float),
            Ctilde=np.asarray(self.Ctilde, dtype=complex),
            B=np.asarray(self.B, dtype=float),
            hbar=self.hbar,
        )

    def _weights(self):
        return LqgWeights(M=np.asarray(self.M, dtype=float), N=np.asarray(self.N, dtype=float), r=self.r)

    def _finish(self, observer):
        self.observer_ = observer
        self.gain_ = observer.k.copy()
        self.control_gain_ = observer.L.copy()
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        """Estimates after each increment.

        Parameters
        ----------
        X : array-like, shape (n_steps, 1)
            Measurement increments ``dY``.

        Returns
        -------
        ndarray, shape (n_steps, 2)
            Estimated ``(q, p)`` after each increment, starting from ``x0``.
        """
        check_is_fitted(self, "observer_")
        dY = check_array(X, ensure_min_samples=1)
        if dY.shape[1] != 1:
            raise ValueError(f"expected one measurement channel, got {dY.shape[1]}")
        obs = self.observer_
        drift = obs.R + obs.B @ obs.L if self.use_control else obs.R
        step = np.eye(2) + self.dt * drift
        x = np.asarray(self.x0, dtype=float).reshape(2)
        out = np.empty((dY.shape[0], 2))
        k = obs.k.ravel()
        for i, dy in enumerate(dY[:, 0]):
            x = step @ x + k * dy
            out[i] = x
        return out

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X, y).transform(X)


class KalmanObserver(_ObserverBase):
    """Stationary Kalman filter with the LQG control law on the nominal plant.

    Attributes
    ----------
    covariance_ : ndarray, shape (2, 2)
        Stationary conditional covariance.
    gain_ : ndarray, shape (2, 1)
    control_gain_ : ndarray, shape (1, 2)
    observer_ : LinearObserver
    """

    def __init__(self, G=_G, Ctilde=(1.0, 0.0), B=(0.0, 1.0), hbar=1.0, M=_M, N=_N, r=0.2,
                 dt=1e-3, x0=(0.0, 0.0), use_control=True):
        self.G = G
        self.Ctilde = Ctilde
        self.B = B
        self.hbar = hbar
        self.M = M
        self.N = N
        self.r = r
        self.dt = dt
        self.x0 = x0
        self.use_control = use_control

    def fit(self, X=None, y=None):
        model = self._model()
        self.covariance_, _, _ = kalman_stationary(model)
        return self._finish(kalman_observer_realization(model, self._weights()))


class RiskSensitiveObserver(_ObserverBase):
    """Stationary risk-sensitive observer with risk parameter ``mu``.

    ``mu = 0`` reduces to :class:`KalmanObserver`.
    """

    def __init__(self, G=_G, Ctilde=(1.0, 0.0), B=(0.0, 1.0), hbar=1.0, M=_M, N=_N, r=0.2,
                 mu=0.3, dt=1e-3, x0=(0.0, 0.0), use_control=True):
        self.G = G
        self.Ctilde = Ctilde
        self.B = B
        self.hbar = hbar
        self.M = M
        self.N = N
        self.r = r
        self.mu = mu
        self.dt = dt
        self.x0 = x0
        self.use_control = use_control

    def fit(self, X=None, y=None):
        V, observer, K = risk_stationary(self._model(), self._weights(), self.mu)
        self.covariance_ = V
        self.control_riccati_ = K
        return self._finish(observer)


class RobustObserver(_ObserverBase):
    """Guaranteed-cost observer for bounded uncertainty ``(g, r1, r2)``.

    ``eps`` holds all eight bounding weights; when it is ``None`` they follow
    the closed-form rule and ``eps1`` is either given or, with ``"auto"``,
    chosen to minimize the error bound. ``gain_G`` is the Hamiltonian form
    used to design the LQG control gain (default ``G``).

    Attributes
    ----------
    error_bound_ : float
        ``Tr P2``, the guaranteed stationary mean square error.
    eps1_ : float
    synthesis_ : RobustSynthesis
    """

    def __init__(self, G=_G, Ctilde=(1.0, 0.0), B=(0.0, 1.0), hbar=1.0, M=_M, N=_N, r=0.2,
                 g=0.0, r1=0.0, r2=0.0, delta1=0.1, delta2=0.1, eps1="auto", eps=None,
                 gain_G=None, dt=1e-3, x0=(0.0, 0.0), use_control=True):
        self.G = G
        self.Ctilde = Ctilde
        self.B = B
        self.hbar = hbar
        self.M = M
        self.N = N
        self.r = r
        self.g = g
        self.r1 = r1
        self.r2 = r2
        self.delta1 = delta1
        self.delta2 = delta2
        self.eps1 = eps1
        self.eps = eps
        self.gain_G = gain_G
        self.dt = dt
        self.x0 = x0
        self.use_control = use_control

    def fit(self, X=None, y=None):
        model = self._model()
        bounds = UncertaintyBounds(self.g, self.r1, self.r2)
        _, L = lqg_stationary_gain(self._model(self.gain_G), self._weights())
        if self.eps is not None:
            tuning = RobustTuning(self.delta1, self.delta2, tuple(self.eps))
        else:
            eps1 = self.eps1
            if eps1 == "auto":
                eps1, _ = search_eps1(model, bounds, L, self.delta1, self.delta2)
            tuning = RobustTuning(self.delta1, self.delta2, kalman_limit_epsilons(bounds)).with_eps1(eps1)
        synth = robust_synthesize(model, bounds, L, tuning)
        self.synthesis_ = synth
        self.error_bound_ = synth.trace_bound
        self.eps1_ = tuning.eps[0]
        return self._finish(synth.observer)

