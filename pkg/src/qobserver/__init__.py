"""Kalman, risk-sensitive and robust observers for linear quantum systems."""

from .bench import Scenario, TableRow, load_config, load_scenario, optimize_eps1, run_table
from .estimators import (
    LinearObserver,
    LqgWeights,
    RobustSynthesis,
    RobustTuning,
    kalman_observer_realization,
    kalman_stationary,
    lqg_stationary_gain,
    risk_stationary,
    robust_synthesize,
)
from .evaluation import augment, stationary_error
from .exceptions import (
    AllInfeasible,
    ConfigError,
    InfeasibleSynthesis,
    NumericalError,
    QObserverError,
)
from .model import SystemModel, UncertaintyBounds, UncertaintyRealization, derive_matrices
from .observers import KalmanObserver, RiskSensitiveObserver, RobustObserver

__version__ = "0.1.0"
