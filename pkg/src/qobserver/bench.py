"""Feedback-cooling benchmark: scenarios, the eps1 line search and comparison tables.

A scenario is described by a flat ``key = value`` file::

    scenario = anti-harmonic
    G = -0.05, 0, 0, 2
    g_grid = 0, 0.2, 0.38
    eps1 = auto
    ...

See :data:`CONFIG_KEYS` for the full key list. Tables are written as CSV
with header ``g,kal,rsk,rob,eps1`` and ``NA`` for cells where an estimator
fails.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
import logging
import math

import numpy as np

from .estimators import (
    LqgWeights,
    RobustTuning,
    kalman_limit_epsilons,
    kalman_observer_realization,
    lqg_stationary_gain,
    risk_stationary,
    robust_synthesize,
)
from .evaluation import augment, stationary_error
from .exceptions import AllInfeasible, ConfigError, InfeasibleSynthesis, QObserverError
from .model import SystemModel, UncertaintyBounds, worst_case_realization

__all__ = [
    "CONFIG_KEYS",
    "Scenario",
    "TableRow",
    "bundled_config_path",
    "load_scenario",
    "load_config",
    "parse_config",
    "dump_config",
    "search_eps1",
    "optimize_eps1",
    "robust_synthesis_at",
    "robust_control_gain",
    "run_table",
    "format_csv",
    "emit_csv",
    "emit_series",
]

logger = logging.getLogger(__name__)

CONFIG_KEYS = (
    "scenario", "hbar", "G", "Ctilde_re", "Ctilde_im", "B", "M", "N", "r", "mu",
    "delta1", "delta2", "eps1", "g_grid", "deltaG_convention", "seed",
)
OPTIONAL_KEYS = ("rob_gain_G",)
CSV_HEADER = "g,kal,rsk,rob,eps1"

SCENARIO_SIGNS = {"anti-harmonic": -1, "harmonic": 1}
BUNDLED = {"anti-harmonic": "anti_harmonic.cfg", "harmonic": "harmonic.cfg"}

# log10 search range for eps1
EPS1_LOG_RANGE = (math.log10(0.125), 2.0)
EPS1_LOG_TOL = 1e-4
EPS1_GRID_POINTS = 61


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    model: SystemModel
    weights: LqgWeights
    mu: float = 0.3
    tuning: RobustTuning = field(default_factory=RobustTuning)
    eps1: object = "auto"
    g_grid: tuple = ()
    convention: str = "primary"
    seed: int = 0
    rob_gain_G: np.ndarray = None

    @property
    def deltaG_sign(self):
        return SCENARIO_SIGNS[self.name]

    def rob_gain_model(self):
        """Nominal model whose stationary LQG gain drives the robust observer."""
        if self.rob_gain_G is None:
            return self.model
        return replace(self.model, G=self.rob_gain_G)


@dataclass(frozen=True)
class TableRow:
    g: float
    kal: float = None
    rsk: float = None
    rob: float = None
    eps1_used: float = None
    kal_verdict: str = ""
    rsk_verdict: str = ""
    rob_actual: float = None


# -- configuration -----------------------------------------------------------


def _floats(text, n, key, lineno):
    parts = [p for p in text.replace(",", " ").split() if p]
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"{key}: expected numbers, got {text!r}", lineno) from None
    if n is not None and len(values) != n:
        raise ConfigError(f"{key}: expected {n} values, got {len(values)}", lineno)
    return values


def _sym(values, key, lineno):
    mat = np.array(values).reshape(2, 2)
    if not np.array_equal(mat, mat.T):
        raise ConfigError(f"{key} must be symmetric", lineno)
    return mat


def parse_config(text):
    """Parse config text into a :class:`Scenario`."""
    raw, where = {}, {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS and key not in OPTIONAL_KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in raw:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        raw[key], where[key] = value, lineno
    for key in CONFIG_KEYS:
        if key not in raw:
            raise ConfigError(f"missing key {key!r}")

    def num(key):
        return _floats(raw[key], 1, key, where[key])[0]

    def vec(key, n):
        return _floats(raw[key], n, key, where[key])

    name = raw["scenario"]
    if name not in SCENARIO_SIGNS:
        raise ConfigError(f"unknown scenario {name!r}", where["scenario"])
    convention = raw["deltaG_convention"]
    if convention not in ("primary", "alternate"):
        raise ConfigError("deltaG_convention must be primary or alternate", where["deltaG_convention"])
    eps1 = raw["eps1"]
    if eps1 != "auto":
        eps1 = num("eps1")
        if eps1 <= 0:
            raise ConfigError("eps1 must be positive", where["eps1"])
    g_grid = tuple(vec("g_grid", None))
    if any(g < 0 for g in g_grid):
        raise ConfigError("g_grid entries must be nonnegative", where["g_grid"])
    seed_value = num("seed")
    if seed_value != int(seed_value):
        raise ConfigError("seed must be an integer", where["seed"])

    try:
        re_c, im_c = vec("Ctilde_re", 2), vec("Ctilde_im", 2)
        model = SystemModel(
            G=_sym(vec("G", 4), "G", where["G"]),
            Ctilde=np.array(re_c) + 1j * np.array(im_c),
            B=vec("B", 2),
            hbar=num("hbar"),
        )
        weights = LqgWeights(
            M=_sym(vec("M", 4), "M", where["M"]),
            N=_sym(vec("N", 4), "N", where["N"]),
            r=num("r"),
        )
        tuning = RobustTuning(delta1=num("delta1"), delta2=num("delta2"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rob_gain_G = None
    if "rob_gain_G" in raw:
        rob_gain_G = _sym(vec("rob_gain_G", 4), "rob_gain_G", where["rob_gain_G"])
    mu = num("mu")
    if mu < 0:
        raise ConfigError("mu must be nonnegative", where["mu"])
    return Scenario(
        name=name, model=model, weights=weights, mu=mu, tuning=tuning, eps1=eps1,
        g_grid=g_grid, convention=convention, seed=int(seed_value), rob_gain_G=rob_gain_G,
    )


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def bundled_config_path(name):
    """Path of the bundled config for scenario ``name`` (``anti-harmonic`` or ``harmonic``)."""
    try:
        filename = BUNDLED[name]
    except KeyError:
        raise ConfigError(f"no bundled scenario {name!r}") from None
    return resources.files("qobserver") / "configs" / filename


def load_scenario(name):
    return parse_config(bundled_config_path(name).read_text(encoding="utf-8"))


def _fmt(values):
    return ", ".join(repr(float(v)) for v in np.ravel(values))


def dump_config(scenario):
    """Normalized config text; ``parse_config(dump_config(s))`` reproduces ``s``."""
    model, w = scenario.model, scenario.weights
    eps1 = scenario.eps1 if scenario.eps1 == "auto" else repr(float(scenario.eps1))
    lines = [
        ("scenario", scenario.name),
        ("hbar", repr(model.hbar)),
        ("G", _fmt(model.G)),
        ("Ctilde_re", _fmt(model.Ctilde.real)),
        ("Ctilde_im", _fmt(model.Ctilde.imag)),
        ("B", _fmt(model.B)),
        ("M", _fmt(w.M)),
        ("N", _fmt(w.N)),
        ("r", repr(w.r)),
        ("mu", repr(float(scenario.mu))),
        ("delta1", repr(float(scenario.tuning.delta1))),
        ("delta2", repr(float(scenario.tuning.delta2))),
        ("eps1", eps1),
        ("g_grid", _fmt(scenario.g_grid)),
        ("deltaG_convention", scenario.convention),
        ("seed", str(scenario.seed)),
    ]
    if scenario.rob_gain_G is not None:
        lines.append(("rob_gain_G", _fmt(scenario.rob_gain_G)))
    return "".join(f"{k} = {v}\n" for k, v in lines)


# -- robust observer tuning ----------------------------------------------------


def _robust_bounds(g):
    return g if isinstance(g, UncertaintyBounds) else UncertaintyBounds(g=g)


def _robust_tuning(delta1, delta2, bounds, eps1):
    return RobustTuning(delta1, delta2, kalman_limit_epsilons(bounds)).with_eps1(eps1)


def robust_control_gain(scenario):
    _, L = lqg_stationary_gain(scenario.rob_gain_model(), scenario.weights)
    return L


def _golden_section(f, lo, hi, tol):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def search_eps1(model, bounds, L, delta1=0.1, delta2=0.1, log_range=EPS1_LOG_RANGE, tol=EPS1_LOG_TOL):
    """Choose ``eps1`` minimizing ``Tr P2``; the other weights follow the closed-form rule.

    A coarse log-spaced grid locates the feasible minimum, then golden-section
    search refines it in ``log10(eps1)`` to ``tol``. Infeasible ``eps1`` count
    as ``+inf``.

    Returns
    -------
    eps1 : float
    trace_bound : float

    Raises
    ------
    AllInfeasible
        If no grid point yields positive definite ``P1`` and ``P2``.
    """
    bounds = _robust_bounds(bounds)

    def f(log_eps1):
        tuning = _robust_tuning(delta1, delta2, bounds, 10.0 ** log_eps1)
        try:
            return robust_synthesize(model, bounds, L, tuning).trace_bound
        except InfeasibleSynthesis:
            return math.inf

    lo, hi = log_range
    grid = np.linspace(lo, hi, EPS1_GRID_POINTS)
    values = np.array([f(x) for x in grid])
    if not np.isfinite(values).any():
        raise AllInfeasible(f"no feasible eps1 in [1e{lo:.3g}, 1e{hi:.3g}] for {bounds}")
    i = int(np.argmin(values))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    x, fx = _golden_section(f, a, b, tol)
    if values[i] < fx:
        x, fx = grid[i], values[i]
    return 10.0 ** x, fx


def optimize_eps1(scenario, g, log_range=EPS1_LOG_RANGE, tol=EPS1_LOG_TOL, L=None):
    """:func:`search_eps1` for the scenario plant at bound ``g``."""
    if L is None:
        L = robust_control_gain(scenario)
    t = scenario.tuning
    return search_eps1(scenario.model, g, L, t.delta1, t.delta2, log_range, tol)


def robust_synthesis_at(scenario, g, eps1=None, L=None):
    """Robust observer of the scenario at bound ``g`` (``eps1`` from the scenario when omitted)."""
    if L is None:
        L = robust_control_gain(scenario)
    if eps1 is None:
        eps1 = scenario.eps1
    if eps1 == "auto":
        eps1, _ = optimize_eps1(scenario, g, L=L)
    bounds = _robust_bounds(g)
    t = scenario.tuning
    return robust_synthesize(scenario.model, bounds, L, _robust_tuning(t.delta1, t.delta2, bounds, eps1))


# -- tables --------------------------------------------------------------------


def _cell(model, u, obs):
    if obs is None:
        return None, "Failed"
    result = stationary_error(augment(model, u, obs))
    if not result.stable:
        logger.info("g cell %s: %s", result.verdict, result.diagnostic)
        return None, result.verdict
    return result.error, result.verdict


def _observers(scenario):
    model, w = scenario.model, scenario.weights
    observers = {}
    for key, build in (
        ("kal", lambda: kalman_observer_realization(model, w)),
        ("rsk", lambda: risk_stationary(model, w, scenario.mu)[1]),
    ):
        try:
            observers[key] = build()
        except QObserverError as exc:
            logger.warning("%s observer unavailable: %s", key, exc)
            observers[key] = None
    return observers


def _row(scenario, g, observers, L):
    model = scenario.model
    u = worst_case_realization(g, scenario.deltaG_sign, scenario.convention)
    kal, kal_verdict = _cell(model, u, observers["kal"])
    rsk, rsk_verdict = _cell(model, u, observers["rsk"])
    rob = eps1_used = rob_actual = None
    try:
        synth = robust_synthesis_at(scenario, g, L=L)
        rob, eps1_used = synth.trace_bound, synth.tuning.eps[0]
        rob_actual, _ = _cell(model, u, synth.observer)
    except InfeasibleSynthesis as exc:
        logger.warning("robust synthesis infeasible at g=%s: %s", g, exc)
    return TableRow(g, kal, rsk, rob, eps1_used, kal_verdict, rsk_verdict, rob_actual)


def run_table(scenario, n_jobs=1):
    """Evaluate KAL, RSK and ROB for every ``g`` in the scenario grid.

    KAL and RSK are stationary errors of the nominal estimators against the
    worst-case constant plant ``d = g``; ROB is the optimized ``Tr P2``.
    Rows are returned in grid order.
    """
    observers = _observers(scenario)
    L = robust_control_gain(scenario)
    if n_jobs == 1:
        return [_row(scenario, g, observers, L) for g in scenario.g_grid]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(lambda g: _row(scenario, g, observers, L), scenario.g_grid))


def _csv_value(v):
    return "NA" if v is None else f"{v:.6g}"


def format_csv(rows):
    lines = [CSV_HEADER]
    for row in rows:
        lines.append(",".join(_csv_value(v) for v in (row.g, row.kal, row.rsk, row.rob, row.eps1_used)))
    return "\n".join(lines) + "\n"


def emit_csv(rows, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_csv(rows))


def emit_series(t, values, path):
    """Write a two-column ``t,value`` CSV."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,value\n")
        for ti, vi in zip(np.ravel(t), np.ravel(values)):
            fh.write(f"{ti:.6g},{vi:.6g}\n")
