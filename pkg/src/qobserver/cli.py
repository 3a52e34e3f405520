"""Command line front end: ``qobserver <command> [options]``.

Exit codes: 0 success, 1 a property check failed, 2 infeasible synthesis,
3 configuration error, 4 numerical failure.
"""

import argparse
from dataclasses import replace
import logging
from pathlib import Path
import sys

import numpy as np

from .bench import (
    emit_csv,
    emit_series,
    format_csv,
    load_config,
    load_scenario,
    robust_synthesis_at,
    run_table,
)
from .campaigns import bound_campaign, lemma_campaign
from .estimators import kalman_observer_realization, kalman_stationary, lqg_stationary_gain, risk_stationary
from .evaluation import augment, simulate_filter_trajectory, stationary_error
from .exceptions import ConfigError, InfeasibleSynthesis, NumericalError
from .model import UncertaintyBounds, derive_matrices, worst_case_realization

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INFEASIBLE = 2
EXIT_CONFIG = 3
EXIT_NUMERICAL = 4

CONVENTIONS = ("primary", "alternate")


def _matrix(name, a):
    text = np.array2string(np.asarray(a), precision=6, separator=", ", suppress_small=True)
    return f"{name} = {' '.join(text.split())}"


def _emit(lines, out):
    text = "\n".join(lines) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _scenario(args):
    if args.config:
        try:
            scenario = load_config(args.config)
        except OSError as exc:
            raise ConfigError(f"cannot read {args.config}: {exc}") from exc
    else:
        scenario = load_scenario(args.scenario)
    if args.mu is not None:
        if args.mu < 0:
            raise ConfigError("--mu must be nonnegative")
        scenario = replace(scenario, mu=args.mu)
    if args.eps1 is not None:
        scenario = replace(scenario, eps1=_eps1(args.eps1))
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
    return scenario


def _eps1(text):
    if text == "auto":
        return text
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"--eps1 must be 'auto' or a positive number, got {text!r}") from None
    if value <= 0:
        raise ConfigError("--eps1 must be positive")
    return value


def _worst_case(scenario, g):
    return worst_case_realization(g, scenario.deltaG_sign, scenario.convention)


def _error_line(scenario, g, observer):
    result = stationary_error(augment(scenario.model, _worst_case(scenario, g), observer))
    value = f"{result.error:.6g}" if result.stable else "NA"
    return f"error(g={g:g}) = {value}  [{result.verdict}]"


def cmd_derive(scenario, args):
    dm = derive_matrices(scenario.model)
    return [_matrix("A", dm.A), _matrix("F", dm.F), _matrix("D", dm.D), _matrix("m", dm.m)]


def cmd_kalman(scenario, args):
    V, gain, _ = kalman_stationary(scenario.model)
    _, L = lqg_stationary_gain(scenario.model, scenario.weights)
    observer = kalman_observer_realization(scenario.model, scenario.weights)
    return [_matrix("V", V), _matrix("k", gain), _matrix("L", L), _matrix("R", observer.R),
            _error_line(scenario, args.g, observer)]


def cmd_risk(scenario, args):
    V, observer, K = risk_stationary(scenario.model, scenario.weights, scenario.mu)
    return [f"mu = {scenario.mu:g}", _matrix("V", V), _matrix("K", K), _matrix("k", observer.k),
            _matrix("L", observer.L), _matrix("R", observer.R), _error_line(scenario, args.g, observer)]


def cmd_robust(scenario, args):
    synth = robust_synthesis_at(scenario, args.g)
    return [
        f"eps1 = {synth.tuning.eps[0]:.6g}",
        _matrix("P1", synth.P1),
        _matrix("P2", synth.P2),
        f"trace_bound = {synth.trace_bound:.6g}",
        _matrix("k", synth.observer.k),
        _matrix("R", synth.observer.R),
        _error_line(scenario, args.g, synth.observer),
    ]


def _suffixed(out, tag):
    path = Path(out)
    return path.with_name(f"{path.stem}.{tag}{path.suffix or '.csv'}")


def cmd_table(scenario, args):
    if not args.both_conventions:
        rows = run_table(scenario)
        if args.out:
            emit_csv(rows, args.out)
            return None
        sys.stdout.write(format_csv(rows))
        return None
    for convention in CONVENTIONS:
        rows = run_table(replace(scenario, convention=convention))
        if args.out:
            emit_csv(rows, _suffixed(args.out, convention))
        else:
            sys.stdout.write(f"# deltaG_convention = {convention}\n{format_csv(rows)}")
    return None


def cmd_simulate(scenario, args):
    observer = kalman_observer_realization(scenario.model, scenario.weights)
    lines = []
    for tag, use_control in (("uncontrolled", False), ("controlled", True)):
        t, x = simulate_filter_trajectory(scenario.model, observer, use_control=use_control, seed=scenario.seed)
        if args.out:
            emit_series(t, x[:, 0], _suffixed(args.out, tag))
        lines.append(f"{tag}: max |q| = {np.abs(x[:, 0]).max():.6g}")
    return lines


def cmd_check(scenario, args):
    bounds = UncertaintyBounds(g=max(scenario.g_grid, default=0.0), r1=0.05, r2=0.05)
    reports = list(bound_campaign(scenario.model, bounds, seed=scenario.seed).values())
    reports.append(lemma_campaign(seed=scenario.seed))
    lines = [
        f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.violations}/{r.checks} violations, worst margin {r.worst_margin:.3g}"
        for r in reports
    ]
    args.failed = not all(r.passed for r in reports)
    return lines


COMMANDS = {
    "derive": (cmd_derive, "print the derived drift, output, diffusion and m"),
    "kalman": (cmd_kalman, "stationary Kalman filter with LQG control"),
    "risk": (cmd_risk, "stationary risk-sensitive observer"),
    "robust": (cmd_robust, "robust observer synthesis at bound --g"),
    "table": (cmd_table, "KAL/RSK/ROB comparison table as CSV"),
    "simulate": (cmd_simulate, "estimate trajectories with and without feedback"),
    "check": (cmd_check, "randomized property campaigns"),
}


def build_parser():
    parser = argparse.ArgumentParser(prog="qobserver", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        source = p.add_mutually_exclusive_group()
        source.add_argument("--config", help="scenario config file")
        source.add_argument("--scenario", default="anti-harmonic", choices=("anti-harmonic", "harmonic"),
                            help="bundled scenario (default: anti-harmonic)")
        p.add_argument("--g", type=float, default=0.0, help="uncertainty bound g (default 0)")
        p.add_argument("--mu", type=float, help="risk parameter override")
        p.add_argument("--eps1", help="'auto' or a positive value")
        p.add_argument("--seed", type=int, help="random seed override")
        p.add_argument("--out", help="output file")
        p.add_argument("--both-conventions", action="store_true",
                       help="emit tables under both deltaG conventions")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    args.failed = False
    try:
        if args.g < 0:
            raise ConfigError("--g must be nonnegative")
        scenario = _scenario(args)
        lines = COMMANDS[args.command][0](scenario, args)
        if lines is not None:
            _emit(lines, None if args.command == "simulate" else args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleSynthesis as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_CHECK_FAILED if args.failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
