"""Command-line front end: ``lgidots sweep``, ``lgidots oracle-check``, ``lgidots presets``.

Exit codes: 0 success, 1 parameter error, 2 numeric failure (including any
failed sweep row or oracle-check point).
"""
from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from pathlib import Path

from .errors import LgiDotsError, ParameterError
from .model import load_config
from .sweep import (
    ORACLE_THRESHOLD, PRESETS, Scenario, SweepSpec, get_preset, run_oracle_check, run_sweep,
    write_csv,
)
from .oracle import DEFAULT_MODES, DEFAULT_SPAN

EXIT_OK, EXIT_PARAMETER, EXIT_NUMERIC = 0, 1, 2
DEFAULT_DT = 0.01
DEFAULT_ORACLE_TAUS = (0.5, 1.0, 2.0)

log = logging.getLogger("lgidots")


def _positive_float(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return x


def _positive_int(text: str) -> int:
    try:
        x = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if x < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return x


class _Parser(argparse.ArgumentParser):
    """Usage errors are parameter errors (exit 1), not argparse's default 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARAMETER, f"{self.prog}: error: {message}\n")


def _add_source(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", type=Path, metavar="PATH", help="device/run config file")
    src.add_argument("--preset", metavar="NAME", help=f"figure preset ({', '.join(PRESETS)})")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="lgidots", description="Leggett-Garg correlators of a double quantum dot.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="C3/C4 versus tau, written as CSV")
    _add_source(sw)
    sw.add_argument("--out", type=Path, metavar="PATH", help="CSV destination (default stdout)")
    sw.add_argument("--dt", type=_positive_float, help="time step (default: preset value or grid_dt)")
    sw.add_argument("--workers", type=_positive_int, default=1, help="threads across tau")
    sw.add_argument("--method", choices=("trapezoid", "auxiliary"), default="trapezoid",
                    help="propagator solver")
    sw.add_argument("--scenario", type=Scenario.parse, metavar="NAME",
                    help="ClosedC3, ClosedC4, OpenC3 or OpenC4 (overrides the config)")
    sw.add_argument("--dump-traces", type=Path, metavar="DIR",
                    help="debug: write u(t) and v(t, t) traces per curve into DIR")

    oc = sub.add_parser("oracle-check", help="compare open-pipeline C3 with the finite-bath oracle")
    _add_source(oc)
    oc.add_argument("--tau", type=_positive_float, nargs="+", default=list(DEFAULT_ORACLE_TAUS),
                    help="tau values to check (default 0.5 1 2)")
    oc.add_argument("--oracle-modes", type=_positive_int, default=DEFAULT_MODES,
                    help=f"bath modes per lead (default {DEFAULT_MODES})")
    oc.add_argument("--span", type=_positive_float, default=DEFAULT_SPAN,
                    help=f"bath half-window around each mu (default {DEFAULT_SPAN:g})")
    oc.add_argument("--dt", type=_positive_float, default=DEFAULT_DT,
                    help=f"NEGF time step (default {DEFAULT_DT})")
    oc.add_argument("--threshold", type=_positive_float, default=ORACLE_THRESHOLD,
                    help=f"pass threshold on |dC3| (default {ORACLE_THRESHOLD:g})")
    oc.add_argument("--out", type=Path, metavar="PATH", help="CSV report destination")

    sub.add_parser("presets", help="list the figure presets")
    return parser


@contextlib.contextmanager
def _open_out(path: Path | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _curves(args) -> tuple[list[SweepSpec], float]:
    """Sweep specs and time step for ``--preset`` or ``--config``."""
    if args.preset is not None:
        preset = get_preset(args.preset)
        specs = preset.specs()
        dt = preset.dt
    else:
        cfg = load_config(args.config)
        scenario = Scenario.parse(cfg.run.scenario)
        specs = [SweepSpec(tuple(cfg.run.tau_values), scenario, cfg.device, args.config.stem)]
        dt = cfg.run.grid_dt
    scenario = getattr(args, "scenario", None)
    if scenario is not None:
        specs = [SweepSpec(s.tau_values, scenario, s.config, s.label) for s in specs]
    if getattr(args, "dt", None) is not None:
        dt = args.dt
    return specs, dt


def _cmd_sweep(args) -> int:
    specs, dt = _curves(args)
    if args.dump_traces is not None:
        args.dump_traces.mkdir(parents=True, exist_ok=True)
    outcomes = []
    for k, spec in enumerate(specs):
        log.info("sweeping %s (%d tau values)", spec.label or "curve", len(spec.tau_values))
        trace = None
        if args.dump_traces is not None and spec.scenario.pipeline.value == "open":
            trace = args.dump_traces / f"trace_{k}.csv"
        outcomes.append(run_sweep(spec, dt=dt, workers=args.workers, method=args.method,
                                  trace_path=trace))
    with _open_out(args.out) as fh:
        write_csv(outcomes, fh)
    failed = sum(len(o.failures) for o in outcomes)
    if failed:
        print(f"lgidots: {failed} row(s) failed; see the error column", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _cmd_oracle(args) -> int:
    specs, dt = _curves(args)
    reports = []
    for spec in specs:
        report = run_oracle_check(spec.config, args.tau, args.oracle_modes, span=args.span,
                                  dt=dt, threshold=args.threshold)
        print(f"[{spec.label or 'config'}] " + report.text())
        reports.append((spec.label, report))
    if args.out is not None:
        with open(args.out, "w", newline="") as fh:
            for label, report in reports:
                if len(reports) > 1:
                    fh.write(f"# {label}\n")
                report.write_csv(fh)
    return EXIT_OK if all(r.passed for _, r in reports) else EXIT_NUMERIC


def _cmd_presets(args) -> int:
    for name, preset in PRESETS.items():
        print(f"{name:6s} {preset.scenario.value:9s} {preset.description}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"sweep": _cmd_sweep, "oracle-check": _cmd_oracle, "presets": _cmd_presets}
    try:
        return handler[args.command](args)
    except ParameterError as exc:
        print(f"lgidots: parameter error: {exc}", file=sys.stderr)
        return EXIT_PARAMETER
    except LgiDotsError as exc:
        print(f"lgidots: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
