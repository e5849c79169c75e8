"""Tau sweeps, figure presets and the oracle cross-check.

Open-system sweeps solve the propagator once on a shared grid covering
[0, 3 tau_max]; every tau is snapped to a multiple of the step so that all
four measurement times are grid nodes. Rows are then independent and are
evaluated on a thread pool.
"""
from __future__ import annotations

import csv
import enum
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import LgiDotsError, NumericError, ParameterError
from .greens import dump_traces, kernel_tables
from .lgi import LgiResult, OpenSolution, Pipeline, compute_lgi
from .model import (
    DEFAULT_DOTS, DEFAULT_LEFT, DEFAULT_RIGHT, DeviceConfig, DotHamiltonian, LeadPartial,
    MeasurementSchedule, TimeGrid, make_closed_config, make_parallel_config,
    make_series_config,
)
from .oracle import (
    DEFAULT_SPAN, STATE_01, SingleParticlePropagator, build_bath, oracle_lgi,
    single_particle_hamiltonian,
)

log = logging.getLogger(__name__)

ORACLE_THRESHOLD = 3e-2


class Scenario(enum.Enum):
    CLOSED_C3 = "ClosedC3"
    CLOSED_C4 = "ClosedC4"
    OPEN_C3 = "OpenC3"
    OPEN_C4 = "OpenC4"

    @property
    def pipeline(self) -> Pipeline:
        return Pipeline.CLOSED if self.value.startswith("Closed") else Pipeline.OPEN

    @property
    def four_time(self) -> bool:
        return self.value.endswith("C4")

    @classmethod
    def parse(cls, text: str) -> "Scenario":
        for s in cls:
            if s.value.lower() == text.strip().lower():
                return s
        raise ParameterError(
            f"unknown scenario {text!r}; choose from {', '.join(s.value for s in cls)}")


@dataclass(frozen=True)
class SweepSpec:
    tau_values: tuple[float, ...]
    scenario: Scenario
    config: DeviceConfig
    label: str = ""
    out: Path | None = None

    def __post_init__(self):
        taus = np.asarray(self.tau_values, dtype=float)
        if taus.ndim != 1 or len(taus) == 0:
            raise ParameterError("a sweep needs at least one tau value")
        if np.any(taus <= 0) or np.any(np.diff(taus) <= 0):
            raise ParameterError("tau values must be positive and strictly increasing")
        object.__setattr__(self, "tau_values", tuple(float(t) for t in taus))


@dataclass(frozen=True)
class SweepRow:
    label: str
    tau: float
    result: LgiResult | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.result is not None


@dataclass
class SweepOutcome:
    scenario: Scenario
    rows: list[SweepRow] = field(default_factory=list)

    @property
    def failures(self) -> list[SweepRow]:
        return [r for r in self.rows if not r.ok]

    def curve(self, label: str) -> list[SweepRow]:
        return [r for r in self.rows if r.label == label]


def snap_taus(tau_values, dt: float) -> tuple[float, ...]:
    """Round each tau to the nearest positive multiple of ``dt`` (duplicates dropped)."""
    steps = sorted({max(1, int(round(t / dt))) for t in tau_values})
    return tuple(float(f"{k * dt:.12g}") for k in steps)


def _row(label: str, tau: float, fn) -> SweepRow:
    try:
        return SweepRow(label, tau, result=fn())
    except LgiDotsError as exc:
        log.error("tau = %g (%s) failed: %s", tau, label or "sweep", exc)
        return SweepRow(label, tau, error=f"{type(exc).__name__}: {exc}")


def run_sweep(
    spec: SweepSpec,
    *,
    dt: float = 0.01,
    workers: int = 1,
    method: str = "trapezoid",
    trace_path: Path | None = None,
) -> SweepOutcome:
    """Evaluate C3 (and C4) for every tau of ``spec``.

    Open scenarios snap tau onto multiples of ``dt``; the reported tau is the
    snapped value. A failed solve turns every row into an error record.
    """
    outcome = SweepOutcome(spec.scenario)
    if spec.scenario.pipeline is Pipeline.CLOSED:
        outcome.rows = [
            _row(spec.label, tau, lambda tau=tau: compute_lgi(
                spec.config, MeasurementSchedule(tau), Pipeline.CLOSED))
            for tau in spec.tau_values
        ]
        return outcome

    taus = snap_taus(spec.tau_values, dt)
    grid = TimeGrid(0.0, 3 * taus[-1], 3 * int(round(taus[-1] / dt)) + 1)
    try:
        solution = OpenSolution.solve(spec.config, grid, method=method)
    except LgiDotsError as exc:
        log.error("solve failed for %s: %s", spec.label or "sweep", exc)
        msg = f"{type(exc).__name__}: {exc}"
        outcome.rows = [SweepRow(spec.label, tau, error=msg) for tau in taus]
        return outcome
    if trace_path is not None:
        dump_traces(trace_path, solution.green, solution.noise)

    def one(tau: float) -> SweepRow:
        return _row(spec.label, tau, lambda: compute_lgi(
            spec.config, MeasurementSchedule(tau), Pipeline.OPEN, solution=solution))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcome.rows = list(pool.map(one, taus))
    else:
        outcome.rows = [one(tau) for tau in taus]
    return outcome


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.12g}"


def csv_header(four_time: bool) -> list[str]:
    cols = ["curve", "tau", "C21", "C32", "C31"]
    if four_time:
        cols += ["C43", "C41"]
    cols += ["C3"]
    if four_time:
        cols += ["C4"]
    cols += ["violates_C3"] + (["violates_C4"] if four_time else []) + ["error"]
    return cols


def write_csv(outcomes: list[SweepOutcome], stream) -> None:
    four = any(o.scenario.four_time for o in outcomes)
    header = csv_header(four)
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for o in outcomes:
        for row in o.rows:
            cells = [row.label, _fmt(row.tau)]
            r = row.result
            if r is None:
                cells += [""] * (len(header) - 3) + [row.error]
            else:
                cells += [_fmt(r.C21), _fmt(r.C32), _fmt(r.C31)]
                if four:
                    cells += [_fmt(r.C43), _fmt(r.C41)]
                cells.append(_fmt(r.C3))
                if four:
                    cells.append(_fmt(r.C4))
                cells.append(str(int(r.violates_C3)))
                if four:
                    cells.append(str(int(r.violates_C4)))
                cells.append("")
            w.writerow(cells)


def csv_text(outcomes: list[SweepOutcome]) -> str:
    buf = io.StringIO()
    write_csv(outcomes, buf)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

# Candidate values for the closed-system curves, whose exact values are only
# given by legend colour.
CLOSED_GUESS_SET = (0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    scenario: Scenario
    curves: tuple[tuple[str, DeviceConfig], ...]
    tau_max: float
    tau_step: float = 0.05
    dt: float = 0.01

    @property
    def tau_values(self) -> tuple[float, ...]:
        count = int(round(self.tau_max / self.tau_step))
        return tuple(self.tau_step * k for k in range(1, count + 1))

    def specs(self) -> list[SweepSpec]:
        return [SweepSpec(self.tau_values, self.scenario, cfg, label) for label, cfg in self.curves]


def _closed_e12() -> tuple[tuple[str, DeviceConfig], ...]:
    return tuple((f"e12={v:g}", make_closed_config(DotHamiltonian.from_levels(1.0, 1.0, v)))
                 for v in CLOSED_GUESS_SET)


def _closed_e22() -> tuple[tuple[str, DeviceConfig], ...]:
    return tuple((f"e22={v:g}", make_closed_config(DotHamiltonian.from_levels(1.0, v, 0.5)))
                 for v in CLOSED_GUESS_SET)


def _leads(w: float) -> tuple[LeadPartial, LeadPartial]:
    return (LeadPartial(w, DEFAULT_LEFT.mu, DEFAULT_LEFT.temperature),
            LeadPartial(w, DEFAULT_RIGHT.mu, DEFAULT_RIGHT.temperature))


def _series_gamma_family():
    return tuple((f"series G={g:g}", make_series_config(g, g, DEFAULT_DOTS, DEFAULT_LEFT, DEFAULT_RIGHT))
                 for g in (0.2, 0.4, 0.6, 0.8, 1.0))


def _series_width_family():
    return tuple((f"series W={w:g}", make_series_config(0.3, 0.3, DEFAULT_DOTS, *_leads(w)))
                 for w in (0.5, 1.0, 1.5, 2.0, 3.0))


# Parallel figures quote the per-dot couplings G_11 = G_22 = G/2; the
# constructor takes the lead total G.
def _parallel_gamma_family():
    return tuple((f"parallel G11={g:g}",
                  make_parallel_config(2 * g, 2 * g, DEFAULT_DOTS, DEFAULT_LEFT, DEFAULT_RIGHT))
                 for g in (0.1, 0.2, 0.3, 0.4, 0.5))


def _parallel_width_family():
    return tuple((f"parallel W={w:g}", make_parallel_config(0.3, 0.3, DEFAULT_DOTS, *_leads(w)))
                 for w in (0.5, 1.0, 1.5, 2.0, 3.0))


def _comparison():
    return (
        ("series G=0.3", make_series_config(0.3, 0.3, DEFAULT_DOTS, DEFAULT_LEFT, DEFAULT_RIGHT)),
        ("parallel G11=0.3", make_parallel_config(0.6, 0.6, DEFAULT_DOTS, DEFAULT_LEFT, DEFAULT_RIGHT)),
    )


# Closed curves: two periods of the e12 = 0.5 case. Open curves: long enough
# for the weakest coupling to stop violating, so the largest violating tau is
# a property of the curve rather than of the window.
CLOSED_TAU_MAX = 12.5
OPEN_TAU_MAX = 30.0
OPEN_TAU_STEP = 0.1
OPEN_DT = 0.02


def _build_presets() -> dict[str, Preset]:
    c3, c4 = Scenario.CLOSED_C3, Scenario.CLOSED_C4
    o3, o4 = Scenario.OPEN_C3, Scenario.OPEN_C4
    table = [
        ("fig2a", "closed C3, e11 = e22 = 1, e12 from the guess set", c3, _closed_e12(), CLOSED_TAU_MAX),
        ("fig2b", "closed C3, e11 = 1, e12 = 0.5, e22 from the guess set", c3, _closed_e22(), CLOSED_TAU_MAX),
        ("fig3a", "closed C4, e11 = e22 = 1, e12 from the guess set", c4, _closed_e12(), CLOSED_TAU_MAX),
        ("fig3b", "closed C4, e11 = 1, e12 = 0.5, e22 from the guess set", c4, _closed_e22(), CLOSED_TAU_MAX),
        ("fig4a", "series C3, G = 0.2..1.0, W = 1", o3, _series_gamma_family(), OPEN_TAU_MAX),
        ("fig4b", "series C3, G = 0.3, W = 0.5..3", o3, _series_width_family(), OPEN_TAU_MAX),
        ("fig5a", "series C4, G = 0.2..1.0, W = 1", o4, _series_gamma_family(), OPEN_TAU_MAX),
        ("fig5b", "series C4, G = 0.3, W = 0.5..3", o4, _series_width_family(), OPEN_TAU_MAX),
        ("fig6a", "parallel C3, G11 = G22 = 0.1..0.5, W = 1", o3, _parallel_gamma_family(), OPEN_TAU_MAX),
        ("fig6b", "parallel C3, G11 = G22 = 0.15, W = 0.5..3", o3, _parallel_width_family(), OPEN_TAU_MAX),
        ("fig7a", "parallel C4, G11 = G22 = 0.1..0.5, W = 1", o4, _parallel_gamma_family(), OPEN_TAU_MAX),
        ("fig7b", "parallel C4, G11 = G22 = 0.15, W = 0.5..3", o4, _parallel_width_family(), OPEN_TAU_MAX),
        ("fig8", "series vs parallel at 0.3, C3 and C4, W = 1", o4, _comparison(), OPEN_TAU_MAX),
    ]
    presets = {}
    for name, desc, sc, curves, tmax in table:
        if sc.pipeline is Pipeline.OPEN:
            presets[name] = Preset(name, desc, sc, curves, tmax, OPEN_TAU_STEP, OPEN_DT)
        else:
            presets[name] = Preset(name, desc, sc, curves, tmax)
    return presets


PRESETS = _build_presets()


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ParameterError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None


def run_preset(preset: Preset, *, dt: float | None = None, workers: int = 1,
               method: str = "trapezoid") -> list[SweepOutcome]:
    step = preset.dt if dt is None else dt
    return [run_sweep(spec, dt=step, workers=workers, method=method) for spec in preset.specs()]


def max_violating_tau(rows: list[SweepRow], which: str = "C3") -> float:
    """Largest tau whose row violates the chosen bound; 0 when none does."""
    taus = [r.tau for r in rows if r.ok and getattr(r.result, f"violates_{which}")]
    return max(taus, default=0.0)


# ---------------------------------------------------------------------------
# oracle cross-check
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OracleCheckRow:
    tau: float
    C3_negf: float
    C3_oracle: float
    delta: float
    threshold: float
    within_validity: bool

    @property
    def passed(self) -> bool:
        return self.within_validity and self.delta < self.threshold


@dataclass
class OracleReport:
    rows: list[OracleCheckRow]
    modes: int
    span: float

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def text(self) -> str:
        lines = [f"oracle check: K = {self.modes} modes/lead, span = {self.span:g}"]
        for r in self.rows:
            flag = "PASS" if r.passed else "FAIL"
            note = "" if r.within_validity else " (beyond finite-bath validity)"
            lines.append(f"  tau = {r.tau:<8.4g} C3 negf = {r.C3_negf:.8f}  oracle = {r.C3_oracle:.8f}"
                         f"  |dC3| = {r.delta:.3e}  {flag}{note}")
        lines.append("PASS" if self.passed else "FAIL")
        return "\n".join(lines)

    def write_csv(self, stream) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["tau", "C3_negf", "C3_oracle", "abs_delta", "threshold", "passed"])
        for r in self.rows:
            w.writerow([_fmt(r.tau), _fmt(r.C3_negf), _fmt(r.C3_oracle), _fmt(r.delta),
                        _fmt(r.threshold), int(r.passed)])


def run_oracle_check(
    config: DeviceConfig,
    tau_list,
    modes: int = 64,
    *,
    span: float = DEFAULT_SPAN,
    dt: float = 0.01,
    threshold: float = ORACLE_THRESHOLD,
    method: str = "trapezoid",
) -> OracleReport:
    """Compare open-pipeline C3 with the finite-bath oracle at each tau.

    Both sides start from |01> with thermal leads. tau values are snapped to
    the NEGF grid and the oracle is evaluated at the snapped values.
    """
    if modes < 2:
        raise ParameterError("the oracle needs at least 2 modes per lead")
    taus = snap_taus(sorted(tau_list), dt)
    grid = TimeGrid(0.0, 3 * taus[-1], 3 * int(round(taus[-1] / dt)) + 1)
    solution = OpenSolution.solve(config, grid, method=method, tables=kernel_tables(config, grid))
    bath = build_bath(config, modes, span)
    prop = SingleParticlePropagator(single_particle_hamiltonian(config, bath))
    rows = []
    for tau in taus:
        schedule = MeasurementSchedule(tau)
        negf = compute_lgi(config, schedule, Pipeline.OPEN, solution=solution)
        valid = 3 * tau <= bath.t_valid
        if not valid:
            log.warning("tau = %g exceeds the finite-bath validity window", tau)
        ref = oracle_lgi(config, schedule, bath, STATE_01, prop=prop) if valid else None
        c3_ref = ref.C3 if ref is not None else float("nan")
        delta = abs(negf.C3 - c3_ref) if ref is not None else float("inf")
        if not np.isfinite(negf.C3):
            raise NumericError(f"non-finite C3 at tau = {tau}")
        rows.append(OracleCheckRow(tau, negf.C3, c3_ref, delta, threshold, valid))
    return OracleReport(rows, modes, span)
