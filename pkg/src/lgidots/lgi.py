"""Leggett-Garg correlators C3 and C4 for Q = 2 n2 - 1.

Symmetrization: (Q_j Q_i + Q_i Q_j)/2 is the Hermitian part of Q_j Q_i, and
since (Q_j Q_i)^dag = Q_i Q_j its expectation value is Re<Q_j Q_i>. Every
pairwise correlator below is therefore the real part of the ordered one.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np

from .closed import closed_Q_correlator
from .errors import NumericError, ParameterError
from .greens import (
    NoiseCorrelation, RetardedGreen, kernel_tables, occupation_n2,
    solve_noise_correlations, solve_retarded,
)
from .model import DeviceConfig, MeasurementSchedule, TimeGrid

VIOLATION_TOL = 1e-9


class Pipeline(enum.Enum):
    CLOSED = "closed"
    OPEN = "open"


@dataclass(frozen=True)
class LgiResult:
    tau: float
    C21: float
    C32: float
    C31: float
    C43: float
    C41: float
    tol: float = VIOLATION_TOL

    @property
    def C3(self) -> float:
        return self.C21 + self.C32 - self.C31

    @property
    def C4(self) -> float:
        return self.C21 + self.C32 + self.C43 - self.C41

    @property
    def violates_C3(self) -> bool:
        return self.C3 > 1 + self.tol

    @property
    def violates_C4(self) -> bool:
        return self.C4 > 2 + self.tol

    @classmethod
    def from_pairs(cls, tau: float, corr: dict, tol: float = VIOLATION_TOL) -> "LgiResult":
        """``corr`` maps (j, i) measurement labels (1-based) to C_ji."""
        return cls(tau, corr[2, 1], corr[3, 2], corr[3, 1], corr[4, 3], corr[4, 1], tol)


PAIRS = ((2, 1), (3, 2), (3, 1), (4, 3), (4, 1))


def q_correlator(nn: complex, n2_t2: float, n2_t1: float) -> float:
    """Symmetrized <Q(t2) Q(t1)> from <n2(t2) n2(t1)> and the two occupations."""
    return float(np.real(4 * nn) - 2 * n2_t2 - 2 * n2_t1 + 1)


# ---------------------------------------------------------------------------
# open system
# ---------------------------------------------------------------------------

@dataclass
class OpenSolution:
    """Propagator and noise correlations on one grid, shared across tau values."""

    config: DeviceConfig
    grid: TimeGrid
    green: RetardedGreen
    noise: NoiseCorrelation

    @classmethod
    def solve(cls, config: DeviceConfig, grid: TimeGrid, method: str = "trapezoid",
              tables=None) -> "OpenSolution":
        if tables is None:
            tables = kernel_tables(config, grid)
        green = solve_retarded(config, grid, tables, method=method)
        noise = solve_noise_correlations(config, grid, tables, green)
        return cls(config, grid, green, noise)

    def n2(self, k: int) -> float:
        return occupation_n2(self.green, self.noise, k)

    def nn(self, k1: int, k2: int) -> complex:
        return _nn_terms(self.green, self.noise, k1, k2)


def _nn_terms(green: RetardedGreen, noise: NoiseCorrelation, k1: int, k2: int) -> complex:
    u1, u2 = green.u[k1], green.u[k2]
    c = np.conj
    v11 = noise.v(k1, k1)[1, 1]
    v22 = noise.v(k2, k2)[1, 1]
    v12 = noise.v(k1, k2)[1, 1]
    vb12 = noise.vbar(k1, k2)[1, 1]
    a1, b1 = u1[1, 0], u1[1, 1]  # u21(t1), u22(t1)
    a2, b2 = u2[1, 0], u2[1, 1]
    return complex(
        c(b2) * b1 * a2 * c(a1)
        + abs(b2) ** 2 * abs(b1) ** 2
        + abs(b2) ** 2 * v11
        + abs(b1) ** 2 * v22
        + a2 * c(a1) * v12
        + c(b2) * b1 * c(vb12)
        + v22 * v11
        + v12 * c(vb12)
    )


def two_time_n2_open(green: RetardedGreen, noise: NoiseCorrelation,
                     t1: float, t2: float) -> complex:
    """<n2(t2) n2(t1)> for the initial dot state |01> (dot 2 occupied)."""
    if t2 < t1:
        raise ParameterError("two_time_n2_open needs t2 >= t1")
    return _nn_terms(green, noise, green.grid.index(t1), green.grid.index(t2))


def _open_correlators(sol: OpenSolution, schedule: MeasurementSchedule) -> dict:
    nodes = [sol.grid.index(t) for t in schedule.times]
    occ = {m: sol.n2(k) for m, k in enumerate(nodes, start=1)}
    out = {}
    for j, i in PAIRS:
        nn = sol.nn(nodes[i - 1], nodes[j - 1])
        out[j, i] = q_correlator(nn, occ[j], occ[i])
    return out


def _closed_correlators(config: DeviceConfig, schedule: MeasurementSchedule) -> dict:
    t = schedule.times
    return {(j, i): float(np.real(closed_Q_correlator(config.dots, t[i - 1], t[j - 1])))
            for j, i in PAIRS}


def open_grid(tau: float, dt: float) -> TimeGrid:
    """Grid on [0, 3 tau] whose step divides tau and does not exceed ``dt``."""
    steps = max(1, int(np.ceil(tau / dt - 1e-9)))
    return TimeGrid(0.0, 3 * tau, 3 * steps + 1)


def compute_lgi(
    config: DeviceConfig,
    schedule: MeasurementSchedule,
    pipeline: Pipeline = Pipeline.OPEN,
    *,
    dt: float = 0.01,
    solution: OpenSolution | None = None,
    method: str = "trapezoid",
    tol: float = VIOLATION_TOL,
) -> LgiResult:
    """C21, C32, C31, C43, C41 at t = (0, tau, 2 tau, 3 tau) and the combinations.

    The closed pipeline uses the analytic propagator and the initial state
    (|01> + |10>)/sqrt(2); the open pipeline starts from |01>. Pass
    ``solution`` to reuse one open solve across many tau values; otherwise a
    grid with step <= ``dt`` that has tau on a node is built.
    """
    pipeline = Pipeline(pipeline)
    if pipeline is Pipeline.CLOSED:
        corr = _closed_correlators(config, schedule)
    else:
        if solution is None:
            solution = OpenSolution.solve(config, open_grid(schedule.tau, dt), method)
        corr = _open_correlators(solution, schedule)
    return LgiResult.from_pairs(schedule.tau, corr, tol)


# ---------------------------------------------------------------------------
# classical bound machinery
# ---------------------------------------------------------------------------

# index order of a joint distribution P(Q3, Q2, Q1) over {+1, -1}^3
OUTCOMES = tuple(itertools.product((1, -1), repeat=3))


def joint_index(q3: int, q2: int, q1: int) -> int:
    return OUTCOMES.index((q3, q2, q1))


def classical_bound_check(p, atol: float = 1e-12) -> float:
    """C3 of a classical joint distribution, computed two ways.

    ``p[joint_index(q3, q2, q1)]`` is P(Q3, Q2, Q1). C3 from the pairwise
    correlator sums must equal 1 - 4 [P(+,-,+) + P(-,+,-)].
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (8,):
        raise ParameterError("joint distribution needs 8 probabilities")
    if np.any(p < 0) or abs(p.sum() - 1) > atol:
        raise ParameterError(f"not a probability distribution (sum = {p.sum():.15g})")
    q = np.array(OUTCOMES)
    q3, q2, q1 = q[:, 0], q[:, 1], q[:, 2]
    c21, c32, c31 = (q2 * q1) @ p, (q3 * q2) @ p, (q3 * q1) @ p
    from_sums = c21 + c32 - c31
    closed_form = 1 - 4 * (p[joint_index(1, -1, 1)] + p[joint_index(-1, 1, -1)])
    if abs(from_sums - closed_form) > atol:
        raise NumericError(f"C3 mismatch: {from_sums!r} vs {closed_form!r}")
    return float(closed_form)
