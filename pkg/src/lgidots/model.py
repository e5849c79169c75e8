"""Physical parameter types for the double dot and its two leads.

Units: energies are multiples of a reference rate Gamma (Gamma = 1), times are
in 1/Gamma and hbar = 1.
"""
from __future__ import annotations

import configparser
import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParameterError

PSD_TOL = 1e-12
HERMITIAN_TOL = 1e-12


class Topology(enum.Enum):
    SERIES = "series"
    PARALLEL = "parallel"
    CUSTOM = "custom"


def _frozen_array(a, dtype) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DotHamiltonian:
    """2x2 single-particle matrix eps[i, j] of H = sum_ij eps_ij a_i^dag a_j."""

    eps: np.ndarray

    def __post_init__(self):
        eps = np.asarray(self.eps, dtype=complex)
        if eps.shape != (2, 2):
            raise ParameterError(f"dot Hamiltonian must be 2x2, got {eps.shape}")
        if not np.all(np.isfinite(eps)):
            raise ParameterError("dot Hamiltonian has non-finite entries")
        if np.max(np.abs(eps - eps.conj().T)) > HERMITIAN_TOL:
            raise ParameterError("dot Hamiltonian is not Hermitian")
        object.__setattr__(self, "eps", _frozen_array(eps, complex))

    @classmethod
    def from_levels(cls, e11: float, e22: float, e12: complex) -> "DotHamiltonian":
        return cls(np.array([[e11, e12], [np.conj(e12), e22]], dtype=complex))

    @property
    def e11(self) -> float:
        return float(self.eps[0, 0].real)

    @property
    def e22(self) -> float:
        return float(self.eps[1, 1].real)

    @property
    def e12(self) -> complex:
        return complex(self.eps[0, 1])

    @property
    def e21(self) -> complex:
        return complex(self.eps[1, 0])


@dataclass(frozen=True)
class LeadSpec:
    """One electrode: coupling matrix, Lorentzian width, chemical potential, k_B T."""

    gamma: np.ndarray
    bandwidth: float = 1.0
    mu: float = 0.0
    temperature: float = 0.1

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float)
        if g.shape != (2, 2):
            raise ParameterError(f"gamma must be 2x2, got {g.shape}")
        if not np.all(np.isfinite(g)):
            raise ParameterError("gamma has non-finite entries")
        if np.max(np.abs(g - g.T)) > 0:
            raise ParameterError("gamma must be symmetric")
        if np.linalg.eigvalsh(g).min() < -PSD_TOL:
            raise ParameterError("gamma must be positive-semidefinite")
        if not self.bandwidth > 0:
            raise ParameterError(f"bandwidth must be positive, got {self.bandwidth}")
        if not self.temperature >= 0:
            raise ParameterError(f"temperature must be nonnegative, got {self.temperature}")
        if not np.isfinite(self.mu):
            raise ParameterError("mu must be finite")
        object.__setattr__(self, "gamma", _frozen_array(g, float))
        object.__setattr__(self, "bandwidth", float(self.bandwidth))
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "temperature", float(self.temperature))

    @property
    def beta(self) -> float:
        return np.inf if self.temperature == 0 else 1.0 / self.temperature

    @property
    def is_decoupled(self) -> bool:
        return not np.any(self.gamma)

    def with_gamma(self, gamma) -> "LeadSpec":
        return LeadSpec(gamma, self.bandwidth, self.mu, self.temperature)


@dataclass(frozen=True)
class LeadPartial:
    """Lead parameters without the coupling matrix; the topology supplies it."""

    bandwidth: float = 1.0
    mu: float = 0.0
    temperature: float = 0.1


@dataclass(frozen=True)
class DeviceConfig:
    dots: DotHamiltonian
    left: LeadSpec
    right: LeadSpec
    topology: Topology = Topology.CUSTOM

    @property
    def leads(self) -> tuple[LeadSpec, LeadSpec]:
        return (self.left, self.right)

    @property
    def is_closed(self) -> bool:
        return self.left.is_decoupled and self.right.is_decoupled


def series_gamma(g: float, dot: int) -> np.ndarray:
    m = np.zeros((2, 2))
    m[dot, dot] = g
    return m


def parallel_gamma(g: float) -> np.ndarray:
    half = g / 2
    return np.array([[half, np.sqrt(half * half)], [np.sqrt(half * half), half]])


def _check_couplings(gL: float, gR: float) -> None:
    if not (gL >= 0 and gR >= 0):
        raise ParameterError(f"couplings must be nonnegative, got gL={gL}, gR={gR}")


def make_series_config(
    gL: float,
    gR: float,
    dots: DotHamiltonian,
    leadL: LeadPartial = LeadPartial(),
    leadR: LeadPartial = LeadPartial(),
) -> DeviceConfig:
    """Dot 1 talks only to the left lead, dot 2 only to the right lead."""
    _check_couplings(gL, gR)
    left = LeadSpec(series_gamma(gL, 0), leadL.bandwidth, leadL.mu, leadL.temperature)
    right = LeadSpec(series_gamma(gR, 1), leadR.bandwidth, leadR.mu, leadR.temperature)
    return DeviceConfig(dots, left, right, Topology.SERIES)


def make_parallel_config(
    gL: float,
    gR: float,
    dots: DotHamiltonian,
    leadL: LeadPartial = LeadPartial(),
    leadR: LeadPartial = LeadPartial(),
) -> DeviceConfig:
    """Both dots couple to both leads with a rank-1 matrix [[g/2, g/2], [g/2, g/2]]."""
    _check_couplings(gL, gR)
    left = LeadSpec(parallel_gamma(gL), leadL.bandwidth, leadL.mu, leadL.temperature)
    right = LeadSpec(parallel_gamma(gR), leadR.bandwidth, leadR.mu, leadR.temperature)
    return DeviceConfig(dots, left, right, Topology.PARALLEL)


def make_closed_config(dots: DotHamiltonian) -> DeviceConfig:
    return make_series_config(0.0, 0.0, dots)


@dataclass(frozen=True)
class MeasurementSchedule:
    """Four equally spaced measurements t_k = (k - 1) * tau, k = 1..4."""

    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ParameterError(f"tau must be positive, got {self.tau}")

    @property
    def times(self) -> tuple[float, float, float, float]:
        t = self.tau
        return (0.0, t, 2 * t, 3 * t)


@dataclass(frozen=True)
class TimeGrid:
    t0: float
    t_max: float
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ParameterError(f"grid needs at least 2 nodes, got {self.n}")
        if not self.t_max > self.t0:
            raise ParameterError("grid must have t_max > t0")

    @classmethod
    def from_step(cls, dt: float, t_max: float, t0: float = 0.0) -> "TimeGrid":
        """Grid with spacing exactly ``dt`` whose last node is >= t_max."""
        if not dt > 0:
            raise ParameterError(f"dt must be positive, got {dt}")
        steps = max(1, int(np.ceil((t_max - t0) / dt - 1e-9)))
        return cls(t0, t0 + steps * dt, steps + 1)

    @property
    def dt(self) -> float:
        return (self.t_max - self.t0) / (self.n - 1)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n)

    def index(self, t: float, tol: float = 1e-9) -> int:
        """Node index of time ``t``; raises if ``t`` is not on the grid."""
        x = (t - self.t0) / self.dt
        k = int(round(x))
        if abs(x - k) > tol * max(1.0, abs(x)) or not 0 <= k < self.n:
            raise ParameterError(f"time {t} is not a node of the grid")
        return k


# Values used throughout the open-system figure presets.
DEFAULT_DOTS = DotHamiltonian.from_levels(1.0, 1.0, 0.5)
DEFAULT_LEFT = LeadPartial(bandwidth=1.0, mu=5.0, temperature=0.1)
DEFAULT_RIGHT = LeadPartial(bandwidth=1.0, mu=-5.0, temperature=0.1)


# ---------------------------------------------------------------------------
# config files
# ---------------------------------------------------------------------------

@dataclass
class RunSection:
    tau_min: float = 0.05
    tau_max: float = 8.0
    tau_steps: int = 160
    grid_dt: float = 0.01
    scenario: str = "OpenC3"

    @property
    def tau_values(self) -> np.ndarray:
        return np.linspace(self.tau_min, self.tau_max, self.tau_steps)


@dataclass
class ConfigFile:
    device: DeviceConfig
    run: RunSection = field(default_factory=RunSection)


def parse_complex(text: str) -> complex:
    """``"0.5"`` -> 0.5, ``"0.5,0.1"`` -> 0.5+0.1j."""
    parts = [p.strip() for p in text.split(",")]
    try:
        if len(parts) == 1:
            return complex(float(parts[0]))
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise ParameterError(f"cannot parse complex value {text!r}")


def _floats(text: str) -> list[float]:
    try:
        return [float(p) for p in text.replace(",", " ").split()]
    except ValueError:
        raise ParameterError(f"cannot parse numbers from {text!r}") from None


def _lead_section(sec) -> tuple[str, np.ndarray | float, LeadPartial]:
    partial = LeadPartial(
        bandwidth=sec.getfloat("W", 1.0),
        mu=sec.getfloat("mu", 0.0),
        temperature=sec.getfloat("kT", 0.1),
    )
    present = [k for k in ("series", "parallel", "gamma") if k in sec]
    if len(present) != 1:
        raise ParameterError(
            f"[{sec.name}] needs exactly one of series / parallel / gamma, got {present}"
        )
    key = present[0]
    vals = _floats(sec[key])
    if key == "gamma":
        if len(vals) != 3:
            raise ParameterError(f"[{sec.name}] gamma takes 'g11, g12, g22'")
        g11, g12, g22 = vals
        return "custom", np.array([[g11, g12], [g12, g22]]), partial
    if len(vals) != 1:
        raise ParameterError(f"[{sec.name}] {key} takes a single coupling")
    return key, vals[0], partial


def read_config(text: str) -> ConfigFile:
    """Parse the ``key = value`` config format documented in the README."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ParameterError(f"malformed config: {exc}") from None
    if "dots" not in cp:
        raise ParameterError("config needs a [dots] section")
    d = cp["dots"]
    try:
        dots = DotHamiltonian.from_levels(
            float(d.get("e11", "1.0")), float(d.get("e22", "1.0")),
            parse_complex(d.get("e12", "0.5")),
        )
    except ValueError as exc:
        raise ParameterError(str(exc)) from None

    if "left" in cp or "right" in cp:
        if not ("left" in cp and "right" in cp):
            raise ParameterError("config needs both [left] and [right] or neither")
        kl, gl, pl = _lead_section(cp["left"])
        kr, gr, pr = _lead_section(cp["right"])
        if kl == kr == "series":
            device = make_series_config(gl, gr, dots, pl, pr)
        elif kl == kr == "parallel":
            device = make_parallel_config(gl, gr, dots, pl, pr)
        else:
            left = LeadSpec(
                gl if kl == "custom" else
                (series_gamma(gl, 0) if kl == "series" else parallel_gamma(gl)),
                pl.bandwidth, pl.mu, pl.temperature)
            right = LeadSpec(
                gr if kr == "custom" else
                (series_gamma(gr, 1) if kr == "series" else parallel_gamma(gr)),
                pr.bandwidth, pr.mu, pr.temperature)
            device = DeviceConfig(dots, left, right, Topology.CUSTOM)
    else:
        device = make_closed_config(dots)

    run = RunSection()
    if "run" in cp:
        r = cp["run"]
        try:
            run = RunSection(
                tau_min=r.getfloat("tau_min", run.tau_min),
                tau_max=r.getfloat("tau_max", run.tau_max),
                tau_steps=r.getint("tau_steps", run.tau_steps),
                grid_dt=r.getfloat("grid_dt", run.grid_dt),
                scenario=r.get("scenario", run.scenario),
            )
        except ValueError as exc:
            raise ParameterError(str(exc)) from None
        if not (0 < run.tau_min <= run.tau_max) or run.tau_steps < 1 or run.grid_dt <= 0:
            raise ParameterError("[run] needs 0 < tau_min <= tau_max, tau_steps >= 1, grid_dt > 0")
    return ConfigFile(device, run)


def load_config(path: str | Path) -> ConfigFile:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParameterError(f"cannot read config {path}: {exc}") from None
    return read_config(text)
