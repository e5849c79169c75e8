"""Brute-force reference: each lead replaced by K discrete modes.

The full Hamiltonian is quadratic and the initial state (dot state times
thermal leads) is Gaussian, so every correlator follows from the one-body
propagator U(t) = exp(-i h t) of the (2 + modes)-dimensional single-particle
matrix h and Wick's theorem. ``fock_two_time`` evaluates the same quantities
in the full many-body Fock space and is used to test the Wick expansion on
small systems.
"""
from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .kernels import fermi, lorentzian
from .lgi import PAIRS, LgiResult, VIOLATION_TOL, q_correlator
from .model import DeviceConfig, MeasurementSchedule

DOT2 = 1
DEFAULT_MODES = 64
DEFAULT_SPAN = 20.0
# one-body dot density <a_i^dag a_j> of |01> and of (|01> + |10>)/sqrt(2)
STATE_01 = np.diag([0.0, 1.0])
STATE_SUPERPOSITION = np.full((2, 2), 0.5)


@dataclass(frozen=True)
class FiniteBath:
    """Discretized leads. ``couplings[i, k]`` couples dot i to bath mode k."""

    modes_per_lead: int
    span: float
    energies: np.ndarray
    couplings: np.ndarray
    occupations: np.ndarray
    lead_index: np.ndarray

    @property
    def n_modes(self) -> int:
        return len(self.energies)

    @property
    def spacing(self) -> float:
        return 2 * self.span / self.modes_per_lead

    @property
    def t_valid(self) -> float:
        """Recurrence time 2 pi / (mode spacing); the continuum picture fails beyond it.

        A bath with no coupling never feeds back, so its window is unbounded.
        """
        if not np.any(self.couplings):
            return np.inf
        return 2 * np.pi / self.spacing


def build_bath(config: DeviceConfig, K: int = DEFAULT_MODES, span: float = DEFAULT_SPAN) -> FiniteBath:
    """Uniform midpoint grid of K energies on [mu - span, mu + span] per lead.

    Couplings follow V = sqrt(J(e_k) de / 2 pi) per channel; a lead's gamma
    matrix is split into rank-1 channels by eigendecomposition, so the
    parallel topology gives V_1k : V_2k = sqrt(G11) : sqrt(G22).
    """
    if K < 1 or not span > 0:
        raise ParameterError("need K >= 1 and span > 0")
    de = 2 * span / K
    x = -span + de * (np.arange(K) + 0.5)
    energies, couplings, occ, index = [], [], [], []
    for a, lead in enumerate(config.leads):
        e = lead.mu + x
        weight = np.sqrt(lorentzian(x, lead.bandwidth) * de / (2 * np.pi))
        lam, vec = np.linalg.eigh(lead.gamma)
        channels = [(l, vec[:, r]) for r, (l) in enumerate(lam) if l > 1e-14]
        if not channels:
            channels = [(0.0, np.zeros(2))]
        for l, v in channels:
            energies.append(e)
            couplings.append(np.sqrt(l) * np.outer(v, weight))
            occ.append(fermi(e, lead))
            index.append(np.full(K, a))
    return FiniteBath(K, span, np.concatenate(energies), np.concatenate(couplings, axis=1),
                      np.concatenate(occ), np.concatenate(index))


def single_particle_hamiltonian(config: DeviceConfig, bath: FiniteBath) -> np.ndarray:
    d = 2 + bath.n_modes
    h = np.zeros((d, d), dtype=complex)
    h[:2, :2] = config.dots.eps
    h[:2, 2:] = bath.couplings
    h[2:, :2] = bath.couplings.conj().T
    h[2:, 2:] = np.diag(bath.energies)
    return h


def initial_correlation(bath: FiniteBath, dot_density=STATE_01) -> np.ndarray:
    """C0[m, n] = <c_m^dag c_n> at t = 0."""
    d = 2 + bath.n_modes
    c0 = np.zeros((d, d), dtype=complex)
    c0[:2, :2] = dot_density
    c0[2:, 2:] = np.diag(bath.occupations)
    return c0


@dataclass(frozen=True)
class SingleParticlePropagator:
    """U(t) = exp(-i h t) via one eigendecomposition of h."""

    h: np.ndarray

    @functools.cached_property
    def _eig(self):
        return np.linalg.eigh(self.h)

    def __call__(self, t: float) -> np.ndarray:
        lam, q = self._eig
        return (q * np.exp(-1j * lam * t)) @ q.conj().T

    def row(self, p: int, t: float) -> np.ndarray:
        lam, q = self._eig
        return (q[p] * np.exp(-1j * lam * t)) @ q.conj().T


@dataclass(frozen=True)
class OracleTwoTime:
    n2_t1: float
    n2_t2: float
    nn: complex
    valid: bool


def wick_two_time(prop: SingleParticlePropagator, c0: np.ndarray, p: int,
                  t1: float, t2: float) -> tuple[float, float, complex]:
    """<n_p(t1)>, <n_p(t2)>, <n_p(t2) n_p(t1)> from one-body data."""
    r1, r2 = prop.row(p, t1), prop.row(p, t2)
    hole = np.eye(len(c0)) - c0.T

    def lesser(ra, rb):  # <a_p^dag(ta) a_p(tb)>
        return np.conj(ra) @ c0 @ rb

    def greater(ra, rb):  # <a_p(ta) a_p^dag(tb)>
        return ra @ hole @ np.conj(rb)

    n1, n2 = lesser(r1, r1).real, lesser(r2, r2).real
    nn = n2 * n1 + lesser(r2, r1) * greater(r2, r1)
    return float(n1), float(n2), complex(nn)


def oracle_two_time(config: DeviceConfig, bath: FiniteBath, t1: float, t2: float,
                    dot_density=STATE_01) -> OracleTwoTime:
    prop = SingleParticlePropagator(single_particle_hamiltonian(config, bath))
    n1, n2, nn = wick_two_time(prop, initial_correlation(bath, dot_density), DOT2, t1, t2)
    valid = max(t1, t2) <= bath.t_valid
    if not valid:
        warnings.warn(f"oracle time {max(t1, t2)} beyond finite-bath validity {bath.t_valid:.3g}",
                      stacklevel=2)
    return OracleTwoTime(n1, n2, nn, valid)


def oracle_lgi(config: DeviceConfig, schedule: MeasurementSchedule, bath: FiniteBath,
               dot_density=STATE_01, tol: float = VIOLATION_TOL,
               prop: SingleParticlePropagator | None = None) -> LgiResult:
    """Same correlators as ``compute_lgi`` but from the finite-bath model.

    Pass ``prop`` to reuse one diagonalization across a tau sweep.
    """
    if prop is None:
        prop = SingleParticlePropagator(single_particle_hamiltonian(config, bath))
    c0 = initial_correlation(bath, dot_density)
    t = schedule.times
    if t[-1] > bath.t_valid:
        warnings.warn(f"oracle time {t[-1]} beyond finite-bath validity {bath.t_valid:.3g}",
                      stacklevel=2)
    corr = {}
    for j, i in PAIRS:
        n_i, n_j, nn = wick_two_time(prop, c0, DOT2, t[i - 1], t[j - 1])
        corr[j, i] = q_correlator(nn, n_j, n_i)
    return LgiResult.from_pairs(schedule.tau, corr, tol)


# ---------------------------------------------------------------------------
# many-body reference for small systems
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=8)
def fock_annihilators(d: int) -> tuple[np.ndarray, ...]:
    """Jordan-Wigner annihilation operators on 2^d states."""
    if d > 10:
        raise ParameterError("Fock-space reference limited to 10 modes")
    lower = np.array([[0.0, 1.0], [0.0, 0.0]])
    z = np.diag([1.0, -1.0])
    ops = []
    for m in range(d):
        op = np.array([[1.0]])
        for k in range(d):
            op = np.kron(op, z if k < m else (lower if k == m else np.eye(2)))
        ops.append(op)
    return tuple(ops)


def fock_hamiltonian(h: np.ndarray) -> np.ndarray:
    a = fock_annihilators(len(h))
    return sum(h[m, n] * a[m].T @ a[n] for m in range(len(h)) for n in range(len(h)))


def fock_product_state(occupations) -> np.ndarray:
    """Density matrix with independent mode occupations (diagonal C0)."""
    rho = np.array([[1.0]])
    for f in occupations:
        rho = np.kron(rho, np.diag([1 - f, f]))
    return rho


def fock_two_time(h: np.ndarray, rho0: np.ndarray, p: int,
                  t1: float, t2: float) -> tuple[float, float, complex]:
    """Tr[rho0 n_p(t)] and Tr[rho0 n_p(t2) n_p(t1)] by explicit evolution."""
    a = fock_annihilators(len(h))
    H = fock_hamiltonian(h)
    lam, q = np.linalg.eigh(H)

    def heis(op, t):
        u = (q * np.exp(-1j * lam * t)) @ q.conj().T
        return u.conj().T @ op @ u

    n = a[p].T @ a[p]
    n1, n2 = heis(n, t1), heis(n, t2)
    return (float(np.trace(rho0 @ n1).real), float(np.trace(rho0 @ n2).real),
            complex(np.trace(rho0 @ n2 @ n1)))
