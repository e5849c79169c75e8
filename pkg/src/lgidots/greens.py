"""Retarded propagator u(t, t0) and reservoir noise correlations v, vbar.

The propagator obeys the Volterra integro-differential equation

    du/dt = -i eps u - sum_a int_0^t g_a(t - s) u(s) ds,    u(0) = I.

Two solvers are provided:

``trapezoid``
    Second-order product integration. The dot Hamiltonian is removed with the
    exact integrating factor exp(-i eps dt) (so the decoupled limit is exact)
    and the memory integral is a trapezoidal sum over the tabulated kernel.
``auxiliary``
    For Lorentzian leads g_a(s) = gamma_a (W_a/2) e^{-(W_a + i mu_a) s}, so
    X_a(t) = int_0^t e^{-(W_a + i mu_a)(t-s)} u(s) ds obeys the local equation
    dX_a/dt = u - (W_a + i mu_a) X_a. The enlarged linear system is stepped
    with classical RK4 (the step is a fixed matrix polynomial).

Both kernels depend on t - s only, so u(t, s) = u(t - s, 0): the one-argument
table serves every initial time.

Noise correlations use a 2D trapezoid over the same grid:

    v(t1, t2)    = sum_a int_0^t1 ds1 int_0^t2 ds2 u(t1-s1) gtilde_a(s1-s2) u(t2-s2)^dag
    vbar(t1, t2) = same with gbar_a.

For fixed t1 the inner sum over s1 is a correlation against the lag table and
the outer sum over s2 a convolution with u^dag, so a whole row v(t1, .) costs
two FFT convolutions.
"""
from __future__ import annotations

import csv
import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import fft as sfft

from .closed import closed_propagator
from .errors import InstabilityError, NumericError, ParameterError
from .kernels import KernelTable, tabulate_kernels
from .model import DeviceConfig, TimeGrid

log = logging.getLogger(__name__)

INSTABILITY_NORM = 1 + 1e-3
CONTRACTIVE_TOL = 1e-8
PHYSICAL_TOL = 1e-8


@dataclass(frozen=True)
class RetardedGreen:
    grid: TimeGrid
    u: np.ndarray  # (n, 2, 2); u[k] = u(t_k, t0)
    method: str = "trapezoid"

    def at(self, t: float) -> np.ndarray:
        return self.u[self.grid.index(t)]

    def between(self, k1: int, k2: int) -> np.ndarray:
        """u(t_k1, t_k2) for k1 >= k2, by time-translation invariance."""
        if k1 < k2:
            raise ParameterError("u(t, s) is only defined for t >= s")
        return self.u[k1 - k2]

    def max_singular_value(self) -> float:
        return float(np.linalg.norm(self.u, ord=2, axis=(1, 2)).max())


def kernel_tables(config: DeviceConfig, grid: TimeGrid) -> tuple[KernelTable, KernelTable]:
    return tabulate_kernels(config.left, grid), tabulate_kernels(config.right, grid)


def _check_tables(grid: TimeGrid, tables) -> None:
    for t in tables:
        if t.n < grid.n or not np.isclose(t.grid.dt, grid.dt, rtol=1e-12, atol=0):
            raise ParameterError("kernel table does not cover the time grid")


def _check_norm(u: np.ndarray, k: int, dt: float) -> None:
    norm = np.linalg.norm(u, 2)
    if not np.isfinite(norm) or norm > INSTABILITY_NORM:
        raise InstabilityError(
            f"|u| = {norm:.4g} at step {k}; dissipative dynamics cannot amplify. "
            f"Reduce the time step (dt = {dt:g})."
        )


def _solve_trapezoid(config: DeviceConfig, grid: TimeGrid, tables) -> np.ndarray:
    n, dt = grid.n, grid.dt
    G = sum(t.g[:n] for t in tables)
    E = closed_propagator(config.dots, dt)
    lhs_inv = np.linalg.inv(np.eye(2) + 0.25 * dt * dt * G[0])
    u = np.zeros((n, 2, 2), dtype=complex)
    u[0] = np.eye(2)
    m_prev = np.zeros((2, 2), dtype=complex)  # memory integral vanishes at t = 0
    for k in range(1, n):
        # history part of the memory integral at t_k; the u[k] endpoint is implicit
        hist = 0.5 * dt * G[k] @ u[0]
        if k > 1:
            hist = hist + dt * np.einsum("kij,kjl->il", G[k - 1:0:-1], u[1:k])
        rhs = E @ u[k - 1] + 0.5 * dt * (E @ m_prev) - 0.5 * dt * hist
        u[k] = lhs_inv @ rhs
        m_prev = -hist - 0.5 * dt * G[0] @ u[k]
        _check_norm(u[k], k, dt)
    return u


def _auxiliary_generator(config: DeviceConfig) -> np.ndarray:
    leads = [ld for ld in config.leads if not ld.is_decoupled]
    d = 2 * (1 + len(leads))
    M = np.zeros((d, d), dtype=complex)
    M[:2, :2] = -1j * config.dots.eps
    for a, ld in enumerate(leads, start=1):
        sl = slice(2 * a, 2 * a + 2)
        M[:2, sl] = -0.5 * ld.bandwidth * ld.gamma
        M[sl, :2] = np.eye(2)
        M[sl, sl] = -(ld.bandwidth + 1j * ld.mu) * np.eye(2)
    return M


def _solve_auxiliary(config: DeviceConfig, grid: TimeGrid) -> np.ndarray:
    n, dt = grid.n, grid.dt
    hM = dt * _auxiliary_generator(config)
    d = hM.shape[0]
    step = np.eye(d, dtype=complex)
    term = np.eye(d, dtype=complex)
    for p in range(1, 5):
        term = term @ hM / p
        step = step + term
    y = np.zeros((d, 2), dtype=complex)
    y[:2] = np.eye(2)
    u = np.zeros((n, 2, 2), dtype=complex)
    u[0] = np.eye(2)
    for k in range(1, n):
        y = step @ y
        u[k] = y[:2]
        _check_norm(u[k], k, dt)
    return u


def solve_retarded(
    config: DeviceConfig,
    grid: TimeGrid,
    tables=None,
    method: str = "trapezoid",
) -> RetardedGreen:
    """Solve for u on every node of ``grid``.

    ``tables`` are the per-lead kernel tables (computed when omitted); the
    auxiliary method does not need them.
    """
    if method == "trapezoid":
        if tables is None:
            tables = kernel_tables(config, grid)
        _check_tables(grid, tables)
        u = _solve_trapezoid(config, grid, tables)
    elif method == "auxiliary":
        u = _solve_auxiliary(config, grid)
    else:
        raise ParameterError(f"unknown solver method {method!r}")
    green = RetardedGreen(grid, u, method)
    smax = green.max_singular_value()
    if smax > 1 + CONTRACTIVE_TOL:
        log.warning("u is not contractive to %g (max singular value %.12g); "
                    "consider a smaller dt", CONTRACTIVE_TOL, smax)
    return green


def _conv_matrices(a: np.ndarray, b: np.ndarray, length: int) -> np.ndarray:
    """First ``length`` entries of the matrix convolution c[q] = sum_k a[k] @ b[q-k]."""
    size = sfft.next_fast_len(len(a) + len(b) - 1)
    fa = sfft.fft(a, size, axis=0)
    fb = sfft.fft(b, size, axis=0)
    return sfft.ifft(np.einsum("kij,kjl->kil", fa, fb), axis=0)[:length]


def _trap_weights(k: int, dt: float) -> np.ndarray:
    w = np.full(k + 1, dt)
    w[0] = w[-1] = 0.5 * dt
    return w


@dataclass
class NoiseCorrelation:
    """Lazily evaluated v and vbar on the node pairs of ``grid``.

    Rows v(t_k1, .) are computed on first use and cached; evaluation of
    distinct rows is independent and may run concurrently.
    """

    grid: TimeGrid
    green: RetardedGreen
    gtilde: np.ndarray  # summed over leads, (n, 2, 2) at lags 0..n-1
    gbar: np.ndarray
    _rows: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def _lag_sequence(self, table: np.ndarray, k1: int) -> np.ndarray:
        # entry j holds the kernel at lag k1 - j, for j = 0 .. k1 + n - 1
        n = self.grid.n
        pos = table[k1::-1]
        neg = np.conj(np.swapaxes(table[1:n], -1, -2))
        return np.concatenate([pos, neg])

    def row(self, k1: int) -> tuple[np.ndarray, np.ndarray]:
        """(v[k1, :], vbar[k1, :]) over all second-time nodes."""
        cached = self._rows.get(k1)
        if cached is not None:
            return cached
        n, dt = self.grid.n, self.grid.dt
        if not 0 <= k1 < n:
            raise ParameterError(f"node {k1} outside grid")
        u = self.green.u[:n]
        if k1 == 0:
            z = np.zeros((n, 2, 2), dtype=complex)
            out = (z, z.copy())
        else:
            p = _trap_weights(k1, dt)[:, None, None] * u[k1::-1]
            udag = np.conj(np.swapaxes(u, -1, -2))
            out = []
            for table in (self.gtilde, self.gbar):
                A = _conv_matrices(p, self._lag_sequence(table, k1), k1 + n)[k1:]
                full = dt * _conv_matrices(A, udag, n)
                # trapezoid end corrections in the second time argument
                k2 = np.arange(n)
                full -= 0.5 * dt * (A[0] @ udag[k2] + A[k2] @ udag[0])
                full[0] = 0.0
                out.append(full)
            out = tuple(out)
        with self._lock:
            self._rows[k1] = out
        return out

    def v(self, k1: int, k2: int) -> np.ndarray:
        return self.row(k1)[0][k2]

    def vbar(self, k1: int, k2: int) -> np.ndarray:
        return self.row(k1)[1][k2]

    def full(self) -> tuple[np.ndarray, np.ndarray]:
        """Debug mode: v and vbar on every node pair, each (n, n, 2, 2)."""
        rows = [self.row(k) for k in range(self.grid.n)]
        return np.stack([r[0] for r in rows]), np.stack([r[1] for r in rows])


def solve_noise_correlations(
    config: DeviceConfig,
    grid: TimeGrid,
    tables,
    green: RetardedGreen,
    rows=(),
    full: bool = False,
) -> NoiseCorrelation:
    """Build the noise correlations; ``rows`` lists first-time nodes to precompute.

    The two-time propagator u(t, s) is taken as u(t - s, 0) from ``green``.
    """
    if green.grid != grid and (green.grid.n < grid.n or not np.isclose(green.grid.dt, grid.dt)):
        raise ParameterError("propagator was solved on a different grid")
    _check_tables(grid, tables)
    n = grid.n
    noise = NoiseCorrelation(
        grid, green,
        sum(t.gtilde[:n] for t in tables),
        sum(t.gbar[:n] for t in tables),
    )
    for k in (range(n) if full else rows):
        noise.row(k)
    return noise


def occupation_n2(green: RetardedGreen, noise: NoiseCorrelation, k: int) -> float:
    """<n2(t_k)> = |u22|^2 + v22(t_k, t_k) for the initial dot state |01>."""
    val = abs(green.u[k][1, 1]) ** 2 + noise.v(k, k)[1, 1].real
    if not -PHYSICAL_TOL <= val <= 1 + PHYSICAL_TOL:
        raise NumericError(f"occupation {val:.6g} at node {k} is unphysical; reduce dt")
    return float(val)


def dump_traces(path, green: RetardedGreen, noise: NoiseCorrelation | None = None) -> None:
    """CSV of u(t) and, when given, v(t, t): t then Re/Im of each element."""
    names = ["11", "12", "21", "22"]
    header = ["t"] + [f"u{e}_{p}" for e in names for p in ("re", "im")]
    if noise is not None:
        header += [f"v{e}_{p}" for e in names for p in ("re", "im")]
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for k, t in enumerate(green.grid.times):
            cells = [t]
            for m in (green.u[k],) + ((noise.v(k, k),) if noise is not None else ()):
                for x in m.reshape(-1):
                    cells += [x.real, x.imag]
            w.writerow([f"{c:.12g}" for c in cells])
