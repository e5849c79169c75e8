"""Memory kernels of Lorentzian leads.

For J(e) = Gamma W^2 / ((e - mu)^2 + W^2) the three kernels

    g(s)      = int de/2pi J(e)          e^{-i e s}
    gtilde(s) = int de/2pi J(e) f(e)     e^{-i e s}
    gbar(s)   = int de/2pi J(e) (1-f(e)) e^{-i e s}

are computed as follows. g has the closed form Gamma (W/2) e^{-W|s| - i mu s}.
Because both J and f are centred on mu, shifting x = e - mu and splitting
f = 1/2 - tanh(beta x / 2) / 2 gives

    gtilde(s) = Gamma e^{-i mu s} [ (W/4) e^{-W|s|} + i O(s) ]
    gbar(s)   = Gamma e^{-i mu s} [ (W/4) e^{-W|s|} - i O(s) ]
    O(s)      = (1/2pi) int_0^inf W^2/(x^2+W^2) tanh(beta x/2) sin(x s) dx

so only the odd part O needs quadrature, and gtilde + gbar = g holds exactly.
O is integrated adaptively: QAWO on [0, C] with C = max(50W, 50kT, 50), split
near the Fermi step when k_B T is small, plus a QAWF Fourier tail on [C, inf).
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import expit

from .errors import NumericError
from .model import LeadSpec, TimeGrid

QUAD_EPSABS = 1e-9
# quad's error estimate above this means the integral did not converge
QUAD_FAIL = 1e-7


def fermi(eps, lead: LeadSpec):
    """Fermi-Dirac occupation of ``lead`` at energy ``eps``; exact step at T = 0."""
    x = np.asarray(eps, dtype=float) - lead.mu
    if lead.temperature == 0:
        out = np.where(x < 0, 1.0, np.where(x > 0, 0.0, 0.5))
    else:
        out = expit(-x / lead.temperature)
    return out if out.ndim else float(out)


def lorentzian(x, bandwidth: float):
    """Scalar line shape W^2 / (x^2 + W^2), with x measured from mu."""
    x = np.asarray(x, dtype=float)
    return bandwidth**2 / (x * x + bandwidth**2)


def spectral_density(lead: LeadSpec, eps) -> np.ndarray:
    """2x2 matrix J(eps) (or (..., 2, 2) for an array of energies)."""
    shape = lorentzian(np.asarray(eps) - lead.mu, lead.bandwidth)
    return shape[..., None, None] * lead.gamma


def _lorentz_weight(dtau, lead: LeadSpec):
    s = np.asarray(dtau, dtype=float)
    return 0.5 * lead.bandwidth * np.exp(-lead.bandwidth * np.abs(s) - 1j * lead.mu * s)


def kernel_g(lead: LeadSpec, dtau) -> np.ndarray:
    """g(dtau) = gamma (W/2) exp(-W|dtau| - i mu dtau); g(-s) = g(s)^dagger."""
    return _lorentz_weight(dtau, lead)[..., None, None] * lead.gamma


def _checked_quad(func, a, b, **kw) -> float:
    val, err = quad(func, a, b, epsabs=QUAD_EPSABS, epsrel=1e-10, **kw)[:2]
    if not np.isfinite(val) or err > QUAD_FAIL:
        raise NumericError(
            f"kernel quadrature on [{a}, {b}] did not converge: "
            f"achieved error {err:.3g} > {QUAD_FAIL:g}"
        )
    return val


def window_half_width(bandwidth: float, temperature: float) -> float:
    return max(50.0 * bandwidth, 50.0 * temperature, 50.0)


def odd_part(s: float, bandwidth: float, temperature: float) -> float:
    """O(s) from the module docstring (odd in s, zero at s = 0)."""
    if s == 0:
        return 0.0
    if s < 0:
        return -odd_part(-s, bandwidth, temperature)
    W2 = bandwidth**2
    if temperature == 0:
        def integrand(x):
            return W2 / (x * x + W2)
    else:
        def integrand(x):
            return W2 / (x * x + W2) * np.tanh(0.5 * x / temperature)

    cutoff = window_half_width(bandwidth, temperature)
    edges = [0.0, cutoff]
    step = 10.0 * temperature
    if 0 < step < 0.5 * cutoff:
        edges.insert(1, step)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total += _checked_quad(integrand, a, b, weight="sin", wvar=s, limit=400)
    total += _checked_quad(integrand, cutoff, np.inf, weight="sin", wvar=s, limlst=200)
    return total / (2 * np.pi)


def kernel_gtilde(lead: LeadSpec, dtau: float) -> np.ndarray:
    """Occupied-state kernel: int de/2pi J f e^{-i e dtau}."""
    s = float(dtau)
    w = (0.25 * lead.bandwidth * np.exp(-lead.bandwidth * abs(s))
         + 1j * odd_part(s, lead.bandwidth, lead.temperature))
    return np.exp(-1j * lead.mu * s) * w * lead.gamma


def kernel_gbar(lead: LeadSpec, dtau: float) -> np.ndarray:
    """Empty-state kernel: int de/2pi J (1 - f) e^{-i e dtau}."""
    s = float(dtau)
    w = (0.25 * lead.bandwidth * np.exp(-lead.bandwidth * abs(s))
         - 1j * odd_part(s, lead.bandwidth, lead.temperature))
    return np.exp(-1j * lead.mu * s) * w * lead.gamma


@functools.lru_cache(maxsize=32)
def _odd_table(bandwidth: float, temperature: float, dt: float, n: int) -> np.ndarray:
    out = np.array([odd_part(k * dt, bandwidth, temperature) for k in range(n)])
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class KernelTable:
    """g, gtilde, gbar at lags k*dt, k = 0..n-1, each of shape (n, 2, 2)."""

    lead: LeadSpec
    grid: TimeGrid
    g: np.ndarray
    gtilde: np.ndarray
    gbar: np.ndarray

    @property
    def n(self) -> int:
        return len(self.g)

    def lagged(self, name: str, lags) -> np.ndarray:
        """Table values at integer lags of either sign, via X(-s) = X(s)^dagger."""
        table = getattr(self, name)
        lags = np.asarray(lags)
        vals = table[np.abs(lags)]
        neg = lags < 0
        vals[neg] = np.conj(np.swapaxes(vals[neg], -1, -2))
        return vals


def tabulate_kernels(lead: LeadSpec, grid: TimeGrid) -> KernelTable:
    """Tabulate the three kernels on all nonnegative multiples of ``grid.dt``."""
    n, dt = grid.n, grid.dt
    s = dt * np.arange(n)
    if lead.is_decoupled:
        zero = np.zeros((n, 2, 2), dtype=complex)
        return KernelTable(lead, grid, zero, zero.copy(), zero.copy())
    odd = _odd_table(lead.bandwidth, lead.temperature, dt, n)
    phase = np.exp(-1j * lead.mu * s)
    even = 0.25 * lead.bandwidth * np.exp(-lead.bandwidth * s)
    g = kernel_g(lead, s)
    gtilde = (phase * (even + 1j * odd))[:, None, None] * lead.gamma
    gbar = (phase * (even - 1j * odd))[:, None, None] * lead.gamma
    return KernelTable(lead, grid, g, gtilde, gbar)
