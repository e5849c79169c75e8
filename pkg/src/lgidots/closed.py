"""Isolated double dot: analytic propagator and two-time charge correlators.

The propagator w(t) = exp(-i eps t) is written in the two-frequency closed form

    w11 = A1 e^{-i(b-a)t/2} + A2 e^{-i(b+a)t/2}
    w12 = A3 e^{-i(b-a)t/2} + A4 e^{-i(b+a)t/2}
    w21 = -[A1 (a-c) e^{-i(b-a)t/2} - A2 (a+c) e^{-i(b+a)t/2}] / (2 e12)
    w22 = -[A3 (a-c) e^{-i(b-a)t/2} - A4 (a+c) e^{-i(b+a)t/2}] / (2 e12)

with a = sqrt(c^2 + 4|e12|^2), b = e11 + e22, c = e22 - e11,
A1 = (a+c)/2a, A2 = (a-c)/2a, A3 = -e12/a, A4 = e12/a. For real e12 the
placement of e12 versus e21 is immaterial; for complex couplings the upper-right
element e12 is the one that makes w unitary.

All correlators here are for the one-electron state (|01> + |10>)/sqrt(2).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import DotHamiltonian

DIAGONAL_THRESHOLD = 1e-12


@dataclass(frozen=True)
class ClosedPropagator:
    dots: DotHamiltonian

    @property
    def alpha(self) -> float:
        d = self.dots
        return float(np.sqrt((d.e22 - d.e11) ** 2 + 4 * abs(d.e12) ** 2))

    @property
    def beta(self) -> float:
        return self.dots.e11 + self.dots.e22

    @property
    def gamma_diff(self) -> float:
        return self.dots.e22 - self.dots.e11

    @property
    def amplitudes(self) -> tuple[complex, complex, complex, complex]:
        a, c, e12 = self.alpha, self.gamma_diff, self.dots.e12
        return ((a + c) / (2 * a), (a - c) / (2 * a), -e12 / a, e12 / a)

    @property
    def period(self) -> float:
        """Revival period 2 pi / alpha of |w_ij(t)|."""
        return 2 * np.pi / self.alpha

    def __call__(self, t):
        return closed_propagator(self.dots, t)


def closed_propagator(dots: DotHamiltonian, t) -> np.ndarray:
    """w(t, 0) for scalar ``t`` (2x2) or an array of times (..., 2, 2)."""
    t = np.asarray(t, dtype=float)
    e11, e22, e12 = dots.e11, dots.e22, dots.e12
    out = np.zeros(t.shape + (2, 2), dtype=complex)
    if abs(e12) < DIAGONAL_THRESHOLD:
        out[..., 0, 0] = np.exp(-1j * e11 * t)
        out[..., 1, 1] = np.exp(-1j * e22 * t)
        return out
    p = ClosedPropagator(dots)
    a, b, c = p.alpha, p.beta, p.gamma_diff
    A1, A2, A3, A4 = p.amplitudes
    slow = np.exp(-0.5j * (b - a) * t)
    fast = np.exp(-0.5j * (b + a) * t)
    out[..., 0, 0] = A1 * slow + A2 * fast
    out[..., 0, 1] = A3 * slow + A4 * fast
    out[..., 1, 0] = -(A1 * (a - c) * slow - A2 * (a + c) * fast) / (2 * e12)
    out[..., 1, 1] = -(A3 * (a - c) * slow - A4 * (a + c) * fast) / (2 * e12)
    return out


def closed_n2(dots: DotHamiltonian, t: float) -> float:
    """<n2(t)> = |w21 + w22|^2 / 2."""
    w = closed_propagator(dots, t)
    return float(0.5 * abs(w[1, 0] + w[1, 1]) ** 2)


def closed_two_time_n2(dots: DotHamiltonian, t1: float, t2: float) -> complex:
    """<n2(t2) n2(t1)>, written out as the eight-term product expansion."""
    w1 = closed_propagator(dots, t1)
    w2 = closed_propagator(dots, t2)
    a1, b1 = w1[1, 0], w1[1, 1]  # w21(t1), w22(t1)
    a2, b2 = w2[1, 0], w2[1, 1]
    c = np.conj
    terms = (
        abs(c(a2)) ** 2 * abs(c(a1)) ** 2,
        abs(c(a2)) ** 2 * c(a1) * b1,
        c(a2) * b2 * c(b1) * a1,
        c(a2) * b2 * abs(c(b1)) ** 2,
        c(b2) * a2 * abs(c(a1)) ** 2,
        c(b2) * a2 * c(a1) * b1,
        abs(b2) ** 2 * c(b1) * a1,
        abs(b2) ** 2 * abs(b1) ** 2,
    )
    return complex(0.5 * sum(terms))


def closed_Q_correlator(dots: DotHamiltonian, t1: float, t2: float) -> complex:
    """<Q(t2) Q(t1)> with Q = 2 n2 - 1; unsymmetrized, so possibly complex."""
    nn = closed_two_time_n2(dots, t1, t2)
    return 4 * nn - 2 * closed_n2(dots, t2) - 2 * closed_n2(dots, t1) + 1
