import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from lgidots.closed import (
    ClosedPropagator, closed_n2, closed_propagator, closed_Q_correlator, closed_two_time_n2,
)
from lgidots.model import DotHamiltonian
from lgidots.oracle import STATE_SUPERPOSITION, fock_annihilators, fock_hamiltonian, fock_two_time

from conftest import superposition_rho

real = st.floats(-3, 3, allow_nan=False)


def hermitian(e11, e22, re, im):
    return DotHamiltonian.from_levels(e11, e22, complex(re, im))


def test_identity_at_zero(dots):
    assert np.allclose(closed_propagator(dots, 0.0), np.eye(2), atol=1e-15)


def test_full_transfer_at_pi(dots):
    w = closed_propagator(dots, np.pi)
    assert abs(w[1, 0]) ** 2 == pytest.approx(1, abs=1e-14)
    # degenerate dots: w21 = -i e^{-i beta t/2} sin(alpha t / 2)
    t = 0.83
    assert closed_propagator(dots, t)[1, 0] == pytest.approx(-1j * np.exp(-1j * t) * np.sin(t / 2))


def test_diagonal_fallback():
    d = DotHamiltonian.from_levels(0.3, -0.7, 0)
    t = 2.1
    assert np.allclose(closed_propagator(d, t), np.diag(np.exp(-1j * np.array([0.3, -0.7]) * t)))


@settings(max_examples=100, deadline=None)
@given(real, real, real, real, st.floats(0, 20))
def test_unitary_and_matches_expm(e11, e22, re, im, t):
    d = hermitian(e11, e22, re, im)
    w = closed_propagator(d, t)
    assert np.abs(w @ w.conj().T - np.eye(2)).max() < 1e-9
    assert abs(w[1, 0]) ** 2 + abs(w[1, 1]) ** 2 == pytest.approx(1, abs=1e-9)
    assert np.abs(w - expm(-1j * d.eps * t)).max() < 1e-9


def test_agrees_with_ode_integration():
    d = DotHamiltonian.from_levels(0.4, 1.3, 0.7)
    ts = np.linspace(0, 20, 81)
    sol = solve_ivp(lambda t, y: (-1j * d.eps @ y.reshape(2, 2)).ravel(), (0, 20),
                    np.eye(2, dtype=complex).ravel(), t_eval=ts, method="DOP853",
                    rtol=1e-12, atol=1e-13)
    w = closed_propagator(d, ts)
    assert np.abs(w - sol.y.T.reshape(-1, 2, 2)).max() < 1e-8


@settings(max_examples=30, deadline=None)
@given(real, real, real, real, st.floats(0, 10))
def test_modulus_periodic(e11, e22, re, im, t):
    d = hermitian(e11, e22, re, im)
    p = ClosedPropagator(d)
    if p.alpha < 0.05:
        return
    a = np.abs(closed_propagator(d, t))
    b = np.abs(closed_propagator(d, t + p.period))
    assert np.abs(a - b).max() < 1e-9


def test_two_time_initial_values(dots):
    assert closed_two_time_n2(dots, 0, 0) == pytest.approx(0.5, abs=1e-15)
    for t in (0.4, 2.2):
        assert closed_two_time_n2(dots, t, t) == pytest.approx(closed_n2(dots, t), abs=1e-12)


@pytest.mark.parametrize("dots_args,t1,t2", [
    ((1.0, 1.0, 0.5), 0.0, np.pi),
    ((1.0, 1.0, 0.5), 0.7, 2.9),
    ((1.0, 0.25, 0.5), 1.1, 1.9),
    ((-0.4, 0.9, 0.3 + 0.4j), 0.5, 3.3),
])
def test_eight_terms_match_state_vector(dots_args, t1, t2):
    d = DotHamiltonian.from_levels(*dots_args)
    n1, n2, nn = fock_two_time(d.eps, superposition_rho(), 1, t1, t2)
    assert closed_two_time_n2(d, t1, t2) == pytest.approx(nn, abs=1e-12)
    assert closed_n2(d, t1) == pytest.approx(n1, abs=1e-12)
    assert closed_n2(d, t2) == pytest.approx(n2, abs=1e-12)


def test_superposition_rho_matches_one_body_density():
    a = fock_annihilators(2)
    rho = superposition_rho()
    dens = np.array([[np.trace(rho @ a[i].T @ a[j]) for j in range(2)] for i in range(2)])
    assert np.allclose(dens, STATE_SUPERPOSITION)


def test_q_correlator_limits(dots):
    for t in (0.0, 0.9, 4.0):
        assert closed_Q_correlator(dots, t, t) == pytest.approx(1, abs=1e-12)
    assert closed_Q_correlator(dots, 0, 1e-6).real == pytest.approx(1, abs=1e-9)


def test_q_correlator_vs_oracle(dots):
    t2 = 2 * np.pi / 3  # one third of the revival period for alpha = 1
    n1, n2, nn = fock_two_time(dots.eps, superposition_rho(), 1, 0, t2)
    expect = (4 * nn - 2 * n2 - 2 * n1 + 1).real
    assert closed_Q_correlator(dots, 0, t2).real == pytest.approx(expect, abs=1e-12)
    # symmetrized correlator of a driven two-level system is cos(alpha tau)
    assert expect == pytest.approx(np.cos(t2), abs=1e-12)


def test_imaginary_part_is_commutator(dots):
    # <Q2 Q1> is not Hermitian: Im<Q2 Q1> = <[Q2, Q1]> / 2i, nonzero even for real e12
    a = fock_annihilators(2)
    H = fock_hamiltonian(dots.eps)
    lam, q = np.linalg.eigh(H)
    Q = 2 * a[1].T @ a[1] - np.eye(4)

    def heis(t):
        u = (q * np.exp(-1j * lam * t)) @ q.conj().T
        return u.conj().T @ Q @ u

    rho = superposition_rho()
    t1, t2 = 0.5, 1.4
    comm = np.trace(rho @ (heis(t2) @ heis(t1) - heis(t1) @ heis(t2)))
    c = closed_Q_correlator(dots, t1, t2)
    assert abs(c.imag) > 0.1
    assert c.imag == pytest.approx((comm / 2j).real, abs=1e-12)
    sym = np.trace(rho @ (heis(t2) @ heis(t1) + heis(t1) @ heis(t2))) / 2
    assert c.real == pytest.approx(sym.real, abs=1e-12)
    assert abs(sym.imag) < 1e-12


def test_fock_hamiltonian_one_body_sector(dots):
    H = fock_hamiltonian(dots.eps)
    # single-particle block in basis |10>, |01> (mode 0 = dot 1)
    block = H[np.ix_([2, 1], [2, 1])]
    assert np.allclose(block, dots.eps)
