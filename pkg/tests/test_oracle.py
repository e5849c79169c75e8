import warnings

import numpy as np
import pytest

from lgidots.closed import closed_n2, closed_two_time_n2
from lgidots.errors import ParameterError
from lgidots.kernels import lorentzian
from lgidots.lgi import OpenSolution, compute_lgi
from lgidots.model import (
    DEFAULT_LEFT, DEFAULT_RIGHT, LeadPartial, MeasurementSchedule, TimeGrid,
    make_closed_config, make_parallel_config, make_series_config,
)
from lgidots.oracle import (
    STATE_01, STATE_SUPERPOSITION, SingleParticlePropagator, build_bath, fock_annihilators,
    fock_product_state, fock_two_time, initial_correlation, oracle_lgi, oracle_two_time,
    single_particle_hamiltonian, wick_two_time,
)


def _random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_wick_matches_fock_space(d):
    rng = np.random.default_rng(d)
    for _ in range(3):
        h = _random_hermitian(rng, d)
        occ = rng.uniform(0, 1, d)
        c0 = np.diag(occ).astype(complex)
        rho = fock_product_state(occ)
        prop = SingleParticlePropagator(h)
        for p in range(min(d, 3)):
            t1, t2 = sorted(rng.uniform(0, 3, 2))
            w = wick_two_time(prop, c0, p, t1, t2)
            f = fock_two_time(h, rho, p, t1, t2)
            assert abs(w[0] - f[0]) < 1e-10
            assert abs(w[1] - f[1]) < 1e-10
            assert abs(w[2] - f[2]) < 1e-10


def test_wick_matches_fock_for_coherent_dot_state():
    # dots in (|01> + |10>)/sqrt(2), two empty and one full bath mode
    rng = np.random.default_rng(5)
    h = _random_hermitian(rng, 5)
    a = fock_annihilators(5)
    vac = np.eye(2 ** 5)[0]
    psi = a[4].T @ (a[0].T + a[1].T) @ vac / np.sqrt(2)
    rho = np.outer(psi, psi.conj())
    c0 = np.zeros((5, 5), dtype=complex)
    c0[:2, :2] = STATE_SUPERPOSITION
    c0[4, 4] = 1.0
    prop = SingleParticlePropagator(h)
    w = wick_two_time(prop, c0, 1, 0.4, 1.7)
    f = fock_two_time(h, rho, 1, 0.4, 1.7)
    np.testing.assert_allclose(w, f, atol=1e-10)


def test_unitarity_and_particle_number(fig4a_weak):
    bath = build_bath(fig4a_weak, 32, 20.0)
    prop = SingleParticlePropagator(single_particle_hamiltonian(fig4a_weak, bath))
    c0 = initial_correlation(bath)
    d = 2 + bath.n_modes
    np.testing.assert_allclose(prop(0.0), np.eye(d), atol=1e-12)
    for t in (0.5, 3.0, 9.0):
        U = prop(t)
        assert np.abs(U @ U.conj().T - np.eye(d)).max() < 1e-9
        # C(t)_{mn} = <a_m^dag(t) a_n(t)> = (U* C0 U^T)_{mn}
        ct = U.conj() @ c0 @ U.T
        assert abs(np.trace(ct) - np.trace(c0)) < 1e-9


def test_bath_profile_matches_lorentzian(dots):
    config = make_series_config(1.0, 1.0, dots, LeadPartial(1.0, 5.0, 0.1), DEFAULT_RIGHT)
    bath = build_bath(config, 64, 20.0)
    left = bath.lead_index == 0
    e = bath.energies[left]
    v2 = np.abs(bath.couplings[0, left]) ** 2
    # binned density sum_k |V_k|^2 / de against J / 2 pi at the sampled energies
    density = v2 / bath.spacing
    target = 1.0 * lorentzian(e - 5.0, 1.0) / (2 * np.pi)
    l1 = np.sum(np.abs(density - target)) / np.sum(target)
    assert l1 < 0.01
    assert np.all(np.abs(bath.couplings[1, left]) == 0)


def test_zero_gamma_gives_zero_couplings(dots):
    bath = build_bath(make_closed_config(dots), 1, 3.0)
    assert np.all(bath.couplings == 0)
    assert bath.n_modes == 2


def test_parallel_couplings_proportional(dots):
    config = make_parallel_config(0.6, 0.2, dots, DEFAULT_LEFT, DEFAULT_RIGHT)
    bath = build_bath(config, 16, 10.0)
    for lead in (0, 1):
        m = bath.lead_index == lead
        v1, v2 = bath.couplings[0, m], bath.couplings[1, m]
        np.testing.assert_allclose(np.abs(v1), np.abs(v2), rtol=1e-12)
        g = config.leads[lead].gamma
        # sum over modes of V_i V_j^* reproduces gamma_ij times the bath weight
        w = np.sum(np.abs(v1) ** 2) / g[0, 0]
        np.testing.assert_allclose(
            np.array([[np.sum(a * np.conj(b)) for b in (v1, v2)] for a in (v1, v2)]),
            g * w, atol=1e-14)


def test_build_bath_rejects_bad_input(dots):
    with pytest.raises(ParameterError):
        build_bath(make_closed_config(dots), 0, 1.0)
    with pytest.raises(ParameterError):
        build_bath(make_closed_config(dots), 4, -1.0)


def test_initial_values(fig4a_weak):
    r = oracle_two_time(fig4a_weak, build_bath(fig4a_weak, 16, 20.0), 0.0, 0.0)
    assert r.n2_t1 == pytest.approx(1.0, abs=1e-14)
    assert r.nn == pytest.approx(1.0, abs=1e-14)
    assert r.valid


def test_decoupled_reproduces_closed_state_vector(dots):
    config = make_closed_config(dots)
    bath = build_bath(config, 8, 2.0)
    for t1, t2 in [(0.0, 0.7), (0.5, 2.5), (1.0, 1.0)]:
        r = oracle_two_time(config, bath, t1, t2, STATE_SUPERPOSITION)
        assert r.nn == pytest.approx(closed_two_time_n2(dots, t1, t2), abs=1e-12)
        assert r.n2_t2 == pytest.approx(closed_n2(dots, t2), abs=1e-12)


def test_validity_warning(fig4a_weak):
    bath = build_bath(fig4a_weak, 8, 20.0)
    with pytest.warns(UserWarning, match="validity"):
        r = oracle_two_time(fig4a_weak, bath, 0.0, 2 * bath.t_valid)
    assert not r.valid
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert oracle_two_time(fig4a_weak, bath, 0.0, 0.5 * bath.t_valid).valid


def test_mode_convergence(fig4a_weak):
    schedule = MeasurementSchedule(1.0)
    c21 = [oracle_lgi(fig4a_weak, schedule, build_bath(fig4a_weak, k, 20.0)).C21 for k in (32, 64)]
    assert abs(c21[0] - c21[1]) < 1e-2


def test_oracle_matches_negf(fig4a_weak):
    grid = TimeGrid.from_step(0.01, 6.0)
    sol = OpenSolution.solve(fig4a_weak, grid)
    bath = build_bath(fig4a_weak, 64, 20.0)
    prop = SingleParticlePropagator(single_particle_hamiltonian(fig4a_weak, bath))
    for tau in (0.5, 1.0, 2.0):
        schedule = MeasurementSchedule(tau)
        ref = oracle_lgi(fig4a_weak, schedule, bath, STATE_01, prop=prop)
        assert abs(ref.C3 - compute_lgi(fig4a_weak, schedule, solution=sol).C3) < 3e-2
    one = oracle_lgi(fig4a_weak, MeasurementSchedule(1.0), bath)
    negf = compute_lgi(fig4a_weak, MeasurementSchedule(1.0), solution=sol)
    assert abs(one.C21 - negf.C21) < 2e-2
