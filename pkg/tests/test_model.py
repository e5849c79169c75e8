import numpy as np
import pytest

from lgidots.errors import ParameterError
from lgidots.model import (
    DEFAULT_LEFT, DEFAULT_RIGHT, DotHamiltonian, LeadSpec, MeasurementSchedule, TimeGrid,
    Topology, make_parallel_config, make_series_config, read_config,
)


def test_series_fig4b_values(dots):
    cfg = make_series_config(0.3, 0.3, dots, DEFAULT_LEFT, DEFAULT_RIGHT)
    assert np.array_equal(cfg.left.gamma, [[0.3, 0], [0, 0]])
    assert np.array_equal(cfg.right.gamma, [[0, 0], [0, 0.3]])
    assert cfg.topology is Topology.SERIES


def test_series_degenerate_cases(dots):
    closed = make_series_config(0, 0, dots)
    assert not closed.left.gamma.any() and not closed.right.gamma.any()
    assert closed.is_closed
    one_sided = make_series_config(1, 0, dots)
    assert not one_sided.right.gamma.any()
    assert one_sided.left.gamma[0, 0] == 1


def test_parallel_gamma(dots):
    cfg = make_parallel_config(0.3, 0.3, dots)
    for g in (cfg.left.gamma, cfg.right.gamma):
        assert np.array_equal(g, np.full((2, 2), 0.15))
        assert g[0, 1] == np.sqrt(g[0, 0] * g[1, 1])
        assert np.allclose(np.linalg.eigvalsh(g), [0.0, 0.3], atol=1e-15)
    assert not make_parallel_config(0, 0.3, dots).left.gamma.any()


@pytest.mark.parametrize("make", [make_series_config, make_parallel_config])
def test_negative_coupling_rejected(make, dots):
    with pytest.raises(ParameterError):
        make(-0.1, 0.2, dots)


@pytest.mark.parametrize("g", np.linspace(0, 2, 5))
@pytest.mark.parametrize("make", [make_series_config, make_parallel_config])
def test_gamma_psd(make, g, dots):
    cfg = make(g, 2 - g, dots)
    for lead in cfg.leads:
        assert np.linalg.eigvalsh(lead.gamma).min() >= -1e-12


def test_hamiltonian_must_be_hermitian():
    with pytest.raises(ParameterError):
        DotHamiltonian(np.array([[1, 0.5], [0.4, 1]]))
    h = DotHamiltonian.from_levels(1, 2, 0.3 + 0.2j)
    assert h.e21 == np.conj(h.e12)
    with pytest.raises(ValueError):
        h.eps[0, 0] = 3  # read-only


def test_lead_validation():
    with pytest.raises(ParameterError):
        LeadSpec(np.diag([1.0, -0.5]))
    with pytest.raises(ParameterError):
        LeadSpec(np.zeros((2, 2)), bandwidth=0)
    with pytest.raises(ParameterError):
        LeadSpec(np.zeros((2, 2)), temperature=-1)
    with pytest.raises(ParameterError):
        LeadSpec(np.array([[1, 0.2], [0.1, 1]]))


def test_schedule_times():
    assert MeasurementSchedule(0.7).times == (0.0, 0.7, 1.4, 0.7 * 3)
    with pytest.raises(ParameterError):
        MeasurementSchedule(0)


def test_time_grid():
    g = TimeGrid.from_step(0.01, 3.0)
    assert g.n == 301 and np.isclose(g.dt, 0.01)
    assert g.index(1.5) == 150
    with pytest.raises(ParameterError):
        g.index(1.505)
    with pytest.raises(ParameterError):
        TimeGrid(0, 1, 1)


CONFIG = """
[dots]
e11 = 1.0
e22 = 0.8
e12 = 0.5, 0.1   # complex as re,im

[left]
series = 0.2
W = 1.0
mu = 5
kT = 0.1

[right]
series = 0.3
W = 2
mu = -5
kT = 0.2

[run]
tau_min = 0.1
tau_max = 2.0
tau_steps = 20
grid_dt = 0.02
scenario = OpenC4
"""


def test_read_config():
    cf = read_config(CONFIG)
    d = cf.device
    assert d.topology is Topology.SERIES
    assert d.dots.e12 == 0.5 + 0.1j and d.dots.e22 == 0.8
    assert d.left.gamma[0, 0] == 0.2 and d.right.gamma[1, 1] == 0.3
    assert d.right.bandwidth == 2 and d.right.mu == -5 and d.right.temperature == 0.2
    assert cf.run.scenario == "OpenC4"
    assert np.allclose(cf.run.tau_values, np.linspace(0.1, 2.0, 20))


def test_read_config_custom_and_closed():
    cf = read_config("[dots]\ne12 = 0.5\n[left]\ngamma = 0.2, 0.1, 0.3\n[right]\nparallel = 0.4\n")
    assert cf.device.topology is Topology.CUSTOM
    assert np.array_equal(cf.device.left.gamma, [[0.2, 0.1], [0.1, 0.3]])
    assert np.array_equal(cf.device.right.gamma, np.full((2, 2), 0.2))
    assert read_config("[dots]\ne11 = 1\n").device.is_closed


@pytest.mark.parametrize("text", [
    "[left]\nseries = 1\n",
    "[dots]\ne12 = abc\n",
    "[dots]\n[left]\nseries = 1\n",
    "[dots]\n[left]\nseries = 1\nparallel = 1\n[right]\nseries = 1\n",
    "[dots]\n[run]\ntau_min = 2\ntau_max = 1\n",
    "not a config",
])
def test_bad_configs(text):
    with pytest.raises(ParameterError):
        read_config(text)
