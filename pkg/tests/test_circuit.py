import numpy as np
import pytest
import scipy.special
from hypothesis import given, strategies as st

from stirup import circuit as cq
from stirup.errors import DimensionError, UnreachableCouplingError
from stirup.pulses import ControlPulses, hamiltonian
from stirup.quantum import (TimeGrid, basis_state, evolve_lindblad, evolve_schrodinger,
                            pure_density)


def test_bessel_against_scipy():
    x = np.linspace(-10, 10, 4001)
    assert np.abs(cq.bessel_j1(x) - scipy.special.j1(x)).max() < 1e-10
    assert cq.bessel_j1(0.0) == 0.0
    assert abs(cq.bessel_j1(1.8412) - 0.5819) < 1e-4
    with pytest.raises(ValueError):
        cq.bessel_j1(10.5)


def test_bessel_ode_residual():
    # x^2 y'' + x y' + (x^2 - 1) y = 0
    x = np.linspace(0.5, 9.5, 50)
    h = 1e-3
    y = cq.bessel_j1(x)
    yp = (cq.bessel_j1(x + h) - cq.bessel_j1(x - h)) / (2 * h)
    ypp = (cq.bessel_j1(x + h) - 2 * y + cq.bessel_j1(x - h)) / h ** 2
    assert np.abs(x ** 2 * ypp + x * yp + (x ** 2 - 1) * y).max() < 1e-5


@given(st.floats(0, 10))
def test_bessel_odd(x):
    assert cq.bessel_j1(-x) == -cq.bessel_j1(x)


def test_invert_coupling():
    assert cq.invert_coupling(0.0, 1.0) == 0.0
    assert abs(cq.invert_coupling(0.5819, 1.0) - 1.8412) < 1e-3
    for y in (0.1, 0.3, 0.5):
        assert abs(cq.bessel_j1(cq.invert_coupling(y, 1.0)) - y) < 1e-9
    with pytest.raises(UnreachableCouplingError):
        cq.invert_coupling(0.6, 1.0)
    with pytest.raises(ValueError):
        cq.invert_coupling(-0.1, 1.0)


@given(st.floats(0, cq.J1_MAX), st.floats(0.1, 3.0))
def test_invert_round_trip_property(y, g):
    eps = cq.invert_coupling(y * g, g)
    assert 0 <= eps <= cq.J1_ARGMAX
    assert abs(g * cq.bessel_j1(eps) - y * g) < 1e-9 * max(1.0, g)


def test_model_validation():
    m = cq.CircuitModel(2)
    assert np.allclose(m.nu, [m.omega_c - w for w in m.omega_q])
    with pytest.raises(ValueError):
        cq.CircuitModel(2, nu=(1.0, 1.0))
    with pytest.raises(DimensionError):
        cq.CircuitModel(2, g=(1.0,))


def test_single_excitation_map():
    assert cq.SingleExcitationMap(2).labels == ("eg0", "ge0", "gg1")
    m3 = cq.SingleExcitationMap(3)
    assert m3.labels == ("egg0", "geg0", "gge0", "ggg1")
    assert m3.index("ggg1") == 3 and m3.index("ggg0") == 4
    with pytest.raises(KeyError):
        m3.index("eeg0")


@pytest.mark.parametrize("n", [2, 3])
def test_effective_hamiltonian_matches_pulses(n, rng):
    vals = rng.normal(size=n)
    p = ControlPulses.from_function(n + 1, 5.0, lambda t: np.outer(vals, np.ones_like(t)))
    model = cq.CircuitModel(n)
    Hc = cq.effective_hamiltonian(model, p)
    assert np.allclose(Hc(1.3), hamiltonian(p)(1.3), atol=0)
    Hv = cq.effective_hamiltonian(model, p, with_vacuum=True)
    m = Hv(1.3)
    assert np.all(m[n + 1] == 0) and np.all(m[:, n + 1] == 0)
    zero = ControlPulses.from_function(n + 1, 5.0, lambda t: np.zeros((n, len(t))))
    assert np.all(cq.effective_hamiltonian(model, zero)(2.0) == 0)
    with pytest.raises(DimensionError):
        cq.effective_hamiltonian(cq.CircuitModel(n + 1), p)


def test_collapse_channels():
    m = cq.CircuitModel(2)
    ch = cq.collapse_channels(m, cq.SingleExcitationMap(2))
    assert len(ch) == 5 and all(c.operator.shape == (4, 4) for c in ch)
    assert len(cq.collapse_channels(cq.CircuitModel(3), cq.SingleExcitationMap(3))) == 7


def test_zero_rates_lindblad_equals_schrodinger():
    sc = cq.scenario("qst2", cq.CircuitModel(2).with_rates(0, 0, 0))
    H = cq.effective_hamiltonian(sc.model, sc.pulses, True)
    grid = TimeGrid.over(sc.duration, 1000)
    psi = evolve_schrodinger(H, sc.initial(True), grid).final
    rho = evolve_lindblad(H, sc.channels(), pure_density(sc.initial(True)), grid).final
    assert abs(np.vdot(psi, rho @ psi).real - 1.0) < 1e-8


def test_structural_equivalence_with_bare():
    sc = cq.scenario("w", cq.CircuitModel(3).with_rates(0, 0, 0))
    grid = TimeGrid.over(sc.duration, 2000)
    a = evolve_schrodinger(cq.effective_hamiltonian(sc.model, sc.pulses), sc.initial(), grid)
    b = evolve_schrodinger(cq.bare_equivalent(sc), basis_state(4, 0), grid)
    assert np.abs(a.states - b.states).max() < 1e-10


def test_scenario_examples():
    bell = cq.scenario("bell")
    assert bell.duration == 90.0 and np.isclose(bell.boundary_angles[0], -np.pi / 4)
    w = cq.scenario("w")
    assert w.duration == 98.5
    assert np.allclose(w.boundary_angles, [np.pi / 4, -np.arcsin(3 ** -0.5)])
    q = cq.scenario("qst2")
    assert q.duration == 82.0 and np.allclose(q.target(), [0, 1, 0])
    with pytest.raises(ValueError):
        cq.scenario("ghz")
    with pytest.raises(DimensionError):
        cq.scenario("w", cq.CircuitModel(2))


def test_unreachable_coupling():
    weak = cq.CircuitModel(2, g=(0.01, 0.01))
    with pytest.raises(UnreachableCouplingError):
        cq.scenario("bell", weak)


@pytest.mark.parametrize("name", ["qst2", "qst3", "bell", "w"])
def test_hardware_feasibility(name, tmp_path):
    sc = cq.scenario(name)
    hw = sc.hardware()
    assert hw.eps.min() >= 0 and hw.eps.max() <= 1.8412
    assert np.abs(hw.gtilde - sc.pulses.envelopes).max() < 1e-9
    path = cq.write_hardware_csv(hw, tmp_path / "hw.csv")
    with open(path) as fh:
        head = fh.readline().strip().split(",")
    n = sc.model.n_qubits
    assert head == ["t_ns"] + [f"eps_{j}" for j in range(n)] + [f"gtilde_{j}" for j in range(n)]


def test_scenario_reaches_target_closed():
    for name in ("qst2", "qst3", "bell", "w"):
        sc = cq.scenario(name, cq.CircuitModel(cq.SCENARIOS[name][0]).with_rates(0, 0, 0))
        f, traj = sc.simulate(2000)
        assert f > 1 - 1e-6
        assert traj.populations()[0, 0] == 1.0


def test_decoherence_lowers_fidelity():
    f, traj = cq.scenario("bell").simulate(2000)
    assert 0.99 < f < 1.0
    tr = np.trace(traj.states, axis1=1, axis2=2)
    assert np.abs(tr - 1).max() < 1e-8
