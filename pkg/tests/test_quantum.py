import numpy as np
import pytest
from hypothesis import given, strategies as st

from stirup import quantum as qc
from stirup.errors import DimensionError, NonHermitianError

GAMMA = 2 * np.pi * 5e-6
SX = np.array([[0, 1], [1, 0]], dtype=complex)


def rabi_final(h, T, n_steps):
    grid = qc.TimeGrid.over(T, n_steps)
    return qc.evolve_schrodinger(qc.HamiltonianFn.constant(h * SX), qc.basis_state(2, 0),
                                 grid).final


def test_state_vector_rejects_unnormalized():
    with pytest.raises(ValueError):
        qc.state_vector([1.0, 1.0])
    psi = qc.state_vector([1.0, 1.0], normalize=True)
    assert np.isclose(np.linalg.norm(psi), 1.0)


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        qc.density_matrix([[1.0, 0.5], [0.0, 0.0]])
    with pytest.raises(DimensionError):
        qc.density_matrix([[1.0, 0.0]])


def test_time_grid():
    g = qc.TimeGrid(1.0, 3.0, 4)
    assert g.spacing == 0.5
    assert len(g.nodes()) == 5
    with pytest.raises(ValueError):
        qc.TimeGrid(1.0, 1.0, 4)


def test_zero_hamiltonian_is_identity():
    psi0 = qc.state_vector([0.6, 0.8j, 0.0])
    traj = qc.evolve_schrodinger(qc.HamiltonianFn.zero(3), psi0, qc.TimeGrid.over(5.0, 50))
    assert len(traj.states) == 51
    assert np.allclose(traj.states, psi0[None, :], atol=0)


def test_rabi_pi_pulse():
    h, T = 0.3, np.pi / 2 / 0.3
    final = rabi_final(h, T, 4000)
    assert np.allclose(final, [0.0, -1j], atol=1e-10)


def test_fourth_order_convergence():
    h, T = 1.0, 7.3
    exact = np.array([np.cos(h * T), -1j * np.sin(h * T)])
    e1 = np.linalg.norm(rabi_final(h, T, 40) - exact)
    e2 = np.linalg.norm(rabi_final(h, T, 80) - exact)
    assert e1 / e2 >= 8.0


def test_dimension_mismatch_and_non_hermitian():
    grid = qc.TimeGrid.over(1.0, 10)
    with pytest.raises(DimensionError):
        qc.evolve_schrodinger(qc.HamiltonianFn.zero(3), qc.basis_state(2, 0), grid)
    bad = qc.HamiltonianFn.constant(np.array([[0, 1], [0, 0]], dtype=complex))
    with pytest.raises(NonHermitianError):
        qc.evolve_schrodinger(bad, qc.basis_state(2, 0), grid)


@given(st.lists(st.floats(-2, 2), min_size=9, max_size=9),
       st.lists(st.floats(-1, 1), min_size=3, max_size=3))
def test_norm_conservation(entries, amps):
    a = np.array(entries).reshape(3, 3)
    H = a + a.T
    psi0 = np.array(amps, dtype=complex) + np.array([1.5, 0, 0])
    psi0 = qc.state_vector(psi0, normalize=True)
    traj = qc.evolve_schrodinger(qc.HamiltonianFn.constant(H.astype(complex)), psi0,
                                 qc.TimeGrid.over(3.0, 4000))
    assert abs(np.linalg.norm(traj.final) - 1.0) < 1e-8


def test_lindblad_no_channels_is_static():
    rho0 = qc.pure_density([0.6, 0.8])
    traj = qc.evolve_lindblad(qc.HamiltonianFn.zero(2), [], rho0, qc.TimeGrid.over(1.0, 20))
    assert np.allclose(traj.states, rho0[None], atol=0)


def test_lindblad_decay_oracle():
    grid = qc.TimeGrid.over(4.0 / GAMMA, 2000)
    decay = qc.CollapseChannel([[0, 1], [0, 0]], GAMMA)
    traj = qc.evolve_lindblad(qc.HamiltonianFn.zero(2), [decay], np.diag([0.0, 1.0]), grid)
    t = grid.nodes()
    assert np.abs(traj.states[:, 1, 1].real - np.exp(-GAMMA * t)).max() < 1e-6
    traces = np.trace(traj.states, axis1=1, axis2=2)
    assert np.abs(traces - 1).max() < 1e-8
    assert np.abs(traj.states - np.conj(np.swapaxes(traj.states, 1, 2))).max() < 1e-10


def test_lindblad_dephasing_oracle():
    grid = qc.TimeGrid.over(4.0 / GAMMA, 2000)
    t = grid.nodes()
    s_plus = qc.CollapseChannel(np.diag([0.0, 1.0, 1.0]), GAMMA)
    rho = qc.pure_density(np.array([1.0, 0.0, 1.0]) / np.sqrt(2))
    traj = qc.evolve_lindblad(qc.HamiltonianFn.zero(3), [s_plus], rho, grid)
    assert np.abs(traj.states[:, 0, 2] - 0.5 * np.exp(-GAMMA * t / 2)).max() < 1e-6
    rho = qc.pure_density(np.array([0.0, 1.0, 1.0]) / np.sqrt(2))
    traj = qc.evolve_lindblad(qc.HamiltonianFn.zero(3), [s_plus], rho, grid)
    assert np.abs(traj.states[:, 1, 2] - 0.5).max() < 1e-12


def test_negative_rate_rejected():
    with pytest.raises(ValueError):
        qc.CollapseChannel(np.eye(2), -1.0)


def test_lindblad_matches_schrodinger_without_rates():
    H = qc.HamiltonianFn.constant(0.4 * SX)
    grid = qc.TimeGrid.over(3.0, 300)
    psi = qc.evolve_schrodinger(H, qc.basis_state(2, 0), grid).final
    rho = qc.evolve_lindblad(H, [qc.CollapseChannel(np.eye(2), 0.0)],
                             qc.pure_density(qc.basis_state(2, 0)), grid).final
    assert np.allclose(rho, np.outer(psi, psi.conj()), atol=1e-12)


def test_fidelities():
    a = qc.basis_state(2, 0)
    assert qc.fidelity_pure(a, a) == 1.0
    assert qc.fidelity_pure(a, qc.basis_state(2, 1)) == 0.0
    assert np.isclose(qc.fidelity_pure(a, np.array([1, 1]) / np.sqrt(2)), 0.5)
    assert qc.fidelity_mixed(a, qc.pure_density(a)) == 1.0
    assert np.isclose(qc.fidelity_mixed(qc.basis_state(4, 2), np.eye(4) / 4), 0.25)
    with pytest.raises(DimensionError):
        qc.fidelity_pure(a, qc.basis_state(3, 0))


def test_fidelity_mixed_decay_half():
    n = 1000
    grid = qc.TimeGrid.over(np.log(2) / GAMMA, n)
    decay = qc.CollapseChannel([[0, 1], [0, 0]], GAMMA)
    traj = qc.evolve_lindblad(qc.HamiltonianFn.zero(2), [decay], np.diag([0.0, 1.0]), grid)
    assert abs(qc.fidelity_mixed(qc.basis_state(2, 1), traj.final) - 0.5) < 1e-9


@given(st.floats(0, 2 * np.pi), st.lists(st.floats(-1, 1), min_size=6, max_size=6))
def test_global_phase_invariance(phi, xs):
    a = np.array(xs[:3]) + 1j * np.array(xs[3:]) + np.array([2.0, 0, 0])
    b = np.array(xs[::-1][:3]) + 0.5
    a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
    assert np.isclose(qc.fidelity_pure(a, np.exp(1j * phi) * b), qc.fidelity_pure(a, b),
                      atol=1e-12)


def test_transfer_efficiency_and_distance():
    grid = qc.TimeGrid.over(np.pi / 2, 200)
    traj = qc.evolve_schrodinger(qc.HamiltonianFn.constant(SX), qc.basis_state(2, 0), grid)
    assert qc.transfer_efficiency(traj, qc.basis_state(2, 1)) > 1 - 1e-10
    assert qc.transfer_efficiency(traj, qc.basis_state(2, 0)) < 1e-10
    assert qc.max_state_distance(traj, traj) < 1e-14
    static = qc.evolve_schrodinger(qc.HamiltonianFn.zero(2), qc.basis_state(2, 0), grid)
    assert np.isclose(qc.max_state_distance(traj, static), 1.0)
    mixed = qc.evolve_lindblad(qc.HamiltonianFn.zero(2), [], np.diag([1.0, 0.0]), grid)
    with pytest.raises(ValueError):
        qc.transfer_efficiency(mixed, qc.basis_state(2, 0))
    with pytest.raises(ValueError):
        qc.max_state_distance(traj, qc.evolve_schrodinger(
            qc.HamiltonianFn.zero(2), qc.basis_state(2, 0), qc.TimeGrid.over(1.0, 200)))


def test_population():
    psi = qc.basis_state(3, 0)
    assert qc.population(psi, 0) == 1.0
    assert qc.population(psi, 1) == 0.0
    g = np.arctan(0.5)
    a = np.array([np.cos(g), 0.0, -1j * np.sin(g)])
    assert np.isclose(qc.population(a, 2), 0.2)
    assert np.isclose(qc.population(qc.pure_density(a), 2), 0.2)
    with pytest.raises(IndexError):
        qc.population(psi, 3)
