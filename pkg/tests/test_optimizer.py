import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stirup import optimizer as opt
from stirup import passage as psg
from stirup.csvio import read_csv
from stirup.errors import OptimizationError
from stirup.pulses import minimum_time, stirap_baseline, stirup_pulses

TAU = minimum_time(1.0)
TARGET = np.array([0.0, -1.0, 0.0], dtype=complex)


def test_q_search_validation():
    with pytest.raises(ValueError):
        opt.QSearch(10.0, 1.0, bounds=(0.1, -0.1))
    with pytest.raises(ValueError):
        opt.optimize_q(opt.QSearch(0.9 * TAU, 1.0))


@pytest.mark.parametrize("k, expected", [(1, 0.02), (40, 0.0106)])
def test_optimize_q_table_endpoints(k, expected):
    res = opt.optimize_q(opt.QSearch(k * TAU, 1.0))
    assert res.feasible and not res.warning
    assert abs(res.q - expected) <= 0.3 * expected
    assert res.max_amplitude <= res.amplitude_cap
    p0 = psg.intermediate_population_max(psg.default_passage([0, -1, 0], k * TAU, 1.0)[1])
    assert res.p_max < p0


def test_optimize_q_non_increasing():
    qs = [opt.optimize_q(opt.QSearch(k * TAU, 1.0, n_grid=21)).q for k in range(1, 10)]
    assert all(b <= a for a, b in zip(qs, qs[1:]))


def test_optimize_q_declared_feasibility():
    res = opt.optimize_q(opt.QSearch(3 * TAU, 1.0))
    for p in res.points:
        assert p.feasible == (p.max_amplitude <= res.amplitude_cap)
    pulses = stirup_pulses([0, -1, 0], 3 * TAU, 1.0, res.q)[0]
    assert pulses.max_amplitude <= res.amplitude_cap


def test_optimize_q_infeasible_returns_zero():
    res = opt.optimize_q(opt.QSearch(TAU, 1.0, bounds=(0.08, 0.1), n_grid=5))
    assert res.q == 0.0 and res.warning


def test_q_below_minus_sixteenth_is_infeasible():
    p = opt._q_point(opt.QSearch(2 * TAU, 1.0), -0.09, np.inf)
    assert not p.feasible and p.objective == np.inf


def test_write_q_report(tmp_path):
    res = opt.optimize_q(opt.QSearch(2 * TAU, 1.0, n_grid=5))
    header, rows = read_csv(opt.write_q_report(res, tmp_path / "q.csv"))
    assert header == ["Q", "p_max", "max_amplitude", "objective", "feasible"]
    assert len(rows) == len(res.points) and np.all(np.diff(rows[:, 0]) >= 0)


def test_literal_ansatz_examples():
    T = 9.0
    gamma, chi = opt.schedules_from_ansatz(opt.FourierAnsatz.zeros(0, 0), T)
    assert np.isclose(gamma.value(T), np.pi) and np.isclose(chi.value(T / 3), np.pi / 6)
    a = opt.FourierAnsatz((0.1, -0.2), (0.05, 0.3, -0.1))
    gamma, chi = opt.schedules_from_ansatz(a, T)
    assert abs(chi.value(0.0)) < 1e-15 and np.isclose(chi.value(T), np.pi / 2)
    for s in (gamma, chi):
        t = np.linspace(0.01, T - 0.01, 300)
        h = 1e-5
        fd = (s.value(t + h) - s.value(t - h)) / (2 * h)
        assert np.abs(fd - s.derivative(t)).max() < 1e-6


def test_regularized_ansatz():
    T = 3 * TAU
    omega = psg.AmplitudeSchedule(1.0, 0.0, T)
    g0, c0 = opt.regularized_schedules(opt.FourierAnsatz.zeros(2, 2), T, omega)
    _, gd, (cd,), _ = psg.default_passage([0, -1, 0], T, 1.0)
    t = np.linspace(0, T, 101)
    assert np.abs(g0.value(t) - gd.value(t)).max() < 1e-14
    assert np.abs(c0.value(t) - cd.value(t)).max() < 1e-14
    g, c = opt.regularized_schedules(opt.FourierAnsatz((0.2,), (-0.1, 0.05)), T, omega)
    rep = psg.validate_boundaries(psg.PassageSpec.for_target([0, -1, 0]), g, [c])
    assert rep.ok, str(rep)


def test_objective_spec_validation():
    with pytest.raises(ValueError):
        opt.ObjectiveSpec(w_fidelity=0.0)
    with pytest.raises(ValueError):
        opt.ObjectiveSpec(w_eta=1.0)
    with pytest.raises(ValueError):
        opt.ObjectiveSpec(w_fidelity=-1.0)


def test_robustness_score_examples():
    T = 2 * TAU
    stirup = stirup_pulses([0, -1, 0], T, 1.0)[0]
    assert opt.robustness_score(stirup, opt.ObjectiveSpec(), TARGET) < 1e-6
    eta = opt.ObjectiveSpec(w_fidelity=0.0, w_eta=1.0, eta_grid=(-0.05, 0.0, 0.05))
    assert (opt.robustness_score(stirup, eta, TARGET)
            < opt.robustness_score(stirap_baseline(1.0, T), eta, TARGET))
    rev = opt.ObjectiveSpec(w_fidelity=0.0, w_eta=1.0, eta_grid=(0.05, -0.05, 0.0))
    assert np.isclose(opt.robustness_score(stirup, eta, TARGET),
                      opt.robustness_score(stirup, rev, TARGET), rtol=1e-14)


def test_bare_zeta_shift():
    p = stirup_pulses([0, -1, 0], 2 * TAU, 1.0)[0]
    f0 = opt.simulate_bare(p, TARGET)[0]
    assert f0 > 1 - 1e-6
    assert opt.simulate_bare(p, TARGET, zeta=0.03)[0] < f0


def test_fourier_closed_system_no_regression():
    T = 2 * TAU
    obj = opt.ObjectiveSpec(n_steps=1000)
    res = opt.optimize_fourier(1, 1, obj, T, 1.0, restarts=2, maxfev=8)
    assert res.baseline_objective < 1e-6
    assert res.objective <= res.baseline_objective


def test_fourier_eta_improves_and_is_deterministic(tmp_path):
    T = 2 * TAU
    obj = opt.ObjectiveSpec(w_fidelity=0.0, w_eta=1.0, eta_grid=(-0.05, 0.0, 0.05),
                            n_steps=1000)
    kw = dict(restarts=1, maxfev=25, seed=3)
    a = opt.optimize_fourier(1, 1, obj, T, 1.0, **kw)
    b = opt.optimize_fourier(1, 1, obj, T, 1.0, **kw)
    assert a.objective < a.baseline_objective
    assert a.ansatz == b.ansatz and a.objective == b.objective
    header, rows = read_csv(opt.write_fourier_report(a, tmp_path / "f.csv"))
    assert header == ["C_1", "S_1", "objective", "feasible"] and len(rows) == a.evaluations


def test_fourier_failure_carries_coefficients(monkeypatch):
    def boom(*args, **kw):
        raise FloatingPointError("overflow")
    monkeypatch.setattr(opt, "robustness_score", boom)
    with pytest.raises(OptimizationError) as info:
        opt.ansatz_objective(np.array([0.1, 0.2]), 1, opt.ObjectiveSpec(), 2 * TAU, 1.0)
    assert info.value.coefficients == (0.1, 0.2)


@settings(max_examples=10)
@given(st.lists(st.floats(-1, 1), min_size=0, max_size=4), st.integers(0, 4))
def test_ansatz_vector_round_trip(values, n_c):
    n_c = min(n_c, len(values))
    a = opt.FourierAnsatz.from_vector(values, n_c)
    assert a.n_c == n_c and a.n_s == len(values) - n_c
    assert np.array_equal(a.vector(), np.array(values, dtype=float))
