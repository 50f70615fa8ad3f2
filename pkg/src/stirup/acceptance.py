"""Acceptance checks, one function per criterion, each returning a CriterionResult."""
import time
from dataclasses import dataclass

import numpy as np

from . import circuit as cq
from .harness import Bench, p3_max_curves, stirup_dark_distance
from .optimizer import QSearch, optimize_q
from .pulses import hamiltonian, minimum_time, passage_trajectory, stirup_pulses
from .quantum import (CollapseChannel, HamiltonianFn, TimeGrid, basis_state, evolve_lindblad,
                      evolve_schrodinger, max_state_distance, pure_density, state_vector,
                      transfer_efficiency)
from .reproduce import ADIABATIC_GRID, tau_grid

GAMMA = cq.GAMMA_UNIT


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d} {self.name}: {self.detail} ({self.seconds:.1f} s)"


def _timed(number, name, fn, budget=None):
    t0 = time.perf_counter()
    passed, detail = fn()
    dt = time.perf_counter() - t0
    if budget is not None and dt > budget:
        passed = False
        detail += f"; runtime {dt:.1f} s exceeds {budget:g} s"
    return CriterionResult(number, name, bool(passed), detail, dt)


def c1_tau_min():
    def body():
        from .pulses import _minimum_product
        _minimum_product.cache_clear()  # time the full search, not a cached value
        x = minimum_time(1.0)
        return abs(x - 3.24) <= 0.03, f"tau_min * omega0 = {x:.4f} (expected 3.24 +/- 0.03)"
    return _timed(1, "tau_min", body, budget=10.0)


def round_trip_cases(n_cases=20, seed=2024):
    """(N, multiple of tau_min, target) triples covering N in {3,4,5} x {1,2,10}."""
    rng = np.random.default_rng(seed)
    combos = [(N, k) for N in (3, 4, 5) for k in (1, 2, 10)]
    cases = []
    for i in range(n_cases):
        N, k = combos[i % len(combos)]
        c = rng.normal(size=N)
        c[-1] = 0.0
        c /= np.linalg.norm(c)
        cases.append((N, k, c))
    return cases


def round_trip_efficiency(N, k, target, omega0=1.0, n_steps=4000):
    T = k * minimum_time(omega0)
    pulses = stirup_pulses(target, T, omega0)[0]
    traj = evolve_schrodinger(hamiltonian(pulses), basis_state(N, 0), TimeGrid.over(T, n_steps))
    return transfer_efficiency(traj, state_vector(target.astype(complex)))


def c2_round_trip():
    def body():
        effs = [round_trip_efficiency(N, k, c) for N, k, c in round_trip_cases()]
        worst = min(effs)
        return worst >= 1 - 1e-6, f"min F_e over 20 cases = {worst:.12f} (need >= 1 - 1e-6)"
    return _timed(2, "round-trip exactness", body, budget=60.0)


def c3_stirap_limit():
    def body():
        d = stirup_dark_distance(ADIABATIC_GRID)
        ok = bool(np.all(np.diff(d) < 0))
        return ok, "D_max = " + ", ".join(f"{v:.4g}" for v in d) + " (strictly decreasing)"
    return _timed(3, "STIRAP limit", body)


def c4_population_order():
    def body():
        rows = p3_max_curves(tau_grid())
        stirap, stirup, op = rows[:, 2], rows[:, 3], rows[:, 4]
        ok = bool(np.all(op <= stirup) and np.all(stirup <= stirap))
        worst = np.min(np.minimum(stirap - stirup, stirup - op))
        return ok, f"min ordering margin {worst:.3e} over 10 durations"
    return _timed(4, "P3max ordering", body)


def c5_lindblad_oracles():
    def body():
        grid = TimeGrid.over(5.0 / GAMMA, 2000)
        t = grid.nodes()
        g1 = CollapseChannel([[0, 1], [0, 0]], GAMMA)
        traj = evolve_lindblad(HamiltonianFn.zero(2), [g1], np.diag([0.0, 1.0]), grid)
        e1 = np.abs(traj.states[:, 1, 1].real - np.exp(-GAMMA * t)).max()
        s_plus = CollapseChannel(np.diag([0.0, 1.0, 1.0]), GAMMA)
        rho = pure_density(np.array([1.0, 0.0, 1.0]) / np.sqrt(2))
        traj = evolve_lindblad(HamiltonianFn.zero(3), [s_plus], rho, grid)
        e2 = np.abs(traj.states[:, 0, 2] - 0.5 * np.exp(-GAMMA * t / 2)).max()
        rho = pure_density(np.array([0.0, 1.0, 1.0]) / np.sqrt(2))
        traj = evolve_lindblad(HamiltonianFn.zero(3), [s_plus], rho, grid)
        e3 = np.abs(traj.states[:, 1, 2] - 0.5).max()
        err = max(e1, e2, e3)
        return err <= 1e-6, f"max pointwise error {err:.2e} (decay {e1:.1e}, dephasing {e2:.1e})"
    return _timed(5, "Lindblad oracles", body, budget=5.0)


def _scenario_fidelity(name):
    return cq.scenario(name).simulate()[0]


def c6_bell():
    def body():
        f = _scenario_fidelity("bell")
        return abs(f - 0.997) <= 0.005, f"F = {100 * f:.3f}% (expected 99.7 +/- 0.5)"
    return _timed(6, "Bell scenario", body, budget=5.0)


def c7_qst():
    def body():
        f3 = _scenario_fidelity("qst2")
        f4 = _scenario_fidelity("qst3")
        ok = abs(f3 - 0.994) <= 0.005 and abs(f4 - 0.9919) <= 0.005
        return ok, (f"3-level F = {100 * f3:.4f}% (99.4 +/- 0.5), "
                    f"4-level F = {100 * f4:.4f}% (99.19 +/- 0.5)")
    return _timed(7, "QST scenarios", body)


def c8_w():
    def body():
        f = _scenario_fidelity("w")
        return f >= 0.984 - 0.010, f"F = {100 * f:.3f}% (need >= 97.4)"
    return _timed(8, "W scenario", body)


def c9_q_optimization():
    def body():
        tau = minimum_time(1.0)
        qs = [optimize_q(QSearch(k * tau, 1.0)).q for k in range(1, 10)]
        ok = abs(qs[0] - 0.02) <= 0.3 * 0.02 and all(b <= a for a, b in zip(qs, qs[1:]))
        return ok, "100*Q* = " + ", ".join(f"{100 * q:.3f}" for q in qs)
    return _timed(9, "Q optimization", body)


def c10_robustness():
    def body():
        bench = Bench()
        pulses = bench.pulses()
        fails = []
        parts = []
        for gp in (1.0, 5.0, 10.0):
            f = bench.fidelities(gp, pulses=pulses)
            parts.append(f"G'={gp:g}: {f['stirup']:.5f}/{f['stirap']:.5f}/{f['rr']:.5f}")
            if not (f["stirup"] > f["stirap"] and f["stirup"] > f["rr"]):
                fails.append(f"G'={gp:g}")
        for eta in (-0.05, 0.05):
            f = bench.fidelities(1.0, eta=eta, pulses=pulses)
            parts.append(f"eta={eta:+g}: {f['stirup']:.6f}/{f['stirap']:.6f}")
            if not f["stirup"] >= f["stirap"]:
                fails.append(f"eta={eta:+g}")
        detail = "STIRUP/STIRAP/RR " + "; ".join(parts)
        if fails:
            detail += "; violated at " + ", ".join(fails)
        return not fails, detail
    return _timed(10, "robustness ordering", body, budget=300.0)


def c11_scaling():
    def body():
        worst = 0.0
        for N, k, c in round_trip_cases()[:9]:
            a = round_trip_efficiency(N, k, c, omega0=1.0)
            b = round_trip_efficiency(N, k, c, omega0=2.0)
            worst = max(worst, abs(a - b))
        for x in tau_grid()[[0, 4, 9]]:
            a = p3_max_curves([x], omega0=1.0)
            b = p3_max_curves([x], omega0=2.0)
            worst = max(worst, float(np.abs(a - b).max()))
        d1 = stirup_dark_distance(ADIABATIC_GRID, omega0=1.0)
        d2 = stirup_dark_distance(ADIABATIC_GRID, omega0=2.0)
        worst = max(worst, float(np.abs(d1 - d2).max()))
        return worst <= 1e-8, f"max change under (2 omega0, T/2) = {worst:.2e}"
    return _timed(11, "dimensional scaling", body)


CRITERIA = (c1_tau_min, c2_round_trip, c3_stirap_limit, c4_population_order,
            c5_lindblad_oracles, c6_bell, c7_qst, c8_w, c9_q_optimization, c10_robustness,
            c11_scaling)


def run_all(echo=print):
    results = []
    for fn in CRITERIA:
        res = fn()
        if echo is not None:
            echo(res.line())
        results.append(res)
    return results
