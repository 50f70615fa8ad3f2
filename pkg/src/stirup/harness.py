"""Single runs and parameter sweeps with index-ordered, deterministic reports."""
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import circuit as cq
from . import passage as psg
from .config import GAMMA_UNIT, ScenarioConfig, SweepSpec
from .csvio import write_csv
from .errors import PulseDivergenceError, SimulationError
from .optimizer import QSearch, optimize_q, simulate_bare
from .pulses import (ProtocolKind, minimum_time, protocol_pulses, rr_baseline,
                     stirap_baseline, write_pulses_csv)

REPORT_COLUMNS = ("index", "protocol", "system", "N", "T_ns", "omega0", "Q", "gamma1",
                  "gamma2", "gamma_c", "eta", "zeta", "fidelity", "transfer_efficiency",
                  "p_n_max", "max_amplitude")


@dataclass(frozen=True)
class RunRecord:
    index: int
    config: ScenarioConfig
    q: float
    fidelity: float
    transfer_efficiency: float
    p_n_max: float
    max_amplitude: float
    wall_time: float = field(compare=False)

    def row(self):
        c = self.config
        return (self.index, c.protocol, c.system, c.N, c.duration, c.omega0, self.q,
                c.gamma1, c.gamma2, c.gamma_c, c.eta, c.zeta, self.fidelity,
                self.transfer_efficiency, self.p_n_max, self.max_amplitude)


@dataclass(frozen=True)
class RunReport:
    records: tuple
    parameter: str = None

    def write_csv(self, path):
        cols = REPORT_COLUMNS if self.parameter is None else (
            ("index", f"sweep_{self.parameter}") + REPORT_COLUMNS[1:])
        rows = []
        for r in self.records:
            row = r.row()
            if self.parameter is not None:
                row = (row[0], _swept_value(r, self.parameter)) + row[1:]
            rows.append(row)
        return write_csv(path, cols, rows)


_TEXT_COLUMNS = ("protocol", "system")
_INT_COLUMNS = ("index", "N")


def read_report(path):
    """Parse a RunReport CSV back into typed rows: (header, list of dicts)."""
    from .csvio import read_csv
    header, rows = read_csv(path, numeric=False)
    extra = set(header) - set(REPORT_COLUMNS)
    if len(extra) > 1 or (extra and not next(iter(extra)).startswith("sweep_")):
        raise ValueError(f"{path}: unexpected columns {sorted(extra)}")
    out = []
    for row in rows:
        rec = {}
        for name, text in zip(header, row):
            if name in _TEXT_COLUMNS:
                rec[name] = text
            elif name in _INT_COLUMNS:
                rec[name] = int(text)
            else:
                rec[name] = float(text)
        out.append(rec)
    return header, out


def _swept_value(record, parameter):
    c = record.config
    return {"T": c.duration, "gamma_prime": c.gamma2 / GAMMA_UNIT, "eta": c.eta,
            "zeta": c.zeta, "omega0_T": c.omega0 * c.duration, "Q": record.q}[parameter]


def _resolve_q(config):
    if config.protocol != "stirup":
        return 0.0
    if config.q != "auto":
        return float(config.q)
    if config.is_circuit:
        raise SimulationError("Q = 'auto' is only supported for bare systems")
    target = np.asarray(config.target, dtype=float)
    res = optimize_q(QSearch(config.duration, config.omega0, target=tuple(target)))
    return res.q


def build_pulses(config, q=None):
    """Control pulses for a bare config (or the scenario pulses for a circuit)."""
    q = _resolve_q(config) if q is None else q
    if config.is_circuit:
        return _scenario(config, q).pulses
    kind = ProtocolKind(config.protocol, q)
    return protocol_pulses(kind, config.target, config.duration, config.omega0)


def _scenario(config, q):
    model = cq.CircuitModel(cq.SCENARIOS[config.system][0], gamma1=config.gamma1,
                            gamma2=config.gamma2, gamma_c=config.gamma_c)
    return cq.scenario(config.system, model, config.omega0, q, config.duration)


def _circuit_run(config, q):
    sc = _scenario(config, q)
    if config.protocol == "stirup":
        pulses = sc.pulses
    else:
        # baselines drive the qst2 transfer with the scenario's amplitude budget
        base = stirap_baseline if config.protocol == "stirap" else rr_baseline
        pulses = base(sc.omega0, sc.duration)
    fid, traj = sc.simulate(config.n_steps, config.eta, config.zeta, pulses)
    closed = cq.scenario(config.system, sc.model.with_rates(0.0, 0.0, 0.0), sc.omega0, q,
                         sc.duration)
    fe, _ = closed.simulate(config.n_steps, pulses=pulses)
    p_n = float(traj.populations()[:, sc.emap.N - 1].max())
    resolved = config.replace(duration=sc.duration, omega0=sc.omega0)
    return resolved, (fid, fe, p_n, pulses.max_amplitude)


def _bare_run(config, q):
    pulses = build_pulses(config, q)
    target = np.asarray(config.target, dtype=complex)
    fid, traj = simulate_bare(pulses, target, config.gamma1, config.gamma2, config.eta,
                              config.zeta, config.n_steps)
    if config.gamma1 == 0 and config.gamma2 == 0 and config.eta == 0 and config.zeta == 0:
        fe = fid
    else:
        fe, _ = simulate_bare(pulses, target, n_steps=config.n_steps)
    p_n = float(traj.populations()[:, -1].max())
    return config, (fid, fe, p_n, pulses.max_amplitude)


def run_point(config, index=0):
    """Execute one config; returns a RunRecord."""
    t0 = time.perf_counter()
    try:
        q = _resolve_q(config)
        fn = _circuit_run if config.is_circuit else _bare_run
        config, (fid, fe, p_n, amp) = fn(config, q)
    except (PulseDivergenceError, cq.UnreachableCouplingError, FloatingPointError) as exc:
        raise SimulationError(f"run {index} ({config.system}, {config.protocol}, "
                              f"T={config.duration}): {exc}") from exc
    return RunRecord(index, config, q, fid, fe, p_n, amp, time.perf_counter() - t0)


def run(config):
    """Single run; writes ``<out>/run.csv`` when the config names an output dir."""
    report = RunReport((run_point(config),))
    if config.out:
        report.write_csv(os.path.join(config.out, "run.csv"))
    return report


def design(config, out_dir):
    """Write the control pulses (and modulation schedule for circuits) as CSV."""
    q = _resolve_q(config)
    files = []
    if config.is_circuit:
        sc = _scenario(config, q)
        files.append(write_pulses_csv(sc.pulses, os.path.join(out_dir, "pulses.csv")))
        files.append(cq.write_hardware_csv(sc.hardware(), os.path.join(out_dir,
                                                                        "hardware.csv")))
    else:
        pulses = build_pulses(config, q)
        files.append(write_pulses_csv(pulses, os.path.join(out_dir, "pulses.csv")))
    return files


def point_config(spec, value):
    """The base config with the swept parameter set to ``value``."""
    c = spec.base
    p = spec.parameter
    if p == "T":
        return c.replace(duration=float(value))
    if p == "gamma_prime":
        rate = float(value) * GAMMA_UNIT
        return c.replace(gamma1=rate, gamma2=rate,
                         gamma_c=rate if c.is_circuit else c.gamma_c)
    if p == "eta":
        return c.replace(eta=float(value))
    if p == "zeta":
        return c.replace(zeta=float(value))
    if p == "omega0_T":
        return c.replace(duration=float(value) / c.omega0)
    if p == "Q":
        return c.replace(q=float(value))
    raise ValueError(f"unknown sweep parameter {p!r}")


def _run_indexed(args):
    index, config = args
    return run_point(config, index)


def sweep(spec, workers=None):
    """One record per grid value, in ascending grid order."""
    if not isinstance(spec, SweepSpec):
        raise TypeError("sweep needs a SweepSpec")
    jobs = [(i, point_config(spec, v)) for i, v in enumerate(spec.values)]
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(jobs) == 1:
        records = [_run_indexed(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            records = list(pool.map(_run_indexed, jobs))
    records.sort(key=lambda r: r.index)
    report = RunReport(tuple(records), spec.parameter)
    if spec.base.out:
        report.write_csv(os.path.join(spec.base.out, f"sweep_{spec.parameter}.csv"))
    return report


# ---------------------------------------------------------------- robustness bench

@dataclass(frozen=True)
class Bench:
    """Three-level robustness comparison at a common amplitude budget.

    STIRUP runs at ``duration``; STIRAP runs at its adiabatic duration
    2 pi * 10 / omega0; RR runs at ``duration`` with area-pi/2 pulses.
    """

    duration: float = 82.0
    tau_multiple: float = 2.0
    n_steps: int = 4000

    @property
    def omega0(self):
        return self.tau_multiple * minimum_time(1.0) / self.duration

    @property
    def stirap_duration(self):
        return 2 * np.pi * 10.0 / self.omega0

    def pulses(self):
        return {"stirup": protocol_pulses(ProtocolKind.stirup(), [0.0, -1.0, 0.0],
                                          self.duration, self.omega0),
                "stirap": stirap_baseline(self.omega0, self.stirap_duration),
                "rr": rr_baseline(self.omega0, self.duration)}

    def fidelities(self, gamma_prime=1.0, eta=0.0, zeta=0.0, pulses=None):
        """{protocol: fidelity} with Gamma1 = Gamma2 = gamma_prime * Gamma."""
        pulses = self.pulses() if pulses is None else pulses
        rate = gamma_prime * GAMMA_UNIT
        target = np.array([0.0, 1.0, 0.0], dtype=complex)
        return {name: simulate_bare(p, target, rate, rate, eta, zeta, self.n_steps)[0]
                for name, p in pulses.items()}


def p3_max_curves(omega0_T, omega0=1.0, n_steps=4000):
    """Simulated P_3^max for STIRAP, STIRUP and STIRUP with optimized Q."""
    rows = []
    target = np.array([0.0, 1.0, 0.0], dtype=complex)
    for x in omega0_T:
        T = x / omega0
        q = optimize_q(QSearch(T, omega0)).q
        row = [x, q]
        for kind in (ProtocolKind("stirap"), ProtocolKind.stirup(), ProtocolKind.stirup(q)):
            p = protocol_pulses(kind, target.real, T, omega0)
            _, traj = simulate_bare(p, target, n_steps=n_steps)
            row.append(float(traj.populations()[:, 2].max()))
        rows.append(row)
    return np.array(rows)


def closed_transfer_errors(omega0_T, omega0=1.0, gamma1=0.0, gamma2=0.0, n_steps=4000,
                           q_cache=None):
    """1 - F_e for STIRAP, STIRUP and STIRUP-OP at each omega0*T."""
    rows = []
    target = np.array([0.0, 1.0, 0.0], dtype=complex)
    q_cache = {} if q_cache is None else q_cache
    for x in omega0_T:
        T = x / omega0
        if x not in q_cache:
            q_cache[x] = optimize_q(QSearch(T, omega0)).q
        row = [x]
        for kind in (ProtocolKind("stirap"), ProtocolKind.stirup(),
                     ProtocolKind.stirup(q_cache[x])):
            p = protocol_pulses(kind, target.real, T, omega0)
            row.append(1.0 - simulate_bare(p, target, gamma1, gamma2, n_steps=n_steps)[0])
        rows.append(row)
    return np.array(rows)


def stirup_dark_distance(omega0_T, omega0=1.0, n_steps=4000):
    """Max trace distance between the STIRUP evolution and its instantaneous dark state."""
    from .pulses import dark_state_trajectory, hamiltonian, stirup_pulses
    from .quantum import TimeGrid, basis_state, evolve_schrodinger, max_state_distance
    out = []
    for x in omega0_T:
        T = x / omega0
        pulses = stirup_pulses([0.0, -1.0, 0.0], T, omega0)[0]
        grid = TimeGrid.over(T, n_steps)
        traj = evolve_schrodinger(hamiltonian(pulses), basis_state(3, 0), grid)
        out.append(max_state_distance(traj, dark_state_trajectory(pulses, grid)))
    return np.array(out)


def boundary_summary(config):
    """Boundary report for the default passage of a bare STIRUP config."""
    spec, gamma, chis, _ = psg.default_passage(config.target, config.duration,
                                               config.omega0, float(config.q or 0.0))
    return psg.validate_boundaries(spec, gamma, chis)
