"""Data and gnuplot scripts behind each figure panel and the Q table."""
import os

import numpy as np

from . import circuit as cq
from .config import DEFAULT_OMEGA0, GAMMA_UNIT
from .csvio import write_csv
from .harness import Bench, closed_transfer_errors, p3_max_curves, stirup_dark_distance
from .optimizer import QSearch, optimize_q
from .pulses import minimum_time

ARTIFACTS = ("fig2a", "fig2b", "fig2c", "fig2d", "fig2e", "fig3", "fig4a", "fig4b", "fig4c",
             "table1")
TWO_PI = 2.0 * np.pi
ADIABATIC_GRID = TWO_PI * np.array([1.0, 5.0, 10.0, 20.0, 40.0])
TABLE_MULTIPLES = tuple(range(1, 19)) + (40,)


def tau_grid(n=10):
    """n points of omega0*T spread evenly over [tau_min, 40 tau_min] (dimensionless)."""
    return minimum_time(1.0) * np.linspace(1.0, 40.0, n)


def _gnuplot(path, csv_name, title, xlabel, ylabel, columns, logx=False, logy=False):
    lines = ["set datafile separator ','", "set key autotitle columnhead",
             f"set title '{title}'", f"set xlabel '{xlabel}'", f"set ylabel '{ylabel}'"]
    if logx:
        lines.append("set logscale x")
    if logy:
        lines.append("set logscale y")
    plots = [f"'{csv_name}' using 1:{c} with linespoints" for c in columns]
    lines.append("plot " + ", \\\n     ".join(plots))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def _emit(out_dir, name, header, rows, title, xlabel, ylabel, columns, **kw):
    csv_path = write_csv(os.path.join(out_dir, f"{name}.csv"), header, rows)
    gp = _gnuplot(os.path.join(out_dir, f"{name}.gp"), f"{name}.csv", title, xlabel, ylabel,
                  columns, **kw)
    return [csv_path, gp]


def fig2a(out_dir, n_steps):
    d = stirup_dark_distance(ADIABATIC_GRID, n_steps=n_steps)
    rows = np.column_stack([ADIABATIC_GRID, d])
    return _emit(out_dir, "fig2a", ["omega0_T", "D_max"], rows,
                 "STIRUP vs dark state", "Omega0 T", "max trace distance", [2], logx=True)


def fig2b(out_dir, n_steps):
    rows = p3_max_curves(tau_grid(), n_steps=n_steps)
    rows = rows[:, [0, 2, 3, 4, 1]]
    return _emit(out_dir, "fig2b", ["omega0_T", "stirap", "stirup", "stirup_op", "q_star"],
                 rows, "maximum intermediate population", "Omega0 T", "P3 max", [2, 3, 4])


def fig2c(out_dir, n_steps):
    rows = closed_transfer_errors(tau_grid(), n_steps=n_steps)
    return _emit(out_dir, "fig2c", ["omega0_T", "stirap", "stirup", "stirup_op"], rows,
                 "closed-system transfer error", "Omega0 T", "1 - Fe", [2, 3, 4], logy=True)


def _rate_map(out_dir, name, which, n_steps):
    rates = np.arange(0.0, 11.0, 2.0)
    xs = tau_grid()
    rows = []
    q_cache = {}
    omega0 = DEFAULT_OMEGA0
    for r in rates:
        kw = {which: r * GAMMA_UNIT}
        errs = closed_transfer_errors(xs, omega0=omega0, n_steps=n_steps, q_cache=q_cache,
                                      **kw)
        for row in errs:
            rows.append([r, row[0]] + list(row[1:]))
    label = "Gamma1" if which == "gamma1" else "Gamma2"
    header = [f"{which}_over_Gamma", "omega0_T", "stirap", "stirup", "stirup_op"]
    csv_path = write_csv(os.path.join(out_dir, f"{name}.csv"), header, rows)
    gp = os.path.join(out_dir, f"{name}.gp")
    with open(gp, "w") as fh:
        fh.write("\n".join([
            "set datafile separator ','", "set key autotitle columnhead",
            f"set title '1 - Fe vs {label} and Omega0 T (omega0 = 2pi x 10 MHz)'",
            f"set xlabel '{label} / Gamma'", "set ylabel 'Omega0 T'", "set zlabel '1 - Fe'",
            f"splot '{name}.csv' using 1:2:4 with points title 'stirup', \\",
            f"      '{name}.csv' using 1:2:5 with points title 'stirup_op', \\",
            f"      '{name}.csv' using 1:2:3 with points title 'stirap'"]) + "\n")
    return [csv_path, gp]


def fig2d(out_dir, n_steps):
    return _rate_map(out_dir, "fig2d", "gamma1", n_steps)


def fig2e(out_dir, n_steps):
    return _rate_map(out_dir, "fig2e", "gamma2", n_steps)


def fig3(out_dir, n_steps):
    files = []
    for name in ("qst2", "qst3", "bell", "w"):
        sc = cq.scenario(name)
        _, traj = sc.simulate(n_steps)
        pops = traj.populations()
        stride = max(1, n_steps // 200)
        idx = np.arange(0, n_steps + 1, stride)
        if idx[-1] != n_steps:
            idx = np.append(idx, n_steps)
        labels = list(sc.emap.labels) + [sc.emap.vacuum_label]
        rows = np.column_stack([traj.times[idx], pops[idx]])
        files += _emit(out_dir, f"fig3_{name}", ["t_ns"] + labels, rows,
                       f"{name} populations", "t (ns)", "population",
                       list(range(2, len(labels) + 2)))
    return files


def _bench_sweep(out_dir, name, param, values, n_steps):
    bench = Bench(n_steps=n_steps)
    pulses = bench.pulses()
    rows = []
    for v in values:
        kw = {"gamma_prime": 1.0}
        kw[param] = v
        f = bench.fidelities(pulses=pulses, **kw)
        rows.append([v, f["stirup"], f["stirap"], f["rr"]])
    return _emit(out_dir, name, [param, "stirup", "stirap", "rr"], rows,
                 f"fidelity vs {param}", param, "fidelity", [2, 3, 4])


def fig4a(out_dir, n_steps):
    return _bench_sweep(out_dir, "fig4a", "gamma_prime", np.arange(0.0, 11.0, 1.0), n_steps)


def fig4b(out_dir, n_steps):
    return _bench_sweep(out_dir, "fig4b", "eta", np.round(np.linspace(-0.1, 0.1, 21), 12),
                        n_steps)


def fig4c(out_dir, n_steps):
    return _bench_sweep(out_dir, "fig4c", "zeta", np.round(np.linspace(-0.1, 0.1, 21), 12),
                        n_steps)


def table1(out_dir, n_steps=None):
    tau = minimum_time(1.0)
    rows = []
    for k in TABLE_MULTIPLES:
        res = optimize_q(QSearch(k * tau, 1.0))
        rows.append([k, res.q, 100 * res.q, res.p_max, res.feasible])
    return _emit(out_dir, "table1", ["T_over_tau_min", "Q", "Q_times_100", "p_max",
                                     "feasible"], rows, "optimal Q", "T / tau_min", "Q", [2])


def reproduce(artifact_id, out_dir, n_steps=4000):
    """Write CSV + gnuplot script for one artifact; returns the file paths."""
    if artifact_id not in ARTIFACTS:
        raise ValueError(f"unknown artifact {artifact_id!r}; choose from {list(ARTIFACTS)}")
    os.makedirs(out_dir, exist_ok=True)
    return globals()[artifact_id](out_dir, n_steps)
