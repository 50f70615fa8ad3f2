"""Qubits coupled through one cavity, driven by frequency modulation.

In the single-excitation subspace {|e g..0>, |g e..0>, ..., |g..g 1>} the
sideband Hamiltonian is an N-pod star with the one-photon state as the shared
level and couplings g_j J1(eps_j(t)). An optional ground state |g..g 0> acts
as the sink for decay channels.
"""
from dataclasses import dataclass, field

import numpy as np

from . import passage as psg
from .errors import DimensionError, UnreachableCouplingError
from .pulses import ControlPulses, hamiltonian, inverse_engineer, minimum_time
from .quantum import (DEFAULT_STEPS, CollapseChannel, HamiltonianFn, TimeGrid,
                      evolve_lindblad, evolve_schrodinger, fidelity_mixed, fidelity_pure,
                      pure_density)

TWO_PI = 2.0 * np.pi
GAMMA_UNIT = TWO_PI * 5e-6          # 2 pi x 5 kHz in rad/ns
J1_ARGMAX = 1.8411837813406593      # first maximum of J1
J1_MAX = 0.5818652242815079
J1_CEILING = 0.5819                 # ratios in (J1_MAX, J1_CEILING] map to the top
BESSEL_TERMS = 40


def bessel_j1(x):
    """Bessel function J1 from its power series, valid for |x| <= 10."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 10.0):
        raise ValueError("bessel_j1 is only evaluated for |x| <= 10")
    h = 0.5 * x
    h2 = h * h
    term = h.copy()
    total = term.copy()
    for k in range(BESSEL_TERMS - 1):
        term = -term * h2 / ((k + 1) * (k + 2))
        total = total + term
    return total if total.ndim else float(total)


def invert_coupling(g_eff, g_bare):
    """eps in [0, J1_ARGMAX] with g_bare * J1(eps) = g_eff (bisection)."""
    if not g_bare > 0:
        raise ValueError("bare coupling must be positive")
    y = np.asarray(g_eff, dtype=float) / g_bare
    if np.any(y < 0):
        raise ValueError("coupling ratio must be >= 0; carry the sign as a pi phase")
    if np.any(y > J1_CEILING):
        worst = float(np.max(y))
        raise UnreachableCouplingError(
            f"coupling ratio {worst:.6g} exceeds the J1 maximum {J1_MAX:.7f}")
    y = np.minimum(y, J1_MAX)
    lo = np.zeros_like(y)
    hi = np.full_like(y, J1_ARGMAX)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        below = bessel_j1(mid) < y
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    eps = np.where(y == 0, 0.0, 0.5 * (lo + hi))
    return eps if eps.ndim else float(eps)


@dataclass(frozen=True)
class CircuitModel:
    """Frequencies and couplings in rad/ns; rates in rad/ns."""

    n_qubits: int
    omega_c: float = TWO_PI * 6.0
    omega_q: tuple = None
    g: tuple = None
    nu: tuple = None
    gamma1: float = GAMMA_UNIT
    gamma2: float = GAMMA_UNIT
    gamma_c: float = GAMMA_UNIT

    def __post_init__(self):
        n = self.n_qubits
        if n < 2:
            raise ValueError("need at least two qubits")
        fill = {"omega_q": TWO_PI * 5.0, "g": TWO_PI * 0.02}
        for name, default in fill.items():
            val = getattr(self, name)
            val = (default,) * n if val is None else tuple(float(v) for v in val)
            if len(val) != n:
                raise DimensionError(f"{name} needs {n} entries")
            object.__setattr__(self, name, val)
        nu = self.nu
        expected = tuple(self.omega_c - w for w in self.omega_q)
        nu = expected if nu is None else tuple(float(v) for v in nu)
        if len(nu) != n:
            raise DimensionError(f"nu needs {n} entries")
        if not np.allclose(nu, expected, rtol=1e-12, atol=1e-9):
            raise ValueError("modulation frequencies must equal omega_c - omega_q")
        object.__setattr__(self, "nu", nu)
        if min(self.g) <= 0:
            raise ValueError("bare couplings must be positive")
        if min(self.gamma1, self.gamma2, self.gamma_c) < 0:
            raise ValueError("decoherence rates must be >= 0")

    def with_rates(self, gamma1, gamma2, gamma_c):
        return CircuitModel(self.n_qubits, self.omega_c, self.omega_q, self.g, self.nu,
                            gamma1, gamma2, gamma_c)


@dataclass(frozen=True)
class SingleExcitationMap:
    """N-pod level m (0-based) <-> circuit label; level N-1 is the photon state."""

    n_qubits: int

    @property
    def N(self):
        return self.n_qubits + 1

    @property
    def labels(self):
        n = self.n_qubits
        qubit = ["g" * j + "e" + "g" * (n - j - 1) + "0" for j in range(n)]
        return tuple(qubit + ["g" * n + "1"])

    @property
    def vacuum_label(self):
        return "g" * self.n_qubits + "0"

    def index(self, label):
        if label == self.vacuum_label:
            return self.N
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"{label!r} is not a single-excitation label") from None

    def vector(self, amplitudes, with_vacuum=False):
        """Embed {label: amplitude} into a state vector."""
        dim = self.N + (1 if with_vacuum else 0)
        vec = np.zeros(dim, dtype=complex)
        for label, amp in amplitudes.items():
            vec[self.index(label)] = amp
        return vec


class _StarCouplings:
    def __init__(self, couplings, n, dim, shifts):
        self.couplings = couplings
        self.n = n
        self.dim = dim
        self.shifts = shifts

    def __call__(self, ts):
        vals = np.asarray(self.couplings(ts), dtype=float)
        mats = np.zeros((len(ts), self.dim, self.dim), dtype=complex)
        for j in range(self.n):
            mats[:, j, self.n] = vals[j]
            mats[:, self.n, j] = vals[j]
            mats[:, j, j] = self.shifts[j]
        return mats


def effective_hamiltonian(model, couplings, with_vacuum=False, qubit_shifts=None):
    """Sideband Hamiltonian sum_j g~_j(t) (|e_j 0><g..g 1| + h.c.).

    ``couplings`` is a ControlPulses with n_qubits envelopes or a callable
    returning shape (n_qubits, len(t)). ``qubit_shifts`` adds a static energy
    to each qubit's excited label.
    """
    n = model.n_qubits
    if isinstance(couplings, ControlPulses):
        if couplings.N != n + 1:
            raise DimensionError(f"pulses drive {couplings.N - 1} qubits, model has {n}")
        couplings = couplings.at
    shifts = np.zeros(n) if qubit_shifts is None else np.asarray(qubit_shifts, dtype=float)
    if shifts.shape != (n,):
        raise DimensionError(f"qubit_shifts needs {n} entries")
    dim = n + 1 + (1 if with_vacuum else 0)
    return HamiltonianFn(dim, _StarCouplings(couplings, n, dim, shifts))


def collapse_channels(model, emap):
    """Per-qubit decay and dephasing plus cavity decay, on the subspace plus vacuum."""
    n = model.n_qubits
    if emap.n_qubits != n:
        raise DimensionError("map and model disagree on the qubit count")
    dim = emap.N + 1
    vac = emap.N
    out = []
    for j in range(n):
        op = np.zeros((dim, dim))
        op[vac, j] = 1.0
        out.append(CollapseChannel(op, model.gamma1, f"decay q{j}"))
    for j in range(n):
        op = np.zeros((dim, dim))
        op[j, j] = 1.0
        out.append(CollapseChannel(op, model.gamma2, f"dephase q{j}"))
    op = np.zeros((dim, dim))
    op[vac, n] = 1.0
    out.append(CollapseChannel(op, model.gamma_c, "cavity decay"))
    return out


@dataclass(frozen=True, eq=False)
class HardwareSchedule:
    """Modulation amplitudes eps_j(t) >= 0 and the couplings they produce.

    Negative couplings are realized with a pi modulation phase, stored in
    ``sign``; gtilde = sign * g * J1(eps).
    """

    times: np.ndarray
    eps: np.ndarray
    sign: np.ndarray
    g: tuple

    @property
    def gtilde(self):
        return self.sign * np.asarray(self.g)[:, None] * bessel_j1(self.eps)


def hardware_schedule(model, pulses):
    """Invert every coupling envelope into a modulation amplitude."""
    if pulses.N != model.n_qubits + 1:
        raise DimensionError("pulses do not match the model's qubit count")
    env = pulses.envelopes
    eps = np.empty_like(env)
    for j, gj in enumerate(model.g):
        eps[j] = invert_coupling(np.abs(env[j]), gj)
    sign = np.where(env < 0, -1.0, 1.0)
    return HardwareSchedule(pulses.times, eps, sign, model.g)


def write_hardware_csv(hw, path):
    from .csvio import write_csv
    n = hw.eps.shape[0]
    header = (["t_ns"] + [f"eps_{j}" for j in range(n)] + [f"gtilde_{j}" for j in range(n)])
    rows = np.column_stack([hw.times, hw.eps.T, hw.gtilde.T])
    return write_csv(path, header, rows)


SCENARIOS = {
    # name: (n_qubits, duration ns, initial label, target {label: amplitude})
    "qst2": (2, 82.0, "eg0", {"ge0": 1.0}),
    "qst3": (3, 82.0, "egg0", {"gge0": 1.0}),
    "bell": (2, 90.0, "eg0", {"eg0": 2 ** -0.5, "ge0": 2 ** -0.5}),
    "w": (3, 98.5, "egg0", {"egg0": 3 ** -0.5, "geg0": 3 ** -0.5, "gge0": 3 ** -0.5}),
}


@dataclass(frozen=True, eq=False)
class CircuitScenario:
    """A fully resolved circuit run: passage, pulses, channels and target."""

    name: str
    model: CircuitModel
    emap: SingleExcitationMap
    duration: float
    omega0: float
    q: float
    target_labels: dict = field(repr=False)
    spec: psg.PassageSpec = field(repr=False)
    gamma: object = field(repr=False)
    chis: list = field(repr=False)
    omega: psg.AmplitudeSchedule = field(repr=False)
    pulses: ControlPulses = field(repr=False)

    @property
    def boundary_angles(self):
        return self.spec.boundary_angles

    @property
    def initial_label(self):
        return self.emap.labels[0]

    def target(self, with_vacuum=False):
        return self.emap.vector(self.target_labels, with_vacuum)

    def initial(self, with_vacuum=False):
        return self.emap.vector({self.initial_label: 1.0}, with_vacuum)

    def channels(self):
        return collapse_channels(self.model, self.emap)

    def hardware(self):
        return hardware_schedule(self.model, self.pulses)

    def simulate(self, n_steps=DEFAULT_STEPS, eta=0.0, zeta=0.0, pulses=None):
        """Fidelity with the target and the trajectory (vacuum level included).

        ``eta`` scales all couplings by (1 + eta); ``zeta`` shifts every qubit
        by zeta * max |g~|. Falls back to the Schrodinger equation when all
        rates vanish.
        """
        pulses = self.pulses if pulses is None else pulses
        shifts = np.full(self.model.n_qubits, zeta * pulses.max_amplitude)
        driven = pulses.scaled(1.0 + eta) if eta != 0.0 else pulses
        H = effective_hamiltonian(self.model, driven, True, shifts)
        grid = TimeGrid.over(self.duration, n_steps)
        target = self.target(True)
        m = self.model
        if m.gamma1 == 0 and m.gamma2 == 0 and m.gamma_c == 0:
            traj = evolve_schrodinger(H, self.initial(True), grid)
            return fidelity_pure(target, traj.final), traj
        traj = evolve_lindblad(H, self.channels(), pure_density(self.initial(True)), grid)
        return fidelity_mixed(target, traj.final), traj


def scenario(name, model=None, omega0=None, q=0.0, duration=None):
    """Resolve one of the named circuit runs (qst2, qst3, bell, w).

    By default the STIRUP fields run at their minimum time: omega0 is chosen
    so that ``duration`` equals the minimum duration.
    """
    if name not in SCENARIOS:
        raise ValueError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}")
    n, T, init, target = SCENARIOS[name]
    T = float(duration) if duration is not None else T
    model = CircuitModel(n) if model is None else model
    if model.n_qubits != n:
        raise DimensionError(f"scenario {name} needs {n} qubits, model has {model.n_qubits}")
    emap = SingleExcitationMap(n)
    if omega0 is None:
        omega0 = minimum_time(1.0) / T
    vec = np.real(emap.vector(target))
    spec, gamma, chis, omega = psg.default_passage(vec, T, omega0, q)
    pulses = inverse_engineer(emap.N, gamma, chis, omega)
    peak = np.abs(pulses.envelopes).max(axis=1)
    for j, gj in enumerate(model.g):
        if peak[j] > gj * J1_CEILING:
            raise UnreachableCouplingError(
                f"{name}: peak coupling {peak[j]:.4g} rad/ns on qubit {j} exceeds "
                f"{gj * J1_MAX:.4g} rad/ns")
    return CircuitScenario(name, model, emap, T, float(omega0), float(q), dict(target),
                           spec, gamma, chis, omega, pulses)


def bare_equivalent(sc):
    """Same envelopes on the abstract N-pod Hamiltonian (no vacuum level)."""
    return hamiltonian(sc.pulses)
