"""Amplitude-modulation (Q) search and Fourier-ansatz robustness optimization."""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import passage as psg
from .errors import OptimizationError, PulseDivergenceError
from .pulses import N_SAMPLES, hamiltonian, inverse_engineer, minimum_time
from .quantum import (DEFAULT_STEPS, CollapseChannel, TimeGrid, basis_state,
                      evolve_lindblad, evolve_schrodinger, fidelity_mixed, fidelity_pure,
                      pure_density)

log = logging.getLogger(__name__)

GOLDEN = 0.5 * (np.sqrt(5.0) - 1.0)


# ---------------------------------------------------------------- bare model

def bare_channels(N, gamma1=0.0, gamma2=0.0):
    """Collective decay S- = sum_m |m><N| and dephasing S+ = sum_{m>=2} |m><m|."""
    s_minus = np.zeros((N, N))
    s_minus[:N - 1, N - 1] = 1.0
    s_plus = np.diag([0.0] + [1.0] * (N - 1))
    return [CollapseChannel(s_minus, gamma1, "S-"), CollapseChannel(s_plus, gamma2, "S+")]


def simulate_bare(pulses, target, gamma1=0.0, gamma2=0.0, eta=0.0, zeta=0.0,
                  n_steps=DEFAULT_STEPS):
    """Run the N-pod model from |1> with optional errors and decoherence.

    ``eta`` scales every envelope by (1 + eta); ``zeta`` shifts all ground
    levels by zeta * max_amplitude. Returns (fidelity, trajectory).
    """
    N = pulses.N
    H = hamiltonian(pulses)
    if eta != 0.0:
        H = H.scaled(1.0 + eta)
    if zeta != 0.0:
        delta = zeta * pulses.max_amplitude
        H = H.plus_diagonal([delta] * (N - 1) + [0.0])
    grid = TimeGrid.over(pulses.duration, n_steps)
    target = np.asarray(target, dtype=complex)
    psi0 = basis_state(N, 0)
    if gamma1 == 0.0 and gamma2 == 0.0:
        traj = evolve_schrodinger(H, psi0, grid)
        return fidelity_pure(target, traj.final), traj
    traj = evolve_lindblad(H, bare_channels(N, gamma1, gamma2), pure_density(psi0), grid)
    return fidelity_mixed(target, traj.final), traj


# ---------------------------------------------------------------- Q search

@dataclass(frozen=True)
class QSearch:
    """Brute-force search for the amplitude-modulation strength Q."""

    duration: float
    omega0: float
    bounds: tuple = (-0.1, 0.1)
    n_grid: int = 41
    tol: float = 1e-6
    n_samples: int = N_SAMPLES
    target: tuple = (0.0, -1.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "target", tuple(float(v) for v in self.target))
        lo, hi = self.bounds
        if not lo < hi:
            raise ValueError(f"Q bounds must satisfy lo < hi, got {self.bounds}")
        if self.n_grid < 3:
            raise ValueError("n_grid must be >= 3")
        if not (self.duration > 0 and self.omega0 > 0):
            raise ValueError("duration and omega0 must be positive")


@dataclass(frozen=True)
class QPoint:
    q: float
    p_max: float
    max_amplitude: float
    feasible: bool
    objective: float


@dataclass(frozen=True)
class QResult:
    q: float
    p_max: float
    max_amplitude: float
    amplitude_cap: float
    feasible: bool
    points: tuple = field(repr=False, default=())

    @property
    def warning(self):
        return not self.feasible


def _q_point(search, q, cap):
    spec, gamma, chis, omega = psg.default_passage(search.target, search.duration,
                                                   search.omega0, q)
    try:
        pulses = inverse_engineer(spec.N, gamma, chis, omega, search.n_samples)
    except PulseDivergenceError:
        # Omega(t) crosses zero (Q < -1/16): gamma jumps and the fields blow up
        return QPoint(float(q), 1.0, np.inf, False, np.inf)
    p = psg.intermediate_population_max(gamma)
    amp = pulses.max_amplitude
    ok = amp <= cap
    obj = p if ok else 1.0 + (amp - cap) / cap
    return QPoint(float(q), p, amp, bool(ok), float(obj))


def _better(a, b):
    """True if point a beats b; ties go to the smaller |Q|."""
    if a.objective != b.objective:
        return a.objective < b.objective
    return abs(a.q) < abs(b.q)


def optimize_q(search):
    """Q minimizing max sin^2(gamma) without raising the peak field above Q = 0's."""
    tau = minimum_time(search.omega0)
    if search.duration < tau * (1 - 1e-6):
        raise ValueError(f"T = {search.duration} ns is below the minimum time {tau:.6g} ns")
    ref = _q_point(search, 0.0, np.inf)
    cap = ref.max_amplitude * (1 + 1e-12)
    lo, hi = search.bounds
    grid = np.linspace(lo, hi, search.n_grid)
    points = [_q_point(search, q, cap) for q in grid]
    best_i = 0
    for i, p in enumerate(points):
        if _better(p, points[best_i]):
            best_i = i
    best = points[best_i]
    if not best.feasible:
        log.warning("no feasible Q in %s at T=%g; returning Q=0", search.bounds,
                    search.duration)
        return QResult(0.0, ref.p_max, ref.max_amplitude, cap, False, tuple(points))
    # golden-section refinement inside the neighbouring grid cells
    a = grid[max(best_i - 1, 0)]
    b = grid[min(best_i + 1, len(grid) - 1)]
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1 = _q_point(search, x1, cap)
    f2 = _q_point(search, x2, cap)
    extra = [f1, f2]
    while b - a > search.tol:
        if _better(f1, f2) or f1.objective == f2.objective:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = _q_point(search, x1, cap)
            extra.append(f1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = _q_point(search, x2, cap)
            extra.append(f2)
    for p in extra:
        if p.feasible and _better(p, best):
            best = p
    return QResult(best.q, best.p_max, best.max_amplitude, cap, True,
                   tuple(points) + tuple(extra))


def write_q_report(result, path):
    from .csvio import write_csv
    rows = [(p.q, p.p_max, p.max_amplitude, p.objective, p.feasible)
            for p in sorted(result.points, key=lambda p: p.q)]
    return write_csv(path, ["Q", "p_max", "max_amplitude", "objective", "feasible"], rows)


# ---------------------------------------------------------------- Fourier ansatz

@dataclass(frozen=True)
class FourierAnsatz:
    """Coefficients C_n (gamma series) and S_m (chi series)."""

    c: tuple = ()
    s: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(float(v) for v in self.c))
        object.__setattr__(self, "s", tuple(float(v) for v in self.s))

    @classmethod
    def zeros(cls, n_c, n_s):
        if n_c < 0 or n_s < 0:
            raise ValueError("coefficient counts must be >= 0")
        return cls((0.0,) * n_c, (0.0,) * n_s)

    @classmethod
    def from_vector(cls, vec, n_c):
        vec = np.asarray(vec, dtype=float)
        return cls(tuple(vec[:n_c]), tuple(vec[n_c:]))

    @property
    def n_c(self):
        return len(self.c)

    @property
    def n_s(self):
        return len(self.s)

    def vector(self):
        return np.array(self.c + self.s, dtype=float)


def _sine_series(coef, phase, phase_d, phase_dd=None):
    """sum_k c_k sin(2k phase) and its first two time derivatives."""
    val = np.zeros_like(phase)
    d1 = np.zeros_like(phase)
    d2 = np.zeros_like(phase)
    for k, ck in enumerate(coef, start=1):
        w = 2.0 * k
        val += ck * np.sin(w * phase)
        d1 += ck * w * np.cos(w * phase) * phase_d
        if phase_dd is not None:
            d2 += ck * w * (np.cos(w * phase) * phase_dd - w * np.sin(w * phase) * phase_d ** 2)
    return val, d1, d2


def schedules_from_ansatz(ansatz, T):
    """Literal series: chi = pi t/2T + sum S_m sin(2m pi t/T), gamma = 2 chi + sum C_n sin(2n chi).

    With every coefficient zero this gives gamma(T) = pi. The chi slope at the
    endpoints is pi/2T, so these schedules fail the zero-slope boundary checks
    and the inverse-engineered fields diverge; see ``regularized_schedules``.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    c, s = ansatz.c, ansatz.s
    k0 = 0.5 * np.pi / T

    def chi_parts(t):
        t = np.asarray(t, dtype=float)
        ph = np.pi * t / T
        ser, ser_d, ser_dd = _sine_series(s, ph, np.full_like(t, np.pi / T), np.zeros_like(t))
        return k0 * t + ser, k0 + ser_d, ser_dd

    def gamma_parts(t):
        x, xd, xdd = chi_parts(t)
        ser, ser_d, ser_dd = _sine_series(c, x, xd, xdd)
        return 2 * x + ser, 2 * xd + ser_d, 2 * xdd + ser_dd

    chi = psg.FunctionSchedule(float(T), lambda t: chi_parts(t)[0],
                               lambda t: chi_parts(t)[1], lambda t: chi_parts(t)[2])
    gamma = psg.FunctionSchedule(float(T), lambda t: gamma_parts(t)[0],
                                 lambda t: gamma_parts(t)[1], lambda t: gamma_parts(t)[2])
    return gamma, chi


class _RegularChi:
    def __init__(self, s, T):
        self.s = s
        self.base = psg.SmoothStepChi(T)

    def parts(self, t):
        b = self.base
        x0, x0d, x0dd = b.value(t), b.derivative(t), b.second_derivative(t)
        ser, ser_d, ser_dd = _sine_series(self.s, x0, x0d, x0dd)
        return x0 + ser, x0d + ser_d, x0dd + ser_dd


class _RegularGamma:
    def __init__(self, c, chi, omega):
        self.c = c
        self.chi = chi
        self.omega = omega

    def parts(self, t):
        x, xd, xdd = self.chi.parts(t)
        om, omd = self.omega.value(t), self.omega.derivative(t)
        base = np.arctan(xd / om)
        base_d = (xdd * om - xd * omd) / (om * om + xd * xd)
        ser, ser_d, _ = _sine_series(self.c, x, xd)
        return base + ser, base_d + ser_d


def regularized_schedules(ansatz, T, omega):
    """Series perturbations of the default passage that keep every boundary condition.

    chi = chi0 + sum S_m sin(2m chi0) and gamma = arctan(chi'/Omega) + sum C_n sin(2n chi),
    where chi0 is the smooth step. All sine terms vanish at chi0 in {0, pi/2},
    so chi, gamma and chi' keep their endpoint values; all-zero coefficients
    reproduce the default passage. Returns (gamma, chi).
    """
    chi_impl = _RegularChi(ansatz.s, float(T))
    gam_impl = _RegularGamma(ansatz.c, chi_impl, omega)
    chi = psg.FunctionSchedule(float(T), lambda t: chi_impl.parts(t)[0],
                               lambda t: chi_impl.parts(t)[1], lambda t: chi_impl.parts(t)[2])
    gamma = psg.FunctionSchedule(float(T), lambda t: gam_impl.parts(t)[0],
                                 lambda t: gam_impl.parts(t)[1])
    return gamma, chi


# ---------------------------------------------------------------- objectives

@dataclass(frozen=True)
class ObjectiveSpec:
    """Weighted robustness objective; rates in rad/ns, grids dimensionless."""

    w_fidelity: float = 1.0
    gamma1: float = 0.0
    gamma2: float = 0.0
    w_eta: float = 0.0
    eta_grid: tuple = ()
    w_zeta: float = 0.0
    zeta_grid: tuple = ()
    w_population: float = 0.0
    n_steps: int = DEFAULT_STEPS

    def __post_init__(self):
        object.__setattr__(self, "eta_grid", tuple(float(v) for v in self.eta_grid))
        object.__setattr__(self, "zeta_grid", tuple(float(v) for v in self.zeta_grid))
        weights = (self.w_fidelity, self.w_eta, self.w_zeta, self.w_population)
        if min(weights) < 0:
            raise ValueError("objective weights must be >= 0")
        if max(weights) == 0:
            raise ValueError("at least one objective weight must be positive")
        if self.gamma1 < 0 or self.gamma2 < 0:
            raise ValueError("decoherence rates must be >= 0")
        if self.w_eta > 0 and not self.eta_grid:
            raise ValueError("eta_grid is empty but w_eta > 0")
        if self.w_zeta > 0 and not self.zeta_grid:
            raise ValueError("zeta_grid is empty but w_zeta > 0")


def robustness_score(pulses, objective, target):
    """Weighted infidelities (nominal, eta grid, zeta grid) plus P_N^max penalty."""
    o = objective
    rates = dict(gamma1=o.gamma1, gamma2=o.gamma2, n_steps=o.n_steps)
    score = 0.0
    if o.w_fidelity > 0 or o.w_population > 0:
        f, traj = simulate_bare(pulses, target, **rates)
        score += o.w_fidelity * (1.0 - f)
        score += o.w_population * float(traj.populations()[:, -1].max())
    if o.w_eta > 0:
        inf = [1.0 - simulate_bare(pulses, target, eta=e, **rates)[0] for e in o.eta_grid]
        score += o.w_eta * float(np.mean(inf))
    if o.w_zeta > 0:
        inf = [1.0 - simulate_bare(pulses, target, zeta=z, **rates)[0] for z in o.zeta_grid]
        score += o.w_zeta * float(np.mean(inf))
    return float(score)


@dataclass(frozen=True)
class FourierResult:
    ansatz: FourierAnsatz
    objective: float
    baseline_objective: float
    evaluations: int
    history: tuple = field(repr=False, default=())


TARGET_2 = np.array([0.0, -1.0, 0.0], dtype=complex)


def ansatz_objective(vec, n_c, objective, T, omega0, n_samples=N_SAMPLES):
    """Pulse build + simulation for one coefficient vector; inf if the fields diverge."""
    ansatz = FourierAnsatz.from_vector(vec, n_c)
    omega = psg.AmplitudeSchedule(float(omega0), 0.0, float(T))
    try:
        gamma, chi = regularized_schedules(ansatz, T, omega)
        pulses = inverse_engineer(3, gamma, [chi], omega, n_samples)
        return robustness_score(pulses, objective, TARGET_2)
    except PulseDivergenceError:
        return np.inf
    except Exception as exc:
        raise OptimizationError(tuple(ansatz.vector()), exc) from exc


def optimize_fourier(n_c, n_s, objective, T, omega0, restarts=5, seed=0, maxfev=300,
                     step=0.05, gradient=False, n_samples=N_SAMPLES):
    """Restarted Nelder-Mead (or finite-difference L-BFGS-B) over the ansatz.

    The first start is the all-zero ansatz; the others are drawn from a seeded
    normal distribution of width ``step``. Never returns anything worse than
    the all-zero ansatz.
    """
    dim = n_c + n_s
    zero = np.zeros(dim)
    history = []

    def f(x):
        val = ansatz_objective(x, n_c, objective, T, omega0, n_samples)
        history.append((tuple(float(v) for v in x), float(val)))
        return val

    baseline = f(zero)
    best_x, best_f = zero, baseline
    if dim == 0:
        return FourierResult(FourierAnsatz(), baseline, baseline, 1, tuple(history))
    rng = np.random.default_rng(seed)
    starts = [zero] + [rng.normal(0.0, step, dim) for _ in range(restarts - 1)]
    for x0 in starts:
        if gradient:
            res = minimize(f, x0, method="L-BFGS-B",
                           options=dict(maxfun=maxfev, eps=1e-6))
        else:
            simplex = np.vstack([x0] + [x0 + step * e for e in np.eye(dim)])
            res = minimize(f, x0, method="Nelder-Mead",
                           options=dict(initial_simplex=simplex, maxfev=maxfev,
                                        xatol=1e-5, fatol=1e-12))
        if np.isfinite(res.fun) and res.fun < best_f:
            best_x, best_f = np.array(res.x), float(res.fun)
    return FourierResult(FourierAnsatz.from_vector(best_x, n_c), best_f, baseline,
                         len(history), tuple(history))


def write_fourier_report(result, path):
    from .csvio import write_csv
    n_c = result.ansatz.n_c
    n_s = result.ansatz.n_s
    header = [f"C_{i}" for i in range(1, n_c + 1)] + [f"S_{i}" for i in range(1, n_s + 1)]
    header += ["objective", "feasible"]
    rows = [tuple(x) + (val if np.isfinite(val) else float("inf"), bool(np.isfinite(val)))
            for x, val in result.history]
    return write_csv(path, header, rows)
