"""Control fields: inverse engineering, baselines and the N-pod Hamiltonian.

The star Hamiltonian is H(t) = sum_m h_m(t) (|m><N| + |N><m|). Writing the
passage as a = (cos(g) u(chi), -i sin(g)), the Schrodinger equation gives
for every ground level m

    h_m = g' u_m - cot(g) * sum_j (du_m/dchi_j) chi_j'

and the equation for the intermediate level is then satisfied identically.
"""
import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from . import passage as psg
from .errors import PulseDivergenceError
from .quantum import HamiltonianFn, Trajectory, state_vector

log = logging.getLogger(__name__)

N_SAMPLES = 8192
GUARD = 1e-6


@dataclass(frozen=True)
class ProtocolKind:
    name: str
    q: float = 0.0

    def __post_init__(self):
        if self.name not in ("stirup", "stirap", "rr"):
            raise ValueError(f"unknown protocol {self.name!r}")

    @classmethod
    def stirup(cls, q=0.0):
        return cls("stirup", float(q))

    def __str__(self):
        return f"STIRUP(Q={self.q:g})" if self.name == "stirup" else self.name.upper()


class _Spline:
    def __init__(self, times, envelopes):
        self._spline = CubicSpline(times, envelopes, axis=1)
        self._t_end = times[-1]

    def __call__(self, t):
        return self._spline(np.clip(t, 0.0, self._t_end))


class _Scaled:
    def __init__(self, inner, factor):
        self.inner = inner
        self.factor = factor

    def __call__(self, t):
        return self.factor * np.asarray(self.inner(t))


@dataclass(frozen=True, eq=False)
class ControlPulses:
    """Envelopes h_{mN}(t), m = 1..N-1, sampled on a uniform grid.

    ``evaluator`` returns shape (N-1, len(t)) for an array of times. Sampled
    pulses use a cubic spline through the samples.
    """

    N: int
    duration: float
    times: np.ndarray = field(repr=False)
    envelopes: np.ndarray = field(repr=False)
    evaluator: object = field(default=None, repr=False)
    label: str = ""

    def __post_init__(self):
        env = np.asarray(self.envelopes, dtype=float)
        if env.shape != (self.N - 1, len(self.times)):
            raise ValueError(f"envelopes must have shape {(self.N - 1, len(self.times))}")
        if not np.all(np.isfinite(env)):
            bad = np.argwhere(~np.isfinite(env))[0]
            raise PulseDivergenceError(self.times[bad[1]], "non-finite envelope sample")
        env.setflags(write=False)
        object.__setattr__(self, "envelopes", env)
        if self.evaluator is None:
            object.__setattr__(self, "evaluator", _Spline(np.asarray(self.times), env))

    @classmethod
    def from_function(cls, N, duration, fn, n_samples=N_SAMPLES, label=""):
        times = np.linspace(0.0, duration, n_samples)
        return cls(N, float(duration), times, np.asarray(fn(times), dtype=float), fn, label)

    @classmethod
    def from_samples(cls, times, envelopes, label=""):
        times = np.asarray(times, dtype=float)
        env = np.atleast_2d(np.asarray(envelopes, dtype=float))
        return cls(env.shape[0] + 1, float(times[-1] - times[0]), times, env, None, label)

    @property
    def max_amplitude(self):
        return float(np.abs(self.envelopes).max())

    def at(self, t):
        return np.asarray(self.evaluator(np.asarray(t, dtype=float)))

    def scaled(self, factor):
        return ControlPulses(self.N, self.duration, self.times, factor * self.envelopes,
                             _Scaled(self.evaluator, factor), self.label)


class _InverseFields:
    """Analytic fields for a passage, evaluated at arbitrary times."""

    def __init__(self, N, gamma, chis, omega):
        psg._check_count(N, chis)
        self.N = N
        self.gamma = gamma
        self.chis = list(chis)
        self.omega = omega
        self.T = gamma.duration
        self._ratios = self._locked_ratios()
        probe = np.linspace(0.0, self.T, 257)
        self._peak_rate = [max(float(np.abs(c.derivative(probe)).max()), 1e-300)
                           for c in self.chis]

    def _locked_ratios(self):
        """chi_j' / chi_ref' for every chi proportional to gamma's reference."""
        if not isinstance(self.gamma, psg.RateLockedGamma):
            return None
        ref_shape, ref_f = self.gamma.chi.base_and_factor()
        ratios = []
        for c in self.chis:
            shape, f = c.base_and_factor()
            if (shape is ref_shape or shape == ref_shape) and ref_f != 0:
                ratios.append(f / ref_f)
            else:
                return None
        return np.array(ratios)

    def _direct(self, j, t):
        g = self.gamma.value(t)
        return self.chis[j].derivative(t) * np.cos(g) / np.sin(g)

    def cot_rates(self, t):
        """chi_j'(t) * cot(gamma(t)), shape (N-2, len(t))."""
        if self._ratios is not None:
            return self._ratios[:, None] * self.gamma.cot_rate(t)[None, :]
        g = self.gamma.value(t)
        sg = np.sin(g)
        flagged = np.abs(sg) < GUARD
        out = np.empty((len(self.chis), t.size))
        safe = np.where(flagged, 1.0, sg)
        for j, chi in enumerate(self.chis):
            rate = chi.derivative(t)
            out[j] = np.where(flagged, 0.0, rate * np.cos(g) / safe)
            for i in np.flatnonzero(flagged):
                if abs(rate[i]) > 1e-4 * self._peak_rate[j]:
                    raise PulseDivergenceError(
                        t[i], f"gamma vanishes while chi_{j + 1}' = {rate[i]:.3e}")
                out[j, i] = self._series_limit(j, t[i])
        return out

    def _series_limit(self, j, t0):
        # quadratic extrapolation from the interior side of the removable point
        side = 1.0 if t0 < 0.5 * self.T else -1.0
        delta = 1e-3 * self.T
        ts = t0 + side * delta * np.array([1.0, 2.0, 3.0])
        if np.any(np.abs(np.sin(self.gamma.value(ts))) < GUARD):
            raise PulseDivergenceError(t0, "gamma stays at zero next to the point")
        r1, r2, r3 = self._direct(j, ts)
        return 3.0 * r1 - 3.0 * r2 + r3

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        gd = self.gamma.derivative(t)
        x = np.array([c.value(t) for c in self.chis])
        u = psg.ground_vector(x)
        jac = psg.ground_jacobian(x)
        rates = self.cot_rates(t)
        return gd * u - np.einsum("kjn,jn->kn", jac, rates)


def inverse_engineer(N, gamma, chis, omega, n_samples=N_SAMPLES):
    """Control fields that carry |1> along the passage (gamma, chis)."""
    fields = _InverseFields(N, gamma, chis, omega)
    times = np.linspace(0.0, gamma.duration, n_samples)
    sg = np.sin(gamma.value(times))
    keep = np.flatnonzero(np.abs(sg) >= GUARD)
    flips = np.flatnonzero(sg[keep[:-1]] * sg[keep[1:]] < 0)
    if flips.size:
        raise PulseDivergenceError(times[keep[flips[0]]],
                                   "gamma changes sign inside the interval")
    env = fields(times)
    return ControlPulses(N, float(gamma.duration), times, env, None, "stirup")


def stirup_pulses(target, duration, omega0, q=0.0, n_samples=N_SAMPLES):
    """Default-schedule STIRUP fields for a real target; returns (pulses, passage)."""
    spec, gamma, chis, omega = psg.default_passage(target, duration, omega0, q)
    pulses = inverse_engineer(spec.N, gamma, chis, omega, n_samples)
    return pulses, (spec, gamma, chis, omega)


class _StarEvaluator:
    def __init__(self, pulses, dim):
        self.pulses = pulses
        self.dim = dim

    def __call__(self, ts):
        N = self.pulses.N
        env = self.pulses.at(ts)
        mats = np.zeros((len(ts), self.dim, self.dim), dtype=complex)
        for m in range(N - 1):
            mats[:, m, N - 1] = env[m]
            mats[:, N - 1, m] = env[m]
        return mats


def hamiltonian(pulses, dim=None):
    """Star Hamiltonian with <m|H|N> = h_mN; ``dim`` may pad extra idle levels."""
    dim = pulses.N if dim is None else int(dim)
    if dim < pulses.N:
        raise ValueError("dim must be at least N")
    return HamiltonianFn(dim, _StarEvaluator(pulses, dim))


class _StirapFields:
    def __init__(self, omega0, T):
        self.omega0 = omega0
        self.T = T

    def __call__(self, t):
        theta = 0.5 * np.pi * np.asarray(t, dtype=float) / self.T
        return self.omega0 * np.array([np.sin(theta), np.cos(theta)])


def stirap_baseline(omega0, T, n_samples=N_SAMPLES):
    """Counterintuitive sine/cosine pair with constant rms amplitude omega0."""
    if not T > 0:
        raise ValueError("T must be positive")
    return ControlPulses.from_function(3, T, _StirapFields(float(omega0), float(T)),
                                       n_samples, "stirap")


class _RabiFields:
    def __init__(self, amplitude, T):
        self.amplitude = amplitude
        self.T = T

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        first = t < 0.5 * self.T
        return self.amplitude * np.array([first, ~first], dtype=float)


def rr_baseline(omega0, T, n_samples=N_SAMPLES):
    """Two back-to-back resonant pi/2-area pulses, |1> -> |3> -> |2>.

    The amplitude is pi/T regardless of ``omega0``; a warning is logged if it
    exceeds that budget.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    amp = np.pi / T
    if amp > omega0 * (1 + 1e-12):
        log.warning("RR amplitude %.4g rad/ns exceeds the budget %.4g rad/ns", amp, omega0)
    return ControlPulses.from_function(3, T, _RabiFields(amp, float(T)), n_samples, "rr")


def protocol_pulses(kind, target, duration, omega0, n_samples=N_SAMPLES):
    """Pulses for a ProtocolKind. Baselines only support the |1> -> |2> transfer."""
    if kind.name == "stirup":
        return stirup_pulses(target, duration, omega0, kind.q, n_samples)[0]
    if len(target) != 3 or abs(abs(target[1]) - 1.0) > 1e-12:
        raise ValueError(f"{kind} baseline is only defined for the |1> -> |2> transfer")
    if kind.name == "stirap":
        return stirap_baseline(omega0, duration, n_samples)
    return rr_baseline(omega0, duration, n_samples)


def dark_state(pulses, t):
    """cos(theta)|1> - sin(theta)|2>, tan(theta) = h13 / h23."""
    if pulses.N != 3:
        raise ValueError("dark_state is defined for N = 3")
    h13, h23 = pulses.at(np.array([t]))[:, 0]
    if h13 == 0 and h23 == 0:
        raise ValueError(f"both envelopes vanish at t={t}; mixing angle undefined")
    theta = np.arctan2(h13, h23)
    return state_vector([np.cos(theta), -np.sin(theta), 0.0])


def dark_state_trajectory(pulses, grid):
    if pulses.N != 3:
        raise ValueError("dark_state is defined for N = 3")
    env = pulses.at(grid.nodes())
    if np.any((env[0] == 0) & (env[1] == 0)):
        raise ValueError("both envelopes vanish on the grid; mixing angle undefined")
    theta = np.arctan2(env[0], env[1])
    states = np.stack([np.cos(theta), -np.sin(theta), np.zeros_like(theta)], axis=1)
    return Trajectory(grid, states.astype(complex))


def passage_trajectory(N, gamma, chis, grid):
    return Trajectory(grid, psg.coefficients(N, gamma, chis, grid.nodes()))


def _unit_pulses(x, q, n_samples):
    # omega0 = 1, T = x: fields depend only on the product omega0 * T
    spec, gamma, chis, omega = psg.default_passage([0.0, -1.0, 0.0], x, 1.0, q)
    return inverse_engineer(3, gamma, chis, omega, n_samples)


def _feasible(x, q, n_samples):
    return _unit_pulses(x, q, n_samples).max_amplitude <= 1.0 + 1e-9


def minimum_time(omega0, q=0.0, rel_tol=1e-4, n_samples=N_SAMPLES):
    """Shortest T whose STIRUP fields never exceed the STIRAP peak omega0.

    The search runs on the dimensionless product omega0 * T, so the result
    scales exactly as 1/omega0.
    """
    if not omega0 > 0:
        raise ValueError("omega0 must be positive")
    return _minimum_product(float(q), float(rel_tol), int(n_samples)) / omega0


@lru_cache(maxsize=64)
def _minimum_product(q, rel_tol, n_samples):
    cap = 100.0
    xs = np.geomspace(0.25, cap, 97)
    prev = None
    for x in xs:
        if _feasible(x, q, n_samples):
            break
        prev = x
    else:
        raise ValueError(f"no feasible duration below {cap}/omega0 for Q={q}")
    if prev is None:
        raise ValueError("smallest probe is already feasible; lower the scan start")
    lo, hi = prev, x
    # bisect well past rel_tol so the returned bound is feasible and tight
    while (hi - lo) > 0.01 * rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if _feasible(mid, q, n_samples):
            hi = mid
        else:
            lo = mid
    return float(hi)


def write_pulses_csv(pulses, path):
    from .csvio import write_csv
    N = pulses.N
    header = ["t_ns"] + [f"h_{m}{N}" for m in range(1, N)]
    rows = np.column_stack([pulses.times, pulses.envelopes.T])
    write_csv(path, header, rows)
    return path


def read_pulses_csv(path):
    from .csvio import read_csv
    header, rows = read_csv(path)
    if not header or header[0] != "t_ns":
        raise ValueError(f"{path}: first column must be t_ns")
    return ControlPulses.from_samples(rows[:, 0], rows[:, 1:].T, label="csv")
