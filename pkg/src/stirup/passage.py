"""User-defined passages for N-pod systems.

A passage is the state

    a_1     = cos(g) * prod_{i=1}^{N-2} cos(x_i)
    a_k     = cos(g) * sin(x_{k-1}) * prod_{i=k}^{N-2} cos(x_i),  k = 2..N-2
    a_{N-1} = -cos(g) * sin(x_{N-2})
    a_N     = -i sin(g)

with g = gamma(t) and x_i = chi_i(t). Levels are 0-based in code, so the
shared intermediate level is index ``N - 1``.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import BoundaryError

HALF_PI = 0.5 * np.pi


class AngleSchedule:
    """Differentiable angle over ``[0, duration]``; value in rad, rate in rad/ns."""

    duration: float

    def value(self, t):
        raise NotImplementedError

    def derivative(self, t):
        raise NotImplementedError

    def second_derivative(self, t):
        raise NotImplementedError(f"{type(self).__name__} has no second derivative")

    def base_and_factor(self):
        """(shape, factor) such that this schedule equals factor * shape."""
        return self, 1.0


@dataclass(frozen=True, eq=False)
class FunctionSchedule(AngleSchedule):
    """Schedule backed by user callables; compares by identity."""

    duration: float
    value_fn: object = field(compare=False)
    derivative_fn: object = field(compare=False)
    second_fn: object = field(default=None, compare=False)

    def value(self, t):
        return np.asarray(self.value_fn(np.asarray(t, dtype=float)), dtype=float)

    def derivative(self, t):
        return np.asarray(self.derivative_fn(np.asarray(t, dtype=float)), dtype=float)

    def second_derivative(self, t):
        if self.second_fn is None:
            return super().second_derivative(t)
        return np.asarray(self.second_fn(np.asarray(t, dtype=float)), dtype=float)


@dataclass(frozen=True)
class ConstantSchedule(AngleSchedule):
    duration: float
    angle: float = 0.0

    def value(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.angle)

    def derivative(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def second_derivative(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))


@dataclass(frozen=True)
class ScaledSchedule(AngleSchedule):
    """``factor * base``; keeps the proportionality visible to the pulse builder."""

    base: AngleSchedule
    factor: float

    @property
    def duration(self):
        return self.base.duration

    def value(self, t):
        return self.factor * self.base.value(t)

    def derivative(self, t):
        return self.factor * self.base.derivative(t)

    def second_derivative(self, t):
        return self.factor * self.base.second_derivative(t)

    def base_and_factor(self):
        shape, f = self.base.base_and_factor()
        return shape, f * self.factor


@dataclass(frozen=True)
class SmoothStepChi(AngleSchedule):
    """arctan(tan^2(pi t / 2T)): runs 0 -> pi/2 with zero slope at both ends."""

    duration: float

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("duration must be positive")

    def value(self, t):
        c = np.cos(np.pi * np.asarray(t, dtype=float) / self.duration)
        # arctan2 continues the 0/0 endpoint at t = T to pi/2
        return np.arctan2(1.0 - c, 1.0 + c)

    def derivative(self, t):
        a = np.pi * np.asarray(t, dtype=float) / self.duration
        return (np.pi / self.duration) * np.sin(a) / (1.0 + np.cos(a) ** 2)

    def second_derivative(self, t):
        a = np.pi * np.asarray(t, dtype=float) / self.duration
        c = np.cos(a)
        return (np.pi / self.duration) ** 2 * c * (3.0 - c * c) / (1.0 + c * c) ** 2


@dataclass(frozen=True)
class AmplitudeSchedule:
    """Omega(t) = omega0 * [1 + Q (1 - cos(2 pi t / T))^4]."""

    omega0: float
    q: float
    duration: float

    def value(self, t):
        s = 1.0 - np.cos(2 * np.pi * np.asarray(t, dtype=float) / self.duration)
        return self.omega0 * (1.0 + self.q * s ** 4)

    def derivative(self, t):
        w = 2 * np.pi / self.duration
        x = w * np.asarray(t, dtype=float)
        return self.omega0 * self.q * 4.0 * (1.0 - np.cos(x)) ** 3 * w * np.sin(x)


@dataclass(frozen=True)
class RateLockedGamma(AngleSchedule):
    """gamma(t) = arctan(chi'(t) / Omega(t)).

    Along this schedule chi' cot(gamma) = Omega(t) holds exactly, which is what
    keeps the inverse-engineered fields finite where gamma vanishes.
    """

    chi: AngleSchedule
    omega: AmplitudeSchedule

    @property
    def duration(self):
        return self.chi.duration

    def value(self, t):
        return np.arctan(self.chi.derivative(t) / self.omega.value(t))

    def derivative(self, t):
        r = self.chi.derivative(t)
        rd = self.chi.second_derivative(t)
        om = self.omega.value(t)
        omd = self.omega.derivative(t)
        return (rd * om - r * omd) / (om * om + r * r)

    def cot_rate(self, t):
        """chi'(t) * cot(gamma(t)) along the reference chi."""
        return self.omega.value(t)


def default_chi(duration, endpoint=HALF_PI):
    """Smooth-step chi rescaled to end at ``endpoint``."""
    if not duration > 0:
        raise ValueError("duration must be positive")
    return ScaledSchedule(SmoothStepChi(float(duration)), float(endpoint) / HALF_PI)


def default_gamma(chi, omega):
    if not np.isclose(chi.duration, omega.duration, rtol=1e-12, atol=0):
        raise ValueError("chi and omega schedules must share the same duration")
    return RateLockedGamma(chi, omega)


def _check_count(N, chis):
    if N < 3:
        raise ValueError(f"N-pod needs N >= 3, got {N}")
    if len(chis) != N - 2:
        raise ValueError(f"N={N} needs {N - 2} chi schedules, got {len(chis)}")


def ground_vector(chi_values):
    """The real unit vector (u_1..u_{N-1}) multiplying cos(gamma).

    ``chi_values`` has shape (N-2, ...). Returns shape (N-1, ...).
    """
    x = np.asarray(chi_values, dtype=float)
    m = x.shape[0]
    cos = np.cos(x)
    sin = np.sin(x)
    # suffix[k] = prod_{i>=k} cos x_i  (0-based), suffix[m] = 1
    suffix = np.ones((m + 1,) + x.shape[1:])
    for k in range(m - 1, -1, -1):
        suffix[k] = suffix[k + 1] * cos[k]
    u = np.empty((m + 1,) + x.shape[1:])
    u[0] = suffix[0]
    for k in range(1, m):
        u[k] = sin[k - 1] * suffix[k]
    u[m] = -sin[m - 1]
    return u


def ground_jacobian(chi_values):
    """du_k / dchi_j, shape (N-1, N-2, ...)."""
    x = np.asarray(chi_values, dtype=float)
    m = x.shape[0]
    cos = np.cos(x)
    sin = np.sin(x)
    jac = np.zeros((m + 1, m) + x.shape[1:])
    for k in range(m + 1):
        # factors of u_k: index -> (value, derivative)
        if k == m:
            factors = {m - 1: (-sin[m - 1], -cos[m - 1])}
        else:
            factors = {i: (cos[i], -sin[i]) for i in range(k, m)}
            if k >= 1:
                factors[k - 1] = (sin[k - 1], cos[k - 1])
        for j, (_, dval) in factors.items():
            term = dval
            for i, (val, _) in factors.items():
                if i != j:
                    term = term * val
            jac[k, j] = term
    return jac


def coefficients(N, gamma, chis, t):
    """Passage amplitudes at time(s) ``t``; shape (N,) or (len(t), N)."""
    _check_count(N, chis)
    t_arr = np.asarray(t, dtype=float)
    g = gamma.value(t_arr)
    x = np.array([c.value(t_arr) for c in chis])
    u = ground_vector(x)
    out = np.empty((N,) + t_arr.shape, dtype=complex)
    out[:-1] = np.cos(g) * u
    out[-1] = -1j * np.sin(g)
    return np.moveaxis(out, 0, -1)


def solve_boundary_angles(target, gamma_endpoint=0.0):
    """Boundary angles s_i reproducing a real target (up to global sign).

    The target must have a vanishing intermediate (last) component. Angles
    whose value is left undetermined by a zero prefix are set to pi/2.
    """
    c = np.asarray(target)
    if np.iscomplexobj(c):
        if np.max(np.abs(c.imag)) > 1e-12:
            raise BoundaryError("target coefficients must be real")
        c = c.real
    c = c.astype(float)
    N = c.size
    if N < 3:
        raise BoundaryError("target must have N >= 3 entries")
    if abs(c[-1]) > 1e-12:
        raise BoundaryError("target occupies the intermediate level")
    if abs(np.dot(c, c) - 1.0) > 1e-12:
        raise BoundaryError(f"target is not normalized (|c|^2 = {np.dot(c, c):.15g})")
    cg = np.cos(gamma_endpoint)
    if abs(abs(cg) - 1.0) > 1e-12:
        raise BoundaryError("gamma endpoint must be 0 or pi")
    u = c[:-1] / np.sign(cg)
    if u[0] < 0:
        u = -u
    m = N - 2
    s = np.zeros(m)
    # |u[:k]| = prod_{i>=k-1} cos(s_i), so each angle is an atan2 of a
    # component against the norm of the prefix (well conditioned near +-pi/2)
    s[m - 1] = np.arctan2(-u[m], np.linalg.norm(u[:m]))
    for k in range(m - 1, 0, -1):
        if np.linalg.norm(u[:k + 1]) < 1e-12:
            s[k - 1] = HALF_PI
        else:
            s[k - 1] = np.arctan2(u[k], np.linalg.norm(u[:k]))
    return [float(v) for v in s]


@dataclass(frozen=True)
class PassageSpec:
    """Boundary data for one passage. ``initial``/``target`` are 0-based vectors."""

    N: int
    boundary_angles: tuple
    target: tuple
    gamma_endpoint: float = 0.0
    initial: tuple = None

    def __post_init__(self):
        if self.N < 3:
            raise BoundaryError("N must be >= 3")
        if len(self.boundary_angles) != self.N - 2:
            raise BoundaryError(f"need {self.N - 2} boundary angles")
        if self.initial is None:
            init = tuple([1.0] + [0.0] * (self.N - 1))
            object.__setattr__(self, "initial", init)
        for name in ("initial", "target"):
            vec = np.asarray(getattr(self, name), dtype=complex)
            if vec.size != self.N:
                raise BoundaryError(f"{name} must have {self.N} entries")
            if abs(np.vdot(vec, vec).real - 1.0) > 1e-12:
                raise BoundaryError(f"{name} is not normalized")
        if abs(abs(np.cos(self.gamma_endpoint)) - 1.0) > 1e-12:
            raise BoundaryError("gamma endpoint must be 0 or pi")

    @classmethod
    def for_target(cls, target, gamma_endpoint=0.0):
        target = tuple(float(v) for v in np.real(np.asarray(target)))
        angles = solve_boundary_angles(target, gamma_endpoint)
        return cls(len(target), tuple(angles), target, float(gamma_endpoint))


@dataclass(frozen=True)
class BoundaryCheck:
    name: str
    passed: bool
    residual: float


@dataclass(frozen=True)
class BoundaryReport:
    checks: tuple

    @property
    def ok(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def __str__(self):
        return "\n".join(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.residual:.3e}"
                         for c in self.checks)


def _phase_distance(a, b):
    """1 - |<a|b>| for unit vectors: zero iff equal up to global phase."""
    return float(1.0 - abs(np.vdot(a, b)))


def validate_boundaries(spec, gamma, chis, tol=1e-9):
    """Check every boundary condition; never raises for failing conditions."""
    T = gamma.duration
    checks = []

    def add(name, residual):
        checks.append(BoundaryCheck(name, bool(residual <= tol), float(residual)))

    add("gamma(0) = 0", abs(float(gamma.value(0.0))))
    add("gamma(T) = endpoint", abs(float(gamma.value(T)) - spec.gamma_endpoint))
    if len(chis) != spec.N - 2:
        checks.append(BoundaryCheck("chi schedule count", False, float(abs(len(chis) - spec.N + 2))))
        return BoundaryReport(tuple(checks))
    for i, (chi, s) in enumerate(zip(chis, spec.boundary_angles), start=1):
        add(f"chi_{i}(0) = 0", abs(float(chi.value(0.0))))
        add(f"chi_{i}(T) = s_{i}", abs(float(chi.value(T)) - s))
        add(f"chi_{i}'(0) = 0", abs(float(chi.derivative(0.0))) * T)
        add(f"chi_{i}'(T) = 0", abs(float(chi.derivative(T))) * T)
    a0 = coefficients(spec.N, gamma, chis, 0.0)
    aT = coefficients(spec.N, gamma, chis, T)
    add("a(0) = initial", _phase_distance(a0, np.asarray(spec.initial, dtype=complex)))
    add("a(T) = target", _phase_distance(aT, np.asarray(spec.target, dtype=complex)))
    return BoundaryReport(tuple(checks))


def intermediate_population_max(gamma, n_points=8193):
    """max_t sin^2(gamma(t)) on a dense uniform grid including T/2."""
    t = np.linspace(0.0, gamma.duration, n_points)
    return float(np.max(np.sin(gamma.value(t)) ** 2))


def default_passage(target, duration, omega0, q=0.0):
    """Smooth-step schedules reaching ``target``.

    Every chi_i is a rescaled copy of one smooth step; gamma is rate-locked to
    a reference copy whose endpoint is the norm of the boundary-angle vector,
    so for N = 3 and s = pi/2 this is exactly the textbook three-level choice.
    Returns ``(spec, gamma, chis, omega)``.
    """
    spec = PassageSpec.for_target(target)
    omega = AmplitudeSchedule(float(omega0), float(q), float(duration))
    ref_end = float(np.linalg.norm(spec.boundary_angles))
    if ref_end == 0.0:
        raise BoundaryError("target equals the initial state; nothing to transfer")
    chis = [default_chi(duration, s) for s in spec.boundary_angles]
    gamma = default_gamma(default_chi(duration, ref_end), omega)
    return spec, gamma, chis, omega
