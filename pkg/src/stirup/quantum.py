"""Dense state algebra, RK4 integrators and fidelity metrics.

Units: time in ns, every rate and matrix element in rad/ns, hbar = 1.
The Schrodinger equation is integrated as ``dpsi/dt = -i H psi`` and the
master equation as

    drho/dt = i[rho, H] + sum_k (rate_k / 2) L(A_k) rho,
    L(A) rho = 2 A rho A^+ - A^+ A rho - rho A^+ A,

which is the density-matrix image of the same sign convention.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, NonHermitianError

DEFAULT_STEPS = 4000

# Chunk of RK4 steps whose one-step propagators are built at once; bounds
# peak memory for superoperators (d**2 x d**2 per step).
_CHUNK = 512


def state_vector(amplitudes, normalize=False):
    """Return a validated, read-only complex state vector.

    Parameters
    ----------
    amplitudes : array_like
        Complex amplitudes, one per level.
    normalize : bool
        Rescale to unit norm instead of rejecting an unnormalized input.
    """
    psi = np.array(amplitudes, dtype=complex).reshape(-1)
    if psi.size == 0:
        raise DimensionError("state vector must have dim >= 1")
    norm = np.linalg.norm(psi)
    if normalize:
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        psi = psi / norm
    elif abs(norm ** 2 - 1.0) > 1e-9:
        raise ValueError(f"state is not normalized (|psi|^2 = {norm ** 2:.12g})")
    psi.setflags(write=False)
    return psi


def basis_state(dim, index):
    psi = np.zeros(dim, dtype=complex)
    psi[index] = 1.0
    psi.setflags(write=False)
    return psi


def density_matrix(entries):
    """Return a validated, read-only density matrix."""
    rho = np.array(entries, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"density matrix must be square, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) >= 1e-10:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > 1e-8:
        raise ValueError(f"density matrix trace is {np.trace(rho).real:.12g}")
    if np.linalg.eigvalsh(rho).min() < -1e-6:
        raise ValueError("density matrix is not positive semidefinite")
    rho.setflags(write=False)
    return rho


def pure_density(psi):
    psi = np.asarray(psi, dtype=complex)
    rho = np.outer(psi, psi.conj())
    rho.setflags(write=False)
    return rho


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_start + k * spacing`` for k = 0..n_steps."""

    t_start: float
    t_end: float
    n_steps: int = DEFAULT_STEPS

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValueError(f"t_end ({self.t_end}) must exceed t_start ({self.t_start})")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps}")

    @classmethod
    def over(cls, duration, n_steps=DEFAULT_STEPS):
        return cls(0.0, float(duration), int(n_steps))

    @property
    def spacing(self):
        return (self.t_end - self.t_start) / self.n_steps

    @property
    def duration(self):
        return self.t_end - self.t_start

    def nodes(self):
        return self.t_start + self.spacing * np.arange(self.n_steps + 1)


class HamiltonianFn:
    """Time-dependent Hermitian operator on a ``dim``-level space.

    ``evaluator`` maps a 1-D array of times to an array of shape
    ``(len(times), dim, dim)``.
    """

    def __init__(self, dim, evaluator):
        self.dim = int(dim)
        self._evaluator = evaluator

    def sample(self, times, check=True):
        times = np.atleast_1d(np.asarray(times, dtype=float))
        mats = np.asarray(self._evaluator(times), dtype=complex)
        if mats.shape != (times.size, self.dim, self.dim):
            raise DimensionError(f"evaluator returned shape {mats.shape}, expected "
                                 f"{(times.size, self.dim, self.dim)}")
        if check:
            resid = np.abs(mats - np.conj(np.swapaxes(mats, 1, 2))).max(axis=(1, 2))
            scale = np.maximum(1.0, np.abs(mats).max(axis=(1, 2)))
            bad = np.flatnonzero(resid > 1e-12 * scale)
            if bad.size:
                i = bad[0]
                raise NonHermitianError(times[i], resid[i])
        return mats

    def __call__(self, t):
        return self.sample([t])[0]

    def scaled(self, factor):
        """Return ``factor * H`` (Rabi-error injection)."""
        ev = self._evaluator
        return HamiltonianFn(self.dim, lambda ts: factor * np.asarray(ev(ts)))

    def plus_diagonal(self, diag):
        """Return ``H + diag(diag)`` (static level shifts)."""
        d = np.diag(np.asarray(diag, dtype=complex))
        if d.shape != (self.dim, self.dim):
            raise DimensionError("diagonal length does not match dim")
        ev = self._evaluator
        return HamiltonianFn(self.dim, lambda ts: np.asarray(ev(ts)) + d)

    @classmethod
    def constant(cls, matrix):
        m = np.array(matrix, dtype=complex)
        return cls(m.shape[0], lambda ts: np.broadcast_to(m, (len(ts),) + m.shape))

    @classmethod
    def zero(cls, dim):
        return cls.constant(np.zeros((dim, dim)))


@dataclass(frozen=True, eq=False)
class CollapseChannel:
    """Lindblad operator with its rate; enters as ``rate/2 * L(operator)``."""

    operator: np.ndarray
    rate: float
    label: str = ""

    def __post_init__(self):
        op = np.array(self.operator, dtype=complex)
        if op.ndim != 2 or op.shape[0] != op.shape[1]:
            raise DimensionError(f"collapse operator must be square, got {op.shape}")
        if not self.rate >= 0:
            raise ValueError(f"collapse rate must be >= 0, got {self.rate}")
        op.setflags(write=False)
        object.__setattr__(self, "operator", op)
        object.__setattr__(self, "rate", float(self.rate))


@dataclass(frozen=True, eq=False)
class Trajectory:
    grid: TimeGrid
    states: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len(self.states) != self.grid.n_steps + 1:
            raise ValueError("trajectory length must be n_steps + 1")

    @property
    def is_pure(self):
        return self.states.ndim == 2

    @property
    def dim(self):
        return self.states.shape[1]

    @property
    def times(self):
        return self.grid.nodes()

    @property
    def final(self):
        return self.states[-1]

    def populations(self):
        if self.is_pure:
            return np.abs(self.states) ** 2
        return np.real(np.diagonal(self.states, axis1=1, axis2=2))


def _stage_samples(H, grid):
    """Hamiltonian at the RK4 stage times of every step.

    The first and last stages are sampled just inside the step so that a
    drive switching exactly on a grid node is integrated piecewise-exactly.
    """
    h = grid.spacing
    t0 = grid.nodes()[:-1]
    eps = 1e-12 * grid.duration
    a = H.sample(t0 + eps)
    b = H.sample(t0 + 0.5 * h)
    c = H.sample(t0 + h - eps)
    return a, b, c


def _rk4_propagators(a, b, c):
    """One-step RK4 maps for the linear ODE x' = G(t) x.

    ``a``, ``b``, ``c`` are ``step * G`` at the start, middle and end of each
    step. Expanding the four stages gives
    P = I + (a + 4b + c + ba + b^2 + cb + b^2 a/2 + c b^2/2 + c b^2 a/4) / 6.
    """
    eye = np.eye(a.shape[-1])
    ba = b @ a
    bb = b @ b
    cb = c @ b
    bba = bb @ a
    cbb = c @ bb
    cbba = cbb @ a
    return eye + (a + 4.0 * b + c + ba + bb + cb
                  + 0.5 * bba + 0.5 * cbb + 0.25 * cbba) / 6.0


def _check_grid(grid):
    if not isinstance(grid, TimeGrid):
        raise TypeError("grid must be a TimeGrid")


def evolve_schrodinger(H, psi0, grid):
    """Integrate ``dpsi/dt = -i H(t) psi`` with fixed-step RK4.

    No renormalization is applied; the norm drift is a diagnostic of the
    step density.
    """
    _check_grid(grid)
    psi = np.asarray(psi0, dtype=complex)
    if psi.shape != (H.dim,):
        raise DimensionError(f"psi0 has shape {psi.shape}, Hamiltonian dim is {H.dim}")
    state_vector(psi)
    n = grid.n_steps
    h = grid.spacing
    out = np.empty((n + 1, H.dim), dtype=complex)
    out[0] = psi
    a_all, b_all, c_all = _stage_samples(H, grid)
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        props = _rk4_propagators(-1j * h * a_all[start:stop],
                                 -1j * h * b_all[start:stop],
                                 -1j * h * c_all[start:stop])
        for k in range(stop - start):
            psi = props[k] @ psi
            out[start + k + 1] = psi
    return Trajectory(grid, out)


def _liouvillian(Hs, channels):
    """Row-major superoperators for a stack of Hamiltonians."""
    d = Hs.shape[-1]
    eye = np.eye(d)
    jump = np.zeros((d * d, d * d), dtype=complex)
    damp = np.zeros((d, d), dtype=complex)
    for ch in channels:
        A = ch.operator
        jump += ch.rate * np.kron(A, A.conj())
        damp += 0.5 * ch.rate * (A.conj().T @ A)
    heff = Hs - 1j * damp
    # vec(X rho Y) = (X kron Y^T) vec(rho)
    left = np.einsum("nij,kl->nikjl", heff, eye).reshape(len(Hs), d * d, d * d)
    right = np.einsum("ij,nkl->nikjl", eye, heff.conj()).reshape(len(Hs), d * d, d * d)
    return -1j * left + 1j * right + jump


def evolve_lindblad(H, channels, rho0, grid):
    """Integrate the master equation with fixed-step RK4 on vec(rho)."""
    _check_grid(grid)
    rho = np.asarray(rho0, dtype=complex)
    d = H.dim
    if rho.shape != (d, d):
        raise DimensionError(f"rho0 has shape {rho.shape}, Hamiltonian dim is {d}")
    density_matrix(rho)
    channels = list(channels)
    for ch in channels:
        if not isinstance(ch, CollapseChannel):
            raise TypeError("channels must be CollapseChannel instances")
        if ch.operator.shape != (d, d):
            raise DimensionError(f"collapse operator {ch.label or ''} has shape "
                                 f"{ch.operator.shape}, expected {(d, d)}")
    n = grid.n_steps
    h = grid.spacing
    out = np.empty((n + 1, d, d), dtype=complex)
    out[0] = rho
    vec = rho.reshape(-1)
    a_all, b_all, c_all = _stage_samples(H, grid)
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        props = _rk4_propagators(h * _liouvillian(a_all[start:stop], channels),
                                 h * _liouvillian(b_all[start:stop], channels),
                                 h * _liouvillian(c_all[start:stop], channels))
        for k in range(stop - start):
            vec = props[k] @ vec
            out[start + k + 1] = vec.reshape(d, d)
    return Trajectory(grid, out)


def _same_dim(a, b):
    if a.shape[0] != b.shape[0]:
        raise DimensionError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")


def fidelity_pure(a, b):
    """|<a|b>|^2 for two pure states."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    _same_dim(a, b)
    return float(min(1.0, abs(np.vdot(a, b)) ** 2))


def fidelity_mixed(target, rho):
    """<target|rho|target> for a pure target."""
    target = np.asarray(target, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    _same_dim(target, rho)
    val = np.vdot(target, rho @ target)
    return float(np.clip(val.real, 0.0, 1.0))


def transfer_efficiency(traj, target):
    if not traj.is_pure:
        raise ValueError("transfer_efficiency needs a pure-state trajectory; "
                         "use fidelity_mixed on the final density matrix")
    return fidelity_pure(target, traj.final)


def _orthogonal_residual(a, b):
    # sqrt(1 - |<a|b>|^2) evaluated as the norm of a's component orthogonal to b;
    # avoids the cancellation in 1 - overlap**2 for nearly equal states.
    a = a / np.linalg.norm(a, axis=-1, keepdims=True)
    b = b / np.linalg.norm(b, axis=-1, keepdims=True)
    ov = np.sum(b.conj() * a, axis=-1, keepdims=True)
    return np.clip(np.linalg.norm(a - ov * b, axis=-1), 0.0, 1.0)


def trace_distance_pure(a, b):
    """Trace distance of two pure states, sqrt(1 - |<a|b>|^2)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    _same_dim(a, b)
    return float(_orthogonal_residual(a, b))


def max_state_distance(traj_a, traj_b):
    """Largest pure-state trace distance over aligned grid nodes."""
    if traj_a.grid != traj_b.grid:
        raise ValueError("trajectories are not on the same grid")
    if not (traj_a.is_pure and traj_b.is_pure):
        raise ValueError("max_state_distance needs pure-state trajectories")
    _same_dim(traj_a.states[0], traj_b.states[0])
    return float(_orthogonal_residual(traj_a.states, traj_b.states).max())


def population(state, level):
    """Occupation of ``level`` (0-based) for a vector or density matrix."""
    state = np.asarray(state)
    if not 0 <= level < state.shape[0]:
        raise IndexError(f"level {level} out of range for dim {state.shape[0]}")
    if state.ndim == 1:
        return float(abs(state[level]) ** 2)
    return float(state[level, level].real)
