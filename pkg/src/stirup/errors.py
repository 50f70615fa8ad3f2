"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Operands have incompatible Hilbert-space dimensions."""


class NonHermitianError(ValueError):
    """A Hamiltonian sample failed the Hermiticity check."""

    def __init__(self, t, residual):
        self.t = t
        self.residual = residual
        super().__init__(f"Hamiltonian is not Hermitian at t={t:.6g} ns "
                         f"(max |H - H^dagger| = {residual:.3e})")


class BoundaryError(ValueError):
    """Passage boundary data is inconsistent."""


class PulseDivergenceError(ArithmeticError):
    """The cot(gamma) terms of the inverse-engineered fields diverge."""

    def __init__(self, t, detail=""):
        self.t = t
        msg = f"control field diverges at t={t:.6g} ns"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class UnreachableCouplingError(ValueError):
    """Requested effective coupling exceeds the J1 branch maximum."""


class SimulationError(RuntimeError):
    """Failure inside a simulation, with the context that produced it."""


class OptimizationError(RuntimeError):
    """An objective evaluation failed; carries the offending coefficients."""

    def __init__(self, coefficients, cause):
        self.coefficients = tuple(float(c) for c in coefficients)
        super().__init__(f"objective evaluation failed at coefficients "
                         f"{self.coefficients}: {cause}")


class ConfigIssue:
    __slots__ = ("path", "value", "constraint")

    def __init__(self, path, value, constraint):
        self.path = path
        self.value = value
        self.constraint = constraint

    def __repr__(self):
        return f"ConfigIssue({self.path!r}, {self.value!r}, {self.constraint!r})"

    def __str__(self):
        return f"{self.path}: {self.value!r} ({self.constraint})"


class ConfigError(ValueError):
    """Configuration failed validation; ``issues`` lists every problem."""

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("invalid configuration:\n  " +
                         "\n  ".join(str(i) for i in self.issues))
