"""Run configuration: JSON in, internal units (ns, rad/ns) out."""
import json
import math
from dataclasses import asdict, dataclass, replace

from .errors import ConfigError, ConfigIssue

TWO_PI = 2.0 * math.pi
GAMMA_UNIT = TWO_PI * 5e-6
DEFAULT_OMEGA0 = TWO_PI * 1e-2      # 2 pi x 10 MHz

OMEGA_UNITS = {"rad_per_ns": 1.0, "2pi_kHz": TWO_PI * 1e-6, "2pi_MHz": TWO_PI * 1e-3,
               "2pi_GHz": TWO_PI}
RATE_UNITS = {"Gamma": GAMMA_UNIT, "2pi_kHz": TWO_PI * 1e-6, "2pi_MHz": TWO_PI * 1e-3,
              "rad_per_ns": 1.0}
DURATION_UNITS = ("ns", "us", "tau_min")
PROTOCOLS = ("stirup", "stirap", "rr")
SYSTEMS = ("bare", "qst2", "qst3", "bell", "w")
CIRCUIT_QUBITS = {"qst2": 2, "qst3": 3, "bell": 2, "w": 3}
SWEEP_PARAMETERS = ("T", "gamma_prime", "eta", "zeta", "omega0_T", "Q")

_KEYS = ("protocol", "q", "system", "N", "target", "duration", "duration_unit", "omega0",
         "omega0_unit", "gamma1", "gamma2", "gamma_c", "gamma_unit", "eta", "zeta",
         "n_steps", "out")


@dataclass(frozen=True)
class ScenarioConfig:
    """A single run. Times in ns, amplitudes and rates in rad/ns.

    ``omega0`` is None for circuit systems that should run at their minimum
    time; ``q`` is a float or the string "auto".
    """

    protocol: str = "stirup"
    q: object = 0.0
    system: str = "bare"
    N: int = 3
    target: tuple = None
    duration: float = None
    omega0: float = None
    gamma1: float = 0.0
    gamma2: float = 0.0
    gamma_c: float = 0.0
    eta: float = 0.0
    zeta: float = 0.0
    n_steps: int = 4000
    out: str = None

    @property
    def is_circuit(self):
        return self.system != "bare"

    def replace(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        d = asdict(self)
        d["target"] = None if self.target is None else list(self.target)
        d.update(duration_unit="ns", omega0_unit="rad_per_ns", gamma_unit="rad_per_ns")
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple
    base: ScenarioConfig


def _num(raw, key, issues, lo=None, hi=None, integer=False, default=None):
    if key not in raw:
        return default
    val = raw[key]
    ok = isinstance(val, (int, float)) and not isinstance(val, bool) and math.isfinite(val)
    if ok and integer:
        ok = float(val).is_integer()
    if not ok:
        kind = "an integer" if integer else "a finite number"
        issues.append(ConfigIssue(key, val, f"must be {kind}"))
        return default
    if lo is not None and val < lo:
        issues.append(ConfigIssue(key, val, f"must be >= {lo}"))
        return default
    if hi is not None and val > hi:
        issues.append(ConfigIssue(key, val, f"must be <= {hi}"))
        return default
    return int(val) if integer else float(val)


def _choice(raw, key, options, issues, default):
    val = raw.get(key, default)
    if val not in options:
        issues.append(ConfigIssue(key, val, f"must be one of {list(options)}"))
        return default
    return val


def validate_config(raw):
    """Parse a JSON string or mapping into a ScenarioConfig.

    Raises ConfigError listing every problem (path, value, constraint).
    """
    if isinstance(raw, (str, bytes)):
        try:
            raw = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError([ConfigIssue("$", None, f"malformed JSON: {exc}")]) from None
    if not isinstance(raw, dict):
        raise ConfigError([ConfigIssue("$", raw, "must be a JSON object")])
    issues = []
    for key in raw:
        if key not in _KEYS:
            issues.append(ConfigIssue(key, raw[key], "unknown key"))
    raw = {k: v for k, v in raw.items() if v is not None}

    protocol = _choice(raw, "protocol", PROTOCOLS, issues, "stirup")
    system = _choice(raw, "system", SYSTEMS, issues, "bare")
    q = raw.get("q", 0.0)
    if q != "auto":
        q = _num(raw, "q", issues, -1.0 / 16, 1.0, default=0.0)
    if system == "bare":
        N = _num(raw, "N", issues, 3, 64, integer=True, default=3)
    else:
        N = CIRCUIT_QUBITS[system] + 1
        if "N" in raw and raw["N"] != N:
            issues.append(ConfigIssue("N", raw["N"], f"scenario {system} has N = {N}"))

    target = None
    if "target" in raw and raw["target"] is not None:
        target = _target(raw["target"], N, system, issues)
    if system == "bare" and target is None:
        target = tuple([0.0] * (N - 2) + [1.0, 0.0])
    if protocol != "stirup" and system not in ("bare", "qst2"):
        issues.append(ConfigIssue("protocol", protocol,
                                  "baselines are only defined for 3-level transfers"))
    if protocol != "stirup" and system == "bare":
        if N != 3 or target is None or abs(abs(target[1]) - 1.0) > 1e-12:
            issues.append(ConfigIssue("protocol", protocol,
                                      "baselines need N = 3 and the |1> -> |2> target"))

    om_unit = _choice(raw, "omega0_unit", OMEGA_UNITS, issues, "rad_per_ns")
    omega0 = _num(raw, "omega0", issues, default=None)
    if omega0 is not None:
        if omega0 <= 0:
            issues.append(ConfigIssue("omega0", raw["omega0"], "must be > 0"))
            omega0 = None
        else:
            omega0 *= OMEGA_UNITS[om_unit]
    if omega0 is None and system == "bare":
        omega0 = DEFAULT_OMEGA0

    d_unit = _choice(raw, "duration_unit", DURATION_UNITS, issues, "ns")
    duration = _num(raw, "duration", issues, default=None)
    if duration is not None and duration <= 0:
        issues.append(ConfigIssue("duration", duration, "must be > 0"))
        duration = None
    elif duration is not None:
        if d_unit == "us":
            duration *= 1e3
        elif d_unit == "tau_min":
            if omega0 is None:
                issues.append(ConfigIssue("duration_unit", d_unit,
                                          "tau_min needs an explicit omega0"))
            else:
                from .pulses import minimum_time
                duration *= minimum_time(omega0)
    if duration is None and system == "bare" and "duration" not in raw:
        from .pulses import minimum_time
        duration = 2.0 * minimum_time(omega0)

    r_unit = _choice(raw, "gamma_unit", RATE_UNITS, issues, "Gamma")
    rate_default = 0.0 if system == "bare" else 1.0
    rates = {}
    for key in ("gamma1", "gamma2", "gamma_c"):
        v = _num(raw, key, issues, lo=0.0, default=rate_default)
        rates[key] = v * RATE_UNITS[r_unit if key in raw else "Gamma"]

    eta = _num(raw, "eta", issues, -0.5, 0.5, default=0.0)
    zeta = _num(raw, "zeta", issues, -0.5, 0.5, default=0.0)
    n_steps = _num(raw, "n_steps", issues, 10, 10 ** 7, integer=True, default=4000)
    out = raw.get("out")
    if out is not None and not isinstance(out, str):
        issues.append(ConfigIssue("out", out, "must be a string path"))
    if issues:
        raise ConfigError(issues)
    return ScenarioConfig(protocol, q, system, N, target, duration, omega0, rates["gamma1"],
                          rates["gamma2"], rates["gamma_c"], eta, zeta, n_steps, out)


def _target(val, N, system, issues):
    if system != "bare":
        issues.append(ConfigIssue("target", val, "circuit scenarios fix their own target"))
        return None
    if not isinstance(val, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in val):
        issues.append(ConfigIssue("target", val, "must be a list of real numbers"))
        return None
    if len(val) != N:
        issues.append(ConfigIssue("target", val, f"must have N = {N} entries"))
        return None
    if abs(val[-1]) > 1e-12:
        issues.append(ConfigIssue("target[-1]", val[-1], "intermediate level must be empty"))
        return None
    norm = math.fsum(v * v for v in val)
    if abs(norm - 1.0) > 1e-9:
        issues.append(ConfigIssue("target", val, f"must be normalized (|c|^2 = {norm:.12g})"))
        return None
    if sum(abs(v) for v in val[1:]) == 0:
        issues.append(ConfigIssue("target", val, "equals the initial state |1>"))
        return None
    return tuple(float(v) for v in val)


def validate_sweep(raw):
    """{"parameter": name, "values": [...], "base": {...config...}} -> SweepSpec.

    Values are de-duplicated and sorted ascending so the report does not
    depend on the order they were listed in.
    """
    if isinstance(raw, (str, bytes)):
        try:
            raw = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError([ConfigIssue("$", None, f"malformed JSON: {exc}")]) from None
    if not isinstance(raw, dict):
        raise ConfigError([ConfigIssue("$", raw, "must be a JSON object")])
    issues = []
    for key in raw:
        if key not in ("parameter", "values", "base"):
            issues.append(ConfigIssue(key, raw[key], "unknown key"))
    param = raw.get("parameter")
    if param not in SWEEP_PARAMETERS:
        issues.append(ConfigIssue("parameter", param, f"must be one of {list(SWEEP_PARAMETERS)}"))
    values = raw.get("values")
    if not isinstance(values, list) or not values or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)
            for v in values):
        issues.append(ConfigIssue("values", values, "must be a nonempty list of numbers"))
        values = []
    base = None
    try:
        base = validate_config(raw.get("base", {}))
    except ConfigError as exc:
        issues.extend(ConfigIssue(f"base.{i.path}", i.value, i.constraint) for i in exc.issues)
    if base is not None and param in ("T", "omega0_T") and any(v <= 0 for v in values):
        issues.append(ConfigIssue("values", values, f"{param} values must be > 0"))
    if param == "gamma_prime" and any(v < 0 for v in values):
        issues.append(ConfigIssue("values", values, "rates must be >= 0"))
    if param in ("eta", "zeta") and any(abs(v) > 0.5 for v in values):
        issues.append(ConfigIssue("values", values, f"{param} must lie in [-0.5, 0.5]"))
    if param == "omega0_T" and base is not None and base.omega0 is None:
        issues.append(ConfigIssue("base.omega0", None, "omega0_T sweeps need omega0"))
    if issues:
        raise ConfigError(issues)
    return SweepSpec(param, tuple(sorted({float(v) for v in values})), base)


def load_json(path):
    with open(path) as fh:
        return fh.read()
