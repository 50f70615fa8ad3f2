import json
import math

import pytest
from hypothesis import given, strategies as st

from stirup import config as cf
from stirup.errors import ConfigError
from stirup.pulses import minimum_time


def test_minimal_config_defaults_and_round_trip():
    c = cf.validate_config("{}")
    assert c.protocol == "stirup" and c.system == "bare" and c.N == 3
    assert c.target == (0.0, 1.0, 0.0)
    assert c.omega0 == cf.DEFAULT_OMEGA0
    assert math.isclose(c.duration, 2 * minimum_time(c.omega0))
    assert cf.validate_config(c.to_json()) == c


@given(st.sampled_from(["bare", "qst2", "qst3", "bell", "w"]), st.floats(0, 10),
       st.floats(-0.5, 0.5), st.sampled_from([0.0, 0.01, "auto"]))
def test_round_trip_property(system, rate, eta, q):
    raw = {"system": system, "gamma1": rate, "eta": eta}
    if system == "bare":
        raw["q"] = q
    c = cf.validate_config(raw)
    assert cf.validate_config(c.to_json()) == c


def test_negative_rate_single_error():
    with pytest.raises(ConfigError) as info:
        cf.validate_config({"gamma1": -1})
    assert len(info.value.issues) == 1
    issue = info.value.issues[0]
    assert issue.path == "gamma1" and issue.value == -1


def test_unit_conversion():
    c = cf.validate_config({"gamma1": 5, "gamma_unit": "2pi_kHz"})
    assert math.isclose(c.gamma1, 2 * math.pi * 5e-6, rel_tol=1e-15)
    c = cf.validate_config({"gamma2": 2})
    assert math.isclose(c.gamma2, 2 * cf.GAMMA_UNIT)
    c = cf.validate_config({"omega0": 10, "omega0_unit": "2pi_MHz", "duration": 0.1,
                            "duration_unit": "us"})
    assert math.isclose(c.omega0, 2 * math.pi * 1e-2) and math.isclose(c.duration, 100.0)
    c = cf.validate_config({"omega0": 1.0, "duration": 3, "duration_unit": "tau_min"})
    assert math.isclose(c.duration, 3 * minimum_time(1.0))


def test_all_issues_collected():
    raw = {"foo": 1, "eta": 0.9, "protocol": "grape", "N": 2, "duration": -4}
    with pytest.raises(ConfigError) as info:
        cf.validate_config(raw)
    paths = {i.path for i in info.value.issues}
    assert {"foo", "eta", "protocol", "N", "duration"} <= paths


def test_malformed_json():
    with pytest.raises(ConfigError):
        cf.validate_config("{not json")
    with pytest.raises(ConfigError):
        cf.validate_config("[1, 2]")


def test_target_validation():
    assert cf.validate_config({"N": 4, "target": [0.6, 0, 0.8, 0]}).target == (0.6, 0, 0.8, 0)
    for bad in ([0.6, 0.8], [0, 0.6, 0.8], [0.5, 0.5, 0], [1, 0, 0], ["a", 1, 0]):
        with pytest.raises(ConfigError):
            cf.validate_config({"target": bad})
    with pytest.raises(ConfigError):
        cf.validate_config({"system": "bell", "target": [1, 0, 0]})


def test_baselines_restricted():
    assert cf.validate_config({"protocol": "stirap"}).protocol == "stirap"
    with pytest.raises(ConfigError):
        cf.validate_config({"protocol": "rr", "N": 4})
    with pytest.raises(ConfigError):
        cf.validate_config({"protocol": "rr", "system": "w"})


def test_circuit_defaults():
    c = cf.validate_config({"system": "qst3"})
    assert c.N == 4 and c.target is None and c.duration is None and c.omega0 is None
    assert c.gamma1 == c.gamma2 == c.gamma_c == cf.GAMMA_UNIT


def test_sweep_validation():
    s = cf.validate_sweep(json.dumps({"parameter": "eta", "values": [0.05, -0.05, 0, 0.05]}))
    assert s.values == (-0.05, 0.0, 0.05)
    for bad in ({"parameter": "x", "values": [1]}, {"parameter": "T", "values": []},
                {"parameter": "T", "values": [-1.0]}, {"parameter": "eta", "values": [0.7]},
                {"parameter": "eta", "values": [0.1], "base": {"eta": 2}},
                {"parameter": "eta", "values": [0.1], "extra": 1}):
        with pytest.raises(ConfigError):
            cf.validate_sweep(bad)
