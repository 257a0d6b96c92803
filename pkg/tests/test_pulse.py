import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lcpga.errors import PulseFileError
from lcpga.pulse import (
    LcpParams,
    PulseEnsemble,
    band_power_fraction,
    dump_pulses,
    field_value,
    lcp_value,
    load_pulses,
    parse_pulses,
    power_spectrum,
    sample_field,
    spectrum_of_samples,
    step_midpoints,
    zero_ensemble,
)

REF = LcpParams(e0=0.05, tau0=500.0, chirp=0.0, width=40.0, omega0=0.15)

params = st.tuples(
    st.floats(0.0, 0.2),
    st.floats(0.0, 1500.0),
    st.floats(-5e-7, 5e-7),
    st.floats(5.0, 80.0),
    st.floats(0.1, 0.2),
)
ensembles = st.lists(params, min_size=1, max_size=6).map(lambda rows: PulseEnsemble(np.array(rows)))
times = st.floats(0.0, 1536.0)


def test_lcp_at_center_is_amplitude():
    assert lcp_value(REF, 500.0) == pytest.approx(0.05, rel=1e-15)


def test_lcp_hand_values():
    p = LcpParams(0.1, 300.0, 2e-7, 30.0, 0.14)
    t = 350.0
    d = t - 300.0
    oracle = 0.1 * math.exp(-d * d / 1800.0) * math.cos(1e-7 * d * d + 0.14 * d)
    assert lcp_value(p, t) == pytest.approx(oracle, rel=1e-13)


@given(st.floats(-200, 200))
def test_envelope_bound_and_symmetry_without_chirp(d):
    assert abs(lcp_value(REF, 500.0 + d)) <= 0.05 * math.exp(-d * d / 3200.0) + 1e-18
    assert lcp_value(REF, 500.0 + d) == pytest.approx(lcp_value(REF, 500.0 - d), abs=1e-15)


@given(ensembles, times)
def test_field_is_sum_of_pulses(ens, t):
    total = sum(lcp_value(p, t) for p in ens)
    assert field_value(ens, t) == pytest.approx(total, abs=1e-14)


@given(ensembles, ensembles, times)
def test_concatenation_is_linear(a, b, t):
    both = PulseEnsemble(np.vstack([a.params, b.params]))
    assert field_value(both, t) == pytest.approx(field_value(a, t) + field_value(b, t), abs=1e-14)


@given(ensembles, st.floats(-300, 300), times)
def test_time_shift_covariance(ens, s, t):
    assert field_value(ens.shifted(s), t + s) == pytest.approx(field_value(ens, t), abs=1e-12)


def test_invalid_params():
    with pytest.raises(ValueError):
        LcpParams(0.1, 0.0, 0.0, 0.0, 0.15)
    with pytest.raises(ValueError):
        LcpParams(-0.1, 0.0, 0.0, 10.0, 0.15)
    with pytest.raises(ValueError):
        PulseEnsemble(np.zeros((0, 5)))


def test_midpoint_sampling(plan):
    t = step_midpoints(plan.dt_full, plan.n_steps)
    assert t[0] == pytest.approx(0.09375)
    assert t[-1] == pytest.approx(1536.0 - 0.09375)
    ens = PulseEnsemble([REF])
    eps = sample_field(ens, plan)
    assert eps.shape == (8192,)
    early = t < 200.0
    assert np.max(np.abs(eps[early])) < 1e-10 * REF.e0


def test_zero_ensemble_is_zero(plan):
    assert np.all(sample_field(zero_ensemble(3), plan) == 0.0)


def test_spectrum_peak_at_carrier(plan):
    omega, power = power_spectrum(PulseEnsemble([REF]), plan)
    d_omega = omega[1] - omega[0]
    assert abs(omega[np.argmax(power)] - 0.15) <= d_omega
    # |FT|^2 of a width-40 Gaussian envelope has sigma_omega = 1/(sqrt(2)*40),
    # so +-0.01 around the carrier holds erf(0.01*40) of the power
    assert band_power_fraction(omega, power, 0.14, 0.16) == pytest.approx(math.erf(0.4), abs=0.02)


@given(st.lists(st.floats(-1, 1), min_size=2, max_size=64), st.floats(0.01, 1.0))
def test_parseval(samples, dt):
    x = np.array(samples)
    omega, power = spectrum_of_samples(x, dt)
    d_omega = 2 * np.pi / (x.size * dt)
    assert np.sum(power) * d_omega == pytest.approx(np.sum(x**2) * dt, rel=1e-8, abs=1e-14)


def test_json_round_trip(tmp_path):
    ens = PulseEnsemble([REF, LcpParams(0.01, 120.0, -5e-7, 20.0, 0.16)])
    path = tmp_path / "p.json"
    dump_pulses(ens, path)
    assert load_pulses(path) == ens


@pytest.mark.parametrize(
    "text,fragment",
    [
        ('[{"e0": 0.1,', "line"),
        ("{}", "non-empty"),
        ("[]", "non-empty"),
        ('[{"e0": 0.1, "tau0": 1, "chirp": 0, "width": 10}]', "missing field 'omega0'"),
        ('[{"e0": 0.1, "tau0": 1, "chirp": 0, "width": 10, "omega0": 0.1, "phase": 0}]', "unknown"),
        ('[{"e0": "x", "tau0": 1, "chirp": 0, "width": 10, "omega0": 0.1}]', "'e0' is not a number"),
        ('[{"e0": 0.1, "tau0": 1, "chirp": 0, "width": -1, "omega0": 0.1}]', "pulse 0"),
        ('[{"e0": NaN, "tau0": 1, "chirp": 0, "width": 10, "omega0": 0.1}]', "not finite"),
    ],
)
def test_malformed_json(text, fragment):
    with pytest.raises(PulseFileError, match=fragment.replace("(", r"\(")):
        parse_pulses(text)


def test_second_pulse_error_is_indexed():
    good = {"e0": 0.1, "tau0": 1, "chirp": 0, "width": 10, "omega0": 0.1}
    bad = dict(good)
    del bad["tau0"]
    with pytest.raises(PulseFileError, match="pulse 1"):
        parse_pulses(json.dumps([good, bad]))
