import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from echogate import PulseParams, PulseErrors, detuning_at, peak_detuning, pulse_center, pulse_index, rabi_at
from echogate.errors import PulseRangeError
from echogate.pulses import NO_ERRORS, effective_tau_gate, scalar_drive

# reference shape used throughout: the published two-pulse ansatz numbers
CZ = PulseParams(delta0=0.55, tau_r=0.564, tau_d=0.846, tau_gate=9.4)


def test_pulse_index_convention():
    assert pulse_index(0.0, CZ) == 1
    assert pulse_index(0.5 * CZ.tau_gate, CZ) == 2  # boundary belongs to 2
    assert pulse_index(0.9 * CZ.tau_gate, CZ) == 2
    assert pulse_index(CZ.tau_gate, CZ) == 2


def test_pulse_index_range_error():
    with pytest.raises(PulseRangeError):
        pulse_index(-0.1, CZ)
    with pytest.raises(PulseRangeError):
        pulse_index(CZ.tau_gate + 0.1, CZ)


def test_pulse_centers():
    assert pulse_center(1, CZ) == pytest.approx(2.35)
    assert pulse_center(2, CZ) == pytest.approx(7.05)


def test_rabi_peak_and_width():
    t1 = pulse_center(1, CZ)
    assert rabi_at(t1, CZ) == pytest.approx(1.0)
    assert rabi_at(t1 + CZ.tau_r, CZ) == pytest.approx(math.exp(-1.0))


def test_rabi_tail_at_gate_start():
    # direct arithmetic oracle: exp(-(2.35/0.564)^2)
    expected = math.exp(-((2.35 / 0.564) ** 2))
    assert rabi_at(0.0, CZ) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(2.9e-8, rel=0.02)


def test_detuning_zero_at_centre_and_boundaries():
    t1 = pulse_center(1, CZ)
    assert detuning_at(t1, CZ) == pytest.approx(0.0, abs=1e-15)
    for tau in (0.0, 0.5 * CZ.tau_gate, CZ.tau_gate):
        assert abs(detuning_at(tau, CZ)) <= 1e-12


def test_detuning_one_width_from_centre():
    # -0.55 * 0.846 * (e^-1 - a)/(1 - a), a = exp(-(9.4/3.384)^2)
    a = math.exp(-((9.4 / (4 * 0.846)) ** 2))
    expected = -0.55 * 0.846 * (math.exp(-1.0) - a) / (1.0 - a)
    got = detuning_at(pulse_center(1, CZ) + CZ.tau_d, CZ)
    assert got == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(-0.171, abs=5e-4)


@given(s=st.floats(0.0, 9.4 / 4))
def test_detuning_antisymmetry(s):
    t1 = pulse_center(1, CZ)
    lhs = detuning_at(t1 + s, CZ)
    rhs = detuning_at(t1 - s, CZ)
    assert abs(lhs + rhs) <= 1e-12


def test_echo_identity_between_windows():
    taus = np.linspace(0.0, 0.5 * CZ.tau_gate, 301, endpoint=False)
    om1 = rabi_at(taus, CZ)
    de1 = detuning_at(taus, CZ)
    om2 = rabi_at(taus + 0.5 * CZ.tau_gate, CZ)
    de2 = detuning_at(taus + 0.5 * CZ.tau_gate, CZ)
    assert np.max(np.abs(om1 - om2)) <= 1e-12
    assert np.max(np.abs(de1 - de2)) <= 1e-12


def test_rabi_boundary_bound():
    bound = math.exp(-((CZ.tau_gate / (4 * CZ.tau_r)) ** 2))
    for tau in (0.0, 0.5 * CZ.tau_gate, CZ.tau_gate):
        assert rabi_at(tau, CZ) <= bound * (1 + 1e-12)


def test_offset_shifts_uniformly():
    errors = PulseErrors(detuning_offset=0.0123)
    taus = np.linspace(0.0, CZ.tau_gate, 97)
    shifted = detuning_at(taus, CZ, errors)
    base = detuning_at(taus, CZ)
    # uniform up to one ulp of the addition
    assert np.max(np.abs(shifted - base - 0.0123)) <= 1e-16


def test_amplitude_scales():
    errors = PulseErrors(rabi_scale=1.03, detuning_scale=0.99)
    tau = 3.0
    assert rabi_at(tau, CZ, errors) == pytest.approx(1.03 * rabi_at(tau, CZ))
    assert detuning_at(tau, CZ, errors) == pytest.approx(
        0.99 * detuning_at(tau, CZ)
    )


def test_time_scale_stretches_schedule():
    errors = PulseErrors(time_scale=1.05)
    assert effective_tau_gate(CZ, errors) == pytest.approx(1.05 * CZ.tau_gate)
    # same waveform values replayed on a stretched axis
    for tau in (1.0, 3.7, 8.2):
        assert rabi_at(tau * 1.05, CZ, errors) == pytest.approx(
            rabi_at(tau, CZ), rel=1e-12
        )
        assert detuning_at(tau * 1.05, CZ, errors) == pytest.approx(
            detuning_at(tau, CZ), rel=1e-12
        )
    # stretched range is accepted, unstretched range check still applies
    rabi_at(CZ.tau_gate * 1.05, CZ, errors)
    with pytest.raises(PulseRangeError):
        rabi_at(CZ.tau_gate * 1.05 + 0.01, CZ, errors)


def test_scalar_drive_matches_vector_forms():
    errors = PulseErrors(rabi_scale=1.01, detuning_scale=0.98,
                         detuning_offset=0.005, time_scale=0.97)
    drive = scalar_drive(CZ, errors)
    for tau in np.linspace(0.0, CZ.tau_gate * 0.97, 23):
        om, de = drive(float(tau))
        assert om == pytest.approx(float(rabi_at(tau, CZ, errors)), rel=1e-12)
        assert de == pytest.approx(float(detuning_at(tau, CZ, errors)), rel=1e-12)


def test_error_scale_validation():
    with pytest.raises(ValueError):
        PulseErrors(rabi_scale=0.0)
    with pytest.raises(ValueError):
        PulseErrors(time_scale=-1.0)


def test_peak_detuning_matches_dense_scan():
    taus = np.linspace(0.0, CZ.tau_gate, 200001)
    dense = np.max(np.abs(detuning_at(taus, CZ)))
    assert peak_detuning(CZ) == pytest.approx(dense, rel=1e-9)
    assert peak_detuning(CZ) == pytest.approx(0.2, abs=0.01)
