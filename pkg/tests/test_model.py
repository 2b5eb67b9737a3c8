import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from echogate import (
    BasisIndex,
    InteractionGraph,
    PulseParams,
    UnsupportedSizeError,
    all_basis_states,
    basis_flat,
    basis_from_flat,
    computational_states,
    geometry_preset,
    offset_over_omega,
    rate_over_omega,
    tau_from_time,
    time_from_tau,
)
from echogate.model import validate_density_matrix, validate_pure_state


def test_basis_flat_examples():
    assert basis_flat([0, 0]).flat == 0
    assert basis_flat([1, 1]).flat == 4  # 1*3 + 1
    assert basis_flat([2, 2]).flat == 8  # 2*3 + 2
    assert basis_flat([1, 0, 1]).flat == 10


def test_basis_flat_round_trip_exhaustive():
    for n in range(1, 5):
        seen = set()
        for flat in range(3**n):
            b = basis_from_flat(flat, n)
            assert basis_flat(b.atoms) == b
            seen.add(b.flat)
        assert seen == set(range(3**n))


def test_basis_flat_rejects_bad_sizes():
    with pytest.raises(UnsupportedSizeError):
        basis_flat([])
    with pytest.raises(UnsupportedSizeError):
        basis_flat([1] * 5)
    with pytest.raises(ValueError):
        basis_flat([3, 0])


def test_basis_labels_and_computational_predicate():
    b = basis_flat([1, 2, 0])
    assert b.label == "1r0"
    assert not b.is_computational
    assert basis_flat([1, 0, 1]).is_computational
    assert len(computational_states(3)) == 8
    assert len(all_basis_states(4)) == 81


def test_geometry_triangle_uniform():
    g = geometry_preset("triangle", 100.0, 6.0)
    off = g.v[~np.eye(3, dtype=bool)]
    assert np.all(off == 100.0)


def test_geometry_pair_zero():
    g = geometry_preset("pair", 0.0)
    assert np.all(g.v == 0.0)


def test_geometry_square_diagonals():
    g = geometry_preset("square", 8.0, 6.0)
    # ring neighbours at 8, sqrt(2)-diagonals at 8/2^3 = 1
    assert g.v[0, 1] == 8.0 and g.v[1, 2] == 8.0 and g.v[2, 3] == 8.0
    assert g.v[0, 2] == pytest.approx(1.0)
    assert g.v[1, 3] == pytest.approx(1.0)


@pytest.mark.parametrize("name", ["pair", "triangle", "tetrahedron", "square"])
def test_geometry_symmetric_zero_diagonal(name):
    g = geometry_preset(name, 5.0)
    assert np.allclose(g.v, g.v.T)
    assert np.all(np.diag(g.v) == 0.0)


def test_geometry_unknown_name():
    with pytest.raises(ValueError):
        geometry_preset("hexagon", 1.0)


def test_graph_validation():
    with pytest.raises(ValueError):
        InteractionGraph(n=2, v=np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(ValueError):
        InteractionGraph(n=2, v=np.array([[1.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(ValueError):
        InteractionGraph(n=2, v=-np.ones((2, 2)) + np.eye(2))


def test_graph_matrix_is_read_only():
    g = geometry_preset("pair", 3.0)
    with pytest.raises(ValueError):
        g.v[0, 1] = 5.0


@given(
    t=st.floats(1e-12, 1e3),
    omega=st.floats(1e3, 1e12),
)
def test_unit_round_trip(t, omega):
    tau = tau_from_time(t, omega)
    back = time_from_tau(tau, omega)
    assert abs(back - t) <= 1e-12 * t


def test_rate_and_offset_conversions():
    omega = 2 * math.pi * 23.5e6
    gamma = rate_over_omega(1.0 / 540e-6, omega)
    assert gamma == pytest.approx(1.254e-5, rel=1e-3)
    # a 100 kHz ordinary-frequency offset
    off = offset_over_omega(100e3, omega)
    assert off == pytest.approx(100e3 / 23.5e6, rel=1e-12)


def test_pulse_params_validation():
    with pytest.raises(ValueError):
        PulseParams(delta0=0.5, tau_r=-1.0, tau_d=1.0, tau_gate=10.0)
    with pytest.raises(ValueError):
        PulseParams(delta0=-0.1, tau_r=1.0, tau_d=1.0, tau_gate=10.0)
    with pytest.raises(ValueError):
        PulseParams(delta0=0.5, tau_r=1.0, tau_d=1.0, tau_gate=0.0)
    with pytest.raises(ValueError):
        PulseParams(delta0=0.5, tau_r=1.0, tau_d=1.0, tau_gate=10.0, n_pulses=3)


def test_pulse_boundary_constant():
    p = PulseParams(delta0=0.55, tau_r=0.564, tau_d=0.846, tau_gate=9.4)
    assert p.boundary_constant == pytest.approx(math.exp(-((9.4 / 3.384) ** 2)))
    assert p.boundary_constant == pytest.approx(4.45e-4, rel=5e-3)


def test_gate_time_seconds():
    p = PulseParams(
        delta0=0.4, tau_r=3.3, tau_d=4.6, tau_gate=59.0619,
        omega_max=2 * math.pi * 23.5e6,
    )
    assert p.gate_time_seconds() == pytest.approx(0.4e-6, rel=1e-4)


def test_state_validators():
    psi = np.zeros(9, complex)
    psi[0] = 1.0
    validate_pure_state(psi, 2)
    with pytest.raises(ValueError):
        validate_pure_state(2 * psi, 2)
    rho = np.outer(psi, psi.conj())
    validate_density_matrix(rho, 2)
    with pytest.raises(ValueError):
        validate_density_matrix(rho + 0.1, 2)
