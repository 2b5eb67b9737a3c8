import itertools

import numpy as np
import pytest

from echogate import (
    PulseParams,
    PulseErrors,
    SystemConfig,
    basis_flat,
    build_hamiltonian,
    geometry_preset,
    rabi_at,
    detuning_at,
    reachable_subspace,
)
from echogate.pulses import pulse_center

CZ_PULSE = PulseParams(delta0=0.55, tau_r=0.564, tau_d=0.846, tau_gate=9.4)


def config_for(n, v0=127.0, geometry=None):
    names = {1: "pair", 2: "pair", 3: "triangle", 4: "tetrahedron"}
    g = geometry_preset(geometry or names[n], v0)
    if n == 1:
        import echogate

        g = echogate.InteractionGraph(n=1, v=np.zeros((1, 1)))
    return SystemConfig(graph=g, pulse=CZ_PULSE)


def test_single_atom_at_pulse_peak():
    # at the window centre Omega = 1 and Delta = 0
    cfg = config_for(1)
    snap = build_hamiltonian(pulse_center(1, CZ_PULSE), cfg)
    h = snap.matrix
    assert h[2, 1] == pytest.approx(0.5)
    assert h[1, 2] == pytest.approx(0.5)
    h_zeroed = h.copy()
    h_zeroed[2, 1] = h_zeroed[1, 2] = 0.0
    assert np.max(np.abs(h_zeroed)) <= 1e-15


def test_two_atom_rr_diagonal():
    cfg = config_for(2, v0=127.0)
    tau = 1.7
    snap = build_hamiltonian(tau, cfg)
    de = detuning_at(tau, CZ_PULSE)
    rr = basis_flat([2, 2]).flat
    assert snap.matrix[rr, rr] == pytest.approx(2 * de + 127.0)


def test_triangle_all_rydberg_interaction():
    cfg = config_for(3, v0=100.0)
    snap = build_hamiltonian(0.5, cfg)
    rrr = basis_flat([2, 2, 2]).flat
    de = detuning_at(0.5, CZ_PULSE)
    assert snap.matrix[rrr, rrr] == pytest.approx(3 * de + 3 * 100.0)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_hermiticity(n):
    cfg = config_for(n)
    for tau in np.linspace(0.0, CZ_PULSE.tau_gate, 17):
        h = build_hamiltonian(tau, cfg).matrix
        assert np.max(np.abs(h - h.conj().T)) <= 1e-12


def test_only_one_to_rydberg_coupling():
    cfg = config_for(2)
    h = build_hamiltonian(2.0, cfg).matrix
    for s1 in range(9):
        for s2 in range(9):
            if s1 == s2:
                continue
            a1 = basis_flat([s1 // 3, s1 % 3]).atoms
            a2 = basis_flat([s2 // 3, s2 % 3]).atoms
            diffs = [(x, y) for x, y in zip(a1, a2) if x != y]
            is_flip = len(diffs) == 1 and set(diffs[0]) == {1, 2}
            if not is_flip:
                assert h[s1, s2] == 0.0


@pytest.mark.parametrize("n", [2, 3])
def test_frozen_zero_blocks_never_mix(n):
    cfg = config_for(n)
    h = build_hamiltonian(3.1, cfg).matrix
    dim = 3**n
    def zero_pattern(flat):
        atoms = [(flat // 3 ** (n - 1 - i)) % 3 for i in range(n)]
        return tuple(a == 0 for a in atoms)
    for s1, s2 in itertools.product(range(dim), repeat=2):
        if zero_pattern(s1) != zero_pattern(s2):
            assert h[s1, s2] == 0.0


def test_non_interacting_limit_is_kron_sum():
    tau = 2.6
    cfg1 = config_for(1)
    h1 = build_hamiltonian(tau, cfg1).matrix
    cfg2 = config_for(2, v0=0.0)
    h2 = build_hamiltonian(tau, cfg2).matrix
    expected = np.kron(h1, np.eye(3)) + np.kron(np.eye(3), h1)
    assert np.max(np.abs(h2 - expected)) <= 1e-12


def test_per_atom_offset_enters_diagonal():
    cfg = config_for(2, v0=0.0)
    errors = PulseErrors(per_atom_offset=(0.01, -0.02))
    tau = 2.0
    h = build_hamiltonian(tau, cfg, errors).matrix
    h0 = build_hamiltonian(tau, cfg).matrix
    diff = np.real(np.diag(h - h0))
    r0 = basis_flat([2, 0]).flat
    zero_r = basis_flat([0, 2]).flat
    rr = basis_flat([2, 2]).flat
    assert diff[r0] == pytest.approx(0.01)
    assert diff[zero_r] == pytest.approx(-0.02)
    assert diff[rr] == pytest.approx(-0.01)


def test_reachable_subspace_cases():
    cfg = config_for(2)
    assert [b.label for b in reachable_subspace(basis_flat([0, 0]), cfg)] == ["00"]
    assert [b.label for b in reachable_subspace(basis_flat([1, 0]), cfg)] == [
        "10",
        "r0",
    ]
    labels = [b.label for b in reachable_subspace(basis_flat([1, 1]), cfg)]
    assert labels == ["11", "1r", "r1", "rr"]
    cfg3 = config_for(3)
    assert len(reachable_subspace(basis_flat([1, 1, 1]), cfg3)) == 8


def test_reachable_subspace_rejects_rydberg_input():
    cfg = config_for(2)
    with pytest.raises(ValueError):
        reachable_subspace(basis_flat([1, 2]), cfg)
