"""Dense n-atom Hamiltonian assembly in the {|0>,|1>,|r>}^n product basis.

In units of omega_max the Hamiltonian is

    H(tau) = Delta(tau) * sum_i n_r^(i)
           + Omega(tau)/2 * sum_i (|r><1|_i + h.c.)
           + sum_{i<j} V_ij n_r^(i) n_r^(j)

i.e. a diagonal detuning/interaction part plus a single off-diagonal
coupling pattern shared by every snapshot.  The time-independent pieces
are cached per interaction graph so a snapshot costs one scaled copy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import BasisIndex, InteractionGraph, SystemConfig, basis_from_flat
from .pulses import NO_ERRORS, PulseErrors, rabi_at, detuning_at

__all__ = [
    "HamiltonianSnapshot",
    "GraphOperators",
    "graph_operators",
    "build_hamiltonian",
    "reachable_subspace",
]


@dataclass(frozen=True)
class GraphOperators:
    """Cached time-independent operator pieces for one interaction graph.

    Attributes
    ----------
    n_r_total : ndarray
        Diagonal of the total Rydberg number operator.
    n_r_atom : ndarray, shape (n, dim)
        Diagonal of each atom's Rydberg projector.
    v_diag : ndarray
        Diagonal of the pairwise interaction term.
    coupling : ndarray, shape (dim, dim)
        Symmetric 0/1 pattern of single-atom |1> <-> |r> flips.
    """

    n: int
    n_r_total: np.ndarray
    n_r_atom: np.ndarray
    v_diag: np.ndarray
    coupling: np.ndarray


_CACHE: dict[tuple, GraphOperators] = {}


def graph_operators(graph: InteractionGraph) -> GraphOperators:
    key = (graph.n, graph.v.tobytes())
    ops = _CACHE.get(key)
    if ops is not None:
        return ops
    n = graph.n
    dim = 3**n
    n_r_atom = np.zeros((n, dim))
    v_diag = np.zeros(dim)
    coupling = np.zeros((dim, dim))
    for s in range(dim):
        atoms = basis_from_flat(s, n).atoms
        for i in range(n):
            if atoms[i] == 2:
                n_r_atom[i, s] = 1.0
            for j in range(i + 1, n):
                if atoms[i] == 2 and atoms[j] == 2:
                    v_diag[s] += graph.v[i, j]
        for i in range(n):
            if atoms[i] == 1:
                flipped = s + 3 ** (n - 1 - i)  # level 1 -> 2 at atom i
                coupling[flipped, s] = 1.0
                coupling[s, flipped] = 1.0
    ops = GraphOperators(
        n=n,
        n_r_total=n_r_atom.sum(axis=0),
        n_r_atom=n_r_atom,
        v_diag=v_diag,
        coupling=coupling,
    )
    for arr in (ops.n_r_total, ops.n_r_atom, ops.v_diag, ops.coupling):
        arr.flags.writeable = False
    _CACHE[key] = ops
    return ops


@dataclass(frozen=True)
class HamiltonianSnapshot:
    """The Hamiltonian matrix at one instant of the schedule."""

    matrix: np.ndarray
    tau: float


def build_hamiltonian(
    tau: float, config: SystemConfig, errors: PulseErrors = NO_ERRORS
) -> HamiltonianSnapshot:
    """Assemble H(tau) for the configured system.

    Per-atom detuning offsets from ``errors.per_atom_offset`` add
    ``off_i * n_r^(i)`` on top of the common drive.
    """
    ops = graph_operators(config.graph)
    om = rabi_at(tau, config.pulse, errors)
    de = detuning_at(tau, config.pulse, errors)
    diag = de * ops.n_r_total + ops.v_diag
    if errors.per_atom_offset is not None:
        offs = np.asarray(errors.per_atom_offset, dtype=float)
        if offs.shape != (config.n,):
            raise ValueError(
                f"per_atom_offset must have length n={config.n}"
            )
        diag = diag + offs @ ops.n_r_atom
    h = (0.5 * om) * ops.coupling.astype(complex)
    np.fill_diagonal(h, h.diagonal() + diag)
    return HamiltonianSnapshot(matrix=h, tau=tau)


def reachable_subspace(input_state: BasisIndex, config: SystemConfig) -> list[BasisIndex]:
    """Closure of one computational basis state under single-atom 1<->r flips.

    Atoms in |0> never couple to the drive, so they stay frozen and the
    dynamics of ``input_state`` is confined to this block.  States are
    returned in increasing flat-index order.
    """
    if not input_state.is_computational:
        raise ValueError("input must be a computational basis state")
    n = config.n
    seen = {input_state.flat}
    frontier = [input_state.atoms]
    while frontier:
        atoms = frontier.pop()
        for i in range(n):
            if atoms[i] == 0:
                continue
            flipped = list(atoms)
            flipped[i] = 2 if atoms[i] == 1 else 1
            flat = 0
            for a in flipped:
                flat = 3 * flat + a
            if flat not in seen:
                seen.add(flat)
                frontier.append(tuple(flipped))
    return [basis_from_flat(s, n) for s in sorted(seen)]
