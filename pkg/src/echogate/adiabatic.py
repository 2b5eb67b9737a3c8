"""Instantaneous spectra, adiabatic phase bookkeeping, and Bloch paths.

For one computational input state the drive dynamics lives in a small
reachable block (see :func:`echogate.hamiltonian.reachable_subspace`).
This module diagonalises the block Hamiltonian on a dense time grid,
follows the branch adiabatically connected to the input by
maximal-overlap continuation, integrates the tracked eigenenergy into
per-pulse dynamical phases, and projects effectively two-level dynamics
onto the Bloch sphere.

The echo structure makes the tracked branch's energy antisymmetric
between the two pulse windows in the strong-blockade limit, so the two
dynamical phases cancel and only the geometric phase of the cyclic path
survives.
"""

from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .errors import EffectiveDimensionError, TrackingError
from .hamiltonian import graph_operators, reachable_subspace
from .model import BasisIndex, SystemConfig, basis_flat
from .propagator import DEFAULT_OPTIONS, IntegratorOptions, evolve_basis_block
from .pulses import NO_ERRORS, PulseErrors, rabi_at, detuning_at

__all__ = [
    "SpectrumTrace",
    "PhaseLedger",
    "BlochPath",
    "instantaneous_spectrum",
    "dynamical_phases",
    "bloch_trajectory",
    "DEFAULT_GRID_POINTS",
]

DEFAULT_GRID_POINTS = 4001  # per pulse window
_MIN_GRID_POINTS = 101
_OVERLAP_FLOOR = 0.5
_CONFIDENT_OVERLAP = 0.8


@dataclass
class SpectrumTrace:
    """Sorted eigenvalues of the block Hamiltonian along the schedule.

    Attributes
    ----------
    times : ndarray
        Time grid; odd length with the window boundary at the midpoint.
    energies : ndarray, shape (len(times), block_dim)
        Ascending eigenvalues at each grid time.
    tracked_index : ndarray of int
        Column of ``energies`` adiabatically connected to the input.
    subspace : list of BasisIndex
        Basis of the block, increasing flat order.
    """

    times: np.ndarray
    energies: np.ndarray
    tracked_index: np.ndarray
    subspace: list

    @property
    def tracked_energy(self) -> np.ndarray:
        return self.energies[np.arange(len(self.times)), self.tracked_index]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["tau"] + [f"E_{i}" for i in range(self.energies.shape[1])]
            )
            for t, row in zip(self.times, self.energies):
                writer.writerow([f"{t:.12g}"] + [f"{e:.12g}" for e in row])


@dataclass
class PhaseLedger:
    """Per-pulse dynamical phases and the residual geometric phase."""

    phi_d_1: float
    phi_d_2: float
    phi_total: float
    phi_geo: float


@dataclass
class BlochPath:
    """Bloch-sphere projection of effectively two-level dynamics."""

    times: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    solid_angle: float
    max_leakage: float

    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.theta.tolist(), self.phi.tolist()))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["tau", "theta", "phi"])
            for t, th, ph in zip(self.times, self.theta, self.phi):
                writer.writerow([f"{t:.12g}", f"{th:.12g}", f"{ph:.12g}"])


def _block_hamiltonian_pieces(input_state: BasisIndex, config: SystemConfig):
    subspace = reachable_subspace(input_state, config)
    idx = [b.flat for b in subspace]
    ops = graph_operators(config.graph)
    coupling = ops.coupling[np.ix_(idx, idx)]
    nr = ops.n_r_total[idx]
    vdiag = ops.v_diag[idx]
    return subspace, coupling, nr, vdiag


def instantaneous_spectrum(
    input_state: BasisIndex,
    config: SystemConfig,
    grid_points: int = DEFAULT_GRID_POINTS,
    errors: PulseErrors = NO_ERRORS,
) -> SpectrumTrace:
    """Eigenvalues of H(tau) on the input's reachable block, with branch
    tracking.

    Parameters
    ----------
    input_state : BasisIndex
        Computational basis state whose block is analysed.
    grid_points : int
        Samples per pulse window (>= 101); the full grid has
        ``2 * grid_points - 1`` times.

    Raises
    ------
    TrackingError
        If the tracked branch becomes ambiguous (successive eigenvector
        overlap below 0.5).
    """
    if grid_points < _MIN_GRID_POINTS:
        raise ValueError(f"grid_points must be >= {_MIN_GRID_POINTS}")
    subspace, coupling, nr, vdiag = _block_hamiltonian_pieces(input_state, config)
    dim = len(subspace)
    t_end = config.pulse.tau_gate * errors.time_scale
    times = np.linspace(0.0, t_end, 2 * grid_points - 1)
    energies = np.empty((len(times), dim))
    tracked = np.empty(len(times), dtype=int)

    pos0 = [i for i, b in enumerate(subspace) if b.flat == input_state.flat][0]
    v_ref = np.zeros(dim)
    v_ref[pos0] = 1.0

    om = np.atleast_1d(rabi_at(times, config.pulse, errors))
    de = np.atleast_1d(detuning_at(times, config.pulse, errors))
    for i, tau in enumerate(times):
        h = 0.5 * om[i] * coupling + np.diag(de[i] * nr + vdiag)
        evals, evecs = np.linalg.eigh(h)
        energies[i] = evals
        overlaps = np.abs(v_ref @ evecs)
        j = int(np.argmax(overlaps))
        if overlaps[j] < _OVERLAP_FLOOR:
            raise TrackingError(
                f"adiabatic branch ambiguous (best overlap {overlaps[j]:.3f})",
                tau=float(tau),
            )
        tracked[i] = j
        # near a degeneracy (e.g. both fields ~0 at the window edges) the
        # eigenbasis is an arbitrary mixture; freeze the reference there
        # and re-lock once the branch is unambiguous again
        if overlaps[j] >= _CONFIDENT_OVERLAP:
            v = evecs[:, j]
            if v_ref @ v < 0:
                v = -v
            v_ref = v
    return SpectrumTrace(
        times=times, energies=energies, tracked_index=tracked, subspace=subspace
    )


def _wrap(phi: float) -> float:
    out = math.fmod(phi + math.pi, 2.0 * math.pi)
    if out <= 0.0:
        out += 2.0 * math.pi
    return out - math.pi


def dynamical_phases(
    input_state: BasisIndex,
    config: SystemConfig,
    options: IntegratorOptions = DEFAULT_OPTIONS,
    grid_points: int = DEFAULT_GRID_POINTS,
    errors: PulseErrors = NO_ERRORS,
) -> PhaseLedger:
    """Per-pulse dynamical phases and the geometric remainder.

    ``phi_d_k`` is the trapezoid integral of the tracked eigenenergy over
    pulse k; ``phi_total`` is the final phase arg <input|psi> from a full
    closed-system propagation; ``phi_geo = phi_total - (phi_d_1 + phi_d_2)``
    wrapped to (-pi, pi].
    """
    trace = instantaneous_spectrum(input_state, config, grid_points, errors)
    e = trace.tracked_energy
    t = trace.times
    mid = grid_points - 1  # window boundary index
    phi_d_1 = float(np.trapezoid(e[: mid + 1], t[: mid + 1]))
    phi_d_2 = float(np.trapezoid(e[mid:], t[mid:]))

    subspace, psi_f, _, _ = evolve_basis_block(input_state, config, errors, options)
    pos = [i for i, b in enumerate(subspace) if b.flat == input_state.flat][0]
    phi_total = float(np.angle(psi_f[pos]))
    phi_geo = _wrap(phi_total - (phi_d_1 + phi_d_2))
    return PhaseLedger(
        phi_d_1=phi_d_1, phi_d_2=phi_d_2, phi_total=phi_total, phi_geo=phi_geo
    )


def _solid_angle(vecs: np.ndarray) -> float:
    """Signed solid angle of a closed path via a spherical triangle fan.

    Uses the Van Oosterom-Strackee formula from a reference point chosen
    away from the path, so paths through the poles stay well-conditioned.
    """
    closed = np.vstack([vecs, vecs[:1]])
    candidates = [
        np.array([1.0, 1.0, 1.0]) / math.sqrt(3.0),
        np.array([1.0, -2.0, 0.5]) / np.linalg.norm([1.0, -2.0, 0.5]),
        np.array([-0.3, 1.0, -1.7]) / np.linalg.norm([-0.3, 1.0, -1.7]),
    ]
    ref = None
    for cand in candidates:
        if np.min(np.linalg.norm(closed - cand, axis=1)) > 1e-3:
            ref = cand
            break
    if ref is None:
        ref = candidates[0]
    total = 0.0
    for p1, p2 in zip(closed[:-1], closed[1:]):
        num = float(np.dot(ref, np.cross(p1, p2)))
        den = 1.0 + float(ref @ p1) + float(p1 @ p2) + float(p2 @ ref)
        total += 2.0 * math.atan2(num, den)
    return total


def bloch_trajectory(
    input_state: BasisIndex,
    config: SystemConfig,
    options: IntegratorOptions = DEFAULT_OPTIONS,
    errors: PulseErrors = NO_ERRORS,
) -> BlochPath:
    """Project the input's dynamics onto its effective two-level frame.

    The frame pairs the input with the symmetric single-flip state over
    its drive-active atoms, e.g. {|11>, (|1r>+|r1>)/sqrt(2)}.  Population
    outside the frame must stay below 5% throughout; otherwise an
    :class:`EffectiveDimensionError` reports the worst leakage.
    """
    n = config.n
    active = [i for i, a in enumerate(input_state.atoms) if a == 1]
    if not active:
        raise EffectiveDimensionError(
            f"input {input_state.label!r} is dark (one-dimensional dynamics)",
            max_leakage=0.0,
        )
    if options.record_every == 0:
        options = dataclasses.replace(options, record_every=1)
    subspace, _, times, states = evolve_basis_block(
        input_state, config, errors, options
    )
    pos = {b.flat: i for i, b in enumerate(subspace)}
    pos_a = pos[input_state.flat]
    flip_positions = []
    for i in active:
        atoms = list(input_state.atoms)
        atoms[i] = 2
        flip_positions.append(pos[basis_flat(atoms).flat])
    m = len(active)

    c_a = states[:, pos_a]
    c_b = states[:, flip_positions].sum(axis=1) / math.sqrt(m)
    q = np.abs(c_a) ** 2 + np.abs(c_b) ** 2
    max_leakage = float(np.max(1.0 - q))
    if max_leakage > 0.05:
        raise EffectiveDimensionError(
            f"dynamics of {input_state.label!r} is not two-level",
            max_leakage=max_leakage,
        )
    theta = 2.0 * np.arctan2(np.abs(c_b), np.abs(c_a))
    rel = np.where(
        (np.abs(c_a) > 1e-14) & (np.abs(c_b) > 1e-14),
        np.angle(c_b) - np.angle(c_a),
        0.0,
    )
    phi = np.mod(rel + np.pi, 2.0 * np.pi) - np.pi
    x = np.sin(theta) * np.cos(phi)
    y = np.sin(theta) * np.sin(phi)
    z = np.cos(theta)
    solid = _solid_angle(np.column_stack([x, y, z]))
    return BlochPath(
        times=times,
        theta=theta,
        phi=phi,
        solid_angle=solid,
        max_leakage=max_leakage,
    )
