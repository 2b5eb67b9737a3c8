"""Ideal C^kZ targets, the symmetric benchmark input, and fidelity audits.

The ideal gate is diagonal over the computational subspace: +1 on
|0...0> and -1 on every other computational state, identity on states
containing |r>.  Fidelity is evaluated against the symmetric input
|Psi> = 2^(-n/2) sum |ij...>, which is sensitive to both leakage and
relative phase errors.  Two numbers are always reported:

* ``fidelity_overlap`` -- <Psi| U^+ rho_f U |Psi>, the conventional
  pure-target fidelity;
* ``fidelity_eq3``     -- its square, the literal squared-overlap form.

Acceptance-style comparisons use the unsquared overlap unless stated.
"""

from __future__ import annotations

import csv
import io
import math
import time as _time
from dataclasses import dataclass, field

import numpy as np

from .errors import UnsupportedSizeError
from .model import (
    SystemConfig,
    all_basis_states,
    basis_from_flat,
    computational_states,
)
from .propagator import (
    DEFAULT_OPTIONS,
    IntegratorOptions,
    evolve_basis_block,
    evolve_state,
)
from .pulses import NO_ERRORS, PulseErrors

__all__ = [
    "IdealGate",
    "GateReport",
    "ideal_ckz",
    "symmetric_input",
    "fidelity",
    "phase_audit",
]


@dataclass(frozen=True)
class IdealGate:
    """Diagonal C^kZ unitary embedded in the full 3^n space."""

    n: int
    diag: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.diag)


def ideal_ckz(n: int) -> IdealGate:
    """The target C^(n-1)Z gate for 2 <= n <= 4.

    Every computational state except |0...0> picks up -1; states with a
    Rydberg excitation are left alone (identity embedding).
    """
    if not 2 <= n <= 4:
        raise UnsupportedSizeError(f"C^kZ targets support 2..4 atoms, got {n}")
    diag = np.ones(3**n)
    for b in computational_states(n):
        if b.flat != 0:
            diag[b.flat] = -1.0
    diag.flags.writeable = False
    return IdealGate(n=n, diag=diag)


def symmetric_input(n: int) -> np.ndarray:
    """Equal superposition of all 2^n computational basis states."""
    if not 1 <= n <= 4:
        raise UnsupportedSizeError(f"supported atom counts are 1..4, got {n}")
    psi = np.zeros(3**n, dtype=complex)
    amp = 2.0 ** (-n / 2.0)
    for b in computational_states(n):
        psi[b.flat] = amp
    return psi


def _compensated_overlap(rho: np.ndarray, target: np.ndarray, n: int) -> float:
    """Best overlap over a common single-qubit Z rotation angle.

    The rotation multiplies each basis state by exp(i theta m) with m the
    number of atoms in |1>; the optimum is found on a dense angle grid
    with a parabolic refinement.
    """
    ones_count = np.array(
        [sum(1 for a in b.atoms if a == 1) for b in all_basis_states(n)]
    )
    def overlap(theta):
        phase = np.exp(1j * theta * ones_count)
        t = phase * target
        return float(np.real(np.vdot(t, rho @ t)))

    thetas = np.linspace(-math.pi, math.pi, 721)
    vals = np.array([overlap(t) for t in thetas])
    i = int(np.argmax(vals))
    lo, hi = thetas[max(i - 1, 0)], thetas[min(i + 1, len(thetas) - 1)]
    fine = np.linspace(lo, hi, 101)
    return max(overlap(t) for t in fine)


def fidelity(
    rho_f: np.ndarray, n: int, phase_compensation: bool = False
) -> tuple[float, float]:
    """Gate fidelity of a final density matrix against the ideal C^kZ.

    Parameters
    ----------
    rho_f : ndarray
        Final density matrix (3^n x 3^n).
    n : int
        Atom count, 2..4.
    phase_compensation : bool
        Maximise the overlap over a common per-qubit Z rotation before
        comparing (off by default; the echoed scheme needs none).

    Returns
    -------
    (fidelity_eq3, fidelity_overlap)
    """
    gate = ideal_ckz(n)
    target = gate.diag * symmetric_input(n)
    rho_f = np.asarray(rho_f, dtype=complex)
    if phase_compensation:
        overlap = _compensated_overlap(rho_f, target, n)
    else:
        overlap = float(np.real(np.vdot(target, rho_f @ target)))
    overlap = min(max(overlap, 0.0), 1.0)
    return overlap**2, overlap


@dataclass
class GateReport:
    """Fidelity metrics plus per-basis-state phase and leakage audits."""

    fidelity_eq3: float
    fidelity_overlap: float
    phases: dict[str, float] = field(default_factory=dict)
    leakage: dict[str, float] = field(default_factory=dict)
    wall_time: float = 0.0

    def to_text(self) -> str:
        """Flat ``key = value`` block."""
        lines = [
            f"fidelity_overlap = {self.fidelity_overlap:.12g}",
            f"fidelity_eq3 = {self.fidelity_eq3:.12g}",
        ]
        for label in sorted(self.phases):
            lines.append(f"phase_{label} = {self.phases[label]:.12g}")
        for label in sorted(self.leakage):
            lines.append(f"leakage_{label} = {self.leakage[label]:.12g}")
        lines.append(f"wall_time_s = {self.wall_time:.6g}")
        return "\n".join(lines) + "\n"

    def csv_header(self) -> list[str]:
        return (
            ["fidelity_eq3", "fidelity_overlap"]
            + [f"phase_{lb}" for lb in sorted(self.phases)]
            + [f"leakage_{lb}" for lb in sorted(self.leakage)]
            + ["wall_time_s"]
        )

    def to_csv_row(self) -> list[str]:
        vals = (
            [self.fidelity_eq3, self.fidelity_overlap]
            + [self.phases[lb] for lb in sorted(self.phases)]
            + [self.leakage[lb] for lb in sorted(self.leakage)]
            + [self.wall_time]
        )
        return [f"{v:.12g}" for v in vals]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(self.csv_header())
        writer.writerow(self.to_csv_row())
        return buf.getvalue()


def _wrap_phase(phi: float) -> float:
    """Map to (-pi, pi]."""
    out = math.fmod(phi + math.pi, 2.0 * math.pi)
    if out <= 0.0:
        out += 2.0 * math.pi
    return out - math.pi


def phase_audit(
    config: SystemConfig,
    errors: PulseErrors = NO_ERRORS,
    options: IntegratorOptions = DEFAULT_OPTIONS,
    phase_compensation: bool = False,
) -> GateReport:
    """Closed-system audit of every computational basis state.

    Each basis state is propagated separately (on its reachable block);
    the report collects its final phase arg<b|psi> in (-pi, pi], relative
    to the dark |0...0> state's global phase, and its leakage
    1 - |<b|psi>|^2.  The fidelity metrics come from one additional run
    of the symmetric input through the full space.
    """
    t0 = _time.perf_counter()
    n = config.n
    phases: dict[str, float] = {}
    leakage: dict[str, float] = {}
    amps: dict[str, complex] = {}
    for b in computational_states(n):
        subspace, psi_f, _, _ = evolve_basis_block(b, config, errors, options)
        pos = [i for i, s in enumerate(subspace) if s.flat == b.flat][0]
        amp = psi_f[pos]
        amps[b.label] = amp
        leakage[b.label] = min(max(1.0 - abs(amp) ** 2, 0.0), 1.0)
    ref = np.angle(amps["0" * n]) if ("0" * n) in amps else 0.0
    for label, amp in amps.items():
        phases[label] = _wrap_phase(float(np.angle(amp) - ref))

    psi_f, _ = evolve_state(symmetric_input(n), config, errors, options)
    rho_f = np.outer(psi_f, psi_f.conj())
    eq3, overlap = fidelity(rho_f, n, phase_compensation)
    return GateReport(
        fidelity_eq3=eq3,
        fidelity_overlap=overlap,
        phases=phases,
        leakage=leakage,
        wall_time=_time.perf_counter() - t0,
    )
