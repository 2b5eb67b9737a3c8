"""Shared domain types, basis indexing, geometry presets, and unit handling.

Every atom is a three-level system {|0>, |1>, |r>} encoded as the integers
{0, 1, 2}.  Multi-atom product states are indexed radix-3 with atom 0 most
significant, so ``|ab>`` has flat index ``3*a + b`` for two atoms.  All
dynamics is dimensionless: energies in units of the peak Rabi frequency
``omega_max`` and time as ``tau = omega_max * t`` with ``omega_max`` in
rad/s.  Physical quantities are converted at the boundary only.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import UnsupportedSizeError

MAX_ATOMS = 4

__all__ = [
    "MAX_ATOMS",
    "Level",
    "BasisIndex",
    "basis_flat",
    "basis_from_flat",
    "all_basis_states",
    "computational_states",
    "PulseParams",
    "InteractionGraph",
    "geometry_preset",
    "ChannelKind",
    "DissipationChannel",
    "SystemConfig",
    "tau_from_time",
    "time_from_tau",
    "rate_over_omega",
    "offset_over_omega",
    "validate_pure_state",
    "validate_density_matrix",
]


class Level(enum.IntEnum):
    """Single-atom level: qubit states |0>, |1> and the Rydberg state |r>."""

    ZERO = 0
    ONE = 1
    RYDBERG = 2


_LEVEL_CHARS = "01r"


@dataclass(frozen=True)
class BasisIndex:
    """A product basis state, both as per-atom levels and as a flat index.

    Attributes
    ----------
    atoms : tuple of int
        Level of each atom, atom 0 first (most significant).
    flat : int
        Radix-3 index ``sum(level_i * 3**(n-1-i))``.
    """

    atoms: tuple[int, ...]
    flat: int

    @property
    def n(self) -> int:
        return len(self.atoms)

    @property
    def is_computational(self) -> bool:
        """True when no atom occupies the Rydberg level."""
        return all(a != Level.RYDBERG for a in self.atoms)

    @property
    def label(self) -> str:
        """Compact string label such as ``"11"`` or ``"1r"``."""
        return "".join(_LEVEL_CHARS[a] for a in self.atoms)


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_ATOMS:
        raise UnsupportedSizeError(
            f"supported atom counts are 1..{MAX_ATOMS}, got {n}"
        )


def basis_flat(levels) -> BasisIndex:
    """Build a :class:`BasisIndex` from per-atom levels.

    Parameters
    ----------
    levels : sequence of int
        Level of each atom, each in {0, 1, 2}; length 1..4.

    Returns
    -------
    BasisIndex
    """
    atoms = tuple(int(l) for l in levels)
    _check_n(len(atoms))
    if any(a not in (0, 1, 2) for a in atoms):
        raise ValueError(f"levels must be in {{0,1,2}}, got {atoms}")
    n = len(atoms)
    flat = 0
    for a in atoms:
        flat = 3 * flat + a
    return BasisIndex(atoms=atoms, flat=flat)


def basis_from_flat(flat: int, n: int) -> BasisIndex:
    """Inverse of :func:`basis_flat` for a given atom count."""
    _check_n(n)
    if not 0 <= flat < 3**n:
        raise ValueError(f"flat index {flat} out of range for n={n}")
    atoms = tuple((flat // 3 ** (n - 1 - i)) % 3 for i in range(n))
    return BasisIndex(atoms=atoms, flat=flat)


def all_basis_states(n: int) -> list[BasisIndex]:
    _check_n(n)
    return [basis_from_flat(s, n) for s in range(3**n)]


def computational_states(n: int) -> list[BasisIndex]:
    """The 2^n basis states with every atom in {|0>, |1>}, in flat order."""
    return [b for b in all_basis_states(n) if b.is_computational]


@dataclass(frozen=True)
class PulseParams:
    """Shape of the two echoed drive pulses plus the physical scale.

    The dimensionless shape is shared by both pulse windows: a Gaussian
    Rabi envelope of width ``tau_r`` and an odd detuning sweep of width
    ``tau_d``, each centred on its window.  ``omega_max`` carries the
    physical scale (rad/s); use 1.0 to stay fully dimensionless.

    Attributes
    ----------
    delta0 : float
        Detuning sweep rate at the window centre, units of omega_max.
    tau_r, tau_d : float
        Rabi / detuning envelope widths (dimensionless time).
    tau_gate : float
        Total dimensionless gate duration (two pulse windows).
    omega_max : float
        Peak Rabi frequency in rad/s (1.0 in dimensionless mode).
    n_pulses : int
        Fixed at 2; the echo structure is what cancels dynamical phases.
    """

    delta0: float
    tau_r: float
    tau_d: float
    tau_gate: float
    omega_max: float = 1.0
    n_pulses: int = 2

    def __post_init__(self):
        if self.tau_r <= 0 or self.tau_d <= 0:
            raise ValueError("pulse widths must be positive")
        if self.tau_gate <= 0:
            raise ValueError("tau_gate must be positive")
        if self.delta0 < 0:
            raise ValueError("delta0 must be non-negative")
        if self.omega_max <= 0:
            raise ValueError("omega_max must be positive")
        if self.n_pulses != 2:
            raise ValueError("the echoed scheme uses exactly 2 pulses")

    @property
    def boundary_constant(self) -> float:
        """The constant a = exp(-(tau_gate/4 tau_d)^2) zeroing the sweep at window edges."""
        return math.exp(-((self.tau_gate / (4.0 * self.tau_d)) ** 2))

    def gate_time_seconds(self) -> float:
        """Physical gate duration implied by ``omega_max``."""
        return time_from_tau(self.tau_gate, self.omega_max)


@dataclass(frozen=True)
class InteractionGraph:
    """Pairwise Rydberg interaction strengths in units of omega_max.

    ``v`` is a symmetric n-by-n matrix with zero diagonal; entry (i, j)
    shifts the energy of states with atoms i and j both in |r>.
    """

    n: int
    v: np.ndarray

    def __post_init__(self):
        _check_n(self.n)
        v = np.asarray(self.v, dtype=float)
        if v.shape != (self.n, self.n):
            raise ValueError(f"interaction matrix must be {self.n}x{self.n}")
        if not np.allclose(v, v.T):
            raise ValueError("interaction matrix must be symmetric")
        if np.any(np.diag(v) != 0.0):
            raise ValueError("interaction matrix must have zero diagonal")
        if np.any(v < 0.0):
            raise ValueError("interaction strengths must be non-negative")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "v", v)


_PRESET_SIZES = {"pair": 2, "triangle": 3, "tetrahedron": 4, "square": 4}


def geometry_preset(name: str, v0: float, exponent: float = 6.0) -> InteractionGraph:
    """Interaction graph for one of the standard atom arrangements.

    ``pair``, ``triangle`` and ``tetrahedron`` are equidistant, so every
    pair interacts at ``v0``.  ``square`` has nearest-neighbour strength
    ``v0`` and diagonal strength ``v0 / sqrt(2)**exponent`` from the
    power-law distance dependence (exponent 6 for van der Waals).

    Parameters
    ----------
    name : {'pair', 'triangle', 'tetrahedron', 'square'}
    v0 : float
        Nearest-neighbour interaction in units of omega_max.
    exponent : float
        Power-law exponent of the distance dependence (square only).

    Returns
    -------
    InteractionGraph
    """
    if name not in _PRESET_SIZES:
        raise ValueError(
            f"unknown geometry preset {name!r}; "
            f"choose from {sorted(_PRESET_SIZES)}"
        )
    if v0 < 0:
        raise ValueError("v0 must be non-negative")
    if exponent <= 0:
        raise ValueError("exponent must be positive")
    n = _PRESET_SIZES[name]
    v = np.full((n, n), float(v0))
    if name == "square":
        # ring order 0-1-2-3: sides are nearest neighbours, (0,2) and
        # (1,3) are the sqrt(2)-distant diagonals
        diag = v0 / math.sqrt(2.0) ** exponent
        v[0, 2] = v[2, 0] = diag
        v[1, 3] = v[3, 1] = diag
    np.fill_diagonal(v, 0.0)
    return InteractionGraph(n=n, v=v)


class ChannelKind(str, enum.Enum):
    """Dissipation channel type acting on one atom's Rydberg level."""

    DECAY_TO_0 = "decay_to_0"
    DECAY_TO_1 = "decay_to_1"
    DEPHASE_R = "dephase_r"


@dataclass(frozen=True)
class DissipationChannel:
    """One Lindblad jump channel in dimensionless units (rate / omega_max)."""

    kind: ChannelKind
    rate: float
    atom: int

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError("channel rate must be non-negative")
        if self.atom < 0:
            raise ValueError("atom index must be non-negative")


@dataclass(frozen=True)
class SystemConfig:
    """Full system description: geometry, dissipation channels, and pulse."""

    graph: InteractionGraph
    pulse: PulseParams
    channels: tuple[DissipationChannel, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        for ch in self.channels:
            if ch.atom >= self.graph.n:
                raise ValueError(
                    f"channel atom {ch.atom} out of range for n={self.graph.n}"
                )

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def dim(self) -> int:
        return 3**self.graph.n


# ---------------------------------------------------------------------------
# unit conversions (physical <-> dimensionless)

def tau_from_time(t: float, omega_max: float) -> float:
    """Dimensionless time tau = omega_max * t, omega_max in rad/s."""
    return omega_max * t


def time_from_tau(tau: float, omega_max: float) -> float:
    """Physical time in seconds for a dimensionless tau."""
    return tau / omega_max


def rate_over_omega(rate: float, omega_max: float) -> float:
    """Dimensionless rate for a physical rate in 1/s (e.g. 1/lifetime)."""
    return rate / omega_max


def offset_over_omega(freq_hz: float, omega_max: float) -> float:
    """Dimensionless detuning offset for an ordinary-frequency offset in Hz."""
    return 2.0 * math.pi * freq_hz / omega_max


# ---------------------------------------------------------------------------
# state validation helpers

def validate_pure_state(psi: np.ndarray, n: int, tol: float = 1e-9) -> np.ndarray:
    """Check shape and normalisation of a pure-state vector."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (3**n,):
        raise ValueError(f"state must have length {3**n}, got {psi.shape}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > tol:
        raise ValueError(f"state norm {norm} deviates from 1 by more than {tol}")
    return psi


def validate_density_matrix(
    rho: np.ndarray,
    n: int,
    trace_tol: float = 1e-8,
    herm_tol: float = 1e-10,
    pos_tol: float = 1e-8,
) -> np.ndarray:
    """Check shape, trace, Hermiticity, and positivity of a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    dim = 3**n
    if rho.shape != (dim, dim):
        raise ValueError(f"density matrix must be {dim}x{dim}, got {rho.shape}")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"trace {tr} deviates from 1 by more than {trace_tol}")
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        raise ValueError("density matrix is not Hermitian within tolerance")
    evals = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if evals.min() < -pos_tol:
        raise ValueError(f"minimum eigenvalue {evals.min()} below -{pos_tol}")
    return rho
