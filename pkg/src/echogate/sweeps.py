"""Batch simulation over parameter grids with CSV output.

Grid points are independent: a process pool evaluates them concurrently
and results are sorted by axis values before output, so sequential and
parallel runs emit identical data (wall-clock columns aside).  Per-point
failures are recorded in the row (``error`` column) and the sweep
continues.

Axis identifiers double as CSV column names:

* ``v0_over_omega``   interaction strength in units of omega_max
* ``rabi_scale``      multiplicative Rabi amplitude error
* ``detuning_scale``  multiplicative detuning amplitude error
* ``offset_khz``      constant detuning offset (Doppler), ordinary kHz
* ``sigma_khz``       per-atom Gaussian Doppler spread (thermal mode)
* ``time_scale``      schedule stretch factor
"""

from __future__ import annotations

import csv
import itertools
import math
import time as _time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import EchoGateError
from .metrics import fidelity, symmetric_input
from .model import computational_states, offset_over_omega
from .propagator import IntegratorOptions, evolve_density, evolve_state
from .pulses import PulseErrors
from .scenarios import get_scenario

__all__ = [
    "SweepSpec",
    "ResultRecord",
    "run_sweep",
    "sweep_v0",
    "robustness_grid",
    "doppler_scan",
    "time_error_scan",
    "write_records",
]

# trajectories are not needed during sweeps
_SWEEP_OPTIONS = IntegratorOptions(record_every=0)


@dataclass(frozen=True)
class SweepSpec:
    """A named scenario plus one or two value axes to scan."""

    scenario: str
    axes: tuple[tuple[str, tuple[float, ...]], ...]
    open_system: bool = True
    output: str | None = None
    doppler_draws: int = 100
    doppler_seed: int = 7041

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 2:
            raise ValueError("sweeps support one or two axes")
        clean = []
        for name, values in self.axes:
            vals = tuple(float(v) for v in values)
            if len(vals) == 0:
                raise ValueError(f"axis {name!r} has no values")
            if not all(math.isfinite(v) for v in vals):
                raise ValueError(f"axis {name!r} has non-finite values")
            clean.append((name, vals))
        object.__setattr__(self, "axes", tuple(clean))

    @property
    def axis_names(self) -> list[str]:
        return [name for name, _ in self.axes]


@dataclass
class ResultRecord:
    """One grid point's metrics (NaN fidelities when the point failed)."""

    axes: dict[str, float]
    fidelity_eq3: float
    fidelity_overlap: float
    leakage_max: float
    wall_time: float
    error: str = ""

    def sort_key(self, axis_names):
        return tuple(self.axes[name] for name in axis_names)


def _point_errors(scenario, axes: dict) -> PulseErrors:
    return PulseErrors(
        rabi_scale=axes.get("rabi_scale", 1.0),
        detuning_scale=axes.get("detuning_scale", 1.0),
        detuning_offset=offset_over_omega(
            axes.get("offset_khz", 0.0) * 1e3, scenario.omega_max
        ),
        time_scale=axes.get("time_scale", 1.0),
    )


def _evaluate(scenario, axes: dict, open_system: bool,
              draws: int, seed: int) -> tuple[float, float, float]:
    """(fidelity_eq3, fidelity_overlap, leakage) at one grid point."""
    n = scenario.n
    config = scenario.config(
        v0_over_omega=axes.get("v0_over_omega"), dissipative=open_system
    )
    base_errors = _point_errors(scenario, axes)

    if "sigma_khz" in axes:
        sigma = offset_over_omega(axes["sigma_khz"] * 1e3, scenario.omega_max)
        rng = np.random.default_rng(seed)
        rho_acc = np.zeros((config.dim, config.dim), dtype=complex)
        for _ in range(draws):
            offs = tuple(rng.normal(0.0, sigma) for _ in range(n))
            errors = PulseErrors(
                rabi_scale=base_errors.rabi_scale,
                detuning_scale=base_errors.detuning_scale,
                detuning_offset=base_errors.detuning_offset,
                time_scale=base_errors.time_scale,
                per_atom_offset=offs,
            )
            rho_acc += _final_density(config, errors, open_system)
        rho_f = rho_acc / draws
    else:
        rho_f = _final_density(config, base_errors, open_system)

    eq3, overlap = fidelity(rho_f, n)
    comp = [b.flat for b in computational_states(n)]
    leakage = 1.0 - float(np.sum(np.real(np.diag(rho_f))[comp]))
    return eq3, overlap, min(max(leakage, 0.0), 1.0)


def _final_density(config, errors, open_system):
    psi0 = symmetric_input(config.n)
    if open_system:
        rho0 = np.outer(psi0, psi0.conj())
        rho_f, _ = evolve_density(rho0, config, errors, _SWEEP_OPTIONS)
        return rho_f
    psi_f, _ = evolve_state(psi0, config, errors, _SWEEP_OPTIONS)
    return np.outer(psi_f, psi_f.conj())


def _run_point(args) -> ResultRecord:
    scenario, axes, open_system, draws, seed = args
    t0 = _time.perf_counter()
    try:
        eq3, overlap, leak = _evaluate(scenario, axes, open_system, draws, seed)
        return ResultRecord(
            axes=axes,
            fidelity_eq3=eq3,
            fidelity_overlap=overlap,
            leakage_max=leak,
            wall_time=_time.perf_counter() - t0,
        )
    except EchoGateError as exc:
        return ResultRecord(
            axes=axes,
            fidelity_eq3=float("nan"),
            fidelity_overlap=float("nan"),
            leakage_max=float("nan"),
            wall_time=_time.perf_counter() - t0,
            error=str(exc),
        )


def run_sweep(spec: SweepSpec, jobs: int = 1, scenario=None) -> list[ResultRecord]:
    """Evaluate every grid point of a sweep spec.

    With ``jobs > 1`` the points run in a process pool; the returned
    records are always sorted by axis values, so ordering is independent
    of the execution schedule.  ``scenario`` overrides the registry
    lookup with an ad-hoc :class:`~echogate.scenarios.Scenario`.
    """
    sc = scenario if scenario is not None else get_scenario(spec.scenario)
    grids = [values for _, values in spec.axes]
    names = spec.axis_names
    tasks = [
        (
            sc,
            dict(zip(names, combo)),
            spec.open_system,
            spec.doppler_draws,
            spec.doppler_seed,
        )
        for combo in itertools.product(*grids)
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_point, tasks))
    else:
        records = [_run_point(t) for t in tasks]
    records.sort(key=lambda r: r.sort_key(names))
    return records


def sweep_v0(
    scenario: str, v0_values, open_system: bool = True, jobs: int = 1
) -> list[ResultRecord]:
    """Fidelity versus interaction strength (one simulation per value)."""
    spec = SweepSpec(
        scenario=scenario,
        axes=(("v0_over_omega", tuple(v0_values)),),
        open_system=open_system,
    )
    return run_sweep(spec, jobs)


def robustness_grid(
    scenario: str,
    rabi_scales,
    detuning_scales,
    open_system: bool = True,
    jobs: int = 1,
) -> list[ResultRecord]:
    """Cartesian grid over Rabi and detuning amplitude errors."""
    for v in list(rabi_scales) + list(detuning_scales):
        if not 0.9 <= v <= 1.1:
            raise ValueError("robustness scales must lie within [0.9, 1.1]")
    spec = SweepSpec(
        scenario=scenario,
        axes=(
            ("rabi_scale", tuple(rabi_scales)),
            ("detuning_scale", tuple(detuning_scales)),
        ),
        open_system=open_system,
    )
    return run_sweep(spec, jobs)


def doppler_scan(
    scenario: str,
    offsets_khz,
    open_system: bool = True,
    per_atom_sigma: bool = False,
    draws: int = 100,
    seed: int = 7041,
    jobs: int = 1,
) -> list[ResultRecord]:
    """Detuning-offset scan, constant (default) or thermal per-atom mode.

    In the thermal mode each axis value is the standard deviation of
    zero-mean Gaussian per-atom offsets; the density matrix is averaged
    over ``draws`` samples with a deterministic seed.
    """
    axis = "sigma_khz" if per_atom_sigma else "offset_khz"
    spec = SweepSpec(
        scenario=scenario,
        axes=((axis, tuple(offsets_khz)),),
        open_system=open_system,
        doppler_draws=draws,
        doppler_seed=seed,
    )
    return run_sweep(spec, jobs)


def time_error_scan(
    scenario: str, time_scales, open_system: bool = True, jobs: int = 1
) -> list[ResultRecord]:
    """Gate-duration (clock) error scan."""
    for v in time_scales:
        if not 0.9 <= v <= 1.1:
            raise ValueError("time scales must lie within [0.9, 1.1]")
    spec = SweepSpec(
        scenario=scenario,
        axes=(("time_scale", tuple(time_scales)),),
        open_system=open_system,
    )
    return run_sweep(spec, jobs)


def write_records(
    records: list[ResultRecord],
    path,
    axis_names: list[str],
    header_comments: list[str] | None = None,
) -> None:
    """CSV output: axis columns then the four metric columns.

    Numbers carry 12 significant digits.  Optional ``# ``-prefixed
    comment lines (e.g. the effective configuration) go above the header.
    """
    with open(path, "w", newline="") as fh:
        for line in header_comments or []:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(
            list(axis_names)
            + ["fidelity_eq3", "fidelity_overlap", "leakage_max", "wall_time_s", "error"]
        )
        for rec in records:
            row = [f"{rec.axes[name]:.12g}" for name in axis_names]
            row += [
                f"{rec.fidelity_eq3:.12g}",
                f"{rec.fidelity_overlap:.12g}",
                f"{rec.leakage_max:.12g}",
                f"{rec.wall_time:.12g}",
                rec.error,
            ]
            writer.writerow(row)
