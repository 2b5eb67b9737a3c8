"""Command-line front end: config files in, CSV/report files out.

Configuration is flat INI-style sections (comment- and diff-friendly).
A run starts from an optional named scenario, applies file values, then
``--set section.key=value`` flag overrides; the effective configuration
is echoed as ``#`` comment lines into every output file, including the
derived dimensionless quantities, so runs are auditable and exactly
reproducible.

Exit codes: 0 success, 2 configuration/usage error, 3 numerical failure,
4 infeasible optimisation.
"""

from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
import time as _time

import numpy as np

from . import __version__
from .adiabatic import (
    DEFAULT_GRID_POINTS,
    bloch_trajectory,
    dynamical_phases,
    instantaneous_spectrum,
)
from .errors import (
    ConfigError,
    EchoGateError,
    InfeasibleProblemError,
    IntegrationError,
    TrackingError,
)
from .metrics import GateReport, fidelity, phase_audit, symmetric_input
from .model import (
    PulseParams,
    basis_flat,
    computational_states,
    geometry_preset,
    offset_over_omega,
    rate_over_omega,
)
from .optimize import PhysicalCaps, optimize
from .propagator import IntegratorOptions, evolve_density, evolve_state
from .pulses import PulseErrors, zero_drive
from .scenarios import SCENARIOS, Scenario, get_scenario, scenario_names
from .sweeps import SweepSpec, run_sweep, write_records

_TWO_PI = 2.0 * math.pi

COMMANDS = (
    "simulate",
    "audit",
    "spectrum",
    "bloch",
    "optimize",
    "sweep-v0",
    "robustness",
    "doppler",
    "time-error",
)


# ---------------------------------------------------------------------------
# configuration handling

def _load_config(path: str, overrides: list[str]) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(
        inline_comment_prefixes=("#", ";"), interpolation=None
    )
    try:
        with open(path) as fh:
            parser.read_file(fh, source=path)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except configparser.ParsingError as exc:
        lines = ", ".join(str(err[0]) for err in exc.errors)
        raise ConfigError(f"{path}: parse error at line(s) {lines}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(
                f"override {item!r} must look like section.key=value"
            )
        key_path, value = item.split("=", 1)
        section, key = key_path.split(".", 1)
        section = section.strip()
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key.strip(), value.strip())
    return parser


def _get(cfg, section, key, cast, default=None, required=False):
    if cfg.has_option(section, key) and cfg.get(section, key) != "":
        raw = cfg.get(section, key)
        try:
            if cast is bool:
                return raw.strip().lower() in ("1", "true", "yes", "on")
            return cast(raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from exc
    if required:
        raise ConfigError(f"missing required option [{section}] {key}")
    return default


def _float_list(cfg, section, key, default=None, required=False):
    raw = _get(cfg, section, key, str, default=None, required=required)
    if raw is None:
        return default
    try:
        return [float(tok) for tok in raw.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from exc


def _build_scenario(cfg) -> Scenario:
    """Resolve the effective scenario: named preset plus file overrides."""
    name = _get(cfg, "system", "scenario", str)
    if name is not None:
        base = get_scenario(name)
    else:
        base = None

    omega_mhz = _get(
        cfg, "system", "omega_max_mhz", float,
        default=None if base is None else base.omega_max / _TWO_PI / 1e6,
    )
    if omega_mhz is None:
        raise ConfigError("missing [system] omega_max_mhz (or a scenario name)")
    omega_max = _TWO_PI * omega_mhz * 1e6

    n = _get(cfg, "system", "n", int, default=None if base is None else base.n)
    geometry = _get(
        cfg, "system", "geometry", str,
        default=None if base is None else base.geometry,
    )
    if n is None or geometry is None:
        raise ConfigError("missing [system] n / geometry (or a scenario name)")
    exponent = _get(
        cfg, "system", "exponent", float,
        default=6.0 if base is None else base.exponent,
    )

    v0_over = _get(cfg, "system", "v0_over_omega", float)
    v0_mhz = _get(cfg, "system", "v0_mhz", float)
    if v0_over is None and v0_mhz is not None:
        v0_over = v0_mhz / (omega_mhz)
    if v0_over is None:
        if base is None:
            raise ConfigError("missing [system] v0_mhz or v0_over_omega")
        v0_over = base.v0_over_omega

    lifetime_us = _get(
        cfg, "system", "lifetime_us", float,
        default=None if base is None else (
            0.0 if base.gamma_phys == 0 else 1e6 / base.gamma_phys
        ),
    )
    gamma_phys = 0.0 if not lifetime_us else 1.0 / (lifetime_us * 1e-6)

    pk = {}
    for key in ("delta0", "tau_r", "tau_d", "tau_gate"):
        pk[key] = _get(
            cfg, "pulse", key, float,
            default=None if base is None else getattr(base.pulse, key),
        )
        if pk[key] is None:
            raise ConfigError(f"missing [pulse] {key} (or a scenario name)")
    pulse = PulseParams(omega_max=omega_max, **pk)

    caps = PhysicalCaps(
        max_rabi=_TWO_PI * 1e6 * _get(
            cfg, "constraints", "max_rabi_mhz", float,
            default=(base.caps.max_rabi / _TWO_PI / 1e6) if base else 35.0,
        ),
        max_detuning=_TWO_PI * 1e6 * _get(
            cfg, "constraints", "max_detuning_mhz", float,
            default=(base.caps.max_detuning / _TWO_PI / 1e6) if base else 40.0,
        ),
    )
    return Scenario(
        name=name or "custom",
        n=n,
        geometry=geometry,
        v0_over_omega=v0_over,
        omega_max=omega_max,
        gamma_phys=gamma_phys,
        pulse=pulse,
        caps=caps,
        exponent=exponent,
    )


def _build_errors(cfg, scenario: Scenario) -> PulseErrors:
    return PulseErrors(
        rabi_scale=_get(cfg, "errors", "rabi_scale", float, default=1.0),
        detuning_scale=_get(cfg, "errors", "detuning_scale", float, default=1.0),
        detuning_offset=offset_over_omega(
            _get(cfg, "errors", "offset_khz", float, default=0.0) * 1e3,
            scenario.omega_max,
        ),
        time_scale=_get(cfg, "errors", "time_scale", float, default=1.0),
    )


def _build_options(cfg) -> IntegratorOptions:
    return IntegratorOptions(
        method=_get(cfg, "integrator", "method", str, default="rk_adaptive"),
        step=_get(cfg, "integrator", "step", float, default=1e-3),
        rel_tol=_get(cfg, "integrator", "rel_tol", float, default=None),
        abs_tol=_get(cfg, "integrator", "abs_tol", float, default=None),
        record_every=_get(cfg, "integrator", "record_every", int, default=1),
    )


def _effective_header(cfg, scenario: Scenario) -> list[str]:
    lines = [f"echogate {__version__}"]
    for section in cfg.sections():
        for key, value in sorted(cfg.items(section)):
            lines.append(f"[{section}] {key} = {value}")
    gamma_dim = rate_over_omega(scenario.gamma_phys, scenario.omega_max)
    lines.append(
        f"derived: scenario={scenario.name} n={scenario.n} "
        f"geometry={scenario.geometry}"
    )
    lines.append(
        f"derived: omega_max={scenario.omega_max:.10g} rad/s "
        f"({scenario.omega_max / _TWO_PI / 1e6:.6g} MHz)"
    )
    lines.append(
        f"derived: v0_over_omega={scenario.v0_over_omega:.10g} "
        f"({scenario.v0_over_omega * scenario.omega_max / _TWO_PI / 1e6:.6g} MHz)"
    )
    lines.append(f"derived: gamma_over_omega={gamma_dim:.10g}")
    lines.append(
        f"derived: tau_gate={scenario.pulse.tau_gate:.10g} "
        f"({scenario.pulse.gate_time_seconds() * 1e6:.6g} us)"
    )
    return lines


def _out_path(path: str) -> str:
    if os.path.isabs(path):
        return path
    return os.path.join(os.environ.get("ECHOGATE_OUTDIR", "."), path)


def _write_text(path: str, header: list[str], body: str) -> None:
    path = _out_path(path)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write(body)


# ---------------------------------------------------------------------------
# commands

def _cmd_simulate(cfg, scenario, errors, options, args) -> str:
    open_system = _get(cfg, "simulate", "open_system", bool,
                       default=scenario.gamma_phys > 0)
    t0 = _time.perf_counter()
    psi0 = symmetric_input(scenario.n)
    config = scenario.config(dissipative=open_system)
    drive = zero_drive if args.zero_pulse else None
    if open_system:
        rho0 = np.outer(psi0, psi0.conj())
        rho_f, traj = evolve_density(rho0, config, errors, options, drive=drive)
    else:
        psi_f, traj = evolve_state(psi0, config, errors, options, drive=drive)
        rho_f = np.outer(psi_f, psi_f.conj())
    eq3, overlap = fidelity(rho_f, scenario.n)
    comp = [b.flat for b in computational_states(scenario.n)]
    leak = 1.0 - float(np.sum(np.real(np.diag(rho_f))[comp]))
    wall = _time.perf_counter() - t0
    report = GateReport(
        fidelity_eq3=eq3,
        fidelity_overlap=overlap,
        leakage={"symmetric_input": max(leak, 0.0)},
        wall_time=wall,
    )
    header = _effective_header(cfg, scenario)
    out = _get(cfg, "simulate", "output", str, default="gate_report.txt")
    _write_text(out, header, report.to_text())
    traj_path = _get(cfg, "simulate", "trajectory", str)
    if traj_path is not None:
        traj.to_csv(_out_path(traj_path), scenario.n)
    return (
        f"simulate {scenario.name}: fidelity_overlap={overlap:.6f} "
        f"fidelity_eq3={eq3:.6f} wall={wall:.2f}s -> {out}"
    )


def _cmd_audit(cfg, scenario, errors, options, args) -> str:
    report = phase_audit(scenario.config(dissipative=False), errors, options)
    header = _effective_header(cfg, scenario)
    out = _get(cfg, "audit", "output", str, default="phase_audit.txt")
    _write_text(out, header, report.to_text())
    return (
        f"audit {scenario.name}: fidelity_overlap={report.fidelity_overlap:.6f} "
        f"fidelity_eq3={report.fidelity_eq3:.6f} wall={report.wall_time:.2f}s -> {out}"
    )


def _parse_input_state(cfg, section, scenario) -> "BasisIndex":
    label = _get(cfg, section, "input", str, default="1" * scenario.n)
    table = {"0": 0, "1": 1, "r": 2}
    try:
        levels = [table[ch] for ch in label]
    except KeyError:
        raise ConfigError(f"[{section}] input = {label!r}: use chars 0/1/r")
    if len(levels) != scenario.n:
        raise ConfigError(
            f"[{section}] input {label!r} has {len(levels)} atoms, expected {scenario.n}"
        )
    return basis_flat(levels)


def _cmd_spectrum(cfg, scenario, errors, options, args) -> str:
    state = _parse_input_state(cfg, "spectrum", scenario)
    grid_points = _get(cfg, "spectrum", "grid_points", int,
                       default=DEFAULT_GRID_POINTS)
    trace = instantaneous_spectrum(
        state, scenario.config(dissipative=False), grid_points, errors
    )
    ledger = dynamical_phases(
        state, scenario.config(dissipative=False), options, grid_points, errors
    )
    out = _out_path(_get(cfg, "spectrum", "output", str, default="spectrum.csv"))
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    with open(out, "w") as fh:
        for line in _effective_header(cfg, scenario):
            fh.write(f"# {line}\n")
        fh.write(f"# phi_d_1 = {ledger.phi_d_1:.12g}\n")
        fh.write(f"# phi_d_2 = {ledger.phi_d_2:.12g}\n")
        fh.write(f"# phi_total = {ledger.phi_total:.12g}\n")
        fh.write(f"# phi_geo = {ledger.phi_geo:.12g}\n")
    with open(out, "a", newline="") as fh:
        import csv as _csv

        writer = _csv.writer(fh)
        writer.writerow(
            ["tau"] + [f"E_{i}" for i in range(trace.energies.shape[1])]
        )
        for t, row in zip(trace.times, trace.energies):
            writer.writerow([f"{t:.12g}"] + [f"{e:.12g}" for e in row])
    return (
        f"spectrum {scenario.name} input={state.label}: "
        f"phi_geo={ledger.phi_geo:+.4f} rad, phi_d1+phi_d2="
        f"{ledger.phi_d_1 + ledger.phi_d_2:+.3e} -> {out}"
    )


def _cmd_bloch(cfg, scenario, errors, options, args) -> str:
    state = _parse_input_state(cfg, "bloch", scenario)
    path = bloch_trajectory(state, scenario.config(dissipative=False),
                            options, errors)
    out = _out_path(_get(cfg, "bloch", "output", str, default="bloch.csv"))
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    with open(out, "w") as fh:
        for line in _effective_header(cfg, scenario):
            fh.write(f"# {line}\n")
        fh.write(f"# solid_angle = {path.solid_angle:.12g}\n")
        fh.write(f"# max_leakage = {path.max_leakage:.12g}\n")
    with open(out, "a", newline="") as fh:
        import csv as _csv

        writer = _csv.writer(fh)
        writer.writerow(["tau", "theta", "phi"])
        for t, th, ph in zip(path.times, path.theta, path.phi):
            writer.writerow([f"{t:.12g}", f"{th:.12g}", f"{ph:.12g}"])
    return (
        f"bloch {scenario.name} input={state.label}: "
        f"solid_angle={path.solid_angle:+.4f} sr -> {out}"
    )


def _cmd_optimize(cfg, scenario, errors, options, args) -> str:
    budget = _get(cfg, "optimize", "budget", int, default=400)
    seed = _get(cfg, "optimize", "seed", int, default=0)
    restarts = _get(cfg, "optimize", "restarts", int, default=5)
    fix_tg = _get(cfg, "optimize", "fix_tau_gate", bool, default=True)
    problem = scenario.problem(fix_tau_gate=fix_tg)
    result = optimize(problem, scenario.pulse, budget=budget, seed=seed,
                      restarts=restarts)
    out = _out_path(_get(cfg, "optimize", "output", str, default="history.csv"))
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    with open(out, "w") as fh:
        for line in _effective_header(cfg, scenario):
            fh.write(f"# {line}\n")
        b = result.best
        fh.write(
            f"# best: delta0={b.delta0:.12g} tau_r={b.tau_r:.12g} "
            f"tau_d={b.tau_d:.12g} tau_gate={b.tau_gate:.12g} "
            f"infidelity={result.infidelity:.12g}\n"
        )
    with open(out, "a", newline="") as fh:
        import csv as _csv

        writer = _csv.writer(fh)
        writer.writerow(
            ["eval", "delta0", "tau_r", "tau_d", "tau_gate", "infidelity"]
        )
        for i, (p, v) in enumerate(result.history):
            writer.writerow(
                [i]
                + [f"{x:.12g}" for x in (p.delta0, p.tau_r, p.tau_d, p.tau_gate)]
                + [f"{v:.12g}"]
            )
    return (
        f"optimize {scenario.name}: infidelity={result.infidelity:.3e} "
        f"evals={result.evaluations} -> {out}"
    )


def _sweep_command(cfg, scenario, args, section, axes, open_default=True,
                   draws=100, seed=7041) -> str:
    open_system = _get(cfg, section, "open_system", bool, default=open_default)
    spec = SweepSpec(
        scenario=scenario.name,
        axes=axes,
        open_system=open_system,
        doppler_draws=draws,
        doppler_seed=seed,
    )
    records = run_sweep(spec, jobs=args.jobs, scenario=scenario)
    out = _out_path(_get(cfg, section, "output", str, default=f"{section}.csv"))
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    write_records(records, out, spec.axis_names,
                  header_comments=_effective_header(cfg, scenario))
    ok = [r for r in records if not r.error]
    worst = min((r.fidelity_overlap for r in ok), default=float("nan"))
    failed = len(records) - len(ok)
    return (
        f"{section} {scenario.name}: {len(records)} points "
        f"(min fidelity_overlap={worst:.6f}, failed={failed}) -> {out}"
    )


def _cmd_sweep_v0(cfg, scenario, errors, options, args) -> str:
    values = _float_list(cfg, "sweep-v0", "values", required=True)
    return _sweep_command(
        cfg, scenario, args, "sweep-v0", (("v0_over_omega", tuple(values)),)
    )


def _cmd_robustness(cfg, scenario, errors, options, args) -> str:
    rabi = _float_list(cfg, "robustness", "rabi_scales", required=True)
    det = _float_list(cfg, "robustness", "detuning_scales", required=True)
    return _sweep_command(
        cfg,
        scenario,
        args,
        "robustness",
        (("rabi_scale", tuple(rabi)), ("detuning_scale", tuple(det))),
    )


def _cmd_doppler(cfg, scenario, errors, options, args) -> str:
    offsets = _float_list(cfg, "doppler", "offsets_khz", required=True)
    per_atom = _get(cfg, "doppler", "per_atom_sigma", bool, default=False)
    draws = _get(cfg, "doppler", "draws", int, default=100)
    seed = _get(cfg, "doppler", "seed", int, default=7041)
    axis = "sigma_khz" if per_atom else "offset_khz"
    return _sweep_command(
        cfg, scenario, args, "doppler", ((axis, tuple(offsets)),),
        draws=draws, seed=seed,
    )


def _cmd_time_error(cfg, scenario, errors, options, args) -> str:
    scales = _float_list(cfg, "time-error", "scales", required=True)
    return _sweep_command(
        cfg, scenario, args, "time-error", (("time_scale", tuple(scales)),)
    )


_HANDLERS = {
    "simulate": _cmd_simulate,
    "audit": _cmd_audit,
    "spectrum": _cmd_spectrum,
    "bloch": _cmd_bloch,
    "optimize": _cmd_optimize,
    "sweep-v0": _cmd_sweep_v0,
    "robustness": _cmd_robustness,
    "doppler": _cmd_doppler,
    "time-error": _cmd_time_error,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="echogate",
        description="Rydberg C^kZ gate simulation via echoed adiabatic pulses.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} command")
        p.add_argument("config", help="path to the INI configuration file")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="SECTION.KEY=VALUE",
            help="override a config value (repeatable)",
        )
        p.add_argument(
            "--jobs",
            type=int,
            default=os.cpu_count() or 1,
            help="worker processes for sweep grids (default: cpu count)",
        )
        if name == "simulate":
            p.add_argument(
                "--zero-pulse",
                action="store_true",
                help="replace the drive with zero fields (identity evolution)",
            )
    p = sub.add_parser("scenarios", help="list the named scenario presets")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "scenarios":
        for name in scenario_names():
            sc = SCENARIOS[name]
            print(f"{name}: n={sc.n} {sc.geometry}, V0={sc.v0_over_omega:.4g} "
                  f"omega_max, {sc.description}")
        return 0
    try:
        cfg = _load_config(args.config, args.overrides)
        scenario = _build_scenario(cfg)
        errors = _build_errors(cfg, scenario)
        options = _build_options(cfg)
        if not hasattr(args, "zero_pulse"):
            args.zero_pulse = False
        summary = _HANDLERS[args.command](cfg, scenario, errors, options, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleProblemError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 4
    except (IntegrationError, TrackingError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except EchoGateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
