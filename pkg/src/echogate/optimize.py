"""Derivative-free pulse-shape optimisation against closed-system fidelity.

The four shape parameters (delta0, tau_r, tau_d, tau_gate) are searched
with Nelder-Mead simplex runs (bound-clipped, multi-start, deterministic
for a fixed seed).  Objectives are evaluated on the closed system for
speed; dissipation is reintroduced when the optimised pulse is evaluated
by the sweep harness or acceptance checks.  Physical hardware caps (peak
Rabi frequency and peak laser detuning at a given omega_max scale) enter
as additive penalty terms, relative to the cap.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import InfeasibleProblemError, IntegrationError
from .metrics import fidelity, symmetric_input
from .model import InteractionGraph, PulseParams, SystemConfig
from .propagator import IntegratorOptions, evolve_state
from .pulses import peak_detuning

__all__ = [
    "PhysicalCaps",
    "OptimizationProblem",
    "OptimizationResult",
    "default_bounds",
    "objective_eval",
    "optimize",
]

log = logging.getLogger(__name__)

_PARAM_ORDER = ("delta0", "tau_r", "tau_d", "tau_gate")

# fast-but-clean tolerances for objective evaluations; final numbers are
# always re-evaluated at the propagator defaults
_OBJECTIVE_OPTIONS = IntegratorOptions(rel_tol=1e-8, abs_tol=1e-10, record_every=0)


@dataclass(frozen=True)
class PhysicalCaps:
    """Hardware limits in rad/s, tied to the pulse's omega_max scale."""

    max_rabi: float
    max_detuning: float

    def __post_init__(self):
        if self.max_rabi <= 0 or self.max_detuning <= 0:
            raise ValueError("physical caps must be positive")


def default_bounds() -> dict[str, tuple[float, float]]:
    """Search box for compact (tau_gate ~ 10) pulse shapes."""
    return {
        "delta0": (0.1, 1.5),
        "tau_r": (0.2, 2.0),
        "tau_d": (0.3, 3.0),
        "tau_gate": (6.0, 20.0),
    }


@dataclass(frozen=True)
class OptimizationProblem:
    """Search space and objective definition.

    Attributes
    ----------
    n : int
        Atom count of the target gate.
    graph : InteractionGraph
        Interaction strengths at the operating point.
    bounds : dict
        Per-parameter (low, high) for delta0 / tau_r / tau_d / tau_gate.
    caps : PhysicalCaps
        Rabi and detuning hardware limits (rad/s).
    omega_max : float
        Physical scale (rad/s) used to check the caps.
    objective : {'overlap', 'eq3'}
        Which fidelity metric 1-F is minimised.
    fixed : frozenset of str
        Parameters pinned at their initial value (e.g. a set gate time).
    integrator : IntegratorOptions
        Options for objective evaluations; fixed options keep the
        objective deterministic.
    """

    n: int
    graph: InteractionGraph
    bounds: dict[str, tuple[float, float]]
    caps: PhysicalCaps
    omega_max: float = 1.0
    objective: str = "overlap"
    fixed: frozenset = frozenset()
    integrator: IntegratorOptions = _OBJECTIVE_OPTIONS

    def __post_init__(self):
        if set(self.bounds) != set(_PARAM_ORDER):
            raise ValueError(f"bounds must cover exactly {_PARAM_ORDER}")
        for name, (lo, hi) in self.bounds.items():
            if not lo < hi:
                raise ValueError(f"bounds for {name} must satisfy low < high")
        if self.objective not in ("overlap", "eq3"):
            raise ValueError("objective must be 'overlap' or 'eq3'")
        unknown = set(self.fixed) - set(_PARAM_ORDER)
        if unknown:
            raise ValueError(f"unknown fixed parameters: {sorted(unknown)}")
        if self.omega_max <= 0:
            raise ValueError("omega_max must be positive")


@dataclass
class OptimizationResult:
    """Best pulse found plus the full evaluation history."""

    best: PulseParams
    infidelity: float
    evaluations: int
    history: list[tuple[PulseParams, float]] = field(default_factory=list)

    def history_to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["eval", "delta0", "tau_r", "tau_d", "tau_gate", "infidelity"]
            )
            for i, (p, v) in enumerate(self.history):
                writer.writerow(
                    [i]
                    + [f"{x:.12g}" for x in (p.delta0, p.tau_r, p.tau_d, p.tau_gate)]
                    + [f"{v:.12g}"]
                )


def _params_from_vector(x, problem: OptimizationProblem, omega_max: float) -> PulseParams:
    return PulseParams(
        delta0=float(x[0]),
        tau_r=float(x[1]),
        tau_d=float(x[2]),
        tau_gate=float(x[3]),
        omega_max=omega_max,
    )


def _cap_penalty(params: PulseParams, problem: OptimizationProblem) -> float:
    """Relative violation of the Rabi and detuning caps (0 when satisfied)."""
    peak_rabi = problem.omega_max  # profile peak is omega_max by construction
    peak_det = peak_detuning(params) * problem.omega_max
    pen = max(0.0, (peak_rabi - problem.caps.max_rabi) / problem.caps.max_rabi)
    pen += max(
        0.0, (peak_det - problem.caps.max_detuning) / problem.caps.max_detuning
    )
    return pen


def objective_eval(params: PulseParams, problem: OptimizationProblem) -> float:
    """Closed-system gate infidelity of one pulse, plus cap penalties.

    Integration failures are mapped to the worst-case objective 1.0 with
    a logged warning so a simplex run can step around them.
    """
    config = SystemConfig(graph=problem.graph, pulse=params)
    try:
        psi_f, _ = evolve_state(
            symmetric_input(problem.n), config, options=problem.integrator
        )
    except IntegrationError as exc:
        log.warning("objective evaluation failed (%s); returning 1.0", exc)
        return 1.0
    rho = np.outer(psi_f, psi_f.conj())
    eq3, overlap = fidelity(rho, problem.n)
    value = 1.0 - (overlap if problem.objective == "overlap" else eq3)
    return value + _cap_penalty(params, problem)


def _check_feasible(problem: OptimizationProblem) -> None:
    if problem.omega_max > problem.caps.max_rabi * (1 + 1e-12):
        raise InfeasibleProblemError(
            f"peak Rabi equals omega_max={problem.omega_max:.4g} rad/s, above "
            f"the cap {problem.caps.max_rabi:.4g} rad/s for every pulse shape"
        )
    # the detuning peak grows with delta0 and tau_d and shrinks with
    # tau_gate, so the feasibility corner is (lo, lo, hi)
    b = problem.bounds
    corner = PulseParams(
        delta0=b["delta0"][0],
        tau_r=b["tau_r"][0],
        tau_d=b["tau_d"][0],
        tau_gate=b["tau_gate"][1],
        omega_max=problem.omega_max,
    )
    if peak_detuning(corner) * problem.omega_max > problem.caps.max_detuning:
        raise InfeasibleProblemError(
            "minimum achievable detuning peak exceeds the cap for all bounds"
        )


def optimize(
    problem: OptimizationProblem,
    init: PulseParams,
    budget: int = 400,
    seed: int = 0,
    restarts: int = 5,
) -> OptimizationResult:
    """Multi-start Nelder-Mead search for the best pulse shape.

    Parameters
    ----------
    problem : OptimizationProblem
    init : PulseParams
        Starting point; must lie within the bounds.  The first restart
        begins exactly here, later ones at deterministic perturbations.
    budget : int
        Total objective-evaluation budget across restarts (>= 50).
    seed : int
        Seed for the restart perturbations.
    restarts : int
        Number of simplex starts.

    Returns
    -------
    OptimizationResult
        Best parameters by minimum infidelity (parameter-lexicographic
        tie-break), total evaluation count, and the evaluation history.
    """
    if budget < 50:
        raise ValueError("budget must be at least 50 evaluations")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    _check_feasible(problem)

    x_init = np.array([getattr(init, name) for name in _PARAM_ORDER])
    lo = np.array([problem.bounds[name][0] for name in _PARAM_ORDER])
    hi = np.array([problem.bounds[name][1] for name in _PARAM_ORDER])
    if np.any(x_init < lo) or np.any(x_init > hi):
        raise ValueError("init parameters must lie within the bounds")

    free = [i for i, name in enumerate(_PARAM_ORDER) if name not in problem.fixed]
    if not free:
        raise ValueError("at least one parameter must be free to optimise")
    rng = np.random.default_rng(seed)

    history: list[tuple[PulseParams, float]] = []
    count = [0]

    def eval_full(x_full) -> float:
        params = _params_from_vector(x_full, problem, init.omega_max)
        value = objective_eval(params, problem)
        history.append((params, value))
        count[0] += 1
        return value

    def objective_free(x_free) -> float:
        x_full = x_init.copy()
        x_full[free] = np.clip(x_free, lo[free], hi[free])
        return eval_full(x_full)

    starts = [x_init[free]]
    for _ in range(restarts - 1):
        jitter = rng.uniform(0.85, 1.15, size=len(free))
        starts.append(np.clip(x_init[free] * jitter, lo[free], hi[free]))

    best_x = None
    best_val = np.inf
    for x0 in starts:
        remaining = budget - count[0]
        if remaining < 2 * (len(free) + 1):
            break
        res = minimize(
            objective_free,
            x0,
            method="Nelder-Mead",
            bounds=list(zip(lo[free], hi[free])),
            options={
                "maxfev": min(remaining, max(50, budget // restarts)),
                "xatol": 1e-6,
                "fatol": 1e-12,
            },
        )
        x_full = x_init.copy()
        x_full[free] = np.clip(res.x, lo[free], hi[free])
        if best_x is None or (res.fun, tuple(x_full)) < (best_val, tuple(best_x)):
            best_val, best_x = float(res.fun), x_full

    best_params = _params_from_vector(best_x, problem, init.omega_max)
    return OptimizationResult(
        best=best_params,
        infidelity=min(best_val, 1.0),
        evaluations=count[0],
        history=history,
    )
