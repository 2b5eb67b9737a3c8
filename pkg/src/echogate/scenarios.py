"""Named operating points with frozen, pre-optimised pulse shapes.

Each scenario fixes an atom count and geometry, a physical Rabi scale
omega_max, an interaction strength, a total dissipation rate, and the
hardware caps under which its pulse was optimised.  The pulse shapes
were produced with :func:`echogate.optimize.optimize` at the stated
operating point with the gate time held fixed, then frozen here so
sweeps and regressions are reproducible without re-running the search
(see ``demos/04_optimize_pulse.py`` for the recipe).

Numerology of the operating points:

* ``cs-cz``            two alkali atoms, omega_max = 2pi*23.5 MHz,
                       V0 = 2pi*3 GHz (127.66 omega_max), Rydberg
                       lifetime 540 us, 0.4 us gate.
* ``cs-ccz``           triangle, omega_max = 2pi*30 MHz, V0 = 2pi*3 GHz
                       (100 omega_max), lifetime 540 us, 0.4 us gate.
* ``yb-cz``/``yb-ccz`` same geometries at V0 = 2pi*6.85 GHz with a
                       100 us Rydberg lifetime.
* ``cs-conservative``  modest hardware: omega_max = 2pi*5 MHz,
                       V0 = 2pi*400 MHz (80 omega_max), lifetime 130 us.
* ``cccz-pyramid``     four atoms, all pairs blockaded at V0; reuses the
                       cs-ccz pulse unchanged.
* ``cccz-square``      square arrangement; diagonal pairs weakened by
                       the 1/sqrt(2)^6 power law; cs-ccz pulse unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import (
    InteractionGraph,
    PulseParams,
    SystemConfig,
    geometry_preset,
    rate_over_omega,
)
from .optimize import OptimizationProblem, PhysicalCaps
from .propagator import cs_dissipation_model

__all__ = ["Scenario", "SCENARIOS", "get_scenario", "scenario_names"]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Scenario:
    """A named system + pulse operating point."""

    name: str
    n: int
    geometry: str
    v0_over_omega: float
    omega_max: float
    gamma_phys: float
    pulse: PulseParams
    caps: PhysicalCaps
    exponent: float = 6.0
    description: str = ""

    def graph(self, v0_over_omega: float | None = None) -> InteractionGraph:
        v0 = self.v0_over_omega if v0_over_omega is None else v0_over_omega
        return geometry_preset(self.geometry, v0, self.exponent)

    def channels(self):
        gamma = rate_over_omega(self.gamma_phys, self.omega_max)
        return tuple(cs_dissipation_model(gamma, self.n))

    def config(
        self,
        v0_over_omega: float | None = None,
        dissipative: bool = True,
    ) -> SystemConfig:
        """System configuration at this (or an overridden) interaction."""
        return SystemConfig(
            graph=self.graph(v0_over_omega),
            pulse=self.pulse,
            channels=self.channels() if dissipative else (),
        )

    def problem(
        self,
        v0_over_omega: float | None = None,
        fix_tau_gate: bool = True,
    ) -> OptimizationProblem:
        """Optimisation problem around this scenario's operating point.

        Bounds scale with the gate time; the Rabi width stays below
        tau_gate/14.9 so the drive is off (< 1e-6) at window boundaries.
        """
        tg = self.pulse.tau_gate
        bounds = {
            "delta0": (0.02, 1.5),
            "tau_r": (0.02 * tg, tg / 14.9),
            "tau_d": (0.03 * tg, 0.2 * tg),
            "tau_gate": (0.5 * tg, 1.5 * tg),
        }
        return OptimizationProblem(
            n=self.n,
            graph=self.graph(v0_over_omega),
            bounds=bounds,
            caps=self.caps,
            omega_max=self.omega_max,
            fixed=frozenset({"tau_gate"}) if fix_tau_gate else frozenset(),
        )


def _pulse(delta0, tau_r, tau_d, tau_gate, omega_max) -> PulseParams:
    return PulseParams(
        delta0=delta0,
        tau_r=tau_r,
        tau_d=tau_d,
        tau_gate=tau_gate,
        omega_max=omega_max,
    )


_OMEGA_CZ = _TWO_PI * 23.5e6
_OMEGA_CCZ = _TWO_PI * 30.0e6
_OMEGA_CONS = _TWO_PI * 5.0e6

_CAPS_CZ = PhysicalCaps(max_rabi=_TWO_PI * 35e6, max_detuning=_TWO_PI * 40e6)
_CAPS_CCZ = PhysicalCaps(max_rabi=_TWO_PI * 40e6, max_detuning=_TWO_PI * 50e6)

# 0.4 us at the respective omega_max
_TG_CZ = 0.4e-6 * _OMEGA_CZ     # 59.0619...
_TG_CCZ = 0.4e-6 * _OMEGA_CCZ   # 75.3982...

# frozen optimiser outputs (closed-system objective, tau_gate fixed)
_PULSE_CS_CZ = _pulse(
    0.4341802128284916, 3.313578889234511, 4.603409377002938, _TG_CZ, _OMEGA_CZ
)
_PULSE_YB_CZ = _pulse(
    0.47606560600863435, 3.168390488713464, 4.054715365162213, _TG_CZ, _OMEGA_CZ
)
_PULSE_CS_CCZ = _pulse(
    0.3195146463712192, 4.423390444079356, 6.7673322750285205, _TG_CCZ, _OMEGA_CCZ
)
_PULSE_YB_CCZ = _pulse(
    0.48496783176986797, 4.230523416353651, 5.875071161655351, _TG_CCZ, _OMEGA_CCZ
)
_PULSE_CONS = _pulse(
    0.6827754525606081, 2.1061946417859626, 2.9268300644729304, 37.70, _OMEGA_CONS
)

SCENARIOS: dict[str, Scenario] = {}


def _register(sc: Scenario) -> None:
    SCENARIOS[sc.name] = sc


_register(
    Scenario(
        name="cs-cz",
        n=2,
        geometry="pair",
        v0_over_omega=3000.0 / 23.5,
        omega_max=_OMEGA_CZ,
        gamma_phys=1.0 / 540e-6,
        pulse=_PULSE_CS_CZ,
        caps=_CAPS_CZ,
        description="alkali-atom CZ, V0 = 2pi*3 GHz, 540 us lifetime",
    )
)
_register(
    Scenario(
        name="yb-cz",
        n=2,
        geometry="pair",
        v0_over_omega=6850.0 / 23.5,
        omega_max=_OMEGA_CZ,
        gamma_phys=1.0 / 100e-6,
        pulse=_PULSE_YB_CZ,
        caps=_CAPS_CZ,
        description="alkaline-earth CZ, V0 = 2pi*6.85 GHz, 100 us lifetime",
    )
)
_register(
    Scenario(
        name="cs-ccz",
        n=3,
        geometry="triangle",
        v0_over_omega=100.0,
        omega_max=_OMEGA_CCZ,
        gamma_phys=1.0 / 540e-6,
        pulse=_PULSE_CS_CCZ,
        caps=_CAPS_CCZ,
        description="alkali-atom CCZ on an equilateral triangle",
    )
)
_register(
    Scenario(
        name="yb-ccz",
        n=3,
        geometry="triangle",
        v0_over_omega=6850.0 / 30.0,
        omega_max=_OMEGA_CCZ,
        gamma_phys=1.0 / 100e-6,
        pulse=_PULSE_YB_CCZ,
        caps=_CAPS_CCZ,
        description="alkaline-earth CCZ, V0 = 2pi*6.85 GHz",
    )
)
_register(
    Scenario(
        name="cs-conservative",
        n=2,
        geometry="pair",
        v0_over_omega=80.0,
        omega_max=_OMEGA_CONS,
        gamma_phys=1.0 / 130e-6,
        pulse=_PULSE_CONS,
        caps=_CAPS_CZ,
        description="conservative hardware benchmark, V0 = 2pi*400 MHz",
    )
)
_register(
    Scenario(
        name="cccz-pyramid",
        n=4,
        geometry="tetrahedron",
        v0_over_omega=100.0,
        omega_max=_OMEGA_CCZ,
        gamma_phys=1.0 / 540e-6,
        pulse=_PULSE_CS_CCZ,
        caps=_CAPS_CCZ,
        description="four atoms, all pairs blockaded; CCZ pulse unchanged",
    )
)
_register(
    Scenario(
        name="cccz-square",
        n=4,
        geometry="square",
        v0_over_omega=100.0,
        omega_max=_OMEGA_CCZ,
        gamma_phys=1.0 / 540e-6,
        pulse=_PULSE_CS_CCZ,
        caps=_CAPS_CCZ,
        description="four atoms on a square; weaker diagonal pairs",
    )
)


def scenario_names() -> list[str]:
    return sorted(SCENARIOS)


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise KeyError(
            f"unknown scenario {name!r}; available: {', '.join(scenario_names())}"
        ) from None
