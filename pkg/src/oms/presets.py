"""Named parameter scenarios.

Rates are quoted as frequency/2pi and converted to rad/s here. Each
scenario fixes the effective detunings; those are stored as
``target_detunings`` and win over the quoted bare detunings, which are kept
in ``caption_bare_detunings`` for the record.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .model import SystemParams, make_params, set_value

TWO_PI = 2.0 * math.pi
GHZ, MHZ, KHZ = 1e9, 1e6, 1e3

OMEGA_M = TWO_PI * 12.6 * GHZ
KAPPA = TWO_PI * 73 * MHZ
GAMMA = TWO_PI * 88 * KHZ
O_FIG2 = TWO_PI * 1.5 * MHZ

# default probe-offset window of every scenario, in units of omega_m1
X_RANGE = (-0.2, 0.2)
X_COUNT = 2001


@dataclass(frozen=True)
class ScenarioPreset:
    name: str
    description: str
    params: SystemParams
    caption_bare_detunings: tuple[float, float, float]
    sweep_parameter: str | None = None
    sweep_range: tuple[float, float] | None = None
    notes: dict = field(default_factory=dict)


def _fig2_base(targets=(1.0, 1.0, 1.0)) -> SystemParams:
    return make_params(
        kappa=(KAPPA, KAPPA, KAPPA),
        omega_m=(OMEGA_M, OMEGA_M),
        gamma=(GAMMA, GAMMA),
        o_m1=O_FIG2,
        o_m2=O_FIG2,
        o_m31=O_FIG2,
        o_m32=O_FIG2,
        omega_d=(2 * OMEGA_M, 2 * OMEGA_M),
        omega_p=(0.2 * OMEGA_M, 0.2 * OMEGA_M),
        delta_a=tuple(TWO_PI * v * GHZ for v in (79.96, 78.38, 84.71)),
        targets=tuple(t * OMEGA_M for t in targets),
    )


FIG2_BARE = tuple(TWO_PI * v * GHZ for v in (79.96, 78.38, 84.71))
FIG3_BARE = tuple(TWO_PI * v * GHZ for v in (79.168, 79.160, 79.96))


def _fig3(o_m1_mhz, o_m2_mhz, o_m3_mhz=48.5) -> SystemParams:
    p = _fig2_base()
    for name, value in zip(("delta_a1", "delta_a2", "delta_a3"), FIG3_BARE):
        p = set_value(p, name, value)
    p = set_value(p, "o_m1", TWO_PI * o_m1_mhz * MHZ)
    p = set_value(p, "o_m2", TWO_PI * o_m2_mhz * MHZ)
    return set_value(p, "o_m3", TWO_PI * o_m3_mhz * MHZ)


def _fig4(k1_mhz, k2_mhz) -> SystemParams:
    p = _fig2_base()
    p = set_value(p, "kappa_1", TWO_PI * k1_mhz * MHZ)
    return set_value(p, "kappa_2", TWO_PI * k2_mhz * MHZ)


def _fig5(phi_p1, phi_p2) -> SystemParams:
    p = _fig2_base()
    return replace(p, probe=replace(p.probe, phi_p1=phi_p1, phi_p2=phi_p2))


def _build() -> dict[str, ScenarioPreset]:
    presets = [
        ScenarioPreset("fig2a", "all effective detunings at omega_m1", _fig2_base(), FIG2_BARE),
        ScenarioPreset("fig2c", "Delta_1 = 1.1, Delta_2 = 0.9 omega_m1", _fig2_base((1.1, 0.9, 1.0)), FIG2_BARE),
        ScenarioPreset("fig2d", "Delta_1 = 0.9, Delta_2 = 1.1 omega_m1", _fig2_base((0.9, 1.1, 1.0)), FIG2_BARE),
        ScenarioPreset("fig3a", "O_m1 = 1 MHz, O_m2 = 60 MHz, O_m3 = 48.5 MHz", _fig3(1, 60), FIG3_BARE),
        ScenarioPreset("fig3b", "O_m1 = 60 MHz, O_m2 = 1 MHz, O_m3 = 48.5 MHz", _fig3(60, 1), FIG3_BARE),
        ScenarioPreset(
            "fig3cd",
            "waterfall over O_m3 with O_m1 = 1 MHz, O_m2 = 60 MHz",
            _fig3(1, 60),
            FIG3_BARE,
            sweep_parameter="o_m3",
            sweep_range=(0.0, TWO_PI * 48.5 * MHZ),
        ),
        ScenarioPreset("fig4a", "kappa_1 = 83 MHz, kappa_2 = 3 MHz", _fig4(83, 3), FIG2_BARE),
        ScenarioPreset("fig4b", "kappa_1 = 3 MHz, kappa_2 = 83 MHz", _fig4(3, 83), FIG2_BARE),
        ScenarioPreset("fig5a", "probe phases 0, 0", _fig5(0.0, 0.0), FIG2_BARE),
        ScenarioPreset("fig5b", "probe phases 2pi/3, 2pi/3", _fig5(2 * math.pi / 3, 2 * math.pi / 3), FIG2_BARE),
        ScenarioPreset("fig5c", "probe phases -2pi/3, 2pi/3", _fig5(-2 * math.pi / 3, 2 * math.pi / 3), FIG2_BARE),
        ScenarioPreset(
            "fig6",
            "density map over relative phase phi_rel in [-pi, pi]",
            _fig2_base(),
            FIG2_BARE,
            sweep_parameter="phi_rel",
            sweep_range=(-math.pi, math.pi),
            notes={"phi_rel_attribution": "phi_rel/2 on each probe phase, drive phases 0"},
        ),
    ]
    return {p.name: p for p in presets}


PRESETS = _build()


def get_preset(name: str) -> ScenarioPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None


def list_presets() -> list[tuple[str, str]]:
    return [(p.name, p.description) for p in PRESETS.values()]
