import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import normalized, param_sets
from oms.model import (
    PHASE_NAMES,
    RATE_NAMES,
    GeometryParams,
    UnitMode,
    coupling_from_geometry,
    flat_items,
    get_value,
    normalize_units,
    relative_phase,
    set_value,
    swap_ports,
    validate_params,
)
from oms.presets import PRESETS, list_presets
from oms.response import spectrum_arrays


def test_presets_validate_cleanly():
    for name, preset in PRESETS.items():
        report = validate_params(preset.params)
        assert report.ok, (name, report.errors)
        assert report.warnings == [], (name, report.warnings)


@pytest.mark.parametrize(
    "name, value, fragment",
    [
        ("kappa_1", 0.0, "kappa_1"),
        ("kappa_3", -1.0, "kappa_3"),
        ("gamma_2", 0.0, "gamma_2"),
        ("omega_m2", -1.0, "omega_m2"),
        ("o_m31", -1e-3, "o_m31"),
        ("omega_p1", -0.1, "omega_p1"),
        ("delta_a2", float("nan"), "not finite"),
        ("omega_d1", float("inf"), "not finite"),
    ],
)
def test_hard_errors(name, value, fragment):
    p = set_value(normalized("fig2a"), name, value)
    report = validate_params(p)
    assert not report.ok
    assert any(fragment in e for e in report.errors)


def test_normalized_mode_requires_unit_omega_m1():
    p = set_value(normalized("fig2a"), "omega_m1", 1.5)
    assert any("omega_m1" in e for e in validate_params(p).errors)


def test_advisories_are_warnings_only():
    p = normalized("fig2a")
    p = set_value(p, "kappa_1", 0.2)  # omega_m < 10 kappa
    p = set_value(p, "omega_p2", 1.0)  # probe > drive/4
    report = validate_params(p)
    assert report.ok
    # one resolved-sideband advisory per resonator, one weak-probe advisory
    assert sum("resolved-sideband" in w for w in report.warnings) == 2
    assert sum("weak-probe" in w for w in report.warnings) == 1


def test_geometry_coupling_matches_frozen_value(oracles):
    g = GeometryParams(
        omega_a=2 * math.pi * 193.4e12, length=5.19e-3, m_eff=20e-9, omega_m=2 * math.pi * 12.6e9
    )
    assert coupling_from_geometry(g) == pytest.approx(oracles["geometry_coupling_rad_per_s"], rel=1e-14)


@pytest.mark.parametrize("field", ["length", "m_eff", "omega_m"])
def test_geometry_rejects_nonpositive(field):
    g = GeometryParams(omega_a=1e15, length=1e-3, m_eff=1e-9, omega_m=1e10)
    with pytest.raises(ValueError):
        coupling_from_geometry(replace(g, **{field: 0.0}))


def test_flat_names_round_trip():
    p = PRESETS["fig5c"].params
    for k, name in enumerate(RATE_NAMES + PHASE_NAMES):
        q = set_value(p, name, 1.0 + k)
        assert get_value(q, name) == 1.0 + k


def test_o_m3_sets_both_couplings():
    q = set_value(PRESETS["fig2a"].params, "o_m3", 7.0)
    assert q.coupling.o_m31 == q.coupling.o_m32 == 7.0


def test_phi_rel_attribution():
    q = set_value(PRESETS["fig5c"].params, "phi_rel", 1.2)
    assert (q.drive.phi_d1, q.drive.phi_d2) == (0.0, 0.0)
    assert q.probe.phi_p1 == q.probe.phi_p2 == pytest.approx(0.6)
    assert relative_phase(q) == pytest.approx(1.2)
    for name in ("phi_rel_p1", "phi_rel_p2"):
        assert relative_phase(set_value(q, name, -0.4)) == pytest.approx(-0.4)


def test_swap_ports_is_an_involution():
    p = PRESETS["fig4a"].params
    assert swap_ports(swap_ports(p)) == p
    assert swap_ports(p).optical[0].kappa == p.optical[1].kappa


def test_normalize_round_trip():
    p = PRESETS["fig3a"].params
    n = normalize_units(p, UnitMode.OMEGA_M1_UNITS)
    assert n.omega_m1 == 1.0
    assert n.rate_unit == p.omega_m1
    back = normalize_units(n, UnitMode.RAD_PER_SEC)
    for (name, a), (_, b) in zip(flat_items(back), flat_items(p)):
        assert a == pytest.approx(b, rel=1e-15, abs=0), name
    assert normalize_units(n, UnitMode.OMEGA_M1_UNITS) is n


@given(param_sets(), st.floats(min_value=1e-3, max_value=1e3))
@settings(max_examples=40, deadline=None)
def test_transmissions_invariant_under_rate_rescaling(p, factor):
    """Scaling every rate by one factor rescales x and nothing else."""
    x = np.linspace(-0.2, 0.2, 41)
    ref = spectrum_arrays(p, x)
    q = normalize_units(replace(p, rate_unit=factor), UnitMode.RAD_PER_SEC)
    got = spectrum_arrays(q, x * factor)
    np.testing.assert_allclose(got.t_12, ref.t_12, rtol=1e-9)
    np.testing.assert_allclose(got.t_21, ref.t_21, rtol=1e-9)


def test_preset_names_and_descriptions():
    names = [n for n, _ in list_presets()]
    assert names == ["fig2a", "fig2c", "fig2d", "fig3a", "fig3b", "fig3cd", "fig4a", "fig4b", "fig5a", "fig5b", "fig5c", "fig6"]
    for _, desc in list_presets():
        assert desc and "\n" not in desc
