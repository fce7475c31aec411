import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import normalized, param_sets
from oms.model import Convention, make_params, set_value, swap_ports
from oms.response import (
    SingularResponseError,
    closed_form_delta_a,
    solve_fluctuation_system,
    spectrum,
    spectrum_arrays,
    transmission_point,
)
from oms.steady_state import steady_state

X = np.linspace(-0.2, 0.2, 401)


def test_linear_solve_matches_frozen_high_precision_values(oracles):
    for case in oracles["cases"]:
        p = normalized(case["preset"])
        s = steady_state(p)
        for pt in case["points"]:
            f = solve_fluctuation_system(p, s, pt["x"]).as_array()
            want = np.array([complex(*v) for v in pt["delta"]])
            np.testing.assert_allclose(f, want, rtol=1e-8, err_msg=f"{case['preset']} x={pt['x']}")
            tp = transmission_point(p, pt["x"])
            assert tp.t_21 == pytest.approx(pt["t_21"], rel=1e-8)
            assert tp.t_12 == pytest.approx(pt["t_12"], rel=1e-8)


@given(param_sets(), st.floats(min_value=-0.3, max_value=0.3))
@settings(max_examples=300, deadline=None)
def test_closed_form_equals_linear_solve(p, x):
    s = steady_state(p)
    d1, d2 = closed_form_delta_a(p, s, x)
    f = solve_fluctuation_system(p, s, x)
    assert abs(d1 - f.da1p) <= 1e-10 * abs(f.da1p)
    assert abs(d2 - f.da2p) <= 1e-10 * abs(f.da2p)


@given(param_sets())
@settings(max_examples=50, deadline=None)
def test_literal_convention_also_matches_linear_solve(p):
    p = replace(p, convention=Convention.LITERAL)
    s = steady_state(p)
    a = spectrum_arrays(p, X, s)
    b = spectrum_arrays(p, X, s, method="linear_solve")
    np.testing.assert_allclose(a.t_21, b.t_21, rtol=1e-9)
    np.testing.assert_allclose(a.t_12, b.t_12, rtol=1e-9)


def test_flipped_product_sign_breaks_path_agreement():
    p = normalized("fig3a")
    s = steady_state(p)
    f = solve_fluctuation_system(p, s, 0.0)
    _, good = closed_form_delta_a(p, s, 0.0)
    _, flipped = closed_form_delta_a(p, s, 0.0, flip_product_sign=True)
    assert abs(good - f.da2p) <= 1e-10 * abs(f.da2p)
    assert abs(flipped - f.da2p) > 1e-3 * abs(f.da2p)


def test_uncoupled_transmission_has_closed_form():
    # no coupling: da_j = D / (kappa_j - i y_j), so T = (9 kappa^2 + y^2) / (kappa^2 + y^2) for D = 2 Omega_p
    p = set_value(normalized("fig2c"), "o_m1", 0.0)
    for name in ("o_m2", "o_m31", "o_m32"):
        p = set_value(p, name, 0.0)
    sp = spectrum_arrays(p, X)
    k = p.optical[0].kappa
    for t, delta in ((sp.t_21, 1.1), (sp.t_12, 0.9)):
        y = X - (delta - 1.0)
        np.testing.assert_allclose(t, (9 * k**2 + y**2) / (k**2 + y**2), rtol=1e-12)


def test_antiphase_probes_transmit_exactly_one():
    p = normalized("fig3a")
    # e^{i pi} leaves a 1e-16 imaginary part in D; the outputs are still -Omega_p to rounding
    p = replace(p, probe=replace(p.probe, phi_p1=0.0, phi_p2=math.pi, omega_p2=p.probe.omega_p1))
    sp = spectrum_arrays(p, X)
    assert np.max(np.abs(sp.t_12 - 1)) <= 1e-14
    assert np.max(np.abs(sp.t_21 - 1)) <= 1e-14


def test_reciprocal_without_middle_couplings():
    p = normalized("fig2c")
    p = set_value(p, "o_m3", 0.0)
    p = replace(p, target_detunings=(1.0, 1.0, 1.0))
    sp = spectrum_arrays(p, np.linspace(-0.2, 0.2, 2001))
    assert np.max(np.abs(sp.t_12 - sp.t_21)) <= 1e-12


@given(param_sets(), st.floats(min_value=-math.pi, max_value=math.pi))
@settings(max_examples=60, deadline=None)
def test_global_drive_phase_is_invisible(p, theta):
    q = replace(p, drive=replace(p.drive, phi_d1=p.drive.phi_d1 + theta, phi_d2=p.drive.phi_d2 + theta))
    a = spectrum_arrays(p, X)
    b = spectrum_arrays(q, X)
    np.testing.assert_allclose(b.t_12, a.t_12, rtol=1e-11)
    np.testing.assert_allclose(b.t_21, a.t_21, rtol=1e-11)


@given(param_sets())
@settings(max_examples=60, deadline=None)
def test_port_swap_exchanges_channels(p):
    """Swapping every port label exchanges T_12 and T_21 (ROTATED needs equal omega_m)."""
    p = set_value(p, "omega_m2", 1.0)
    a = spectrum_arrays(p, X)
    b = spectrum_arrays(swap_ports(p), X)
    np.testing.assert_allclose(b.t_12, a.t_21, rtol=1e-9)
    np.testing.assert_allclose(b.t_21, a.t_12, rtol=1e-9)


@given(param_sets())
@settings(max_examples=60, deadline=None)
def test_transmissions_are_finite_and_nonnegative(p):
    sp = spectrum_arrays(p, X)
    assert np.all(np.isfinite(sp.t_12)) and np.all(sp.t_12 >= 0)
    assert np.all(np.isfinite(sp.t_21)) and np.all(sp.t_21 >= 0)


def test_zero_damping_pole_is_reported():
    p = make_params(
        kappa=(0.1, 0.1, 0.1), omega_m=(1.0, 1.0), gamma=(0.0, 0.0),
        o_m1=0.0, o_m2=0.0, o_m31=0.0, o_m32=0.0,
        omega_d=(1.0, 1.0), omega_p=(0.1, 0.1), delta_a=(1.0, 1.0, 1.0),
    )
    with pytest.raises(SingularResponseError, match="x = 0.0"):
        closed_form_delta_a(p, steady_state(p), np.array([-0.1, 0.0, 0.1]))


def test_spectrum_grid_checks():
    p = normalized("fig2a")
    with pytest.raises(ValueError):
        spectrum(p, [])
    with pytest.raises(ValueError):
        spectrum(p, [0.1, 0.0])
    pts = spectrum(p, [-0.1, 0.0, 0.1])
    assert [pt.delta_p for pt in pts] == pytest.approx([0.9, 1.0, 1.1])


def test_transmissions_need_both_probes():
    p = set_value(normalized("fig2a"), "omega_p2", 0.0)
    with pytest.raises(ValueError):
        spectrum_arrays(p, X)
