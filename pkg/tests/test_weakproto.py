import math

import numpy as np
import pytest

import weaktherm as wt
from weaktherm.errors import (
    BoundUndefinedError,
    DegeneratePostselectionError,
    InformativenessWarning,
    UninformativeConfigurationError,
)


def test_weak_value_canonical_configuration(canonical_setup):
    aw = wt.weak_value(canonical_setup, 1.0)
    assert aw.method == "exact"
    assert aw.value == pytest.approx(1j * math.tanh(0.5), abs=1e-13)
    assert aw.value.imag == pytest.approx(0.46212, abs=5e-6)


def test_weak_value_agrees_with_closed_form(canonical_setup):
    for beta in (0.05, 0.8, 3.0, 12.0):
        general = wt.weak_value(canonical_setup, beta).value
        closed = wt.weak_value_qubit_closed_form(beta, 0.0, 1.0).value
        assert general == pytest.approx(closed, abs=1e-12)


def test_weak_value_infinite_temperature(canonical_setup):
    assert wt.weak_value(canonical_setup, 0.0).value == pytest.approx(0.0, abs=1e-14)


def test_commuting_observable_has_no_weak_signal():
    # a diagonal observable never produces an imaginary weak value: the
    # pointer-momentum signature of the weak protocol is identically absent
    spec = wt.EnergySpectrum([0.0, 1.0])
    plus = wt.PureState(np.ones(2) / math.sqrt(2))
    with pytest.warns(InformativenessWarning):
        setup = wt.ThermometrySetup(spec, wt.sigma_z(), plus)
    for b in (0.0, 0.5, 1.0, 2.0):
        aw = wt.weak_value(setup, b).value
        assert abs(aw.imag) <= 1e-14
    # post-selecting in the energy basis, the weak value is a constant
    # eigenvalue regardless of temperature
    with pytest.warns(InformativenessWarning):
        ground = wt.ThermometrySetup(spec, wt.sigma_z(), wt.PureState([1.0, 0.0]))
    values = [wt.weak_value(ground, b).value for b in (0.0, 0.5, 1.0, 2.0)]
    assert max(abs(v - values[0]) for v in values) <= 1e-12


def test_weak_value_invariant_under_postselection_phase(rng, canonical_setup):
    spec = canonical_setup.spec
    obs = canonical_setup.observable
    base = wt.weak_value(canonical_setup, 1.3).value
    for _ in range(10):
        phase = np.exp(1j * rng.uniform(0, 2 * np.pi))
        setup = wt.ThermometrySetup(spec, obs, wt.PureState(phase * canonical_setup.post_selection.amplitudes))
        assert wt.weak_value(setup, 1.3).value == pytest.approx(base, abs=1e-12)


def test_weak_value_imaginary_part_odd_in_level_swap():
    for beta in (0.3, 1.0, 2.5):
        up = wt.weak_value_qubit_closed_form(beta, 0.0, 1.0).value
        down = wt.weak_value_qubit_closed_form(beta, 1.0, 0.0).value
        assert up.imag == pytest.approx(-down.imag, abs=1e-14)
    # the general path sees the swap through a permuted eigenbasis
    swapped = wt.EnergySpectrum([0.0, 1.0], eigenbasis=[[0, 1], [1, 0]])
    plus = wt.PureState(np.ones(2) / math.sqrt(2))
    setup = wt.ThermometrySetup(swapped, wt.sigma_y(), plus)
    assert wt.weak_value(setup, 1.0).value == pytest.approx(
        wt.weak_value_qubit_closed_form(1.0, 1.0, 0.0).value, abs=1e-12
    )


def test_degenerate_spectrum_gives_zero_weak_value():
    for beta in (0.0, 0.7, 5.0):
        assert wt.weak_value_qubit_closed_form(beta, 1.0, 1.0).value == 0.0


def test_degenerate_postselection_raises(canonical_setup):
    spec = canonical_setup.spec
    excited = wt.PureState([0.0, 1.0])
    setup = wt.ThermometrySetup(spec, canonical_setup.observable, excited)
    with pytest.raises(DegeneratePostselectionError):
        wt.weak_value(setup, 800.0)


def test_high_temperature_expansion_values(canonical_setup):
    aw = wt.weak_value_high_temperature(canonical_setup, 0.1)
    assert aw.method == "high_temperature"
    assert aw.value == pytest.approx(0.05j, abs=1e-15)
    exact = wt.weak_value(canonical_setup, 0.1).value
    assert exact == pytest.approx(1j * math.tanh(0.05), abs=1e-14)
    assert abs(aw.value - exact) < 5e-5
    at_zero = wt.weak_value_high_temperature(canonical_setup, 0.0)
    assert at_zero.value == pytest.approx(wt.expectation(canonical_setup.observable, canonical_setup.post_selection), abs=1e-15)


def test_high_temperature_residual_is_third_order(canonical_setup):
    err = {}
    for beta in (0.2, 0.1):
        err[beta] = abs(
            wt.weak_value(canonical_setup, beta).value
            - wt.weak_value_high_temperature(canonical_setup, beta).value
        )
    assert err[0.2] / err[0.1] >= 4.0


def test_invert_high_temperature(canonical_setup):
    inv = wt.invert_beta_high_temperature(0.05j, canonical_setup)
    assert inv.beta == pytest.approx(0.1, abs=1e-12)
    assert inv.imaginary_residual == pytest.approx(0.0, abs=1e-12)
    assert wt.invert_beta_high_temperature(0.0j, canonical_setup).beta == pytest.approx(0.0, abs=1e-15)


def test_invert_high_temperature_matches_qubit_shortcut(canonical_setup):
    # the general inversion and -2i A_w / gap agree on the canonical setup
    aw = wt.weak_value(canonical_setup, 0.4).value
    general = wt.invert_beta_high_temperature(aw, canonical_setup).beta
    shortcut = (-2j * aw / canonical_setup.spec.gap).real
    assert general == pytest.approx(shortcut, abs=1e-12)


def test_invert_high_temperature_uninformative():
    spec = wt.EnergySpectrum([0.0, 1.0])
    with pytest.warns(InformativenessWarning):
        setup = wt.ThermometrySetup(spec, wt.identity(2), wt.PureState([1.0, 0.0]))
    with pytest.raises(UninformativeConfigurationError):
        wt.invert_beta_high_temperature(0.1j, setup)


def test_invert_exact_qubit(canonical_setup):
    aw = wt.weak_value(canonical_setup, 1.0)
    assert wt.invert_beta_exact_qubit(aw, 1.0) == pytest.approx(1.0, abs=1e-10)
    assert wt.invert_beta_exact_qubit(0.0j, 1.0) == 0.0


def test_invert_exact_roundtrip_bijectivity():
    # conditioning of arctanh near 1 costs ~eps*cosh^2(beta/2) in absolute
    # terms; the 1e-10 figure is attainable up to beta ~ 15
    eps = np.finfo(float).eps
    for beta in np.geomspace(0.01, 20.0, 120):
        aw = wt.weak_value_qubit_closed_form(beta, 0.0, 1.0)
        back = wt.invert_beta_exact_qubit(aw, 1.0)
        budget = max(1e-10, 8.0 * eps * math.cosh(beta / 2.0) ** 2)
        assert abs(back - beta) <= budget
        if beta <= 15.0:
            assert abs(back - beta) <= 1e-10


def test_temperature_bound_undefined_for_purely_imaginary_weak_value(canonical_setup):
    with pytest.raises(BoundUndefinedError):
        wt.temperature_lower_bound(canonical_setup, 1.0)


def test_temperature_bound_generic_setup_reports_flags():
    spec = wt.EnergySpectrum([0.0, 1.0])
    obs = wt.HermitianOperator(
        math.cos(0.3) * wt.sigma_x().matrix + math.sin(0.3) * wt.sigma_y().matrix
    )
    post = wt.bloch_to_state(0.4, 0.2)
    setup = wt.ThermometrySetup(spec, obs, post)
    res = wt.temperature_lower_bound(setup, 1.0)
    assert res.anomalous_value > 1e-12
    assert isinstance(res.applicable, bool)
    if res.applicable:
        assert isinstance(res.satisfied, bool)
        assert math.isfinite(res.bound)
    else:
        assert res.satisfied is None


def test_bound_audit_table_is_deterministic_and_complete():
    t1 = wt.bound_audit_table(100, (0.5, 1.0), seed=11)
    t2 = wt.bound_audit_table(100, (0.5, 1.0), seed=11)
    assert t1 == t2
    for row in t1:
        assert row["undefined"] + row["inapplicable"] + row["applicable"] == row["n"]
        if row["applicable"]:
            assert 0.0 <= row["satisfied_fraction"] <= 1.0


def test_identity_residual_values(canonical_setup):
    # at infinite temperature the thermal state has no orthogonal part
    assert wt.qubit_beta_identity_residual(canonical_setup, 0.0) == pytest.approx(0.0, abs=1e-12)
    # at beta = 1 the plain form is off by a unit phase: RHS = -2i tanh(1/2)
    t = math.tanh(0.5)
    expected = abs(-2j * t - 1.0)
    assert wt.qubit_beta_identity_residual(canonical_setup, 1.0) == pytest.approx(expected, abs=1e-10)


def test_identity_residual_inapplicable_when_covariance_vanishes():
    spec = wt.EnergySpectrum([0.0, 1.0])
    setup = wt.ThermometrySetup(spec, wt.sigma_y(), wt.PureState([1.0, 0.0]))
    with pytest.raises(UninformativeConfigurationError):
        wt.qubit_beta_identity_residual(setup, 1.0)


def test_setup_dimension_checks():
    spec = wt.EnergySpectrum([0.0, 0.5, 1.0])
    with pytest.raises(ValueError):
        wt.ThermometrySetup(spec, wt.sigma_y(), wt.PureState([1.0, 0.0]))


def test_weak_value_method_field_validation():
    with pytest.raises(ValueError):
        wt.WeakValue(1.0 + 0j, "guess")
