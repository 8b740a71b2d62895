import math

import numpy as np
import pytest

import weaktherm as wt


def independent_error_closed_form(beta, xi, nu):
    """Independent algebraic route to the thermalization error.

    Derived directly from the two-design averages E|<f|chi>|^4 = 1/3,
    E[|<f|A|chi>|^2 |<chi|f>|^2] = (1 + <A>_f^2)/6 and a vanishing cross
    term:  N^2 = (8/3) (2 t^2 + 1 + sin^2 xi sin^2 nu)
                 / ( beta^2 (1-t^2)^2 (1 + cos(xi) t)^2 ).
    """
    t = math.tanh(beta / 2.0)
    num = (8.0 / 3.0) * (2.0 * t * t + 1.0 + math.sin(xi) ** 2 * math.sin(nu) ** 2)
    den = beta**2 * (1.0 - t * t) ** 2 * (1.0 + math.cos(xi) * t) ** 2
    return math.sqrt(num / den)


def test_closed_form_matches_independent_derivation(rng):
    for _ in range(60):
        beta = rng.uniform(0.05, 8.0)
        xi = rng.uniform(0.0, math.pi)
        nu = rng.uniform(0.0, 2 * math.pi)
        mine = independent_error_closed_form(beta, xi, nu)
        theirs = wt.rms_error_thermalization_closed(beta, xi, nu)
        assert theirs == pytest.approx(mine, rel=1e-12)


def test_rms_error_plus_values():
    direct = math.sqrt((1.0 + 4.0 * math.cosh(1.0) + 3.0 * math.cosh(2.0)) / 3.0)
    assert wt.rms_error_plus(1.0) == pytest.approx(direct, rel=1e-14)
    assert wt.rms_error_plus(1.0) == pytest.approx(2.4805180650, abs=1e-9)


def test_rms_error_plus_small_beta_divergence():
    beta = 1e-4
    assert wt.rms_error_plus(beta) * beta == pytest.approx(math.sqrt(8.0 / 3.0), abs=1e-6)


def test_error_forms_reject_nonpositive_beta():
    for fn in (
        lambda: wt.rms_error_plus(0.0),
        lambda: wt.rms_error_thermalization_closed(-1.0, 1.0, 0.0),
        lambda: wt.rms_error_postselection(0.0, 1.0),
    ):
        with pytest.raises(ValueError):
            fn()


def test_specialization_identity_on_grid():
    for beta in np.linspace(0.05, 20.0, 200):
        a = wt.rms_error_thermalization_closed(beta, math.pi / 2, 0.0)
        b = wt.rms_error_plus(beta)
        assert abs(a - b) <= 1e-12 * b


def test_apparent_beta_unperturbed(canonical_setup):
    chi = wt.bloch_to_state(1.1, 0.4)
    model = wt.ImperfectThermalization(0.0, chi)
    for beta in (0.2, 1.0, 3.0):
        assert wt.apparent_beta_imperfect(beta, model, canonical_setup) == pytest.approx(beta, abs=1e-12)


def test_apparent_beta_ground_state_contaminant(canonical_setup):
    # contaminant |psi_1>: c1 = 1 - delta, c2 = i delta, so the apparent
    # inverse temperature is real: 2 arctanh((1-delta) t + delta)
    delta, beta = 1e-3, 1.0
    model = wt.ImperfectThermalization(delta, wt.PureState([1.0, 0.0]))
    got = wt.apparent_beta_imperfect(beta, model, canonical_setup)
    t = math.tanh(beta / 2.0)
    expected = 2.0 * math.atanh((1.0 - delta) * t + delta)
    assert got == pytest.approx(expected, abs=1e-12)
    assert abs(got.imag) <= 1e-15
    assert abs(got - beta) <= 3.0 * delta


def test_apparent_beta_agrees_with_exact_weak_value_route(canonical_setup):
    # replacing the probe state by the contaminated one inside the exact weak
    # value and inverting reproduces the first-order-in-delta model to O(d^2)
    chi = wt.bloch_to_state(0.8, 2.1)
    beta = 1.0
    diffs = {}
    for delta in (2e-3, 1e-3):
        model = wt.ImperfectThermalization(delta, chi)
        modeled = wt.apparent_beta_imperfect(beta, model, canonical_setup)
        rho = canonical_setup.thermal_state(beta).matrix
        rho_d = wt.DensityMatrix((1 - delta) * rho + delta * chi.projector())
        f = canonical_setup.post_selection.amplitudes
        aw = complex(f.conj() @ canonical_setup.observable.matrix @ rho_d.matrix @ f) / complex(
            f.conj() @ rho_d.matrix @ f
        )
        exact = complex(2.0 * np.arctanh(-1j * aw))
        diffs[delta] = abs(exact - modeled)
        assert diffs[delta] <= 1e-5
    assert 3.0 <= diffs[2e-3] / diffs[1e-3] <= 5.0


def test_quadrature_oracle_matches_closed_form(canonical_setup):
    quad = wt.SphereQuadrature(64, 128)
    for T in (0.79, 2.0):
        beta = 1.0 / T
        numeric = wt.rms_error_thermalization_numeric(beta, canonical_setup, 1e-3, quad)
        closed = wt.rms_error_plus(beta)
        assert abs(numeric - closed) / closed <= 2e-3


def test_quadrature_oracle_matches_closed_form_at_generic_angles():
    spec = wt.EnergySpectrum([0.0, 1.0])
    obs = wt.HermitianOperator([[0, -1j], [1j, 0]])
    quad = wt.SphereQuadrature(48, 96)
    for xi, nu in ((0.7, 0.0), (math.pi / 3, 1.1), (2.2, 4.0)):
        setup = wt.ThermometrySetup(spec, obs, wt.bloch_to_state(xi, nu))
        numeric = wt.rms_error_thermalization_numeric(1.0, setup, 1e-3, quad)
        closed = wt.rms_error_thermalization_closed(1.0, xi, nu)
        assert abs(numeric - closed) / closed <= 2e-3


def test_monte_carlo_oracle_matches_quadrature(canonical_setup):
    quad = wt.SphereQuadrature(64, 128)
    numeric = wt.rms_error_thermalization_numeric(1.0, canonical_setup, 1e-3, quad)
    mc = wt.rms_error_thermalization_numeric(1.0, canonical_setup, 1e-3, wt.MonteCarloRule(20_000, 5))
    assert abs(mc.value - numeric) <= 4.0 * mc.stderr


def test_numeric_discrepancy_is_first_order_in_delta(canonical_setup):
    quad = wt.SphereQuadrature(48, 96)
    closed = wt.rms_error_plus(1.0)
    disc = {
        d: abs(wt.rms_error_thermalization_numeric(1.0, canonical_setup, d, quad) - closed)
        for d in (2e-3, 1e-3)
    }
    assert 1.6 <= disc[2e-3] / disc[1e-3] <= 2.4


def test_sphere_average_of_limit_integrand_matches_plus_error():
    # the delta -> 0 integrand averaged over the sphere reproduces the closed
    # form exactly (the integrand is a low-order trig polynomial)
    quad = wt.SphereQuadrature(64, 128)
    integrand = wt.first_order_error_integrand(1.0, math.pi / 2, 0.0)
    avg = wt.sphere_average(integrand, quad)
    assert math.sqrt(avg) == pytest.approx(wt.rms_error_plus(1.0), abs=1e-6)


def test_numeric_error_model_rejects_out_of_band_delta(canonical_setup):
    quad = wt.SphereQuadrature(8, 8)
    with pytest.raises(ValueError):
        wt.rms_error_thermalization_numeric(1.0, canonical_setup, 0.2, quad)


def test_optimal_window_thermalization_balanced():
    w = wt.optimal_temperature_thermalization(math.pi / 2, 0.0)
    assert w.interior
    assert w.T_opt == pytest.approx(1.0 / 1.2586490826000263, abs=1e-6)
    assert w.T_opt == pytest.approx(0.7945, abs=5e-4)
    assert w.error_min == pytest.approx(wt.rms_error_plus(1.0 / w.T_opt), rel=1e-10)


def test_optimal_window_sweep_stays_above_strong_reference():
    ref = wt.strong_scheme_reference()
    peaks = []
    for xi in np.linspace(0.0, math.pi, 8):
        for nu in np.linspace(0.0, 2 * math.pi, 8, endpoint=False):
            w = wt.optimal_temperature_thermalization(xi, nu)
            peaks.append((w.T_opt, w.peak_precision))
            assert w.T_opt > ref
    assert ref == pytest.approx(0.41678, abs=1e-5)


def test_near_eigenstate_postselection_raises_peak_precision():
    near_ground = wt.optimal_temperature_thermalization(1e-3, 0.0)
    balanced = wt.optimal_temperature_thermalization(math.pi / 2, 0.0)
    assert near_ground.peak_precision > balanced.peak_precision


def test_strong_scheme_reference_root():
    t = wt.strong_scheme_reference()
    assert t == pytest.approx(0.4167782798, abs=1e-9)
    assert abs(math.exp(1.0 / t) - (1.0 + 2.0 * t) / (1.0 - 2.0 * t)) < 1e-10


def test_postselection_error_values():
    t = math.tanh(0.5)
    assert wt.rms_error_postselection(1.0, math.pi / 2) == pytest.approx(4.0 / (1.0 - t * t), rel=1e-12)
    assert wt.rms_error_postselection(1.0, math.pi / 2) == pytest.approx(5.0862, abs=1e-4)
    # precision vanishes linearly at high temperature
    beta = 1e-5
    assert 1.0 / wt.rms_error_postselection(beta, math.pi / 2) == pytest.approx(beta / 4.0, rel=1e-4)
    # polar-angle extremes differ by the thermal odds factor
    ratio = wt.rms_error_postselection(1.0, math.pi) / wt.rms_error_postselection(1.0, 0.0)
    assert ratio == pytest.approx((1.0 + t) / (1.0 - t), rel=1e-12)


def test_postselection_window_endpoints():
    t0 = wt.optimal_temperature_postselection(0.0)
    tpi = wt.optimal_temperature_postselection(math.pi)
    assert t0 == pytest.approx(0.5642348, abs=1e-5)
    assert tpi == pytest.approx(1.1256598, abs=1e-5)
    mid = wt.optimal_temperature_postselection(math.pi / 2)
    assert t0 < mid < tpi
    # stationarity residual at the returned root
    assert abs(wt.postselection_window_implied_cosine(tpi) + 1.0) < 1e-3


def test_postselection_window_cross_validation_holds_for_test_angles():
    for xi in (0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4, math.pi):
        t_opt = wt.optimal_temperature_postselection(xi)
        assert 0.1 < t_opt < 5.0


def test_postselection_tradeoff_monotone():
    t_prev, p_prev = None, None
    for xi in np.linspace(0.0, math.pi, 9):
        t_opt = wt.optimal_temperature_postselection(xi)
        peak = 1.0 / wt.rms_error_postselection(1.0 / t_opt, xi)
        if t_prev is not None:
            assert t_opt > t_prev
            assert peak < p_prev
        t_prev, p_prev = t_opt, peak


def test_unsharp_weak_values_at_zero_noise(canonical_setup):
    pair = wt.perturbed_weak_value_unsharp(canonical_setup, 1.0, 0.0)
    aw = wt.weak_value(canonical_setup, 1.0).value
    assert pair.exact.value == pytest.approx(aw, abs=1e-14)
    assert pair.first_order == pytest.approx(aw, abs=1e-14)


def test_unsharp_weak_value_balanced_postselection_is_exactly_linear(canonical_setup):
    # with balanced post-selection the exact ratio is (1 - eps) A_w: the
    # expansion has no second-order remainder at all
    aw = wt.weak_value(canonical_setup, 1.0).value
    for eps in (0.01, 0.2):
        pair = wt.perturbed_weak_value_unsharp(canonical_setup, 1.0, eps)
        assert pair.exact.value == pytest.approx((1.0 - eps) * aw, abs=1e-14)
        assert pair.first_order == pytest.approx(pair.exact.value, abs=1e-14)


def test_unsharp_expansion_second_order_off_balance():
    setup = wt.ThermometrySetup(
        wt.EnergySpectrum([0.0, 1.0]),
        wt.HermitianOperator([[0, -1j], [1j, 0]]),
        wt.bloch_to_state(0.9, 0.3),
    )
    resid = {}
    defect = {}
    for eps in (0.02, 0.01):
        pair = wt.perturbed_weak_value_unsharp(setup, 1.0, eps)
        resid[eps] = abs(pair.exact.value - pair.first_order)
        defect[eps] = abs(pair.exact.value - wt.unsharp_weak_value_trace_defect_form(setup, 1.0, eps))
    assert resid[0.02] / resid[0.01] >= 3.5  # true expansion: O(eps^2)
    assert 1.6 <= defect[0.02] / defect[0.01] <= 2.4  # variant form: O(eps)


def test_model_dataclass_validation():
    chi = wt.PureState([1.0, 0.0])
    with pytest.raises(ValueError):
        wt.ImperfectThermalization(0.3, chi)
    with pytest.raises(ValueError):
        wt.UnsharpPostSelection(0.6, chi)
    eff = wt.UnsharpPostSelection(0.4, chi).effective_matrix()
    wt.DensityMatrix(eff)  # valid state


def test_build_precision_curve_thermalization():
    grid = np.arange(0.05, 5.0, 0.01)
    curve = wt.build_precision_curve("thermalization", math.pi / 2, 0.0, grid)
    assert curve.T_opt == pytest.approx(0.7945, abs=1e-3)
    k = int(np.argmax(curve.precisions))
    assert abs(curve.temperatures[k] - curve.T_opt) <= 0.01
    assert not curve.degenerate
    np.testing.assert_allclose(curve.precisions, 1.0 / curve.errors)


def test_build_precision_curve_postselection_shift_and_loss():
    grid = np.arange(0.1, 3.0, 0.01)
    left = wt.build_precision_curve("postselection", 0.0, 0.0, grid)
    right = wt.build_precision_curve("postselection", math.pi, 0.0, grid)
    assert right.T_opt > left.T_opt
    assert right.peak_precision < left.peak_precision


def test_build_precision_curve_qfi_degenerate():
    grid = np.arange(0.1, 3.0, 0.1)
    curve = wt.build_precision_curve("qfi", 0.0, 0.0, grid)
    assert curve.degenerate
    assert np.all(curve.precisions == 0.0)
    assert np.all(np.isinf(curve.errors))


def test_build_precision_curve_validates_grid():
    with pytest.raises(ValueError):
        wt.build_precision_curve("thermalization", 1.0, 0.0, [0.5, 0.4])
    with pytest.raises(ValueError):
        wt.build_precision_curve("nonsense", 1.0, 0.0, [0.5, 0.6])
