import math

import numpy as np
import pytest

import weaktherm as wt


def random_hermitian(rng, dim):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return wt.HermitianOperator((z + z.conj().T) / 2.0)


def random_unitary(rng, dim):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_hermitian_validation():
    with pytest.raises(ValueError):
        wt.HermitianOperator([[0, 1], [0, 0]])


def test_pure_state_validation():
    with pytest.raises(ValueError):
        wt.PureState([1.0, 1.0])
    s = wt.PureState.normalized([1.0, 1.0])
    assert s.amplitudes[0] == pytest.approx(1 / math.sqrt(2))


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        wt.DensityMatrix([[0.5, 0], [0, 0.6]])
    with pytest.raises(ValueError):
        wt.DensityMatrix([[1.5, 0], [0, -0.5]])


def test_gibbs_infinite_temperature():
    spec = wt.EnergySpectrum([0.0, 1.0])
    rho = wt.gibbs_state(spec, 0.0)
    np.testing.assert_allclose(rho.matrix, np.eye(2) / 2.0, atol=1e-14)


def test_gibbs_unit_beta_populations():
    spec = wt.EnergySpectrum([0.0, 1.0])
    rho = wt.gibbs_state(spec, 1.0)
    p0 = 1.0 / (1.0 + math.exp(-1.0))
    assert rho.matrix[0, 0].real == pytest.approx(p0, abs=1e-12)
    assert rho.matrix[1, 1].real == pytest.approx(1.0 - p0, abs=1e-12)
    assert p0 == pytest.approx(0.7311, abs=5e-5)


def test_gibbs_deep_cold_is_stable():
    spec = wt.EnergySpectrum([0.0, 1.0])
    rho = wt.gibbs_state(spec, 50.0)
    assert np.trace(rho.matrix).real == pytest.approx(1.0, abs=1e-12)
    assert rho.matrix[1, 1].real == pytest.approx(math.exp(-50.0), rel=1e-10)
    assert rho.eigenvalues().min() >= -1e-15


def test_gibbs_rejects_negative_beta():
    with pytest.raises(ValueError):
        wt.gibbs_state(wt.EnergySpectrum([0.0, 1.0]), -0.1)


def test_gibbs_commutes_with_hamiltonian(rng):
    for dim in (2, 3, 5):
        basis = random_unitary(rng, dim)
        spec = wt.EnergySpectrum(np.sort(rng.uniform(-1, 2, dim)), basis)
        h = spec.hamiltonian().matrix
        rho = wt.gibbs_state(spec, 0.7).matrix
        assert np.max(np.abs(rho @ h - h @ rho)) <= 1e-12


def test_gibbs_populations_monotone(rng):
    for beta in (0.2, 1.0, 4.0):
        levels = np.sort(rng.uniform(0, 3, 5))
        spec = wt.EnergySpectrum(levels)
        w = spec.boltzmann_weights(beta)
        assert np.all(np.diff(w) <= 1e-15)


def test_expectation_examples():
    plus = wt.PureState(np.ones(2) / math.sqrt(2))
    assert wt.expectation(wt.sigma_y(), plus) == pytest.approx(0.0, abs=1e-14)
    h = wt.EnergySpectrum([0.0, 1.0]).hamiltonian()
    assert wt.expectation(h, plus) == pytest.approx(0.5, abs=1e-14)
    assert wt.expectation(wt.identity(2), plus) == pytest.approx(1.0, abs=1e-14)


def test_expectation_dimension_mismatch():
    with pytest.raises(ValueError):
        wt.expectation(wt.identity(3), wt.PureState([1.0, 0.0]))


def test_covariance_sigma_y_hamiltonian():
    plus = wt.PureState(np.ones(2) / math.sqrt(2))
    h = wt.EnergySpectrum([0.0, 1.0]).hamiltonian()
    cov = wt.covariance(wt.sigma_y(), h, plus)
    assert cov == pytest.approx(-0.5j, abs=1e-14)


def test_covariance_self_is_variance(rng):
    for _ in range(20):
        a = random_hermitian(rng, 3)
        psi = wt.haar_random_state(3, rng)
        cov = wt.covariance(a, a, psi)
        dec = wt.vaidman_decompose(a, psi)
        assert abs(cov.imag) < 1e-12
        assert cov.real == pytest.approx(dec.deviation**2, abs=1e-10)
        assert cov.real >= -1e-12


def test_covariance_with_thermal_state_matches_brute_force():
    plus = wt.PureState(np.ones(2) / math.sqrt(2))
    rho = wt.gibbs_state(wt.EnergySpectrum([0.0, 1.0]), 1.0)
    a = wt.sigma_y()
    v = plus.amplitudes
    expected = v.conj() @ a.matrix @ rho.matrix @ v - (v.conj() @ a.matrix @ v) * (v.conj() @ rho.matrix @ v)
    assert wt.covariance(a, rho, plus) == pytest.approx(complex(expected), abs=1e-14)


def test_vaidman_sigma_y_on_plus():
    plus = wt.PureState(np.ones(2) / math.sqrt(2))
    dec = wt.vaidman_decompose(wt.sigma_y(), plus)
    assert dec.mean == pytest.approx(0.0, abs=1e-14)
    assert dec.deviation == pytest.approx(1.0, abs=1e-14)
    recon = dec.mean * plus.amplitudes + dec.deviation * dec.orthogonal.amplitudes
    np.testing.assert_allclose(recon, wt.sigma_y().matrix @ plus.amplitudes, atol=1e-12)
    assert abs(np.vdot(plus.amplitudes, dec.orthogonal.amplitudes)) < 1e-10


def test_vaidman_eigenstate_has_no_orthogonal_part():
    dec = wt.vaidman_decompose(wt.sigma_z(), wt.PureState([1.0, 0.0]))
    assert dec.mean == pytest.approx(1.0)
    assert dec.deviation == pytest.approx(0.0, abs=1e-12)
    assert dec.orthogonal is None


def test_vaidman_hamiltonian_on_plus():
    plus = wt.PureState(np.ones(2) / math.sqrt(2))
    dec = wt.vaidman_decompose(wt.EnergySpectrum([0.0, 1.0]).hamiltonian(), plus)
    assert dec.mean == pytest.approx(0.5, abs=1e-14)
    assert dec.deviation == pytest.approx(0.5, abs=1e-14)


def test_vaidman_reconstruction_property(rng):
    for dim in (2, 3, 4):
        for _ in range(10):
            a = random_hermitian(rng, dim)
            psi = wt.haar_random_state(dim, rng)
            dec = wt.vaidman_decompose(a, psi)
            if dec.orthogonal is None:
                continue
            recon = dec.mean * psi.amplitudes + dec.deviation * dec.orthogonal.amplitudes
            assert np.linalg.norm(a.matrix @ psi.amplitudes - recon) <= 1e-10


def test_bloch_to_state_cardinal_points():
    np.testing.assert_allclose(wt.bloch_to_state(0.0, 1.3).amplitudes, [1.0, 0.0], atol=1e-14)
    np.testing.assert_allclose(
        wt.bloch_to_state(math.pi / 2, 0.0).amplitudes, np.ones(2) / math.sqrt(2), atol=1e-14
    )
    np.testing.assert_allclose(
        wt.bloch_to_state(math.pi / 2, math.pi / 2).amplitudes,
        np.array([1.0, 1j]) / math.sqrt(2),
        atol=1e-14,
    )


def test_bloch_to_state_wraps_angles():
    a = wt.bloch_to_state(-0.4, 0.7)
    b = wt.bloch_to_state(0.4, 0.7 + math.pi)
    overlap = abs(np.vdot(a.amplitudes, b.amplitudes))
    assert overlap == pytest.approx(1.0, abs=1e-12)


def test_haar_random_state_determinism_and_norm():
    s1 = wt.haar_random_state(2, 99)
    s2 = wt.haar_random_state(2, 99)
    np.testing.assert_array_equal(s1.amplitudes, s2.amplitudes)
    assert np.vdot(s1.amplitudes, s1.amplitudes).real == pytest.approx(1.0, abs=1e-12)


def test_haar_random_state_is_uniform_on_bloch_sphere():
    rng = np.random.default_rng(3)
    n = 100_000
    total = np.zeros(3)
    for _ in range(n):
        v = wt.haar_random_state(2, rng).amplitudes
        c = v[0].conjugate() * v[1]
        total += (2 * c.real, 2 * c.imag, abs(v[0]) ** 2 - abs(v[1]) ** 2)
    assert np.linalg.norm(total / n) <= 0.02


def test_energy_spectrum_validation():
    with pytest.raises(ValueError):
        wt.EnergySpectrum([1.0, 0.0])
    with pytest.raises(ValueError):
        wt.EnergySpectrum([0.0, 1.0], eigenbasis=[[1, 1], [0, 1]])
    spec = wt.EnergySpectrum([0.0, 1.0])
    assert spec.gap == 1.0
    assert spec.partition_function(1.0) == pytest.approx(1.0 + math.exp(-1.0), abs=1e-14)
