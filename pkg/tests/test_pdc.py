import math

import numpy as np
import pytest

import oracles
from sfgsim import dispersion, pdc
from sfgsim.errors import AllModesVacuum, ConvergenceFailure, NotSymmetric
from sfgsim.pdc import (
    FrequencyGrid,
    PumpPulse,
    build_jsa,
    decomposition_from_takagi,
    pdc_spectrum,
    pump_amplitude,
    schmidt_decompose,
    schmidt_number,
    takagi_factorize,
)

THETA = dispersion.degenerate_pm_angle(0.8)


def test_grid_validation_and_derived():
    with pytest.raises(ValueError):
        FrequencyGrid(4, 1e15, 2e15)
    with pytest.raises(ValueError):
        FrequencyGrid(16, 2e15, 1e15)
    g = FrequencyGrid.from_wavelength_bounds_nm(101, 1000.0, 2000.0)
    assert g.omegas[0] == g.omega_min
    assert g.wavelengths_nm[0] == pytest.approx(2000.0, rel=1e-12)
    assert g.wavelengths_nm[-1] == pytest.approx(1000.0, rel=1e-12)
    assert g.delta == pytest.approx((g.omega_max - g.omega_min) / 100, rel=1e-15)


def test_pump_amplitude_peak_and_symmetry():
    pulse = PumpPulse(800.0, 1600.0)
    assert pump_amplitude(pulse, pulse.omega0) == 1.0
    d = 2.0e12
    assert pump_amplitude(pulse, pulse.omega0 + d) == pump_amplitude(pulse, pulse.omega0 - d)


def test_pump_spectral_width_time_bandwidth():
    # transform-limited Gaussian: intensity FWHM (Hz) = 0.441/T
    pulse = PumpPulse(800.0, 1600.0)
    fwhm_hz = pulse.spectral_fwhm_omega / (2.0 * math.pi)
    assert fwhm_hz == pytest.approx(0.4413 / 1.6e-12, rel=1e-3)
    assert fwhm_hz == pytest.approx(0.2757e12, rel=1e-3)
    # numerical check on the amplitude itself
    sigma = pulse.sigma_amplitude
    half = pump_amplitude(pulse, pulse.omega0 + 0.5 * fwhm_hz * 2 * math.pi) ** 2
    assert half == pytest.approx(0.5, rel=1e-12)
    assert sigma == pytest.approx(2.0 * math.sqrt(math.log(2)) / 1.6e-12, rel=1e-12)


def test_jsa_thin_crystal_limit_is_pump_ridge():
    grid = FrequencyGrid(32, 1.05e15, 1.35e15)
    pulse = PumpPulse(800.0, 150.0)
    jsa = build_jsa(grid, pulse, 1e-3, THETA)  # 1 um crystal
    w = grid.omegas
    fp = pump_amplitude(pulse, w[:, None] + w[None, :])
    fp = fp * grid.delta / np.linalg.norm(fp * grid.delta)
    assert np.max(np.abs(jsa.values - fp)) < 1e-4
    assert np.max(np.abs(np.angle(jsa.values[np.abs(jsa.values) > 1e-6]))) < 1e-3


def test_jsa_exactly_symmetric():
    grid = FrequencyGrid(48, 1.0e15, 1.4e15)
    jsa = build_jsa(grid, PumpPulse(800.0, 400.0), 10.0, THETA)
    assert np.array_equal(jsa.values, jsa.values.T)
    assert np.linalg.norm(jsa.values) == pytest.approx(1.0, rel=1e-12)


def test_jsa_matches_independent_oracle_in_every_entry():
    # grid whose end points are the 1500/1714.2857 nm detuned pair
    w_lo = dispersion.TWO_PI_C / 1.7142857e-6
    w_hi = dispersion.TWO_PI_C / 1.5e-6
    grid = FrequencyGrid(8, w_lo, w_hi)
    jsa = build_jsa(grid, PumpPulse(800.0, 1600.0), 10.0, math.radians(19.9))
    ref = oracles.jsa_matrix(grid.omegas, 10.0e-3, math.radians(19.9), 800.0, 1600.0)
    assert np.max(np.abs(jsa.values - ref)) < 1e-12
    assert abs(jsa.values[0, 7] - ref[0, 7]) < 1e-14


def test_takagi_identity_and_antidiagonal():
    u, s = takagi_factorize(np.eye(5, dtype=complex))
    assert np.allclose(s, 1.0)
    assert np.max(np.abs((u * s) @ u.T - np.eye(5))) < 1e-12

    f = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    u, s = takagi_factorize(f)
    assert np.allclose(s, [1.0, 1.0])
    assert np.max(np.abs((u * s) @ u.T - f)) < 1e-12
    assert np.max(np.abs(u.conj().T @ u - np.eye(2))) < 1e-12


def test_takagi_seeded_random_64():
    rng = np.random.default_rng(64)
    a = rng.normal(size=(64, 64)) + 1j * rng.normal(size=(64, 64))
    f = a + a.T
    u, s = takagi_factorize(f)
    assert np.linalg.norm((u * s) @ u.T - f) / np.linalg.norm(f) < 1e-10
    assert np.max(np.abs(u.conj().T @ u - np.eye(64))) < 1e-10
    assert np.all(np.diff(s) <= 0)


def test_takagi_rejects_asymmetric():
    f = np.array([[1.0, 2.0], [0.5, 1.0]], dtype=complex)
    with pytest.raises(NotSymmetric):
        takagi_factorize(f)


def test_takagi_signals_verification_failure(monkeypatch):
    import scipy.linalg

    # force a garbage cluster correction; the built-in check must raise
    monkeypatch.setattr(scipy.linalg, "sqrtm", lambda z: np.eye(z.shape[0]) * 0.3)
    f = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    with pytest.raises(ConvergenceFailure):
        takagi_factorize(f)


@pytest.fixture(scope="module")
def default_jsa():
    grid = FrequencyGrid.from_wavelength_bounds_nm(256, 1250, 2050)
    return build_jsa(grid, PumpPulse(800.0, 400.0), 10.0, THETA)


def test_schmidt_vacuum_gain(default_jsa):
    dec = schmidt_decompose(default_jsa, 0.0)
    assert np.all(dec.s == 0.0)
    assert np.all(dec.c == 1.0)


def test_schmidt_gain_values(default_jsa):
    dec = schmidt_decompose(default_jsa, 10.5)
    assert dec.gains[0] == 10.5
    assert dec.s[0] == pytest.approx(math.sinh(10.5), rel=1e-12)
    assert dec.s[0] == pytest.approx(1.816e4, rel=1e-3)
    # gains track sigma_n / sigma_1 and are nonincreasing
    assert np.all(np.diff(dec.gains) <= 0)
    ratio = dec.gains / dec.gains[0]
    assert np.allclose(ratio, np.sqrt(dec.eigenvalues / dec.eigenvalues[0]), rtol=1e-12)
    # cosh^2 - sinh^2 = 1 for every retained mode
    assert np.max(np.abs((dec.c**2 - dec.s**2) - 1.0) / (dec.c**2)) < 1e-10


def test_schmidt_eigenvalue_sum_and_orthonormality(default_jsa):
    dec = schmidt_decompose(default_jsa, 1.0)
    assert dec.eigenvalue_sum_total == pytest.approx(1.0, abs=1e-6)
    gram = dec.modes.conj().T @ dec.modes
    assert np.max(np.abs(gram - np.eye(dec.truncation_count))) < 1e-8


def test_schmidt_truncation_controls(default_jsa):
    dec = schmidt_decompose(default_jsa, 1.0, eps_rel=1e-2, max_modes=128)
    assert np.all(dec.eigenvalues >= 1e-2 * dec.eigenvalues[0])
    dec4 = schmidt_decompose(default_jsa, 1.0, eps_rel=0.0, max_modes=4)
    assert dec4.truncation_count == 4


def test_mehler_geometric_eigenvalues():
    for mu in (0.2, 0.5, 0.8):
        f = oracles.mehler_jsa(mu)
        u, s = takagi_factorize(f + 0j)
        lam = s**2
        expect = (1 - mu) * mu ** np.arange(48)
        assert np.max(np.abs(lam[:48] - expect)) < 1e-6


def test_pdc_spectrum_vacuum_and_nonnegative(default_jsa):
    dec = schmidt_decompose(default_jsa, 0.0)
    assert np.all(pdc_spectrum(dec) == 0.0)
    dec = schmidt_decompose(default_jsa, 3.0)
    assert np.all(pdc_spectrum(dec) >= 0.0)


def test_pdc_spectrum_low_gain_is_jsa_marginal(default_jsa):
    n = default_jsa.grid.n_points
    dec = schmidt_decompose(default_jsa, 1e-3, eps_rel=0.0, max_modes=n)
    spec = pdc_spectrum(dec)
    marginal = np.sum(np.abs(default_jsa.values) ** 2, axis=1)
    scale = spec.max() / marginal.max()
    assert np.max(np.abs(spec - scale * marginal)) / spec.max() < 1e-4


def test_schmidt_number_limits(default_jsa):
    u, s = takagi_factorize(default_jsa.values)
    dec = decomposition_from_takagi(default_jsa.grid, u, s, 1.0, eps_rel=0.0, max_modes=1)
    assert schmidt_number(dec) == pytest.approx(1.0, rel=1e-12)

    many = decomposition_from_takagi(default_jsa.grid, u, s, 2.0)
    equal = pdc.SchmidtDecomposition(
        grid=many.grid,
        modes=many.modes[:, :5],
        eigenvalues=many.eigenvalues[:5],
        gains=np.full(5, 1.3),
        s=np.full(5, math.sinh(1.3)),
        c=np.full(5, math.cosh(1.3)),
        eigenvalue_sum_total=1.0,
    )
    assert schmidt_number(equal) == pytest.approx(5.0, rel=1e-12)

    vac = schmidt_decompose(default_jsa, 0.0)
    with pytest.raises(AllModesVacuum):
        schmidt_number(vac)


def test_schmidt_number_nonincreasing_with_gain(default_jsa):
    u, s = takagi_factorize(default_jsa.values)
    ks = [
        schmidt_number(decomposition_from_takagi(default_jsa.grid, u, s, g))
        for g in (0.01, 1.0, 3.0, 6.0, 10.5, 15.0)
    ]
    assert all(ks[i] >= ks[i + 1] - 1e-9 for i in range(len(ks) - 1))


@pytest.mark.xfail(
    strict=True,
    reason="the 1.6 ps pump ridge spans about one grid step at 256 points on "
    "the default 1100-2400 nm span, so the 256-point Schmidt spectrum is not "
    "converged; see the decisions ledger",
)
def test_schmidt_number_stable_256_to_512():
    pulse = PumpPulse(800.0, 1600.0)
    ks = {}
    for n in (256, 512):
        grid = FrequencyGrid.from_wavelength_bounds_nm(n, 1100, 2400)
        ks[n] = schmidt_number(schmidt_decompose(build_jsa(grid, pulse, 10.0, THETA), 10.5))
    assert abs(ks[512] - ks[256]) / ks[512] < 0.02


def test_export_decomposition_roundtrip(tmp_path, default_jsa):
    dec = schmidt_decompose(default_jsa, 1.5, eps_rel=0.0, max_modes=3)
    path = tmp_path / "modes.txt"
    pdc.export_decomposition(dec, path)
    lines = path.read_text().splitlines()
    header = [ln for ln in lines if ln.startswith("#")]
    assert any(ln.startswith("# lambda:") for ln in header)
    assert any(ln.startswith("# gamma:") for ln in header)
    data = np.loadtxt(path)
    assert data.shape == (default_jsa.grid.n_points, 1 + 2 * 3)
    lam_line = next(ln for ln in header if ln.startswith("# lambda:"))
    lam = np.array([float(x) for x in lam_line.split()[2:]])
    assert np.allclose(lam, dec.eigenvalues, rtol=1e-15)
    modes = data[:, 1::2] + 1j * data[:, 2::2]
    assert np.max(np.abs(modes - dec.modes)) == 0.0
