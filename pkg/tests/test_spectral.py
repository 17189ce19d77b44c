import numpy as np
import pytest

from cavneg import spectral


def test_flat_is_constant():
    m = spectral.Flat(kappa=1.0)
    grid = np.linspace(0.0, 100.0, 11)
    assert np.allclose(spectral.evaluate(m, grid), 1.0 / (2.0 * np.pi))


def test_single_lorentzian_peak_value():
    m = spectral.SingleLorentzian(alpha_L=2.0, Gamma=1.0, omega_bc=20.0)
    # peak height alpha_L Gamma^2 / (2 pi (Gamma/2)^2) = 4 alpha_L / (2 pi)
    assert abs(spectral.evaluate(m, 20.0) - 4.0 / np.pi) < 1e-14
    # half width at half maximum is Gamma/2
    assert abs(spectral.evaluate(m, 20.5) - 2.0 / np.pi) < 1e-14
    assert spectral.evaluate(m, 0.0) > 0.0


def test_double_reduces_to_single():
    single = spectral.SingleLorentzian(alpha_L=3.0, Gamma=0.2, omega_bc=15.0)
    double = spectral.DoubleLorentzian(
        alpha_L1=3.0, alpha_L2=1.0, Gamma1=0.2, Gamma2=0.05,
        W_D1=1.0, W_D2=0.0, omega_bc=15.0,
    )
    grid = np.linspace(0.0, 40.0, 400)
    assert np.allclose(spectral.evaluate(double, grid), spectral.evaluate(single, grid))


def test_double_is_convex_combination():
    m = spectral.DoubleLorentzian(
        alpha_L1=2.0, alpha_L2=2.0, Gamma1=0.1, Gamma2=0.01,
        W_D1=0.5, W_D2=0.5, omega_bc=20.0,
    )
    s1 = spectral.SingleLorentzian(2.0, 0.1, 20.0)
    s2 = spectral.SingleLorentzian(2.0, 0.01, 20.0)
    grid = np.linspace(10.0, 30.0, 500)
    expected = 0.5 * spectral.evaluate(s1, grid) + 0.5 * spectral.evaluate(s2, grid)
    assert np.allclose(spectral.evaluate(m, grid), expected)


def test_bandgap_peak_identity_and_notch():
    m = spectral.BandGapLorentzian(
        alpha_L1=2.0, alpha_L2=2.0, Gamma1=0.1, Gamma2=0.01,
        W_B1=2.0, W_B2=1.0, omega_bc=20.0,
    )
    at_centre = m.W_B1 * 4.0 * m.alpha_L1 / (2.0 * np.pi) - m.W_B2 * 4.0 * m.alpha_L2 / (2.0 * np.pi)
    assert abs(spectral.evaluate(m, 20.0) - at_centre) < 1e-12
    # the narrow notch makes the centre a local minimum on the Gamma2 scale
    assert spectral.evaluate(m, 20.0) < spectral.evaluate(m, 20.0 + m.Gamma2)
    assert not spectral.validate(m)


def test_ohmic_shapes():
    sub = spectral.OhmicFamily(s=0.5, alpha=1.0, omega_cut=15.0)
    ohm = spectral.OhmicFamily(s=1.0, alpha=0.6, omega_cut=10.0)
    sup = spectral.OhmicFamily(s=3.0, alpha=0.1, omega_cut=2.0)
    assert spectral.evaluate(sub, 0.0) == 0.0
    assert spectral.evaluate(ohm, 0.0) == 0.0
    # ohmic case is linear with slope alpha near omega = 0
    eps = 1e-8
    assert abs(spectral.evaluate(ohm, eps) / eps - 0.6) < 1e-6
    # super-ohmic rises faster than linearly at the origin
    assert spectral.evaluate(sup, eps) / eps < 1e-10
    # exponential cutoff wins at large frequency
    assert spectral.evaluate(sup, 100.0) < 1e-15
    # maximum of omega^s exp(-omega/cut) sits at s * omega_cut
    grid = np.linspace(0.01, 30.0, 20_000)
    vals = spectral.evaluate(sup, grid)
    assert abs(grid[np.argmax(vals)] - 3.0 * 2.0) < 0.01


def test_evaluate_rejects_negative_frequency_and_bad_model():
    m = spectral.Flat()
    with pytest.raises(ValueError):
        spectral.evaluate(m, -0.1)
    with pytest.raises(ValueError):
        spectral.evaluate(m, np.array([1.0, -2.0]))
    with pytest.raises(TypeError):
        spectral.evaluate(object(), 1.0)


def test_validate_flags_problems():
    assert spectral.validate(spectral.Flat(kappa=-1.0))
    assert spectral.validate(spectral.SingleLorentzian(alpha_L=0.0, Gamma=1.0))
    bad_weights = spectral.DoubleLorentzian(
        alpha_L1=1.0, alpha_L2=1.0, Gamma1=0.1, Gamma2=0.01,
        W_D1=0.7, W_D2=0.5,
    )
    assert any("sum to 1" in p for p in spectral.validate(bad_weights))
    wide_notch = spectral.BandGapLorentzian(
        alpha_L1=1.0, alpha_L2=1.0, Gamma1=0.01, Gamma2=0.1,
    )
    assert any("narrow" in p for p in spectral.validate(wide_notch))
    # a notch deeper than the broad peak drives J negative at the centre
    deep_notch = spectral.BandGapLorentzian(
        alpha_L1=1.0, alpha_L2=1.0, Gamma1=0.1, Gamma2=0.01,
        W_B1=1.0, W_B2=2.0,
    )
    assert any("negative" in p for p in spectral.validate(deep_notch))
    assert spectral.validate(spectral.OhmicFamily(s=-0.5, alpha=1.0, omega_cut=2.0))
    assert not spectral.validate(spectral.OhmicFamily(s=0.5, alpha=1.0, omega_cut=15.0))
    assert spectral.validate(object())
