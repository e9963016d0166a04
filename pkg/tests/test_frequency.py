import numpy as np
import pytest

import restrictlab as rl
from restrictlab.errors import DomainError
from restrictlab.frequency import spectral_mass_inside, spectral_mass_outside

from conftest import cached_weight


# ---------------------------------------------------------------- bump pair

def test_eta_hat_plateau_and_support(bump):
    assert bump.eta_hat(0.0) == 1.0
    assert bump.eta_hat(0.25) == 1.0
    assert bump.eta_hat(-0.5) == 1.0
    assert bump.eta_hat(1.0) == 0.0
    assert bump.eta_hat(1.5) == 0.0
    xi = np.linspace(-2, 2, 1001)
    assert np.array_equal(bump.eta_hat(xi), bump.eta_hat(-xi))


def test_eta_hat_numerically_smooth(bump):
    # sampled difference quotients stay bounded through both transition edges
    xi = np.linspace(0.4, 1.1, 20001)
    h = xi[1] - xi[0]
    d1 = np.diff(bump.eta_hat(xi)) / h
    d2 = np.diff(d1) / h
    assert np.abs(d1).max() < 20.0
    assert np.abs(d2).max() < 2000.0


def test_eta_at_zero_range(bump):
    # eta(0) = (1/2pi) int eta_hat, and 1 < int eta_hat < 2
    assert 1.0 / (2 * np.pi) < bump.eta(0.0) < 1.0 / np.pi


def test_eta_real_even(bump):
    x = np.linspace(0, 30, 500)
    assert np.array_equal(bump.eta(x), bump.eta(-x))


# ---------------------------------------------------------------- band kernel

def test_band_hat_plateau_at_center(bump):
    for lam, beta in ((64.0, 8.0), (256.0, 16.0)):
        k = rl.BandKernel(bump, lam, beta)
        assert k.hat(lam) == 1.0
        assert k.hat(-lam) == 1.0


def test_eta_beta_at_zero(bump):
    # formula value cross-checked by direct quadrature of the band transform
    lam, beta = 128.0, 16.0
    val = rl.eta_beta(bump, lam, beta, 0.0)
    assert val == pytest.approx(2.0 * beta * bump.eta(0.0), rel=1e-12)
    xi = np.linspace(-lam - 2 * beta, lam + 2 * beta, 400001)
    quad = np.trapezoid(rl.BandKernel(bump, lam, beta).hat(xi), xi) / (2 * np.pi)
    assert val == pytest.approx(quad, rel=1e-6)


def test_eta_beta_even_and_decay_finite(bump):
    lam = 256.0
    for beta in (8.0, 32.0, 128.0):
        x = 1.0 / beta
        v = rl.eta_beta(bump, lam, beta, x)
        assert np.isfinite(v / (beta * 2.0 ** -4))
        assert rl.eta_beta(bump, lam, beta, -x) == v


def test_eta_beta_requires_band_inside_center(bump):
    with pytest.raises(DomainError):
        rl.eta_beta(bump, 64.0, 128.0, 0.1)
    with pytest.raises(DomainError):
        rl.eta_beta(bump, 64.0, 0.5, 0.1)


def test_decay_constant_stability(bump):
    # measured C_N varies by less than a factor 2 across bandwidths
    lam = 256.0
    for N in (2, 4):
        cs = [rl.frequency.decay_constant(bump, lam, beta, N)
              for beta in (8.0, 32.0, 128.0)]
        assert max(cs) / min(cs) < 2.0


def test_decay_constant_finite_n8(bump):
    assert np.isfinite(rl.frequency.decay_constant(bump, 256.0, 32.0, 8))


# ---------------------------------------------------------------- projections

def _bump_profile(x, beta):
    # frequency width 1/sigma <= beta/4, and small enough spatially that the
    # grid-edge truncation sits below the leakage tolerances
    sigma = min(16.0 / beta, 0.5)
    return np.exp(-0.5 * (x / sigma) ** 2)


def test_band_project_passes_resonant_signal(bump):
    lam, beta = 128.0, 16.0
    h = 1.0 / (8.0 * lam)
    f = rl.SampledFunction.from_callable(
        lambda x: np.cos(lam * x) * _bump_profile(x, beta), -3.0, 3.0, h)
    p = rl.band_project(bump, lam, beta, f, "pass")
    err = np.sqrt(np.sum(np.abs(p.values - f.values) ** 2)
                  / np.sum(np.abs(f.values) ** 2))
    assert err <= 1e-6


def test_band_project_kills_detuned_signal(bump):
    lam = 128.0
    beta = lam / 4.0
    h = 1.0 / (8.0 * lam)
    f = rl.SampledFunction.from_callable(
        lambda x: np.cos(lam / 2.0 * x) * _bump_profile(x, beta), -3.0, 3.0, h)
    p = rl.band_project(bump, lam, beta, f, "pass")
    rel = np.sqrt(np.sum(np.abs(p.values) ** 2) / np.sum(np.abs(f.values) ** 2))
    assert rel <= 1e-6


def test_band_project_partition_of_identity(bump):
    lam, beta = 64.0, 8.0
    h = 1.0 / (8.0 * lam)
    f = rl.SampledFunction.from_callable(
        lambda x: np.exp(1j * lam * x) * np.exp(-x ** 2), -3.0, 3.0, h)
    p = rl.band_project(bump, lam, beta, f, "pass")
    c = rl.band_project(bump, lam, beta, f, "complement")
    assert np.abs(p.values + c.values - f.values).max() <= 1e-12


def test_band_project_underresolved_grid(bump):
    f = rl.SampledFunction.from_callable(np.cos, -3.0, 3.0, 0.05)
    with pytest.raises(DomainError):
        rl.band_project(bump, 128.0, 16.0, f)


@pytest.mark.parametrize("lam", [64.0, 256.0])
@pytest.mark.parametrize("beta_exp", [0.5, 0.75])
def test_band_support_statements(bump, lam, beta_exp):
    # wide grid so the projection's spatial tails are not chopped at the edge
    beta = lam ** beta_exp
    h = 1.0 / (8.0 * lam)
    f = rl.SampledFunction.from_callable(
        lambda x: np.exp(1j * lam * x) * np.exp(-2 * x ** 2)
        + 0.3 * np.exp(-3 * x ** 2), -6.0, 6.0, h)
    p = rl.band_project(bump, lam, beta, f, "pass")
    assert spectral_mass_outside(p, lam - beta, lam + beta) <= 1e-8
    c = rl.band_project(bump, lam, beta, f, "complement")
    assert spectral_mass_inside(c, lam - beta / 2.0, lam + beta / 2.0) <= 1e-8


def test_band_project_matches_spatial_convolution(bump):
    # independent route: direct spatial convolution with the band kernel
    # against the spectral implementation
    lam, beta = 64.0, 8.0
    h = 1.0 / (16.0 * lam)
    f = rl.SampledFunction.from_callable(
        lambda x: np.exp(1j * lam * x) * np.exp(-4.0 * x ** 2), -2.0, 2.0, h)
    p = rl.band_project(bump, lam, beta, f, "pass")
    x = f.grid()
    # eta_beta decays fast; a +-6 window around each point captures the tails
    m = int(round(6.0 / h))
    y = h * np.arange(-m, m + 1)
    kern = rl.eta_beta(bump, lam, beta, y)
    conv = h * np.convolve(f.values, kern, mode="full")[m:m + f.n]
    err = np.abs(conv - p.values).max() / np.abs(p.values).max()
    assert err <= 1e-6


def test_parseval_consistency(bump):
    for name, profile in [("gauss", lambda x: np.exp(-x ** 2)),
                          ("mod", lambda x: np.exp(40j * x) * np.exp(-2 * x ** 2))]:
        f = rl.SampledFunction.from_callable(profile, -3.0, 3.0, 1e-3)
        xi, fhat = rl.fourier_transform(f)
        lhs = f.l2_norm() ** 2
        rhs = np.sum(np.abs(fhat) ** 2) * (xi[1] - xi[0]) / (2 * np.pi)
        assert abs(lhs - rhs) <= 1e-8 * lhs


# ---------------------------------------------------------------- energy identity

def test_gamma_factor_at_half():
    assert rl.gamma_factor(0.5) == 1.0


def test_gamma_factor_domain():
    for s in (0.0, 1.0):
        with pytest.raises(DomainError):
            rl.gamma_factor(s)


def test_energy_identity_triangle():
    # triangle profile on [-1,1], phi = 1, s = 1/2
    h = 1e-3
    n = int(round(4.0 / h)) + 1
    x = -2.0 + h * np.arange(n)
    w = rl.WeightFunction(-2.0, h, np.maximum(1.0 - np.abs(x), 0.0), 1.0, 1.0)
    lhs, rhs = rl.fourier_energy_identity(w, np.ones(n), 0.5)
    assert lhs == pytest.approx(rhs, rel=1e-3)


def test_energy_identity_modulated_gaussian():
    h = 1e-3
    n = int(round(4.0 / h)) + 1
    x = -2.0 + h * np.arange(n)
    w = rl.WeightFunction(-2.0, h, np.maximum(1.0 - np.abs(x), 0.0), 1.0, 1.0)
    phi = np.exp(12j * x) * np.exp(-2 * x ** 2)
    lhs, rhs = rl.fourier_energy_identity(w, phi, 0.7)
    assert lhs == pytest.approx(rhs, rel=1e-3)


def test_mean_square_fourier_decay_bound():
    # spectral side bounded by the measured direct-energy constant
    for alpha in (0.7, 0.9):
        w = cached_weight(alpha, 6, 50.0)
        phi = np.exp(-0.5 * w.grid() ** 2)
        lhs, rhs = rl.fourier_energy_identity(w, phi, 0.5)
        c_meas = abs(complex(rl.weighted_energy(w, phi, 0.5))) / w.l2_weighted_norm(phi) ** 2
        assert lhs <= c_meas * w.l2_weighted_norm(phi) ** 2 * 1.01
