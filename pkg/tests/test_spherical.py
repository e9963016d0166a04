import mpmath
import numpy as np
import pytest

import restrictlab as rl
from restrictlab.errors import DomainError
from restrictlab.spherical import demodulate_window, phi_s_radial, spectral_truncation

from conftest import cached_kernel


# ---------------------------------------------------------------- phi_s

def test_phi_at_identity_is_one():
    for s in (0.0, 3.7, 50.0):
        v = rl.phi_s(s, rl.GroupElement.identity())
        assert v.real == pytest.approx(1.0, abs=1e-12)
        assert abs(v.imag) <= 1e-12


@pytest.mark.parametrize("s,x", [(10.0, 0.4), (50.0, 1.1)])
def test_phi_weyl_symmetry_and_realness(s, x):
    g = rl.GroupElement.diag_flow(x)
    vp = rl.phi_s(s, g)
    vm = rl.phi_s(-s, g)
    assert abs(vp - vm) <= 1e-10
    assert abs(vp.imag) <= 1e-10


def test_phi_nonconvergence_error():
    from restrictlab.errors import NonConvergenceError
    with pytest.raises(NonConvergenceError):
        rl.phi_s(200.0, rl.GroupElement.diag_flow(1.5), tol=1e-18, max_nodes=256)


def test_phi_legendre_oracle():
    # independent integral representation via mpmath's Legendre function
    s, x = 5.0, 0.3
    mine = rl.phi_s(s, rl.GroupElement.diag_flow(x))
    ref = complex(mpmath.legenp(-0.5 + 1j * s, 0, mpmath.cosh(x)))
    assert abs(mine - ref) <= 1e-8


def test_phi_bounded_by_phi0():
    xs = np.array([0.2, 0.7, 1.5])
    p0 = phi_s_radial(0.0, xs)
    for s in (3.0, 12.0, 40.0):
        ps = phi_s_radial(s, xs)
        assert np.all(np.abs(ps) <= p0 + 1e-8)
        assert np.all(np.abs(ps) <= 1.0 + 1e-8)


@pytest.mark.parametrize("s", [10.0, 50.0])
def test_phi_eigen_equation(s):
    # radial hyperbolic Laplacian via second-order differences
    h = 5e-4
    r = np.arange(0.1, 2.0, h)
    v = phi_s_radial(s, r)
    lap = ((v[2:] - 2 * v[1:-1] + v[:-2]) / h ** 2
           + (v[2:] - v[:-2]) / (2 * h) / np.tanh(r[1:-1]))
    resid = np.abs(lap + (0.25 + s * s) * v[1:-1])
    assert resid.max() / (0.25 + s * s) <= 1e-4


# ---------------------------------------------------------------- transforms

def test_hc_forward_zero_and_evenness():
    assert rl.hc_forward(lambda r: np.zeros_like(r), 5.0, support_radius=1.0) == 0.0

    def f(r):
        return np.exp(-40.0 * r ** 2) * (r < 0.5)

    for s in (3.0, 17.0):
        assert abs(rl.hc_forward(f, s, support_radius=0.5)
                   - rl.hc_forward(f, -s, support_radius=0.5)) <= 1e-9


def test_hc_forward_requires_support():
    with pytest.raises(DomainError):
        rl.hc_forward(lambda r: np.zeros_like(r), 5.0)


def test_hc_inverse_zero_and_truncation_required():
    assert rl.hc_inverse(lambda s: np.zeros_like(s), 0.3, truncation=50.0) == 0.0
    with pytest.raises(DomainError):
        rl.hc_inverse(lambda s: np.zeros_like(s), 0.3)


def test_kernel_positive_at_origin(kernel100):
    # k(e) = int h0^2 d(plancherel) > 0
    assert kernel100.values[0] > 0
    assert kernel100.values[0] == pytest.approx(
        rl.hc_inverse(kernel100.h0_squared, 0.0,
                      truncation=kernel100.lam + kernel100.truncation), rel=1e-6)


def test_kernel_table_matches_direct_inverse(kernel100):
    # two organizations of the same spectral integral: the FFT+circle table
    # against a direct per-point inverse transform
    T = kernel100.lam + kernel100.truncation
    for x in (0.02, 0.05, 0.11):
        direct = rl.hc_inverse(kernel100.h0_squared, x, truncation=T)
        assert kernel100.radial(x) == pytest.approx(direct, rel=1e-5, abs=1e-4)


def test_kernel_roundtrip(kernel100):
    lam = kernel100.lam
    for s in (lam - 1.0, lam, lam + 1.0):
        fwd = rl.hc_forward(kernel100.radial, s,
                            support_radius=kernel100.support_radius + 0.05)
        assert fwd == pytest.approx(kernel100.h0_squared(s), rel=1e-5)


def test_kernel_table_shape(kernel100):
    # center value dominates the table within a factor 2
    assert np.abs(kernel100.values).max() <= 2.0 * kernel100.values[0]
    assert kernel100.verify_residual <= 1e-6


def test_kernel_spectral_nonnegativity(kernel100):
    s = np.linspace(0, kernel100.lam * 2, 10001)
    assert kernel100.h0_squared(s).min() >= 0.0


def test_kernel_support_vanishing(kernel100):
    x = kernel100.x_grid()
    beyond = x > kernel100.support_radius + 0.02
    assert np.abs(kernel100.values[beyond]).max() <= 1e-6 * kernel100.values[0]


def test_kernel_decay_constant_stability():
    consts = [rl.kernel_decay_constant(cached_kernel(lam))
              for lam in (50.0, 100.0, 200.0)]
    assert max(consts) / min(consts) < 2.0


def test_kernel_h_profile_properties(kernel100):
    u = np.linspace(-200, 200, 4001)
    h = kernel100.h_profile(u)
    assert h.min() >= 0.0
    assert kernel100.h_profile(0.0) == 1.0
    assert np.array_equal(h, kernel100.h_profile(-u))


def test_kernel_domain_errors():
    with pytest.raises(DomainError):
        rl.make_kernel(5.0)
    with pytest.raises(DomainError):
        rl.make_kernel(100.0, h_width=0.2)


def test_spectral_truncation_bound(kernel100):
    T = spectral_truncation(kernel100.h_width)
    assert kernel100.h_profile(T) ** 2 < 1e-12


# ---------------------------------------------------------------- asymptotics

def test_demodulate_zero_function():
    x = 0.5 + 0.01 * np.arange(12)
    fp, fm, resid, flagged = demodulate_window(x, np.zeros(12), 40.0)
    assert fp == 0 and fm == 0 and resid == 0.0


def test_demodulate_recovers_pure_wave():
    s = 60.0
    x = 0.5 + (0.4 / s) * np.arange(12)
    vals = 0.37 * np.exp(1j * s * x) - 0.11 * np.exp(-1j * s * x)
    fp, fm, resid, flagged = demodulate_window(x, vals, s)
    assert fp == pytest.approx(0.37, abs=1e-10)
    assert fm == pytest.approx(-0.11, abs=1e-10)
    assert not flagged


def test_asymptotic_amplitudes_stable_and_residual_small():
    sups = []
    for s in (50.0, 200.0):
        rep = rl.asymptotic_check(s, x_range=(0.5, 2.0))
        assert not rep["flagged"].any()
        # residual after removing both oscillatory terms
        assert np.all(rep["residual"] <= 10.0 * (s * rep["x"]) ** -2.0)
        sups.append(rep["sup_scaled_plus"])
    assert max(sups) / min(sups) <= 2.0


# ---------------------------------------------------------------- serialization

def test_kernel_serialization(kernel100):
    d = kernel100.to_dict()
    assert d["lambda"] == kernel100.lam
    assert len(d["values"]) == kernel100.values.size
