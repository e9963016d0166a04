"""Compactly band-limited bump functions, the two-sided band kernel centered
at +-lambda, spectral band projections, and the Fourier-side energy identity.

Fourier convention: fhat(xi) = int f(x) e^(-i x xi) dx, inverse carries 1/2pi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import gamma as _gamma

from .errors import DomainError
from .measures import WeightFunction, weighted_energy
from .sampling import SampledFunction


def smooth_step(t, sharpness: float = 1.0) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, exp(-sharpness/t) glue."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    out[t >= 1] = 1.0
    mid = (t > 0) & (t < 1)
    tm = t[mid]
    g1 = np.exp(-sharpness / tm)
    g2 = np.exp(-sharpness / (1.0 - tm))
    out[mid] = g1 / (g1 + g2)
    return out


def rho_cutoff(t) -> np.ndarray:
    """Plateau cutoff: 1 on |t| <= 3/2, 0 on |t| >= 2, smooth in between."""
    return smooth_step(2.0 * (2.0 - np.abs(np.asarray(t, dtype=float))))


class BumpPair:
    """An even bump eta with hat(eta) = 1 on [-1/2,1/2] and = 0 outside (-1,1).

    hat(eta) is the exact piecewise definition; eta is tabulated once by dense
    quadrature of the inverse transform and evaluated by cubic interpolation.
    Beyond table_max the spatial tail is below tail_floor and eta returns 0.
    """

    PLATEAU = 0.5
    SUPPORT = 1.0

    rho = staticmethod(rho_cutoff)   # the companion plateau cutoff

    def __init__(self, transition_sharpness: float = 1.0,
                 table_max: float = 800.0, quad_nodes: int = 2048):
        if transition_sharpness <= 0:
            raise DomainError("transition_sharpness must be positive")
        self.sharpness = float(transition_sharpness)
        self.table_max = float(table_max)
        xg, wg = np.polynomial.legendre.leggauss(quad_nodes)
        self._xi_q = 0.5 + 0.25 * (xg + 1.0)      # nodes on [1/2, 1]
        self._w_q = 0.25 * wg * self.eta_hat(self._xi_q)
        u_head = np.arange(0.0, 64.0, 1.0 / 128.0)
        u_tail = np.arange(64.0, self.table_max + 1e-9, 1.0 / 16.0)
        u = np.concatenate([u_head, u_tail])
        vals = self._eta_direct(u)
        self._spline = CubicSpline(u, vals)
        self.tail_floor = float(np.abs(vals[-64:]).max())

    def eta_hat(self, xi) -> np.ndarray:
        """Exact transform: even, 1 on the plateau, 0 outside the support."""
        axi = np.abs(np.asarray(xi, dtype=float))
        return smooth_step(2.0 * (1.0 - axi), self.sharpness)

    def _eta_direct(self, u: np.ndarray) -> np.ndarray:
        # eta(u) = (1/pi) [ sin(u/2)/u + int_{1/2}^1 hat(eta)(xi) cos(u xi) dxi ]
        out = np.empty_like(u)
        for i0 in range(0, u.size, 4096):
            uu = u[i0:i0 + 4096]
            plateau = 0.5 * np.sinc(uu / (2.0 * np.pi))
            out[i0:i0 + 4096] = plateau + np.cos(np.outer(uu, self._xi_q)) @ self._w_q
        return out / np.pi

    def eta(self, x) -> np.ndarray:
        x = np.abs(np.asarray(x, dtype=float))
        out = np.zeros_like(x)
        inside = x <= self.table_max
        out[inside] = self._spline(x[inside])
        return out

    def __call__(self, x):
        return self.eta(x)


def make_bump_pair(transition_sharpness: float = 1.0, **kw) -> BumpPair:
    return BumpPair(transition_sharpness, **kw)


@dataclass(frozen=True)
class BandKernel:
    """Convolution kernel whose transform is hat(eta) rescaled to the two
    bands of width ~beta around +-lam."""

    bump: BumpPair
    lam: float
    beta: float

    def __post_init__(self):
        if not 1.0 <= self.beta <= self.lam:
            raise DomainError(f"need 1 <= beta <= lam, got beta={self.beta}, lam={self.lam}")

    def hat(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        return (self.bump.eta_hat((xi - self.lam) / self.beta)
                + self.bump.eta_hat((xi + self.lam) / self.beta))

    def spatial(self, x) -> np.ndarray:
        """eta_beta(x) = 2 beta cos(lam x) eta(beta x), by direct inversion."""
        x = np.asarray(x, dtype=float)
        return 2.0 * self.beta * np.cos(self.lam * x) * self.bump.eta(self.beta * x)


def eta_beta(bump: BumpPair, lam: float, beta: float, x):
    """Spatial band kernel at x; real and even in x."""
    return BandKernel(bump, lam, beta).spatial(x)


def decay_constant(bump: BumpPair, lam: float, beta: float, N: int,
                   u_max: float = 300.0, du: float = 0.005) -> float:
    """Measured C_N = sup_x |eta_beta(x)| (1 + beta |x|)^N / beta."""
    u = np.arange(0.0, u_max, du)
    vals = np.abs(2.0 * np.cos(lam * u / beta) * bump.eta(u)) * (1.0 + u) ** N
    return float(vals.max())


def band_project(bump: BumpPair, lam: float, beta: float, f: SampledFunction,
                 mode: str = "pass", pad_factor: int = 4) -> SampledFunction:
    """Spectral band projection: transform, multiply by the band mask, invert.

    mode="pass" keeps the bands +-[lam-beta, lam+beta] (transform of the
    result is exactly supported there); mode="complement" returns f - pass,
    whose spectrum vanishes on +-[lam-beta/2, lam+beta/2].
    """
    if mode not in ("pass", "complement"):
        raise DomainError(f"unknown mode {mode!r}")
    kern = BandKernel(bump, lam, beta)
    h = f.grid_step
    shortest_period = 2.0 * np.pi / (lam + beta)
    if h > shortest_period / 4.0 + 1e-15:
        raise DomainError(
            f"grid step {h} under-resolves frequency lam+beta (need <= {shortest_period / 4.0})")
    L = 1 << int(np.ceil(np.log2(pad_factor * f.n)))
    F = np.fft.fft(f.values, L)
    xi = 2.0 * np.pi * np.fft.fftfreq(L, h)
    passed = np.fft.ifft(F * kern.hat(xi))[:f.n]
    if mode == "pass":
        return SampledFunction(f.grid_min, h, passed)
    return SampledFunction(f.grid_min, h, f.values - passed)


def fourier_transform(f: SampledFunction, pad_factor: int = 4):
    """Continuous-convention transform on the padded DFT grid.

    Returns (xi, fhat) with xi ascending; fhat(xi) = h e^(-i x0 xi) DFT(f).
    """
    h = f.grid_step
    L = 1 << int(np.ceil(np.log2(pad_factor * f.n)))
    F = np.fft.fft(f.values, L)
    xi = 2.0 * np.pi * np.fft.fftfreq(L, h)
    fhat = h * np.exp(-1j * f.grid_min * xi) * F
    order = np.argsort(np.fft.fftshift(xi), kind="stable")
    xi_s = np.fft.fftshift(xi)
    fhat_s = np.fft.fftshift(fhat)
    return xi_s[order], fhat_s[order]


def spectral_mass_outside(f: SampledFunction, allowed_lo: float, allowed_hi: float) -> float:
    """Relative spectral mass outside +-[allowed_lo, allowed_hi]."""
    xi, fhat = fourier_transform(f)
    p = np.abs(fhat) ** 2
    inside = (np.abs(xi) >= allowed_lo) & (np.abs(xi) <= allowed_hi)
    total = p.sum()
    if total == 0:
        return 0.0
    return float(p[~inside].sum() / total)


def spectral_mass_inside(f: SampledFunction, hole_lo: float, hole_hi: float) -> float:
    """Relative spectral mass on the two bands +-[hole_lo, hole_hi]."""
    xi, fhat = fourier_transform(f)
    p = np.abs(fhat) ** 2
    hole = (np.abs(xi) >= hole_lo) & (np.abs(xi) <= hole_hi)
    total = p.sum()
    if total == 0:
        return 0.0
    return float(p[hole].sum() / total)


def gamma_factor(s: float) -> float:
    """gamma(s) = pi^(s-1/2) Gamma((1-s)/2) / Gamma(s/2); gamma(1/2) = 1."""
    if not 0 < s < 1:
        raise DomainError(f"s must lie in (0,1), got {s}")
    return float(np.pi ** (s - 0.5) * _gamma((1.0 - s) / 2.0) / _gamma(s / 2.0))


def fourier_energy_identity(w: WeightFunction, phi, s: float,
                            pad_factor: int = 16):
    """Both sides of the spectral energy identity, by independent quadratures.

    lhs = (gamma(s)/(2 pi)^s) int |hat(phi w)(xi)|^2 |xi|^(s-1) dxi  (transform
    route, with the singular frequency cell integrated exactly); rhs is the
    direct double integral I_s(phi w).  The two should agree to the grid's
    resolution.
    """
    if not 0 < s < 1:
        raise DomainError(f"s must lie in (0,1), got {s}")
    phi = np.asarray(phi, dtype=complex)
    if phi.shape != w.values.shape:
        raise DomainError("phi must be sampled on the weight's grid")
    f = SampledFunction(w.grid_min, w.grid_step, phi * w.values)
    xi, fhat = fourier_transform(f, pad_factor)
    dxi = xi[1] - xi[0]
    # exact cell weights for |xi|^(s-1): antiderivative sign(xi)|xi|^s / s
    lo, hi = xi - dxi / 2, xi + dxi / 2

    def anti(t):
        return np.sign(t) * np.abs(t) ** s / s

    cell = anti(hi) - anti(lo)
    lhs = gamma_factor(s) / (2.0 * np.pi) ** s * float(np.dot(np.abs(fhat) ** 2, cell))
    rhs = weighted_energy(w, phi, s) if 0 < s < w.frostman_alpha else None
    if rhs is None:
        # fall back to the raw grid energy when s >= alpha (identity still holds)
        from .measures import _grid_energy
        rhs = _grid_energy(phi * w.values, w.grid_step, s)
    return lhs, complex(rhs).real
