"""The geometric bilinear integral I(lam, phi, g) against the band kernel,
its amplified sum over conjugated lattice elements, and the bandwidth-scaling
and rapid-decay experiments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .frequency import BumpPair, band_project, smooth_step
from .geometry import GroupElement, dist_to_diag
from .hecke import Amplifier, QuatAlgebra, conjugated_element, enumerate_norm_n
from .measures import WeightFunction
from .sampling import SampledFunction
from .spherical import SphericalKernel


@dataclass(frozen=True)
class TestWindow:
    """Real cutoffs: b supported in [-3,3] (plateau to 2.5 by default) and
    the wide cutoff b1 = 1 on [-6,6], 0 outside [-7,7]."""

    plateau: float = 2.5
    support: float = 3.0

    def __post_init__(self):
        if not 0 < self.plateau < self.support:
            raise DomainError("need 0 < plateau < support")

    def b(self, x) -> np.ndarray:
        x = np.abs(np.asarray(x, dtype=float))
        width = self.support - self.plateau
        return smooth_step((self.support - x) / width)

    def b1(self, x) -> np.ndarray:
        x = np.abs(np.asarray(x, dtype=float))
        return smooth_step(7.0 - x)


@dataclass(frozen=True)
class IntegralReport:
    """Value of one bilinear integral plus its resolution-doubling error."""

    value: complex
    error_estimate: float
    lam: float
    resolution: int
    converged: bool
    g_desc: str = "e"
    beta: float = None
    alpha: float = None

    def to_row(self) -> dict:
        return {"value_re": self.value.real, "value_im": self.value.imag,
                "error": self.error_estimate, "lambda": self.lam,
                "resolution": self.resolution, "converged": int(self.converged),
                "g": self.g_desc, "beta": self.beta, "alpha": self.alpha}


def _window_values(window: TestWindow, f: SampledFunction) -> np.ndarray:
    return window.b(f.grid()) * f.values


def _bilinear_sum(kernel: SphericalKernel, u1: np.ndarray, u2: np.ndarray,
                  x: np.ndarray, h: float, g: GroupElement,
                  row_chunk: int = 256) -> complex:
    """h^2 sum over the grid of conj(u1(x1)) u2(x2) k(d(g a(x2) i, a(x1) i)).

    Row-chunked with a fixed ascending reduction order so results are
    reproducible; the kernel vanishes beyond its support radius, which prunes
    most of each row.
    """
    a, b, c, d = g.m.ravel()
    ex = np.exp(x)
    den = c * 1j * ex + d
    z2 = (a * 1j * ex + b) / den
    r2, i2 = z2.real, z2.imag
    supp = kernel.support_radius + 2 * kernel.x_step
    total = 0.0 + 0.0j
    for i0 in range(0, x.size, row_chunk):
        e1 = ex[i0:i0 + row_chunk][:, None]
        dr = r2[None, :]
        di = i2[None, :] - e1
        dist = 2.0 * np.arcsinh(np.sqrt(dr * dr + di * di)
                                / (2.0 * np.sqrt(e1 * i2[None, :])))
        K = np.where(dist <= supp, kernel.radial(dist), 0.0)
        total += np.conj(u1[i0:i0 + row_chunk]) @ (K @ u2)
    return total * h * h


def eval_I_pair(kernel: SphericalKernel, window: TestWindow,
                f1: SampledFunction, f2: SampledFunction, g: GroupElement,
                g_desc: str = "e", beta: float = None,
                alpha: float = None) -> IntegralReport:
    """Sesquilinear integral of b(x1) b(x2) conj(f1(x1)) f2(x2) k(a(-x1) g a(x2))
    with a half-resolution re-evaluation as the error estimate."""
    f1.require_same_grid(f2)
    h = f1.grid_step
    lam = kernel.lam
    if h > 1.0 / (8.0 * lam) + 1e-15:
        raise DomainError(f"grid step {h} under-resolves 1/lambda (need <= {1 / (8 * lam)})")
    x = f1.grid()
    u1 = _window_values(window, f1)
    u2 = _window_values(window, f2)
    value = _bilinear_sum(kernel, u1, u2, x, h, g)
    value_half = _bilinear_sum(kernel, u1[::2], u2[::2], x[::2], 2 * h, g)
    err = abs(value - value_half)
    scale = max(abs(value), 1e-12 * (abs(value_half) + np.abs(u1).max() * np.abs(u2).max() + 1.0))
    return IntegralReport(value=complex(value), error_estimate=float(err),
                          lam=lam, resolution=x.size,
                          converged=bool(err <= 0.01 * scale),
                          g_desc=g_desc, beta=beta, alpha=alpha)


def eval_I(kernel: SphericalKernel, window: TestWindow, phi: SampledFunction,
           g: GroupElement, **kw) -> IntegralReport:
    """Quadratic integral I(lam, phi, g); phi enters as both test slots."""
    return eval_I_pair(kernel, window, phi, phi, g, **kw)


def amplified_rhs(alg: QuatAlgebra, amp: Amplifier, kernel: SphericalKernel,
                  window: TestWindow, phi: SampledFunction, g0: GroupElement,
                  radius: float = 1.0):
    """Geometric side of the amplified bound: sum over m, n of |alpha_m alpha_n|
    times the divisor-weighted sums of |I| over conjugated norm-(mn/d^2)
    elements within distance 1 of the identity.

    Returns (total, rows, flags); rows carry one line per (m, n, d, gamma).
    """
    support = amp.support()
    needed = {}
    for m in support:
        for n in support:
            for d in range(1, min(m, n) + 1):
                if m % d == 0 and n % d == 0 and (m * n) % (d * d) == 0:
                    needed.setdefault(m * n // (d * d), None)
    cache = {v: enumerate_norm_n(alg, v, g0, radius=radius) for v in sorted(needed)}
    total = 0.0
    rows = []
    flags = []
    for m in support:
        for n in support:
            amn = abs(amp.coeffs[m] * amp.coeffs[n])
            if amn == 0:
                continue
            for d in range(1, min(m, n) + 1):
                if m % d or n % d:
                    continue
                v = m * n // (d * d)
                weight = amn * d / np.sqrt(m * n)
                for gamma in cache[v]:
                    h = conjugated_element(alg, gamma, v, g0)
                    rep = eval_I(kernel, window, phi, h,
                                 g_desc=f"gamma{gamma}/sqrt({v})")
                    if not rep.converged:
                        flags.append((m, n, d, gamma, rep.error_estimate))
                    term = weight * abs(rep.value)
                    total += term
                    rows.append({"m": m, "n": n, "d": d, "gamma": str(gamma),
                                 "term": term, "abs_I": abs(rep.value),
                                 "error": rep.error_estimate})
    return total, rows, flags


def modulated_gaussian(grid: np.ndarray, lam: float, sigma: float = 1.0) -> np.ndarray:
    """e^(i lam x) Gaussian, the oscillatory member of the test family."""
    return np.exp(1j * lam * grid) * np.exp(-0.5 * (grid / sigma) ** 2)


def _phi_w_on_window_grid(w: WeightFunction, phi_fn, lam: float):
    """(phi, phi*w) sampled on the [-3,3] grid aligned with w's grid."""
    h = w.grid_step
    n3 = int(round(6.0 / h))
    grid3 = -3.0 + h * np.arange(n3 + 1)
    wext = SampledFunction(w.grid_min, h, w.values).embed(-3.0, 3.0)
    phi = np.asarray(phi_fn(grid3), dtype=complex)
    return grid3, phi, SampledFunction(-3.0, h, phi * wext.values.real), wext


def beta_scaling_experiment(kernel: SphericalKernel, window: TestWindow,
                            w: WeightFunction, bump: BumpPair,
                            beta_list, phi_fn=None):
    """I(lam, complement-projection of phi w, e) against beta.

    Rows: (beta, |I|, |I| / (lam^(1/2) beta^(-(alpha-1/2)) ||phi||^2_L2(w)));
    also returns the fitted log-log slope.
    """
    lam = kernel.lam
    alpha = w.frostman_alpha
    if phi_fn is None:
        phi_fn = lambda x: modulated_gaussian(x, lam)
    grid3, phi, fw, wext = _phi_w_on_window_grid(w, phi_fn, lam)
    phi_norm_sq = float(np.sum(np.abs(phi) ** 2 * wext.values.real) * w.grid_step)
    rows = []
    for beta in sorted(beta_list):
        if not (lam ** 0.2 <= beta <= lam ** 0.8):
            raise DomainError(f"beta={beta} outside [lam^0.2, lam^0.8]")
        fperp = band_project(bump, lam, beta, fw, "complement")
        rep = eval_I(kernel, window, fperp, GroupElement.identity(),
                     beta=beta, alpha=alpha)
        bound = lam ** 0.5 * beta ** (-(alpha - 0.5)) * phi_norm_sq
        rows.append({"beta": beta, "abs_I": abs(rep.value),
                     "normalized": abs(rep.value) / bound if bound > 0 else 0.0,
                     "error": rep.error_estimate, "converged": rep.converged})
    lb = np.log([r["beta"] for r in rows])
    lv = np.log([max(r["abs_I"], 1e-300) for r in rows])
    slope = float(np.polyfit(lb, lv, 1)[0]) if len(rows) >= 2 else float("nan")
    return rows, slope, phi_norm_sq


def rapid_decay_experiment(kernel: SphericalKernel, window: TestWindow,
                           w: WeightFunction, bump: BumpPair, beta: float,
                           epsilon0: float = 0.1,
                           t_factors=(0.0, 0.25, 0.5, 1.0, 2.0, 4.0),
                           phi_fn=None):
    """I(lam, pass-projection of phi w, exp(t E)) across the threshold
    t* = lam^(-1/2+eps0) beta^(1/2) in the lower-shear direction.

    Rows: (t, d(g, A), |I|); the contrast is |I|(largest t) / |I|(t=0).
    """
    lam = kernel.lam
    if phi_fn is None:
        phi_fn = lambda x: modulated_gaussian(x, lam)
    grid3, phi, fw, wext = _phi_w_on_window_grid(w, phi_fn, lam)
    fpass = band_project(bump, lam, beta, fw, "pass")
    t_star = lam ** (-0.5 + epsilon0) * beta ** 0.5
    rows = []
    for fac in sorted(t_factors):
        t = fac * t_star
        g = GroupElement.lower_shear(t)
        d_A, _, _ = dist_to_diag(g) if t > 0 else (0.0, 0.0, False)
        rep = eval_I(kernel, window, fpass, g, g_desc=f"shear({t:.6g})", beta=beta)
        rows.append({"t": t, "factor": fac, "dist_A": d_A, "abs_I": abs(rep.value),
                     "error": rep.error_estimate, "converged": rep.converged})
    base = rows[0]["abs_I"] if rows and rows[0]["factor"] == 0.0 else None
    contrast = rows[-1]["abs_I"] / base if base else float("nan")
    return rows, contrast, t_star
