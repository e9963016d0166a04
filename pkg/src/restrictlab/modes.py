"""Model-surface eigenfunctions (round sphere, flat torus), restriction norms
against fractal measures, Kakeya-Nikodym tube norms with a rotation search,
the dyadic oscillatory-kernel check in Fermi coordinates, and the closed-form
exponent tables with log-log fitting."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from .errors import DomainError
from .frequency import smooth_step
from .geometry import _golden_min
from .measures import FractalMeasure, WeightFunction

MAX_DEGREE = 1000


# ---------------------------------------------------------------------------
# exponent tables

def gamma_exponent(alpha):
    """Piecewise restriction exponent: (1-alpha)/2 on (0,1/2], 1/4 on
    (1/2,1], (2-alpha)/4 on (1,2]. Exact on Fraction inputs."""
    half = Fraction(1, 2) if isinstance(alpha, Fraction) else 0.5
    one = 1 if isinstance(alpha, Fraction) else 1.0
    if alpha <= 0 or alpha > 2:
        raise DomainError("alpha must lie in (0, 2]")
    if alpha <= half:
        return half - alpha / 2
    if alpha <= one:
        return half / 2
    return (2 - alpha) / 4


def delta_exponent(alpha):
    """Power saving delta(alpha) = (alpha-1/2) / (24 (alpha-1/2) + 2) on (1/2, 1]."""
    half = Fraction(1, 2) if isinstance(alpha, Fraction) else 0.5
    if not half < alpha <= 1:
        raise DomainError("alpha must lie in (1/2, 1]")
    t = alpha - half
    return t / (24 * t + 2)


def marshall_exponent(alpha):
    """(alpha - 1/2)/14: the saving the unweighted geodesic bound already gives."""
    half = Fraction(1, 2) if isinstance(alpha, Fraction) else 0.5
    return (alpha - half) / 14


def exponent_table(alpha_grid) -> list[dict]:
    rows = []
    for alpha in alpha_grid:
        half = Fraction(1, 2) if isinstance(alpha, Fraction) else 0.5
        row = {"alpha": alpha, "gamma": gamma_exponent(alpha),
               "delta": delta_exponent(alpha) if half < alpha <= 1 else None,
               "marshall": marshall_exponent(alpha) if half < alpha <= 1 else None}
        rows.append(row)
    return rows


def fit_exponent(pairs):
    """Least-squares slope of log(value) against log(lam); returns (slope, residual)."""
    pairs = [(float(l), float(v)) for l, v in pairs]
    if len(pairs) < 3:
        raise DomainError("need at least 3 data points")
    ls = np.log([p[0] for p in pairs])
    vs = np.log([p[1] for p in pairs])
    if np.ptp(ls) == 0:
        raise DomainError("degenerate fit: identical lambda values")
    coef, res = np.polyfit(ls, vs, 1), None
    fit = np.polyval(coef, ls)
    return float(coef[0]), float(np.sqrt(np.mean((vs - fit) ** 2)))


# ---------------------------------------------------------------------------
# model-surface modes

@dataclass(frozen=True)
class ModeSpec:
    surface: str                     # "sphere" | "torus"
    kind: str                        # "zonal" | "highest_weight" | "plane_wave_sum"
    degree: int = None
    freqs: tuple = None              # torus integer frequency vectors

    def __post_init__(self):
        if self.surface not in ("sphere", "torus"):
            raise DomainError(f"unknown surface {self.surface!r}")
        if self.surface == "sphere":
            if self.kind not in ("zonal", "highest_weight"):
                raise DomainError(f"unknown sphere mode kind {self.kind!r}")
            if self.degree is None or self.degree < 1:
                raise DomainError("sphere modes need a degree >= 1")
            if self.degree > MAX_DEGREE:
                raise DomainError(f"degree above stability range {MAX_DEGREE}")
        else:
            if self.kind != "plane_wave_sum":
                raise DomainError("torus modes are plane_wave_sum")
            if not self.freqs:
                raise DomainError("torus modes need frequency vectors")


def _legendre_values(l: int, x: np.ndarray) -> np.ndarray:
    """P_l(x) by the standard three-term recurrence; |P_l| <= 1 keeps it
    stable, with an overflow guard for pathological inputs."""
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if l == 0:
        return p_prev
    p = x.copy()
    for k in range(1, l):
        p, p_prev = ((2 * k + 1) * x * p - k * p_prev) / (k + 1), p
        if np.any(np.abs(p) > 1e250):
            raise DomainError("Legendre recurrence overflow")
    return p


def _highest_weight_log_c(l: int) -> float:
    # |Y_l^l| on the equator: sqrt((2l+1)(2l)!/(4 pi)) / (2^l l!)
    return (0.5 * (np.log(2 * l + 1.0) - np.log(4.0 * np.pi))
            + 0.5 * gammaln(2 * l + 1.0) - l * np.log(2.0) - gammaln(l + 1.0))


class SphereMode:
    """Spherical harmonic evaluator on the unit sphere; L^2 norm 1."""

    surface = "sphere"

    def __init__(self, kind: str, degree: int):
        self.kind = kind
        self.l = int(degree)
        self.lam = float(np.sqrt(self.l * (self.l + 1.0)))
        if kind == "highest_weight":
            self._log_c = _highest_weight_log_c(self.l)

    def value_angles(self, theta, phi) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        phi = np.asarray(phi, dtype=float)
        if self.kind == "zonal":
            return (np.sqrt((2 * self.l + 1) / (4.0 * np.pi))
                    * _legendre_values(self.l, np.cos(theta))).astype(complex)
        st = np.clip(np.sin(theta), 0.0, 1.0)
        mag = np.where(st > 0, np.exp(self._log_c + self.l * np.log(np.maximum(st, 1e-300))), 0.0)
        return mag * np.exp(1j * self.l * phi)

    def value_xyz(self, xyz: np.ndarray) -> np.ndarray:
        x, y, z = xyz[..., 0], xyz[..., 1], xyz[..., 2]
        theta = np.arccos(np.clip(z, -1.0, 1.0))
        phi = np.arctan2(y, x)
        return self.value_angles(theta, phi)

    def l2_norm(self, n_theta: int = None) -> float:
        n = n_theta or max(64, 2 * self.l + 16)
        xg, wg = np.polynomial.legendre.leggauss(n)
        theta = np.arccos(xg)
        n_phi = max(16, 2 * self.l + 8)
        phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
        vals = np.abs(self.value_angles(theta[:, None], phi[None, :])) ** 2
        return float(np.sqrt((vals.mean(axis=1) * wg).sum() * 2.0 * np.pi))

    def eigen_residual(self, rng: np.random.Generator, n_points: int = 20) -> float:
        """max over random points of |(Lap + lam^2) e| / (lam^2 sup|e|),
        via central differences in (theta, phi)."""
        h = max(1.2e-4 / max(self.l, 1), 1e-7)
        theta = rng.uniform(0.6, np.pi - 0.6, n_points)
        phi = rng.uniform(0.0, 2.0 * np.pi, n_points)
        v = self.value_angles(theta, phi)
        vtp = self.value_angles(theta + h, phi)
        vtm = self.value_angles(theta - h, phi)
        vpp = self.value_angles(theta, phi + h)
        vpm = self.value_angles(theta, phi - h)
        d2t = (vtp - 2 * v + vtm) / h ** 2
        dt = (vtp - vtm) / (2 * h)
        d2p = (vpp - 2 * v + vpm) / h ** 2
        lap = d2t + dt / np.tan(theta) + d2p / np.sin(theta) ** 2
        resid = np.abs(lap + self.l * (self.l + 1.0) * v)
        scale = self.l * (self.l + 1.0) * max(np.abs(v).max(), 1e-300)
        return float(resid.max() / scale)


class TorusMode:
    """Normalized sum of plane waves e^(i<k,x>) on [0, 2pi)^2 with |k| equal."""

    surface = "torus"

    def __init__(self, freqs, coeffs=None):
        self.freqs = [tuple(int(c) for c in k) for k in freqs]
        norms = {float(np.hypot(*k)) for k in self.freqs}
        if len(norms) != 1:
            raise DomainError("all frequency vectors must share one modulus")
        self.lam = norms.pop()
        c = np.asarray(coeffs if coeffs is not None else np.ones(len(self.freqs)),
                       dtype=complex)
        # L^2([0,2pi]^2) norm of sum c_k e^{i<k,x>} is 2 pi |c|_2
        self.coeffs = c / (2.0 * np.pi * np.linalg.norm(c))

    def value_xy(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape, dtype=complex)
        for c, (k1, k2) in zip(self.coeffs, self.freqs):
            out += c * np.exp(1j * (k1 * x + k2 * y))
        return out

    def l2_norm(self, n: int = 256) -> float:
        x = 2.0 * np.pi * np.arange(n) / n
        vals = np.abs(self.value_xy(x[:, None], x[None, :])) ** 2
        return float(np.sqrt(vals.mean() * (2.0 * np.pi) ** 2))

    def eigen_residual(self, rng: np.random.Generator, n_points: int = 20) -> float:
        if self.lam == 0:
            return 0.0
        h = 1e-4 / max(self.lam, 1.0)
        x = rng.uniform(0, 2 * np.pi, n_points)
        y = rng.uniform(0, 2 * np.pi, n_points)
        v = self.value_xy(x, y)
        lap = ((self.value_xy(x + h, y) - 2 * v + self.value_xy(x - h, y))
               + (self.value_xy(x, y + h) - 2 * v + self.value_xy(x, y - h))) / h ** 2
        resid = np.abs(lap + self.lam ** 2 * v)
        return float(resid.max() / (self.lam ** 2 * max(np.abs(v).max(), 1e-300)))


def make_mode(spec: ModeSpec):
    """Build the evaluator; callers may check eigen_residual and l2_norm."""
    if spec.surface == "sphere":
        return SphereMode(spec.kind, spec.degree)
    return TorusMode(spec.freqs)


# ---------------------------------------------------------------------------
# geodesics, restriction norms, tube norms

def _rotation_from_axis_angle(psi: float) -> np.ndarray:
    """Rotation about the y-axis tilting the north pole by psi."""
    c, s = np.cos(psi), np.sin(psi)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


@dataclass(frozen=True)
class SphereGeodesic:
    """Unit-speed great-circle arc s -> R (cos s, sin s, 0)."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    length: float = 1.0

    @classmethod
    def equator(cls, length: float = 1.0) -> "SphereGeodesic":
        return cls(np.eye(3), length)

    @classmethod
    def meridian(cls, length: float = 1.0) -> "SphereGeodesic":
        return cls(np.array([[1.0, 0, 0], [0, 0, -1.0], [0, 1.0, 0]]), length)

    def points(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        circ = np.stack([np.cos(s), np.sin(s), np.zeros_like(s)], axis=-1)
        return circ @ self.rotation.T


@dataclass(frozen=True)
class TorusGeodesic:
    """Unit-speed rational-direction line on [0, 2pi)^2."""

    direction: tuple = (1, 0)
    offset: tuple = (0.0, 0.0)
    length: float = 1.0

    def points(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        d = np.asarray(self.direction, dtype=float)
        d = d / np.linalg.norm(d)
        return np.stack([self.offset[0] + s * d[0], self.offset[1] + s * d[1]], axis=-1)


def restriction_norm(mode, ell, mu: FractalMeasure) -> float:
    """||e||_{L^2(mu)} with mu's atoms pushed to the geodesic by arclength."""
    pts = ell.points(mu.atoms)
    if mode.surface == "sphere":
        vals = mode.value_xyz(pts)
    else:
        vals = mode.value_xy(pts[..., 0], pts[..., 1])
    return float(np.sqrt(np.sum(mu.weights * np.abs(vals) ** 2)))


def restriction_norm_quadrature(mode, ell, n: int = 4096) -> float:
    """Dense uniform-measure reference value for the unit segment."""
    s = (np.arange(n) + 0.5) / n * ell.length
    pts = ell.points(s)
    if mode.surface == "sphere":
        vals = mode.value_xyz(pts)
    else:
        vals = mode.value_xy(pts[..., 0], pts[..., 1])
    return float(np.sqrt(np.mean(np.abs(vals) ** 2) * ell.length))


@dataclass(frozen=True)
class KNReport:
    lam: float
    half_width: float
    s_kn: float
    maximizer: dict
    search_resolution: float

    def to_row(self) -> dict:
        return {"lambda": self.lam, "half_width": self.half_width,
                "s_kn": self.s_kn, "search_resolution": self.search_resolution,
                **{f"max_{k}": v for k, v in self.maximizer.items()}}


def _sphere_tube_mass(mode, psi: float, delta: float, n_along: int,
                      n_across: int = 17) -> float:
    """L^2 mass of the mode in the delta-collar of the great circle whose
    axis is tilted by psi from the pole."""
    R = _rotation_from_axis_angle(psi)
    t = 2.0 * np.pi * (np.arange(n_along) + 0.5) / n_along
    u = delta * (np.arange(n_across) + 0.5) / n_across
    u = np.concatenate([-u[::-1], u])
    circ = np.stack([np.cos(t), np.sin(t), np.zeros_like(t)], axis=-1)
    pole = np.array([0.0, 0.0, 1.0])
    pts = (np.cos(u)[:, None, None] * circ[None, :, :]
           + np.sin(u)[:, None, None] * pole[None, None, :])
    pts = pts @ R.T
    vals = np.abs(mode.value_xyz(pts)) ** 2
    du = u[1] - u[0]
    dt = 2.0 * np.pi / n_along
    return float((vals * np.cos(u)[:, None]).sum() * du * dt)


def kn_norm(mode, half_width: float = None, grid_factor: float = 4.0,
            samples_across: int = 17, grid_budget: int = 1 << 26) -> KNReport:
    """Kakeya-Nikodym norm: sup over the tube family of the L^2 mass in the
    lam^(-1/2)-neighborhood.

    Sphere: great circles; zonal/highest-weight modes are rotationally
    symmetric about the pole, so the axis search reduces to the polar tilt,
    gridded at (half-width)/grid_factor with golden-section refinement.
    Torus: rational-direction lines with a transverse offset search.
    """
    lam = mode.lam
    delta = half_width if half_width is not None else lam ** -0.5
    n_candidates = int(np.ceil((np.pi / 2) / (delta / grid_factor))) + 1
    if mode.surface == "sphere":
        n_along = max(256, 4 * getattr(mode, "l", 16) + 32)
        if n_candidates * n_along * 2 * samples_across > grid_budget:
            from .errors import ResourceError
            raise ResourceError(
                f"tube search needs {n_candidates} candidates x "
                f"{n_along * 2 * samples_across} nodes > budget {grid_budget}")
        step = delta / grid_factor
        psis = np.arange(0.0, np.pi / 2 + step, step)
        masses = np.array([_sphere_tube_mass(mode, p, delta, n_along, samples_across)
                           for p in psis])
        i = int(np.argmax(masses))
        lo, hi = psis[max(0, i - 1)], psis[min(len(psis) - 1, i + 1)]
        psi_star, neg = _golden_min(
            lambda p: -_sphere_tube_mass(mode, p, delta, n_along, samples_across),
            lo, hi, tol=1e-6)
        return KNReport(lam, delta, float(-neg), {"axis_tilt": float(psi_star)},
                        float(step))
    # torus
    directions = [(1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (1, 2), (2, -1), (1, -2)]
    best = (-1.0, None)
    step = delta / grid_factor
    for d in directions:
        dnorm = float(np.hypot(*d))
        period = 2.0 * np.pi * dnorm
        n_along = max(256, int(8 * lam * dnorm) + 16)
        s = period * (np.arange(n_along) + 0.5) / n_along
        perp = np.array([-d[1], d[0]]) / dnorm
        offsets = np.arange(0.0, 2.0 * np.pi / dnorm, step)
        u = delta * (np.arange(samples_across) + 0.5) / samples_across
        u = np.concatenate([-u[::-1], u])
        du = u[1] - u[0]
        base = np.stack([s * d[0] / dnorm, s * d[1] / dnorm], axis=-1)
        for off in offsets:
            pts = (base[None, :, :] + (off + u)[:, None, None] * perp[None, None, :])
            vals = np.abs(mode.value_xy(pts[..., 0], pts[..., 1])) ** 2
            mass = float(vals.sum() * du * (period / n_along))
            if mass > best[0]:
                best = (mass, {"direction": d, "offset": float(off)})
    return KNReport(lam, delta, best[0], best[1], float(step))


def theorem_ratio_table(modes, mu: FractalMeasure, alpha: float,
                        geodesic_for=None, log_loss_at_one: bool = True):
    """Restriction norm against the tube-norm bound lam^(1/4) s_KN^(alpha-1/2).

    Rows: {lambda, lhs, skn, bound, ratio}; at alpha = 1 the bound carries the
    additional log(lam) factor.
    """
    if not 0.5 < alpha <= 1.0:
        raise DomainError("alpha must lie in (1/2, 1]")
    rows = []
    for mode in modes:
        ell = geodesic_for(mode) if geodesic_for else SphereGeodesic.equator()
        lhs = restriction_norm(mode, ell, mu)
        rep = kn_norm(mode)
        bound = mode.lam ** 0.25 * rep.s_kn ** (alpha - 0.5)
        if alpha == 1.0 and log_loss_at_one:
            bound *= max(np.log(mode.lam), 1.0)
        rows.append({"lambda": mode.lam, "lhs": lhs, "skn": rep.s_kn,
                     "bound": bound, "ratio": lhs / bound})
    ratios = [r["ratio"] for r in rows]
    spread = max(ratios) / min(ratios) if min(ratios) > 0 else float("inf")
    return rows, spread


# alias matching the operation map
theorem3_check = theorem_ratio_table


# ---------------------------------------------------------------------------
# dyadic decomposition in Fermi coordinates

def lp_bump(tau) -> np.ndarray:
    """Littlewood-Paley bump beta supported in (1/2, 2), equal to 1 on
    [0.9, 1], built as psi(tau) - psi(tau/2) so sum_j beta(2^-j tau)
    telescopes to 1 for tau > 0."""
    tau = np.abs(np.asarray(tau, dtype=float))

    def psi(t):
        return smooth_step((t - 0.5) / 0.4)

    return psi(tau) - psi(tau / 2.0)


def lp_partition_sum(tau, j_min: int = -40, j_max: int = 40) -> np.ndarray:
    tau = np.asarray(tau, dtype=float)
    total = np.zeros_like(tau)
    for j in range(j_min, j_max + 1):
        total += lp_bump(tau * 2.0 ** (-j))
    return total


def _fermi_distance(s, y1, y2):
    """Great-circle distance from the equator point at arc s to the point
    with Fermi coordinates (y1, y2): arccos(cos y2 cos(y1 - s))."""
    return np.arccos(np.clip(np.cos(y2) * np.cos(y1 - s), -1.0, 1.0))


def _parametrix_amplitude(d: np.ndarray) -> np.ndarray:
    """Smooth stand-in amplitude supported where the distance lies in (1/2, 1)."""
    up = smooth_step((d - 0.5) / 0.1)
    down = smooth_step((1.0 - d) / 0.1)
    return up * down


def dyadic_inner_integral(lam: float, k_index: int, s: float, sp: float,
                          n_y1: int = None, n_y2: int = 192, y1_span: float = 2.5):
    """Oscillatory y-integral over the dyadic collar Omega_k:

    int e^(i lam (d(l(s),y) - d(l(s'),y))) a a' beta_k^2(y2) cos(y2) dy,
    plus a degeneracy flag when the transverse phase derivative drops below
    a tenth of its expected 2^k |s - s'| size on over 10% of the nodes.
    """
    two_k = 2.0 ** k_index
    if n_y1 is None:
        n_y1 = max(256, int(3.0 * lam) + 64)
    y1 = np.linspace(min(s, sp) - y1_span, max(s, sp) + y1_span, n_y1)
    band = two_k * (0.5 + 1.5 * (np.arange(n_y2) + 0.5) / n_y2)
    y2 = np.concatenate([-band[::-1], band])
    Y1, Y2 = np.meshgrid(y1, y2, indexing="ij")
    d1 = _fermi_distance(s, Y1, Y2)
    d2 = _fermi_distance(sp, Y1, Y2)
    amp = _parametrix_amplitude(d1) * _parametrix_amplitude(d2)
    bk = lp_bump(np.abs(y2) / two_k) ** 2
    integrand = amp * np.exp(1j * lam * (d1 - d2)) * (bk * np.cos(y2))[None, :]
    h1 = y1[1] - y1[0]
    h2 = band[1] - band[0]
    value = complex(integrand.sum() * h1 * h2)
    # transverse phase-derivative screen on the amplitude's support
    dd = 1e-5
    ph_p = (_fermi_distance(s, Y1, Y2 + dd) - _fermi_distance(sp, Y1, Y2 + dd))
    ph_m = (_fermi_distance(s, Y1, Y2 - dd) - _fermi_distance(sp, Y1, Y2 - dd))
    dphase = np.abs(ph_p - ph_m) / (2 * dd)
    on_supp = amp > 1e-3
    expected = two_k * abs(s - sp)
    if expected > 0 and on_supp.any():
        frac_degenerate = float((dphase[on_supp] < 0.1 * expected).mean())
    else:
        frac_degenerate = 0.0
    return value, frac_degenerate > 0.10


def dyadic_kernel_check(lam: float, k_index: int, w: WeightFunction = None,
                        s_pairs=None, decay_power: int = 2):
    """Measured decay of the dyadic inner integral against the model kernel
    2^k (1 + 2^(2k) lam |s-s'|)^(-N), N = decay_power.

    Returns a report with the per-pair table, the sup of |value| / model,
    degeneracy flags, a fitted decay slope in the oscillatory regime, and,
    when a weight is supplied, the weighted s-integral of the model kernel
    compared to 2^k lam^(-alpha) 2^(-2 alpha k).
    """
    two_k = 2.0 ** k_index
    if not (lam ** -0.5 <= two_k <= 0.5 + 1e-12):
        raise DomainError("need lam^(-1/2) <= 2^k <= 1/2")
    if s_pairs is None:
        # probe oscillation scales 2^(2k) lam |s-s'| from 1/2 to ~24; beyond
        # that the longitudinal oscillation drives values to the noise floor
        seps = np.geomspace(0.5, 24.0, 10) / (two_k ** 2 * lam)
        s_pairs = [(0.05, 0.05 + d) for d in seps if d <= 0.9]
    rows = []
    for s, sp in s_pairs:
        val, flagged = dyadic_inner_integral(lam, k_index, s, sp)
        x = two_k ** 2 * lam * abs(s - sp)
        model = two_k * (1.0 + x) ** (-decay_power)
        rows.append({"s": s, "s_prime": sp, "osc_scale": x, "abs_value": abs(val),
                     "model": model, "ratio": abs(val) / model, "flagged": flagged})
    sup_ratio = max(r["ratio"] for r in rows)
    floor = 1e-9 * max(r["abs_value"] for r in rows)
    osc = [(r["osc_scale"], r["abs_value"]) for r in rows
           if r["osc_scale"] >= 1.5 and r["abs_value"] > floor]
    slope = None
    if len(osc) >= 3:
        slope, _ = fit_exponent(osc)
    report = {"lambda": lam, "k_index": k_index, "rows": rows,
              "sup_ratio": sup_ratio, "decay_slope": slope,
              "any_flagged": any(r["flagged"] for r in rows)}
    if w is not None:
        alpha = w.frostman_alpha
        g = w.grid()
        sp0 = 0.05
        kernel_vals = two_k * (1.0 + two_k ** 2 * lam * np.abs(g - sp0)) ** (-decay_power)
        lhs = float(np.sum(kernel_vals * w.values) * w.grid_step)
        target = two_k * lam ** (-alpha) * two_k ** (-2 * alpha)
        report["weighted_integral"] = lhs
        report["weighted_target"] = target
        report["weighted_ratio"] = lhs / target
    return report
