"""Fractal measures on [0,1]: Frostman constants, Riesz s-energies, and the
smoothed weight obtained by mollifying a measure at spectral scale 1/lambda."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, GridMismatchError, ResourceError
from .sampling import SampledFunction

ATOM_BUDGET = 1 << 22
GRID_BUDGET = 1 << 24

# Metric-dependent bound on the speed of the distance phase along a geodesic;
# never computed from a metric here, exposed as a knob with a model default.
DEFAULT_C_ELL = 2.0


@dataclass(frozen=True)
class FractalMeasure:
    """Finite atomic approximation of an alpha-dimensional measure on [0,1].

    Atoms are sorted, distinct points; weights are nonnegative with total
    mass 1 (or exactly 0 for the empty measure).
    """

    atoms: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    alpha: float
    depth: int = 0

    def __post_init__(self):
        atoms = np.ascontiguousarray(self.atoms, dtype=float)
        weights = np.ascontiguousarray(self.weights, dtype=float)
        if atoms.shape != weights.shape or atoms.ndim != 1:
            raise DomainError("atoms and weights must be 1-d arrays of equal length")
        if not 0 < self.alpha <= 1:
            raise DomainError(f"alpha must lie in (0,1], got {self.alpha}")
        if atoms.size:
            if atoms.min() < 0 or atoms.max() > 1:
                raise DomainError("atoms must lie in [0,1]")
            if np.any(np.diff(atoms) <= 0):
                raise DomainError("atoms must be strictly increasing (no duplicates)")
            if weights.min() < 0:
                raise DomainError("weights must be nonnegative")
            total = weights.sum()
            if total != 0 and abs(total - 1.0) > 1e-12:
                raise DomainError(f"total mass must be 1 (or 0), got {total}")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def interval_mass(self, lo, hi) -> np.ndarray:
        """Measure of [lo, hi] (endpoints included); lo/hi may be arrays."""
        cum = np.concatenate([[0.0], np.cumsum(self.weights)])
        i_lo = np.searchsorted(self.atoms, np.asarray(lo, dtype=float), side="left")
        i_hi = np.searchsorted(self.atoms, np.asarray(hi, dtype=float), side="right")
        return cum[i_hi] - cum[i_lo]

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "depth": self.depth,
                "atoms": self.atoms.tolist(), "weights": self.weights.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "FractalMeasure":
        return cls(np.asarray(d["atoms"], dtype=float),
                   np.asarray(d["weights"], dtype=float),
                   float(d["alpha"]), int(d["depth"]))


@dataclass(frozen=True)
class WeightFunction:
    """Smoothed weight on a uniform grid covering [-2,2].

    Treated as piecewise constant on cells of width grid_step for all
    integral operations, so singular kernels integrate exactly per cell.
    """

    grid_min: float
    grid_step: float
    values: np.ndarray = field(repr=False)
    lambda_ref: float
    frostman_alpha: float

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 2:
            raise DomainError("values must be a 1-d array with >= 2 samples")
        if vals.min() < -1e-12:
            raise DomainError("weight values must be nonnegative")
        object.__setattr__(self, "values", np.maximum(vals, 0.0))
        outside = np.abs(self.grid()) > 2.0 + 1e-12
        if np.any(self.values[outside] != 0.0):
            raise DomainError("weight must vanish at grid points with |s| > 2")

    @property
    def n(self) -> int:
        return self.values.size

    def grid(self) -> np.ndarray:
        return self.grid_min + self.grid_step * np.arange(self.values.size)

    def sampled(self) -> SampledFunction:
        return SampledFunction(self.grid_min, self.grid_step, self.values)

    def cumulative(self):
        """Cell-boundary grid and cumulative integral of the piecewise-constant weight."""
        h = self.grid_step
        bounds = np.concatenate([self.grid() - h / 2, [self.grid()[-1] + h / 2]])
        cum = np.concatenate([[0.0], np.cumsum(self.values) * h])
        return bounds, cum

    def interval_integral(self, lo, hi) -> np.ndarray:
        bounds, cum = self.cumulative()
        return np.interp(hi, bounds, cum) - np.interp(lo, bounds, cum)

    def l2_weighted_norm(self, phi: np.ndarray) -> float:
        """||phi||_{L^2(w dx)} on the grid."""
        phi = np.asarray(phi)
        if phi.shape != self.values.shape:
            raise GridMismatchError("phi must be sampled on the weight's grid")
        return float(np.sqrt(self.grid_step * np.sum(np.abs(phi) ** 2 * self.values)))

    def to_dict(self) -> dict:
        return {"lambda_ref": self.lambda_ref, "frostman_alpha": self.frostman_alpha,
                "grid_min": self.grid_min, "grid_step": self.grid_step,
                "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "WeightFunction":
        return cls(float(d["grid_min"]), float(d["grid_step"]),
                   np.asarray(d["values"], dtype=float),
                   float(d["lambda_ref"]), float(d["frostman_alpha"]))


def make_cantor_measure(alpha: float, depth: int,
                        atom_budget: int = ATOM_BUDGET) -> FractalMeasure:
    """Two-branch Cantor measure of dimension alpha at a finite refinement depth.

    The contraction ratio r solves alpha = ln 2 / ln(1/r), i.e. r = 2^(-1/alpha);
    atoms sit at the midpoints of the 2^depth surviving intervals with equal
    weights.  alpha = 1 gives the midpoint discretization of Lebesgue measure.
    """
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha must lie in (0,1], got {alpha}")
    if depth < 0:
        raise DomainError("depth must be >= 0")
    if 2 ** depth > atom_budget:
        raise ResourceError(f"2^{depth} atoms exceed budget {atom_budget}")
    r = 2.0 ** (-1.0 / alpha)
    mid = np.array([0.5])
    for _ in range(depth):
        mid = np.concatenate([r * mid, r * mid + (1.0 - r)])
    mid = np.sort(mid)
    w = np.full(mid.size, 2.0 ** (-depth))
    return FractalMeasure(mid, w, alpha, depth)


def frostman_ratio(m: FractalMeasure, r_grid) -> float:
    """sup over atom centers x and radii r of mu([x-r, x+r]) / r^alpha."""
    r_grid = np.asarray(r_grid, dtype=float)
    if r_grid.size == 0:
        raise DomainError("r_grid must be nonempty")
    if np.any(r_grid <= 0) or np.any(r_grid > 1):
        raise DomainError("radii must lie in (0, 1]")
    if m.atoms.size == 0:
        raise DomainError("measure must be nonempty")
    best = 0.0
    for r in r_grid:
        mass = m.interval_mass(m.atoms - r, m.atoms + r)
        best = max(best, float(mass.max()) / r ** m.alpha)
    return best


def _riesz_cell_kernel(n_cells: int, h: float, s: float) -> np.ndarray:
    """G[k] = exact integral of |x-y|^(-s) over a cell pair at offset k.

    Cells have width h; G[k] = int (h - |u - k h|) |u|^(-s) du over the
    triangular overlap.  Exact antiderivatives up to k=256, then a fourth-order
    Taylor form that avoids catastrophic cancellation.
    """
    G = np.empty(n_cells)
    G[0] = 2.0 * h ** (2.0 - s) / ((1.0 - s) * (2.0 - s))
    k_exact = min(n_cells - 1, 256)
    if k_exact >= 1:
        k = np.arange(1, k_exact + 1, dtype=float)
        A, B, C = (k - 1) * h, k * h, (k + 1) * h

        def F1(u):
            return u ** (1.0 - s) / (1.0 - s)

        def F2(u):
            return u ** (2.0 - s) / (2.0 - s)

        G[1:k_exact + 1] = ((F2(B) - F2(A)) - A * (F1(B) - F1(A))
                            + C * (F1(C) - F1(B)) - (F2(C) - F2(B)))
    if n_cells - 1 > k_exact:
        k = np.arange(k_exact + 1, n_cells, dtype=float)
        G[k_exact + 1:] = h * h * (k * h) ** (-s) * (1.0 + s * (s + 1.0) / (12.0 * k * k))
    return G


def _grid_energy(values: np.ndarray, h: float, s: float) -> complex:
    """Double integral of f(x) conj(f(y)) |x-y|^(-s) for piecewise-constant f."""
    f = np.asarray(values, dtype=complex)
    n = f.size
    G = _riesz_cell_kernel(n, h, s)
    L = 1 << int(np.ceil(np.log2(2 * n)))
    F = np.fft.fft(f, L)
    corr = np.fft.ifft(F * np.conj(F))[:n]   # corr[k] = sum_i f[i+k] conj(f[i])
    total = G[0] * corr[0].real + 2.0 * np.dot(G[1:], corr[1:].real)
    return complex(total)


def energy(m, s: float) -> float:
    """Riesz s-energy I_s of an atomic measure or of a sampled weight.

    Atomic measures use the exact pair sum with the diagonal excluded;
    weights use exact cell-pair integration of the piecewise-constant density.
    """
    if not 0 < s < 1:
        raise DomainError(f"s must lie in (0,1), got {s}")
    if isinstance(m, WeightFunction):
        return _grid_energy(m.values, m.grid_step, s).real
    if not isinstance(m, FractalMeasure):
        raise DomainError("energy expects a FractalMeasure or WeightFunction")
    x, w = m.atoms, m.weights
    total = 0.0
    chunk = 1024
    for i0 in range(0, x.size, chunk):
        d = np.abs(x[i0:i0 + chunk, None] - x[None, :])
        ww = w[i0:i0 + chunk, None] * w[None, :]
        np.fill_diagonal(d[:, i0:i0 + chunk], np.inf)
        total += float(np.sum(ww * d ** (-s)))
    return total


def weighted_energy(w: WeightFunction, phi, s: float) -> complex:
    """I_s(phi w): double integral of phi(x) conj(phi(y)) w(x) w(y) |x-y|^(-s)."""
    if not 0 < s < w.frostman_alpha:
        raise DomainError(f"s must lie in (0, alpha={w.frostman_alpha}), got {s}")
    phi = np.asarray(phi, dtype=complex)
    if phi.shape != w.values.shape:
        raise GridMismatchError("phi must be sampled on the weight's grid")
    return _grid_energy(phi * w.values, w.grid_step, s)


def truncated_riesz(w: WeightFunction, x: float, s: float, delta: float) -> float:
    """int over |x-y| <= delta of w(y) |x-y|^(-s) dy, exact per grid cell."""
    if not 0 < s < w.frostman_alpha:
        raise DomainError(f"s must lie in (0, alpha={w.frostman_alpha}), got {s}")
    if not 0 < delta <= 100:
        raise DomainError("delta must lie in (0, 100]")
    g = w.grid()
    h = w.grid_step
    lo = np.maximum(g - h / 2, x - delta)
    hi = np.minimum(g + h / 2, x + delta)
    lo, hi = lo - x, hi - x

    def anti(t):
        return np.sign(t) * np.abs(t) ** (1.0 - s) / (1.0 - s)

    seg = np.where(hi > lo, anti(hi) - anti(lo), 0.0)
    return float(np.dot(w.values, seg))


def build_weight(nu: FractalMeasure, lam: float, eta, rho=None,
                 c_ell: float = DEFAULT_C_ELL, samples_per_wavelength: int = 8,
                 grid_budget: int = GRID_BUDGET) -> WeightFunction:
    """Mollify nu at scale 1/lam into a smooth weight on [-2,2].

    w(t) = rho(t) * sum_i nu_i sqrt(lam^2 K(lam (s_i - t))^2 + 1), where K is
    eta rescaled so its transform plateaus on |xi| <= 2 c_ell and vanishes
    beyond 4 c_ell.  eta is a BumpPair (or a plain callable evaluator).
    """
    if lam < 1:
        raise DomainError("lam must be >= 1")
    if samples_per_wavelength < 8:
        raise DomainError("need at least 8 samples per wavelength 1/lam")
    if rho is None:
        from .frequency import rho_cutoff
        rho = rho_cutoff
    eta_fn = getattr(eta, "eta", eta)
    h = 1.0 / (samples_per_wavelength * lam)
    n = int(round(4.0 / h))
    if n + 1 > grid_budget:
        raise ResourceError(f"{n + 1} grid points exceed budget {grid_budget}")
    t = -2.0 + h * np.arange(n + 1)
    scale = 4.0 * c_ell
    acc = np.zeros_like(t)
    for s0, w0 in zip(nu.atoms, nu.weights):
        kern = scale * eta_fn(scale * lam * (s0 - t))
        acc += w0 * np.sqrt((lam * kern) ** 2 + 1.0)
    vals = acc * rho(t)
    vals[np.abs(t) > 2.0] = 0.0   # rho already vanishes there; make it exact
    return WeightFunction(-2.0, h, vals, lam, nu.alpha)


def frostman_weight_sweep(w: WeightFunction, r_values, a_grid=None) -> np.ndarray:
    """sup over a of (int_{a-r}^{a+r} w) / r^alpha, for each radius r."""
    r_values = np.asarray(r_values, dtype=float)
    if a_grid is None:
        a_grid = np.linspace(-2.3, 2.3, 4001)
    bounds, cum = w.cumulative()
    out = np.empty(r_values.size)
    for i, r in enumerate(r_values):
        mass = np.interp(a_grid + r, bounds, cum) - np.interp(a_grid - r, bounds, cum)
        out[i] = mass.max() / r ** w.frostman_alpha
    return out


def decade_sweep(w: WeightFunction, r_min: float, r_max: float = 1.0,
                 per_decade: int = 16) -> list[tuple[float, float, float]]:
    """Per-decade suprema of the interval ratio over r in [r_min, r_max].

    Returns (r_lo, r_hi, sup) triples for log10-equal bins.
    """
    n_dec = max(1, int(np.ceil(np.log10(r_max / r_min))))
    edges = np.logspace(np.log10(r_min), np.log10(r_max), n_dec + 1)
    out = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        rs = np.logspace(np.log10(lo), np.log10(hi), per_decade)
        sup = float(frostman_weight_sweep(w, rs).max())
        out.append((float(lo), float(hi), sup))
    return out


def standard_test_functions(grid: np.ndarray, lam: float = None) -> list[tuple[str, np.ndarray]]:
    """The fixed family of ten test profiles used across the experiments."""
    x = np.asarray(grid, dtype=float)
    fam = [
        ("gauss_0.3", np.exp(-0.5 * (x / 0.3) ** 2).astype(complex)),
        ("gauss_0.5", np.exp(-0.5 * (x / 0.5) ** 2).astype(complex)),
        ("gauss_1.0", np.exp(-0.5 * x ** 2).astype(complex)),
        ("gauss_shift", np.exp(-0.5 * ((x - 0.5) / 0.5) ** 2).astype(complex)),
        ("mod3_gauss", np.exp(3j * x) * np.exp(-0.5 * x ** 2)),
        ("mod10_gauss", np.exp(10j * x) * np.exp(-0.5 * x ** 2)),
        ("poly_bump2", np.where(np.abs(x) < 2, (1 - (x / 2) ** 2) ** 2, 0.0).astype(complex)),
        ("poly_bump4", np.where(np.abs(x) < 2, (1 - (x / 2) ** 2) ** 4, 0.0).astype(complex)),
        ("poly_bump8", np.where(np.abs(x) < 2, (1 - (x / 2) ** 2) ** 8, 0.0).astype(complex)),
        ("cos_bump", (np.cos(np.pi * np.clip(x / 4, -0.5, 0.5)) ** 2).astype(complex)),
    ]
    if lam is not None:
        fam.append(("modlam_gauss", np.exp(1j * lam * x) * np.exp(-0.5 * x ** 2)))
    return fam
