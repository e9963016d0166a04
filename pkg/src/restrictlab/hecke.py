"""Quaternion algebra arithmetic over an order, bounded enumeration of
norm-n elements, coset reduction, return counting near the diagonal, and the
prime-power amplifier.

All arithmetic claims (norms, traces, embeddings, coset equivalence) are
exact in integer/rational arithmetic; floats enter only through the
archimedean distance filters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import math

import numpy as np

from .errors import DomainError, ResourceError
from .geometry import GroupElement, dist_to_diag, dist_to_identity

COEFF_BUDGET = 1 << 28


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, int(n ** 0.5) + 1):
        if sieve[p]:
            sieve[p * p::p] = bytearray(len(sieve[p * p::p]))
    return [i for i, v in enumerate(sieve) if v]


def is_squarefree(n: int) -> bool:
    n = abs(n)
    if n == 0:
        return False
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        d += 1
    return True


def _mul_std(x, y, a: int, b: int):
    """Product in the standard basis 1, w, W, wW with w^2=a, W^2=b, wW=-Ww."""
    x0, x1, x2, x3 = x
    y0, y1, y2, y3 = y
    return (x0 * y0 + a * x1 * y1 + b * x2 * y2 - a * b * x3 * y3,
            x0 * y1 + x1 * y0 - b * x2 * y3 + b * x3 * y2,
            x0 * y2 + x2 * y0 + a * x1 * y3 - a * x3 * y1,
            x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1)


def _conj_std(x):
    return (x[0], -x[1], -x[2], -x[3])


def _fraction_matrix(rows) -> list[list[Fraction]]:
    return [[Fraction(v) for v in row] for row in rows]


def _fraction_inverse(M: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(M)
    A = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            raise DomainError("order basis is singular")
        A[col], A[piv] = A[piv], A[col]
        inv = A[col][col]
        A[col] = [v / inv for v in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [vr - f * vc for vr, vc in zip(A[r], A[col])]
    return [row[n:] for row in A]


MAXIMAL_ORDER_2_3 = [[1, 0, Fraction(1, 2), 0],
                     [0, 1, Fraction(1, 2), Fraction(1, 2)],
                     [0, 0, Fraction(1, 2), 0],
                     [0, 0, 0, Fraction(1, 2)]]


class QuatAlgebra:
    """(a,b / Q) with a fixed order basis (columns, in standard coordinates).

    Default is the standard order Z<1, w, W, wW>; MAXIMAL_ORDER_2_3 gives a
    maximal order of reduced discriminant 6 for (a,b) = (2,3).  Division is
    screened numerically (isotropy search), not certified.
    """

    def __init__(self, a: int = 2, b: int = 3, basis=None, q: int = 6):
        if a <= 0 or not is_squarefree(a):
            raise DomainError("a must be a positive squarefree integer")
        if not is_squarefree(b):
            raise DomainError("b must be a squarefree integer")
        self.a, self.b, self.q = int(a), int(b), int(q)
        self.basis = _fraction_matrix(basis if basis is not None
                                      else np.eye(4, dtype=int).tolist())
        self.basis_inv = _fraction_inverse(self.basis)
        self._den = int(np.lcm.reduce([v.denominator for row in self.basis for v in row]))
        self._den_inv = int(np.lcm.reduce([v.denominator for row in self.basis_inv for v in row]))
        # integer matrices: C v = den * (std coords), D x = den_inv * (order coords)
        self._C = np.array([[int(v * self._den) for v in row] for row in self.basis],
                           dtype=np.int64)
        self._D = np.array([[int(v * self._den_inv) for v in row] for row in self.basis_inv],
                           dtype=np.int64)

    def element(self, coords) -> "QuatElement":
        return QuatElement(self, tuple(int(c) for c in coords))

    def one(self) -> "QuatElement":
        v = self.order_coords_from_std((1, 0, 0, 0))
        return self.element(v)

    def std_scaled(self, coords) -> tuple:
        """den * (standard coordinates), exact integers."""
        v = np.asarray(coords, dtype=object)
        return tuple(int(x) for x in (self._C @ v))

    def order_coords_from_std(self, std, scale: int = 1):
        """Order coordinates of scale*std (std integral); DomainError if not in the order."""
        x = np.asarray([int(c) for c in std], dtype=object)
        num = self._D @ x
        den = self._den_inv * scale
        out = []
        for v in num:
            if int(v) % den != 0:
                raise DomainError("element does not lie in the order")
            out.append(int(v) // den)
        return tuple(out)

    def nrd_std_scaled(self, xs) -> int:
        """den^2 * nrd from den-scaled standard coordinates."""
        x0, x1, x2, x3 = xs
        return x0 * x0 - self.a * x1 * x1 - self.b * x2 * x2 + self.a * self.b * x3 * x3

    def verify_order(self) -> bool:
        """Exact check that the basis lattice is closed under multiplication
        and has integral reduced norms and traces."""
        cols = [tuple(self.basis[r][c] for r in range(4)) for c in range(4)]
        for x in cols:
            if (2 * x[0]).denominator != 1:
                return False
            nr = x[0] ** 2 - self.a * x[1] ** 2 - self.b * x[2] ** 2 + self.a * self.b * x[3] ** 2
            if nr.denominator != 1:
                return False
        for x in cols:
            for y in cols:
                p = _mul_std(x, y, self.a, self.b)
                v = [sum(self.basis_inv[i][j] * p[j] for j in range(4)) for i in range(4)]
                if any(c.denominator != 1 for c in v):
                    return False
        return True

    def reduced_discriminant_squared(self) -> int:
        cols = [tuple(self.basis[r][c] for r in range(4)) for c in range(4)]
        G = [[2 * _mul_std(x, _conj_std(y), self.a, self.b)[0] for y in cols] for x in cols]
        # exact 4x4 determinant by cofactor expansion over Fractions
        def det(M):
            if len(M) == 1:
                return M[0][0]
            tot = Fraction(0)
            for j, v in enumerate(M[0]):
                if v:
                    minor = [row[:j] + row[j + 1:] for row in M[1:]]
                    tot += (-1) ** j * v * det(minor)
            return tot
        d = det(G)
        if d.denominator != 1:
            raise DomainError("discriminant of a non-integral lattice")
        return abs(int(d))

    def isotropy_screen(self, side: int = 50, chunk: int = 1 << 20) -> bool:
        """True when the norm form has no nonzero integer root with
        |coordinates| <= side (a necessary condition for division)."""
        rng = np.arange(-side, side + 1, dtype=np.int64)
        for x0 in rng:
            g1, g2, g3 = np.meshgrid(rng, rng, rng, indexing="ij")
            q = (x0 * x0 - self.a * g1 ** 2 - self.b * g2 ** 2
                 + self.a * self.b * g3 ** 2)
            zero = (q == 0)
            if x0 != 0:
                if np.any(zero):
                    return False
            else:
                zero &= ~((g1 == 0) & (g2 == 0) & (g3 == 0))
                if np.any(zero):
                    return False
        return True

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "q": self.q,
                "order_basis": [[str(v) for v in row] for row in self.basis]}

    @classmethod
    def from_dict(cls, d: dict) -> "QuatAlgebra":
        basis = [[Fraction(v) for v in row] for row in d["order_basis"]]
        return cls(d["a"], d["b"], basis, d["q"])


@dataclass(frozen=True)
class QuatElement:
    """Integer coordinate vector in the algebra's order basis."""

    algebra: QuatAlgebra
    coords: tuple

    def std_scaled(self) -> tuple:
        return self.algebra.std_scaled(self.coords)

    def nrd(self) -> int:
        num = self.algebra.nrd_std_scaled(self.std_scaled())
        den = self.algebra._den ** 2
        if num % den != 0:
            raise DomainError("non-integral reduced norm: basis is not an order")
        return num // den

    def trd(self) -> int:
        num = 2 * self.std_scaled()[0]
        if num % self.algebra._den != 0:
            raise DomainError("non-integral reduced trace: basis is not an order")
        return num // self.algebra._den

    def conj(self) -> "QuatElement":
        xs = _conj_std(self.std_scaled())
        return QuatElement(self.algebra,
                           self.algebra.order_coords_from_std(xs, scale=self.algebra._den))

    def __neg__(self) -> "QuatElement":
        return QuatElement(self.algebra, tuple(-c for c in self.coords))


def quat_mul(x: QuatElement, y: QuatElement) -> QuatElement:
    if x.algebra is not y.algebra:
        raise DomainError("elements live in different algebras")
    alg = x.algebra
    p = _mul_std(x.std_scaled(), y.std_scaled(), alg.a, alg.b)   # den^2-scaled
    return QuatElement(alg, alg.order_coords_from_std(p, scale=alg._den ** 2))


def quat_norm_trace(x: QuatElement) -> tuple[int, int]:
    return x.nrd(), x.trd()


def iota_matrix(x: QuatElement) -> np.ndarray:
    """Archimedean embedding [[xi, eta], [b eta_bar, xi_bar]] as floats,
    for x = xi + eta * W with xi, eta in Q(sqrt a).

    This arrangement is the multiplicative one (W xi = xi_bar W forces the
    Galois conjugates onto the second row); det = xi xi_bar - b eta eta_bar
    = nrd(x) either way.
    """
    alg = x.algebra
    x0, x1, x2, x3 = (c / alg._den for c in x.std_scaled())
    sa = np.sqrt(alg.a)
    xi, xib = x0 + x1 * sa, x0 - x1 * sa
    et, etb = x2 + x3 * sa, x2 - x3 * sa
    return np.array([[xi, et], [alg.b * etb, xib]])


def iota(x: QuatElement) -> GroupElement:
    """Projection of the embedding to PSL(2,R): iota(x)/sqrt(nrd x)."""
    n = x.nrd()
    if n <= 0:
        raise DomainError(f"nrd must be positive to project to PSL(2,R), got {n}")
    return GroupElement(iota_matrix(x))


def _entry_bound(n: int, g0: GroupElement, radius: float) -> float:
    kappa = g0.op_norm() * g0.inv().op_norm()
    return np.sqrt(n) * kappa * np.exp(np.sqrt(2.0) * radius) * (1.0 + 1e-9)


def _order_box(alg: QuatAlgebra, E: float) -> np.ndarray:
    sa = np.sqrt(alg.a)
    xb = np.array([E, E / sa, E * (1 + 1 / abs(alg.b)) / 2.0,
                   E * (1 + 1 / abs(alg.b)) / (2.0 * sa)])
    Binv_abs = np.abs(np.array([[float(v) for v in row] for row in alg.basis_inv]))
    return np.ceil(Binv_abs @ xb + 1e-9).astype(np.int64)


def conjugated_element(alg: QuatAlgebra, coords, n: int, g0: GroupElement) -> GroupElement:
    """g0^(-1) iota(gamma)/sqrt(n) g0 as a PSL(2,R) element."""
    m = iota_matrix(alg.element(coords))
    return GroupElement(g0.inv().m @ (m / np.sqrt(float(n))) @ g0.m)


def enumerate_norm_n(alg: QuatAlgebra, n: int, g0: GroupElement = None,
                     radius: float = 1.0, coeff_budget: int = COEFF_BUDGET):
    """All order elements of reduced norm n whose conjugated projection lies
    within `radius` of the identity, up to projective sign.

    Completeness: the distance cap bounds the operator norm of the conjugated
    matrix by e^(sqrt 2 radius), hence every entry of iota(gamma) by
    sqrt(n) ||g0|| ||g0^-1|| e^(sqrt 2 radius); inverting the coordinate map
    turns that into a finite scan box, swept exactly with the integer norm
    form.  Returned coordinate tuples are sorted lexicographically.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if radius > 2.0:
        raise DomainError("radius must be <= 2")
    if g0 is None:
        g0 = GroupElement.identity()
    bounds = _order_box(alg, _entry_bound(n, g0, radius))
    volume = int(np.prod(2 * bounds.astype(object) + 1))
    if volume > coeff_budget:
        raise ResourceError(f"coefficient box {2 * bounds + 1} has volume "
                            f"{volume} > budget {coeff_budget}")
    target = n * alg._den ** 2
    C = alg._C
    r1 = np.arange(-bounds[1], bounds[1] + 1, dtype=np.int64)
    r2 = np.arange(-bounds[2], bounds[2] + 1, dtype=np.int64)
    r3 = np.arange(-bounds[3], bounds[3] + 1, dtype=np.int64)
    g1, g2, g3 = np.meshgrid(r1, r2, r3, indexing="ij")
    g1, g2, g3 = g1.ravel(), g2.ravel(), g3.ravel()
    hits = []
    for v0 in range(-int(bounds[0]), int(bounds[0]) + 1):
        xs = [C[i, 0] * v0 + C[i, 1] * g1 + C[i, 2] * g2 + C[i, 3] * g3
              for i in range(4)]
        q = (xs[0] * xs[0] - alg.a * xs[1] * xs[1] - alg.b * xs[2] * xs[2]
             + alg.a * alg.b * xs[3] * xs[3])
        idx = np.nonzero(q == target)[0]
        for i in idx:
            hits.append((v0, int(g1[i]), int(g2[i]), int(g3[i])))
    out = set()
    for v in hits:
        neg = tuple(-c for c in v)
        canon = v if v >= neg else neg
        if canon in out:
            continue
        if dist_to_identity(conjugated_element(alg, canon, n, g0)) <= radius:
            out.add(canon)
    return sorted(out)


def serialize_elements(alg: QuatAlgebra, elems, n: int) -> list[dict]:
    """Coordinate quadruples plus reduced norm, for artifact emission."""
    return [{"coords": list(v), "nrd": alg.element(v).nrd()} for v in elems]


def find_units(alg: QuatAlgebra, coeff_radius: int = 5) -> list[tuple]:
    """Norm-1 elements with order coordinates in a fixed ball, up to sign."""
    rng = np.arange(-coeff_radius, coeff_radius + 1, dtype=np.int64)
    g0, g1, g2, g3 = (g.ravel() for g in np.meshgrid(rng, rng, rng, rng, indexing="ij"))
    C = alg._C
    xs = [C[i, 0] * g0 + C[i, 1] * g1 + C[i, 2] * g2 + C[i, 3] * g3 for i in range(4)]
    q = (xs[0] * xs[0] - alg.a * xs[1] * xs[1] - alg.b * xs[2] * xs[2]
         + alg.a * alg.b * xs[3] * xs[3])
    idx = np.nonzero(q == alg._den ** 2)[0]
    out = set()
    for i in idx:
        v = (int(g0[i]), int(g1[i]), int(g2[i]), int(g3[i]))
        neg = tuple(-c for c in v)
        out.add(v if v >= neg else neg)
    return sorted(out)


def left_equivalent(alg: QuatAlgebra, x: tuple, y: tuple, n: int) -> bool:
    """Exact test whether y = u x for a norm-1 unit u of the order.

    u = y conj(x) / n; membership in the order is a divisibility check, and
    nrd(u) = 1 is automatic when nrd(x) = nrd(y) = n.
    """
    xs = alg.std_scaled(x)
    ys = alg.std_scaled(y)
    p = _mul_std(ys, _conj_std(xs), alg.a, alg.b)
    try:
        alg.order_coords_from_std(p, scale=n * alg._den ** 2)
        return True
    except DomainError:
        return False


def coset_reps(alg: QuatAlgebra, n: int, coeff_box: int = 12,
               stability_margin: int = 4):
    """Representatives of (norm-1 units) \\ (norm-n elements) met by a
    coefficient box scan.

    Returns (reps, count, certified): certified is True when enlarging the
    box by `stability_margin` does not change the class count (a stability
    certificate, not a proof of completeness).
    """
    def classes(box: int):
        rng = np.arange(-box, box + 1, dtype=np.int64)
        g0, g1, g2, g3 = (g.ravel() for g in np.meshgrid(rng, rng, rng, rng, indexing="ij"))
        C = alg._C
        xs = [C[i, 0] * g0 + C[i, 1] * g1 + C[i, 2] * g2 + C[i, 3] * g3 for i in range(4)]
        q = (xs[0] * xs[0] - alg.a * xs[1] * xs[1] - alg.b * xs[2] * xs[2]
             + alg.a * alg.b * xs[3] * xs[3])
        idx = np.nonzero(q == n * alg._den ** 2)[0]
        elems = set()
        for i in idx:
            v = (int(g0[i]), int(g1[i]), int(g2[i]), int(g3[i]))
            neg = tuple(-c for c in v)
            elems.add(v if v >= neg else neg)
        reps = []
        for e in sorted(elems):
            if not any(left_equivalent(alg, r, e, n) for r in reps):
                reps.append(e)
        return reps

    reps = classes(coeff_box)
    reps_big = classes(coeff_box + stability_margin)
    return reps, len(reps), len(reps) == len(reps_big)


def hecke_returns(alg: QuatAlgebra, g0: GroupElement, n: int, kappa: float,
                  **enum_kw) -> int:
    """M(g0, n, kappa): norm-n elements whose conjugate by g0 lies within 1
    of the identity and within kappa of the diagonal subgroup."""
    if kappa > 1:
        raise DomainError("kappa must be <= 1")
    elems = enumerate_norm_n(alg, n, g0, radius=1.0, **enum_kw)
    count = 0
    for v in elems:
        h = conjugated_element(alg, v, n, g0)
        d, _, _ = dist_to_diag(h)
        if d <= kappa:
            count += 1
    return count


def return_count_ratio(alg: QuatAlgebra, g0_list, n_max: int, kappa_list,
                       eps: float = 0.1):
    """max over the grid of M(g,n,kappa) / ((n/kappa)^eps (n sqrt(kappa)+1)).

    Finite by construction; the reported value is the measured analogue of
    the return-count bound's implied constant.  Each (g0, n) pair is
    enumerated once and its diagonal distances reused across kappa.
    """
    best = 0.0
    rows = []
    for gi, g0 in enumerate(g0_list):
        for n in range(1, n_max + 1):
            elems = enumerate_norm_n(alg, n, g0, radius=1.0)
            dists = np.array([dist_to_diag(conjugated_element(alg, v, n, g0))[0]
                              for v in elems])
            for kappa in kappa_list:
                M = int(np.count_nonzero(dists <= kappa)) if dists.size else 0
                denom = (n / kappa) ** eps * (n * np.sqrt(kappa) + 1.0)
                rows.append((gi, n, float(kappa), M, M / denom))
                best = max(best, M / denom)
    return best, rows


@dataclass(frozen=True)
class Amplifier:
    """Prime/prime-square coefficient sequence alpha_n of length N."""

    N: int
    coeffs: dict = field(repr=False)
    q: int = 1

    def support(self) -> list[int]:
        return sorted(self.coeffs)

    def moment_l1(self) -> float:
        return float(sum(abs(v) for v in self.coeffs.values()))

    def moment_l2(self) -> float:
        return float(sum(abs(v) ** 2 for v in self.coeffs.values()))

    def eigenvalue_functional(self, eigenvalues: dict) -> float:
        return float(sum(v * eigenvalues[n] for n, v in self.coeffs.items()))


def build_amplifier(N: int, eigenvalues: dict, q: int = 1,
                    rel_tol: float = 1e-9) -> Amplifier:
    """Coefficients alpha_p = sgn lambda(p) when |lambda(p)| >= 1/2, else
    alpha_{p^2} = sgn lambda(p^2), over primes p <= sqrt(N) coprime to q.

    Validates the multiplicative relation lambda(p)^2 - lambda(p^2) = 1 and
    guarantees |sum alpha_n lambda(n)| >= (1/2) #primes.
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    coeffs = {}
    for p in primes_up_to(int(math.isqrt(N))):
        if np.gcd(p, q) != 1:
            continue
        lp = eigenvalues.get(p)
        lp2 = eigenvalues.get(p * p)
        if lp is None or lp2 is None:
            raise DomainError(f"missing eigenvalues for prime {p}")
        if abs(lp * lp - lp2 - 1.0) > rel_tol:
            raise DomainError(f"Hecke relation violated at p={p}: "
                              f"lambda(p)^2 - lambda(p^2) = {lp * lp - lp2}")
        if abs(lp) >= 0.5:
            coeffs[p] = 1.0 if lp > 0 else -1.0
        else:
            # |lambda(p^2)| = |lambda(p)^2 - 1| > 3/4 here
            coeffs[p * p] = 1.0 if lp2 > 0 else -1.0
    return Amplifier(N, coeffs, q)


def random_hecke_eigenvalues(N: int, rng: np.random.Generator,
                             scale: float = 2.0) -> dict:
    """Random eigenvalue assignment satisfying lambda(p)^2 - lambda(p^2) = 1."""
    eigs = {}
    for p in primes_up_to(int(math.isqrt(N))):
        lp = float(rng.uniform(-scale, scale))
        eigs[p] = lp
        eigs[p * p] = lp * lp - 1.0
    return eigs


def optimal_bandwidth(lam: float, alpha: float) -> float:
    """beta = lam^(1/(1 + 12 (alpha - 1/2))), the band split balancing the
    two restriction estimates."""
    if not 0.5 < alpha <= 1:
        raise DomainError("alpha must lie in (1/2, 1]")
    return float(lam ** (1.0 / (1.0 + 12.0 * (alpha - 0.5))))


def optimal_amplifier_length(lam: float, beta: float) -> float:
    """N = lam^(1/6) beta^(-1/6), the amplifier length matching the bandwidth."""
    return float(lam ** (1.0 / 6.0) * beta ** (-1.0 / 6.0))
