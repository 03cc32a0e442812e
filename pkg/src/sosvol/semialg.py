"""Basic semialgebraic sets, outer domains with closed-form moments, and the
geometric checks that have to hold before the hierarchy is meaningful.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from . import montecarlo
from .poly import (
    CHEBYSHEV,
    MONOMIAL,
    Polynomial,
    _cheb_to_mon_1d,
    basis_matrix,
    exponent_array,
    to_basis,
)

INNER_K = "inner"
OUTER_X = "outer"


class AssumptionError(ValueError):
    pass


class InteriorViolation(AssumptionError):
    def __init__(self, index: int, value: float):
        super().__init__(
            f"origin is not interior to K: inequality {index} evaluates to {value:.6g} <= 0 at 0"
        )
        self.index = index
        self.value = value


class InclusionViolation(AssumptionError):
    def __init__(self, what: str, witness: np.ndarray):
        super().__init__(f"{what}; witness point {np.array2string(witness, precision=6)}")
        self.what = what
        self.witness = witness


class NoFeasibleBox(AssumptionError):
    pass


@dataclass(frozen=True)
class SemialgebraicSet:
    """``{x : g_i(x) >= 0 for all i}``."""

    dimension: int
    inequalities: tuple[Polynomial, ...]
    role: str = INNER_K

    def __post_init__(self):
        object.__setattr__(self, "inequalities", tuple(self.inequalities))
        for g in self.inequalities:
            if g.dimension != self.dimension:
                raise ValueError(
                    f"inequality of dimension {g.dimension} in a set of dimension {self.dimension}"
                )

    def contains(self, points) -> np.ndarray:
        """Boolean membership for an (N, n) array of points."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        ok = np.ones(pts.shape[0], dtype=bool)
        for g in self.inequalities:
            ok &= g(pts) >= 0.0
        return ok

    def normalized(self) -> "SemialgebraicSet":
        """Copy with the unit-ball inequality ``1 - |x|^2 >= 0`` appended if absent."""
        ball = Polynomial.ball(self.dimension)
        if any(_same_poly(g, ball) for g in self.inequalities):
            return self
        return SemialgebraicSet(self.dimension, self.inequalities + (ball,), self.role)

    @property
    def max_degree(self) -> int:
        return max((g.degree for g in self.inequalities), default=0)


def _same_poly(p: Polynomial, q: Polynomial) -> bool:
    a = to_basis(p, MONOMIAL).as_float().coeffs
    b = to_basis(q, MONOMIAL).as_float().coeffs
    return len(a) == len(b) and np.allclose(a, b, rtol=0.0, atol=1e-14)


def membership(S: SemialgebraicSet, x) -> bool:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != S.dimension:
        raise ValueError(f"point has dimension {x.size}, set has {S.dimension}")
    return bool(S.contains(x[None, :])[0])


# outer domains ------------------------------------------------------------------


class OuterDomain:
    shape: str
    dimension: int

    @property
    def volume(self) -> float:
        raise NotImplementedError

    @property
    def as_set(self) -> SemialgebraicSet:
        raise NotImplementedError

    def contains(self, points) -> np.ndarray:
        return self.as_set.contains(points)

    def moment(self, alpha) -> float:
        raise NotImplementedError

    def basis_moments(self, d: int, basis: str = MONOMIAL) -> np.ndarray:
        """Integrals over the domain of every graded basis element up to degree d."""
        raise NotImplementedError


class Box(OuterDomain):
    """Axis-aligned box ``prod_k [-a_k, a_k]`` inside the unit ball."""

    shape = "box"

    def __init__(self, half_widths):
        a = np.asarray(half_widths, dtype=float).reshape(-1)
        if np.any(a <= 0):
            raise ValueError("half-widths must be positive")
        if np.linalg.norm(a) > 1.0 + 1e-12:
            raise ValueError(f"box with half-widths {a} is not inside the unit ball")
        self.half_widths = tuple(float(v) for v in a)
        self.dimension = a.size

    def __repr__(self):
        return f"Box(half_widths={self.half_widths})"

    @property
    def volume(self) -> float:
        return float(np.prod([2.0 * a for a in self.half_widths]))

    @property
    def as_set(self) -> SemialgebraicSet:
        n = self.dimension
        gs = []
        for k, a in enumerate(self.half_widths):
            e = [0] * n
            e[k] = 2
            gs.append(Polynomial.from_terms(n, {(0,) * n: a * a, tuple(e): -1.0}))
        return SemialgebraicSet(n, gs, OUTER_X).normalized()

    def contains(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.all(np.abs(pts) <= np.asarray(self.half_widths), axis=1)

    def moment(self, alpha) -> float:
        out = 1.0
        for a, k in zip(self.half_widths, alpha):
            out *= (a ** (k + 1) - (-a) ** (k + 1)) / (k + 1)
        return out

    def basis_moments(self, d: int, basis: str = MONOMIAL) -> np.ndarray:
        expo = exponent_array(self.dimension, d)
        out = np.ones(expo.shape[0])
        for k, a in enumerate(self.half_widths):
            table = _cheb_moments_1d(a, d) if basis == CHEBYSHEV else _mon_moments_1d(a, d)
            out *= table[expo[:, k]]
        return out


class Ball(OuterDomain):
    """Euclidean ball of radius ``radius <= 1`` centred at the origin."""

    shape = "ball"

    def __init__(self, dimension: int, radius: float = 1.0):
        if not 0 < radius <= 1.0 + 1e-12:
            raise ValueError("ball radius must lie in (0, 1]")
        self.dimension = int(dimension)
        self.radius = float(radius)

    def __repr__(self):
        return f"Ball(dimension={self.dimension}, radius={self.radius})"

    @property
    def volume(self) -> float:
        n = self.dimension
        return math.pi ** (n / 2) * self.radius**n / math.gamma(n / 2 + 1)

    @property
    def as_set(self) -> SemialgebraicSet:
        g = Polynomial.ball(self.dimension, self.radius)
        return SemialgebraicSet(self.dimension, [g], OUTER_X).normalized()

    def contains(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.sum(pts * pts, axis=1) <= self.radius**2

    def moment(self, alpha) -> float:
        alpha = [int(k) for k in alpha]
        if any(k % 2 for k in alpha):
            return 0.0
        n, s = self.dimension, sum(alpha)
        log = (n + s) * math.log(self.radius) + sum(gammaln((k + 1) / 2) for k in alpha)
        log -= gammaln((n + s) / 2 + 1)
        return math.exp(log)

    def basis_moments(self, d: int, basis: str = MONOMIAL) -> np.ndarray:
        if self.dimension == 1:
            return Box([self.radius]).basis_moments(d, basis)
        expo = exponent_array(self.dimension, d)
        mono = {tuple(a): self.moment(a) for a in expo}
        if basis == MONOMIAL:
            return np.array([mono[tuple(a)] for a in expo])
        table = _cheb_to_mon_1d(d)
        out = np.empty(expo.shape[0])
        for i, a in enumerate(expo):
            per_axis = [[(e, w) for e, w in enumerate(table[k]) if w] for k in a]
            vals = []
            for combo in itertools.product(*per_axis):
                w = 1
                for _, wk in combo:
                    w *= wk
                vals.append(w * mono[tuple(e for e, _ in combo)])
            out[i] = math.fsum(vals)
        return out


@lru_cache(maxsize=None)
def _mon_moments_1d(a: float, d: int) -> np.ndarray:
    k = np.arange(d + 1)
    return np.where(k % 2 == 0, 2.0 * a ** (k + 1) / (k + 1), 0.0)


@lru_cache(maxsize=None)
def _cheb_moments_1d(a: float, d: int) -> np.ndarray:
    k = np.arange(d + 1)
    if a == 1.0:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(k % 2 == 0, 2.0 / (1.0 - k * k), 0.0)
        return out
    # Gauss-Legendre with d//2 + 1 nodes integrates degree <= d exactly
    x, w = np.polynomial.legendre.leggauss(d // 2 + 1)
    vals = basis_matrix(1, d, (a * x)[:, None], CHEBYSHEV)
    out = a * (w @ vals)
    out[k % 2 == 1] = 0.0
    return out


def lebesgue_moment(X: OuterDomain, alpha) -> float:
    """``int_X x**alpha dx`` in closed form."""
    return X.moment(alpha)


def integrate(X: OuterDomain, p: Polynomial) -> float:
    """``int_X p(x) dx``; Chebyshev polynomials are integrated without conversion."""
    if p.exact:
        p = p.as_float()
    m = X.basis_moments(p.degree, p.basis)
    return float(math.fsum(m * p.coeffs))


def volume_of_ball(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


# geometry checks -----------------------------------------------------------------


@dataclass(frozen=True)
class GeometrySummary:
    inner_box_half_width: float
    r: float
    interior_margin: float
    inclusion_samples: int
    outer_volume: float
    notes: tuple[str, ...] = field(default_factory=tuple)


def _box_surface(n: int, per_axis: int) -> np.ndarray:
    if n == 1:
        return np.array([[-1.0], [1.0]])
    ticks = np.linspace(-1.0, 1.0, per_axis)
    faces = []
    for k in range(n):
        others = np.array(list(itertools.product(ticks, repeat=n - 1)))
        for sign in (-1.0, 1.0):
            face = np.insert(others, k, sign, axis=1)
            faces.append(face)
    return np.unique(np.vstack(faces), axis=0)


def inner_box_half_width(K: SemialgebraicSet, tol: float = 1e-4, grid_per_face: int = 33) -> float:
    """Largest ``s`` (within ``tol``) whose box ``[-s, s]^n`` has its surface grid in K.

    ``grid_per_face`` is the number of ticks per axis on each face, i.e. each
    face carries ``grid_per_face**(n-1)`` test points.
    """
    surface = _box_surface(K.dimension, grid_per_face)

    def feasible(s: float) -> bool:
        return bool(np.all(K.contains(s * surface)))

    if feasible(1.0):
        return 1.0
    if not feasible(tol):
        raise NoFeasibleBox(f"no box of half-width >= {tol} fits inside K")
    lo, hi = tol, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def certify_assumptions(
    K: SemialgebraicSet,
    X: OuterDomain,
    samples: int = 100_000,
    seed: int = 0,
    tol: float = 1e-4,
    grid_per_face: int = 33,
) -> GeometrySummary:
    """Check ``0 in int K`` and (statistically) ``K ⊂ X ⊂ B_n``; compute ``r``.

    Inclusion is tested on uniform samples of the cube ``[-1.25, 1.25]^n``,
    which covers the unit ball with room to spare; sampling X itself could
    never witness a point of K outside X.
    """
    if K.dimension != X.dimension:
        raise ValueError("K and X have different dimensions")
    n = K.dimension
    origin = np.zeros((1, n))
    values = [float(g(origin)[0]) for g in K.inequalities]
    margin = min(values, default=math.inf)
    for i, v in enumerate(values):
        if v <= 0.0:
            raise InteriorViolation(i, v)

    pts = montecarlo.sample_box(np.full(n, 1.25), samples, seed)
    inside = pts[K.contains(pts)]
    outside_x = inside[~X.contains(inside)]
    if len(outside_x):
        raise InclusionViolation("K is not contained in X", outside_x[0])
    outside_ball = inside[np.sum(inside * inside, axis=1) > 1.0]
    if len(outside_ball):
        raise InclusionViolation("K is not contained in the unit ball", outside_ball[0])

    s = inner_box_half_width(K.normalized(), tol, grid_per_face)
    return GeometrySummary(
        inner_box_half_width=s,
        r=1.0 / s,
        interior_margin=margin,
        inclusion_samples=samples,
        outer_volume=X.volume,
        notes=("inclusion statistically certified by sampling",),
    )
