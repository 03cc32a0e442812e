"""Dense multivariate polynomials over a graded basis.

Coefficients are stored as a dense vector indexed by position in the graded
(degree-major) ordering of multi-indices, so a polynomial of degree ``d`` in
``n`` variables holds exactly ``C(n + d, d)`` coefficients.  Two bases are
supported: plain monomials ``x**alpha`` and tensor Chebyshev polynomials
``T_alpha(x) = prod_k T_{alpha_k}(x_k)`` (first kind).

Coefficients are ``float64`` by default.  Basis conversion can optionally be
carried out exactly, in which case the coefficients become ``Fraction``
objects (an ``object`` array); this is how high-degree monomial/Chebyshev
round trips stay lossless.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Iterable, Iterator, Sequence

import numpy as np

MONOMIAL = "monomial"
CHEBYSHEV = "chebyshev"
BASES = (MONOMIAL, CHEBYSHEV)

# fill-in from float noise below this is dropped after arithmetic
CLEANUP_TOL = 1e-14


class BasisMismatch(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


def _check_basis(basis: str) -> str:
    if basis not in BASES:
        raise ValueError(f"unknown basis {basis!r}; expected one of {BASES}")
    return basis


def basis_size(n: int, d: int) -> int:
    """Number of multi-indices in n variables with total degree <= d."""
    if d < 0:
        return 0
    return comb(n + d, d)


@lru_cache(maxsize=None)
def _graded(n: int, d: int) -> tuple[tuple[int, ...], ...]:
    if n < 1 or d < 0:
        raise ValueError("graded_basis needs n >= 1 and d >= 0")
    out: list[tuple[int, ...]] = []
    for k in range(d + 1):
        out.extend(_compositions(k, n))
    return tuple(out)


def _compositions(k: int, n: int) -> Iterator[tuple[int, ...]]:
    # lexicographically decreasing: (k,0,..,0) first, (0,..,0,k) last
    if n == 1:
        yield (k,)
        return
    for first in range(k, -1, -1):
        for rest in _compositions(k - first, n - 1):
            yield (first,) + rest


def graded_basis(n: int, d: int) -> list[tuple[int, ...]]:
    """All exponent tuples of total degree <= d, degree-major.

    Within one total degree the order is lexicographically decreasing, e.g.
    for ``n=2, d=2``: ``(0,0), (1,0), (0,1), (2,0), (1,1), (0,2)``.
    """
    return list(_graded(n, d))


@lru_cache(maxsize=None)
def _index_map(n: int, d: int) -> dict[tuple[int, ...], int]:
    return {a: i for i, a in enumerate(_graded(n, d))}


def index_of(alpha: Sequence[int], n: int | None = None) -> int:
    """Position of ``alpha`` in the graded ordering (independent of the cap)."""
    alpha = tuple(int(a) for a in alpha)
    n = len(alpha) if n is None else n
    return _index_map(n, sum(alpha))[alpha]


def exponent_array(n: int, d: int) -> np.ndarray:
    """Graded basis as an integer array of shape (C(n+d, d), n)."""
    return np.array(_graded(n, d), dtype=np.int64).reshape(-1, n)


def chebyshev_values(t: np.ndarray, d: int) -> np.ndarray:
    """T_0..T_d evaluated at ``t``; result has shape (d + 1,) + t.shape."""
    t = np.asarray(t, dtype=float)
    out = np.empty((d + 1,) + t.shape)
    out[0] = 1.0
    if d >= 1:
        out[1] = t
    for k in range(2, d + 1):
        out[k] = 2.0 * t * out[k - 1] - out[k - 2]
    return out


def power_values(t: np.ndarray, d: int) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = np.empty((d + 1,) + t.shape)
    out[0] = 1.0
    for k in range(1, d + 1):
        out[k] = out[k - 1] * t
    return out


def basis_matrix(n: int, d: int, points: np.ndarray, basis: str = MONOMIAL) -> np.ndarray:
    """Values of every graded basis element at every point.

    ``points`` has shape (N, n); returns (N, C(n+d, d)).
    """
    _check_basis(basis)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != n:
        raise DimensionMismatch(f"points have dimension {pts.shape[1]}, expected {n}")
    table = chebyshev_values if basis == CHEBYSHEV else power_values
    per_axis = [table(pts[:, k], d) for k in range(n)]  # each (d+1, N)
    expo = exponent_array(n, d)
    out = np.ones((pts.shape[0], expo.shape[0]))
    for k in range(n):
        out *= per_axis[k][expo[:, k]].T
    return out


class Polynomial:
    """Immutable polynomial in ``n`` variables over a graded basis.

    >>> p = Polynomial.from_terms(2, {(0, 0): 1.0, (2, 0): -1.0, (0, 2): -1.0})
    >>> p.degree, p((0.0, 0.0))
    (2, 1.0)
    """

    __slots__ = ("_n", "_basis", "_coeffs")

    def __init__(self, n: int, coeffs: Iterable, basis: str = MONOMIAL, *, clean: bool = True):
        if n < 1:
            raise ValueError("dimension must be >= 1")
        self._n = int(n)
        self._basis = _check_basis(basis)
        c = np.asarray(list(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs)
        if c.dtype != object:
            c = c.astype(float)
        if c.ndim != 1:
            raise ValueError("coefficient vector must be one-dimensional")
        self._coeffs = _normalize(self._n, c, clean)
        self._coeffs.setflags(write=False)

    # construction helpers ---------------------------------------------------

    @classmethod
    def from_terms(cls, n: int, terms, basis: str = MONOMIAL) -> "Polynomial":
        """Build from ``{exponents: coefficient}`` or an iterable of pairs."""
        items = terms.items() if hasattr(terms, "items") else terms
        items = [(tuple(int(e) for e in a), c) for a, c in items]
        for a, _ in items:
            if len(a) != n or min(a, default=0) < 0:
                raise DimensionMismatch(f"bad multi-index {a} for dimension {n}")
        d = max((sum(a) for a, _ in items), default=0)
        exact = any(isinstance(c, Fraction) for _, c in items)
        coeffs = np.zeros(basis_size(n, d), dtype=object if exact else float)
        if exact:
            coeffs[:] = Fraction(0)
        for a, c in items:
            coeffs[index_of(a, n)] += c
        return cls(n, coeffs, basis)

    @classmethod
    def constant(cls, n: int, value: float = 1.0, basis: str = MONOMIAL) -> "Polynomial":
        return cls(n, [value], basis)

    @classmethod
    def zero(cls, n: int, basis: str = MONOMIAL) -> "Polynomial":
        return cls(n, [0.0], basis)

    @classmethod
    def variable(cls, n: int, k: int, basis: str = MONOMIAL) -> "Polynomial":
        # x_k is T_1(x_k), so the coefficient vector is the same in both bases
        alpha = [0] * n
        alpha[k] = 1
        return cls.from_terms(n, {tuple(alpha): 1.0}, basis)

    @classmethod
    def ball(cls, n: int, radius: float = 1.0) -> "Polynomial":
        """The polynomial ``radius**2 - sum x_k**2`` in the monomial basis."""
        terms = {(0,) * n: radius**2}
        for k in range(n):
            a = [0] * n
            a[k] = 2
            terms[tuple(a)] = -1.0
        return cls.from_terms(n, terms)

    # accessors --------------------------------------------------------------

    @property
    def dimension(self) -> int:
        return self._n

    @property
    def basis(self) -> str:
        return self._basis

    @property
    def coeffs(self) -> np.ndarray:
        """Read-only dense coefficient vector in graded order."""
        return self._coeffs

    @property
    def exact(self) -> bool:
        return self._coeffs.dtype == object

    @property
    def degree(self) -> int:
        """Total degree; the zero polynomial reports 0."""
        return _degree_of_length(self._n, len(self._coeffs))

    def is_zero(self) -> bool:
        return len(self._coeffs) == 1 and self._coeffs[0] == 0

    def terms(self) -> Iterator[tuple[tuple[int, ...], float]]:
        """Non-zero ``(exponents, coefficient)`` pairs in graded order."""
        for a, c in zip(_graded(self._n, self.degree), self._coeffs):
            if c != 0:
                yield a, c

    def padded(self, d: int) -> np.ndarray:
        """Coefficient vector zero-padded to length C(n+d, d)."""
        if d < self.degree:
            raise ValueError(f"cannot pad degree {self.degree} polynomial to {d}")
        out = np.zeros(basis_size(self._n, d), dtype=self._coeffs.dtype)
        if self.exact:
            out[:] = Fraction(0)
        out[: len(self._coeffs)] = self._coeffs
        return out

    def as_float(self) -> "Polynomial":
        if not self.exact:
            return self
        return Polynomial(self._n, np.array([float(c) for c in self._coeffs]), self._basis)

    # arithmetic -------------------------------------------------------------

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other._n != self._n:
                raise DimensionMismatch("polynomials live in different dimensions")
            if other._basis != self._basis:
                raise BasisMismatch(f"{self._basis} vs {other._basis}")
            return other
        return Polynomial.constant(self._n, other, self._basis)

    def __add__(self, other):
        other = self._coerce(other)
        d = max(self.degree, other.degree)
        return Polynomial(self._n, self.padded(d) + other.padded(d), self._basis)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self._n, -self._coeffs, self._basis)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return multiply(self, other)
        return Polynomial(self._n, self._coeffs * other, self._basis)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        out = Polynomial.constant(self._n, 1.0, self._basis)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return (
            self._n == other._n
            and self._basis == other._basis
            and len(self._coeffs) == len(other._coeffs)
            and bool(np.all(self._coeffs == other._coeffs))
        )

    def __hash__(self):
        return hash((self._n, self._basis, tuple(self._coeffs)))

    def __call__(self, x):
        return evaluate(self, x)

    def __repr__(self):
        body = " + ".join(f"{float(c):.6g}*{_term_name(a, self._basis)}" for a, c in self.terms())
        return f"Polynomial(n={self._n}, {self._basis}: {body or '0'})"

    # serialization ----------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "basis": self._basis,
            "terms": [
                {"coefficient": float(c), "exponents": list(a)} for a, c in self.terms()
            ],
        }

    @classmethod
    def from_dict(cls, n: int, data: dict) -> "Polynomial":
        basis = data.get("basis", MONOMIAL)
        terms = [(t["exponents"], float(t["coefficient"])) for t in data["terms"]]
        return cls.from_terms(n, terms, basis)


def _term_name(a, basis):
    if basis == MONOMIAL:
        parts = [f"x{k + 1}^{e}" if e > 1 else f"x{k + 1}" for k, e in enumerate(a) if e]
        return "*".join(parts) or "1"
    parts = [f"T{e}(x{k + 1})" for k, e in enumerate(a) if e]
    return "*".join(parts) or "T0"


def _degree_of_length(n: int, length: int) -> int:
    d = 0
    while basis_size(n, d) < length:
        d += 1
    return d


def _normalize(n: int, c: np.ndarray, clean: bool) -> np.ndarray:
    if c.dtype == object:
        c = c.copy()
        nz = np.array([x != 0 for x in c], dtype=bool)
    else:
        c = c.copy()
        if clean:
            c[np.abs(c) < CLEANUP_TOL] = 0.0
        nz = c != 0
    if not nz.any():
        return np.array([Fraction(0)], dtype=object) if c.dtype == object else np.zeros(1)
    last = int(np.flatnonzero(nz)[-1])
    d = sum(_graded(n, _degree_of_length(n, last + 1))[last])
    return c[: basis_size(n, d)]


def evaluate(p: Polynomial, x) -> float | np.ndarray:
    """Value of ``p`` at one point (shape (n,)) or many points (shape (N, n))."""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim <= 1
    pts = arr.reshape(1, -1) if single else arr
    if pts.shape[1] != p.dimension:
        raise DimensionMismatch(f"point dimension {pts.shape[1]} != {p.dimension}")
    coeffs = p.as_float().coeffs
    vals = basis_matrix(p.dimension, p.degree, pts, p.basis) @ coeffs
    return float(vals[0]) if single else vals


def _chebyshev_product(a: tuple[int, ...], b: tuple[int, ...]) -> list[tuple[tuple[int, ...], float]]:
    # T_i T_j = (T_{i+j} + T_{|i-j|}) / 2 along each axis
    axes = [((ai + bi, 0.5), (abs(ai - bi), 0.5)) for ai, bi in zip(a, b)]
    out = []
    for combo in itertools.product(*axes):
        w = 1.0
        for _, wk in combo:
            w *= wk
        out.append((tuple(e for e, _ in combo), w))
    return out


def product_terms(a, b, basis: str) -> list[tuple[tuple[int, ...], float]]:
    """Expansion of ``phi_a * phi_b`` in the same basis as weighted indices."""
    if basis == MONOMIAL:
        return [(tuple(x + y for x, y in zip(a, b)), 1.0)]
    return _chebyshev_product(tuple(a), tuple(b))


def multiply(p: Polynomial, q: Polynomial) -> Polynomial:
    """Exact product in the common basis of ``p`` and ``q``."""
    q = p._coerce(q)
    n = p.dimension
    d = p.degree + q.degree
    exact = p.exact or q.exact
    out = np.zeros(basis_size(n, d), dtype=object if exact else float)
    if exact:
        out[:] = Fraction(0)
    index = _index_map(n, d)
    qterms = list(q.terms())
    for a, ca in p.terms():
        for b, cb in qterms:
            for g, w in product_terms(a, b, p.basis):
                out[index[g]] += ca * cb * (Fraction(w) if exact else w)
    return Polynomial(n, out, p.basis)


# basis conversion -------------------------------------------------------------


@lru_cache(maxsize=None)
def _cheb_to_mon_1d(d: int) -> tuple[tuple[int, ...], ...]:
    """Row k holds the integer monomial coefficients of T_k."""
    rows = [(1,), (0, 1)]
    for k in range(2, d + 1):
        prev, prev2 = rows[k - 1], rows[k - 2]
        new = [0] * (k + 1)
        for i, c in enumerate(prev):
            new[i + 1] += 2 * c
        for i, c in enumerate(prev2):
            new[i] -= c
        rows.append(tuple(new))
    return tuple(rows[: d + 1])


@lru_cache(maxsize=None)
def _mon_to_cheb_1d(d: int) -> tuple[tuple[Fraction, ...], ...]:
    """Row k holds the Chebyshev coefficients of x**k (exact rationals)."""
    rows = []
    for k in range(d + 1):
        row = [Fraction(0)] * (k + 1)
        scale = Fraction(1, 2 ** (k - 1)) if k else Fraction(1)
        for j in range(k // 2 + 1):
            c = comb(k, j) * scale
            if k - 2 * j == 0 and k > 0:
                c /= 2
            row[k - 2 * j] += c
        rows.append(tuple(row))
    return tuple(rows)


def to_basis(p: Polynomial, target: str, *, exact: bool = False) -> Polynomial:
    """Re-express ``p`` in ``target`` basis.

    The conversion tables are exact integers/rationals.  With ``exact=False``
    the result is rounded to float once per coefficient; with ``exact=True`` it
    is kept as ``Fraction`` so that converting back reproduces ``p`` exactly.
    """
    _check_basis(target)
    if target == p.basis:
        return p
    n, d = p.dimension, p.degree
    table = _cheb_to_mon_1d(d) if target == MONOMIAL else _mon_to_cheb_1d(d)
    acc: dict[tuple[int, ...], Fraction] = {}
    for a, c in p.terms():
        c = c if isinstance(c, Fraction) else Fraction(float(c))
        per_axis = [[(e, w) for e, w in enumerate(table[ak]) if w] for ak in a]
        for combo in itertools.product(*per_axis):
            w = c
            for _, wk in combo:
                w *= wk
            key = tuple(e for e, _ in combo)
            acc[key] = acc.get(key, Fraction(0)) + w
    out = np.zeros(basis_size(n, d), dtype=object)
    out[:] = Fraction(0)
    index = _index_map(n, d)
    for key, w in acc.items():
        out[index[key]] = w
    if not exact:
        out = np.array([float(v) for v in out])
    return Polynomial(n, out, target)
