"""Empirical approximation theory for the indicator of K.

* ``best_upper_L1``: the one-sided L1 error ``e(d) = min int_X (p - I_K)`` over
  degree-``d`` polynomials ``p >= I_K``, as an LP on a grid with exchange
  refinement against an independent validation grid.
* ``avg_modulus`` / ``tube_volume``: Monte Carlo estimates of the averaged
  modulus of continuity of ``I_K`` and of the volume of the ``t``-tube around
  the boundary of K, which bounds it.
* ``eval_degree_bound`` / ``nie_bound``: the closed-form degree bounds,
  evaluated in the log domain.
* ``rate_fit``: least-squares fits of power-law, ``1/log d`` and
  ``1/log log d`` decay models to a convergence sequence.

None of the theoretical constants is computed here; they are either supplied
by the caller or fitted and labelled as empirical.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import montecarlo, sdp
from .poly import CHEBYSHEV, MONOMIAL, Polynomial, basis_matrix, basis_size
from .semialg import OuterDomain, SemialgebraicSet, integrate, volume_of_ball

# Monte Carlo stream families, so that one seed drives independent draws
_OUTER, _INNER, _BOUNDARY = 0, 1, 2


class LpInfeasible(RuntimeError):
    pass


class GridTooCoarse(RuntimeError):
    pass


class DegenerateBoundary(RuntimeError):
    pass


class InsufficientData(ValueError):
    pass


# one-sided L1 approximation -----------------------------------------------------


@dataclass
class OneSidedApprox:
    d: int
    e_d: float
    p_tilde: Polynomial
    sup_norm: float
    violation: float
    vol_ref: float
    vol_ref_std_error: float = 0.0
    grid_size: int = 0
    refinements: int = 0


def chebyshev_lobatto(k: int) -> np.ndarray:
    if k == 1:
        return np.zeros(1)
    return np.cos(np.pi * np.arange(k) / (k - 1))[::-1]


def _tensor(axes) -> np.ndarray:
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def lp_grid(X: OuterDomain, count: int) -> np.ndarray:
    """Deterministic constraint grid with at least ``count`` points of X.

    Boxes get Chebyshev-Lobatto nodes per axis; balls get an equispaced tensor
    grid filtered to the ball.
    """
    n = X.dimension
    if X.shape == "box":
        k = max(2, math.ceil(count ** (1.0 / n)))
        return _tensor([a * chebyshev_lobatto(k) for a in X.half_widths])
    k = max(2, math.ceil(count ** (1.0 / n)))
    while True:
        axis = np.linspace(-X.radius, X.radius, k)
        pts = _tensor([axis] * n)
        pts = pts[X.contains(pts)]
        if len(pts) >= count:
            return pts
        k += 1


def validation_grid(X: OuterDomain, count: int) -> np.ndarray:
    """Equispaced tensor grid (odd number of ticks per axis) filtered to X."""
    n = X.dimension
    k = max(3, math.ceil(count ** (1.0 / n)) | 1)
    if X.shape == "box":
        return _tensor([np.linspace(-a, a, k) for a in X.half_widths])
    while True:
        axis = np.linspace(-X.radius, X.radius, k)
        pts = _tensor([axis] * n)
        pts = pts[X.contains(pts)]
        if len(pts) >= count:
            return pts
        k += 2


def _solve_lp(phi: np.ndarray, f: np.ndarray, moments: np.ndarray, opts: sdp.SolverOptions):
    # maximize -moments.y  s.t.  phi y - f >= 0, as a diagonal SDP
    problem = sdp.SdpProblem([-len(f)], -moments, [-f], [-phi.T])
    sol = sdp.solve(problem, opts)
    if sol.status == sdp.INFEASIBLE:
        raise LpInfeasible("one-sided LP reported infeasible; constant polynomials are feasible, so the grid is broken")
    if sol.status != sdp.OPTIMAL:
        raise sdp.SolverError(f"one-sided LP ended with status {sol.status}")
    return sol.y


def best_upper_L1(
    K: SemialgebraicSet,
    X: OuterDomain,
    d: int,
    grid_points: int | None = None,
    basis: str | None = None,
    vol_ref: float | None = None,
    vol_ref_std_error: float = 0.0,
    validation_factor: int = 8,
    max_refine: int = 40,
    violation_tol: float = 1e-6,
    seed: int = 0,
    opts: sdp.SolverOptions | None = None,
) -> OneSidedApprox:
    """Best degree-``d`` polynomial upper approximation of ``I_K`` in ``L1(X)``.

    The LP ``min int_X p  s.t.  p(x_j) >= I_K(x_j)`` is solved on
    ``grid_points`` nodes (default 40x the dimension of the polynomial space).
    Points of an independent, ``validation_factor`` times finer grid where the
    solution still undercuts ``I_K`` are added to the constraint set and the LP
    is re-solved, up to ``max_refine`` rounds.  ``vol_ref`` defaults to a
    Monte Carlo estimate of ``vol K``.
    """
    if d < 0:
        raise ValueError("degree must be >= 0")
    n = K.dimension
    basis = basis or (CHEBYSHEV if n == 1 else MONOMIAL)
    dim = basis_size(n, d)
    grid_points = grid_points or 40 * dim
    if grid_points < 10 * dim:
        raise ValueError(f"grid_points={grid_points} is below 10x the space dimension {dim}")
    opts = opts or sdp.SolverOptions(feas_tol=1e-9, gap_tol=1e-9)
    Kn = K.normalized()
    if vol_ref is None:
        est = montecarlo.volume(Kn, X, 1_000_000, seed)
        vol_ref, vol_ref_std_error = est.value, est.std_error

    moments = X.basis_moments(d, basis)
    grid = lp_grid(X, grid_points)
    check = validation_grid(X, validation_factor * len(grid))
    phi = basis_matrix(n, d, grid, basis)
    f = Kn.contains(grid).astype(float)
    phi_chk = basis_matrix(n, d, check, basis)
    f_chk = Kn.contains(check).astype(float)

    rounds = 0
    while True:
        y = _solve_lp(phi, f, moments, opts)
        slack = phi_chk @ y - f_chk
        worst = float(max(0.0, -slack.min()))
        if worst <= violation_tol or rounds >= max_refine:
            break
        bad = np.flatnonzero(slack < -0.1 * violation_tol)
        # keep the worst offenders to avoid bloating the LP
        bad = bad[np.argsort(slack[bad])][: max(16, dim)]
        phi = np.vstack([phi, phi_chk[bad]])
        f = np.concatenate([f, f_chk[bad]])
        rounds += 1
    if worst > violation_tol:
        raise GridTooCoarse(
            f"degree {d}: validation violation {worst:.3g} after {rounds} refinements"
        )
    p = Polynomial(n, y, basis)
    return OneSidedApprox(
        d=d,
        e_d=integrate(X, p) - vol_ref,
        p_tilde=p,
        sup_norm=float(np.max(np.abs(phi_chk @ y))),
        violation=worst,
        vol_ref=vol_ref,
        vol_ref_std_error=float(vol_ref_std_error or 0.0),
        grid_size=len(f),
        refinements=rounds,
    )


@dataclass
class GibbsReport:
    degrees: list[int]
    sup_norms: list[float]
    approximations: list[OneSidedApprox]
    growth: bool


def gibbs_probe(K, X, degrees, grid_points=None, basis=None, vol_ref=None, seed=0) -> GibbsReport:
    """Sup norms of the best one-sided approximants across ``degrees``.

    ``growth`` is set when the last sup norm exceeds the first by more than 50%;
    this is evidence about a uniform bound, not a proof either way.
    """
    if vol_ref is None:
        vol_ref = montecarlo.volume(K.normalized(), X, 1_000_000, seed).value
    approxs = [best_upper_L1(K, X, d, grid_points, basis, vol_ref, seed=seed) for d in degrees]
    sups = [a.sup_norm for a in approxs]
    return GibbsReport(list(degrees), sups, approxs, growth=sups[-1] > 1.5 * sups[0])


# modulus of continuity and tubes ------------------------------------------------


@dataclass(frozen=True)
class TubeEstimate:
    t: float
    value: float
    std_error: float
    resolution: float


@dataclass(frozen=True)
class ModulusEstimate:
    t: float
    omega_bar: float
    tube_vol: float
    std_error: float
    tube_std_error: float = 0.0

    def consistent(self, k: float = 3.0) -> bool:
        """``omega_bar <= tube_vol + k * std_error`` (the tube bounds the modulus)."""
        return self.omega_bar <= self.tube_vol + k * self.std_error


def boundary_cloud(
    K: SemialgebraicSet,
    X: OuterDomain,
    count: int = 2000,
    seed: int = 0,
    tol: float = 1e-6,
    max_batches: int = 50,
) -> np.ndarray:
    """Points of the boundary of K found by bisecting inside/outside pairs."""
    Kn = K.normalized()
    found = []
    total = 0
    batch = max(4 * count, 1000)
    for i in range(max_batches):
        pts = montecarlo.sample(X, batch, seed, stream_offset=i * 64, purpose=_BOUNDARY)
        inside = Kn.contains(pts)
        lo, hi = pts[inside], pts[~inside]
        k = min(len(lo), len(hi), count - total)
        if k <= 0:
            if total >= count:
                break
            continue
        lo, hi = lo[:k].copy(), hi[:k].copy()
        while np.max(np.linalg.norm(hi - lo, axis=1)) > tol:
            mid = 0.5 * (lo + hi)
            m_in = Kn.contains(mid)
            lo[m_in] = mid[m_in]
            hi[~m_in] = mid[~m_in]
        found.append(0.5 * (lo + hi))
        total += k
        if total >= count:
            break
    if total < 100:
        raise DegenerateBoundary(f"only {total} boundary points found; is K a proper subset of X?")
    return np.vstack(found)


def _cloud_resolution(cloud: np.ndarray) -> float:
    tree = cKDTree(cloud)
    dist, _ = tree.query(cloud, k=2)
    return float(np.max(dist[:, 1]))


def tube_volume(
    K: SemialgebraicSet,
    X: OuterDomain,
    t: float,
    samples: int = 200_000,
    boundary_points: int = 2000,
    seed: int = 0,
    cloud: np.ndarray | None = None,
) -> TubeEstimate:
    """Monte Carlo estimate of ``vol{x in X : dist(x, boundary of K) <= t}``."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    if cloud is None:
        cloud = boundary_cloud(K, X, boundary_points, seed)
    tree = cKDTree(cloud)
    pts = montecarlo.sample(X, samples, seed, purpose=_OUTER)
    if t == 0.0:
        hit = np.zeros(samples, dtype=bool)
    else:
        dist, _ = tree.query(pts, distance_upper_bound=t)
        hit = np.isfinite(dist)
    vol = X.volume
    frac = float(hit.mean())
    se = vol * math.sqrt(frac * (1.0 - frac) / samples)
    return TubeEstimate(t, vol * frac, se, _cloud_resolution(cloud))


def avg_modulus(
    K: SemialgebraicSet,
    X: OuterDomain,
    t: float,
    samples: int = 200_000,
    inner_samples: int = 64,
    seed: int = 0,
    boundary_points: int = 2000,
    cloud: np.ndarray | None = None,
) -> ModulusEstimate:
    """Monte Carlo estimate of ``int_X omega_x(t) dx`` for the indicator of K.

    ``omega_x(t)`` is 1 when some point of X within distance ``t`` of ``x``
    has different membership, estimated from ``inner_samples`` uniform points
    of the ``t``-ball around ``x``.  The same outer points feed the tube
    estimate, so the two are directly comparable.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    n = K.dimension
    Kn = K.normalized()
    if cloud is None:
        cloud = boundary_cloud(K, X, boundary_points, seed)
    tube = tube_volume(K, X, t, samples, seed=seed, cloud=cloud)
    if t == 0.0:
        return ModulusEstimate(0.0, 0.0, tube.value, 0.0, tube.std_error)
    pts = montecarlo.sample(X, samples, seed, purpose=_OUTER)
    omega = np.zeros(samples)
    step = max(1, montecarlo.CHUNK // inner_samples)
    for c, start in enumerate(range(0, samples, step)):
        x = pts[start : start + step]
        offs = montecarlo.sample_ball(n, t, len(x) * inner_samples, seed, stream_offset=c * 64, purpose=_INNER)
        y = (x[:, None, :] + offs.reshape(len(x), inner_samples, n)).reshape(-1, n)
        ok = X.contains(y)
        differ = (Kn.contains(y) != np.repeat(Kn.contains(x), inner_samples)) & ok
        omega[start : start + step] = differ.reshape(len(x), inner_samples).any(axis=1)
    vol = X.volume
    mean = float(omega.mean())
    se = vol * float(omega.std(ddof=1)) / math.sqrt(samples)
    return ModulusEstimate(t, vol * mean, tube.value, se, tube.std_error)


# degree bounds --------------------------------------------------------------------


def k_factor(d: int, r: float) -> float:
    """``3**(d+1) * r**d``."""
    return 3.0 ** (d + 1) * float(r) ** d


@dataclass(frozen=True)
class DegreeBoundInputs:
    epsilon: float
    c1: float
    c2: float
    c_G: float
    r: float
    n: int

    def __post_init__(self):
        for name in ("epsilon", "c1", "c2", "c_G", "r", "n"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def c3(self) -> int:
        return math.ceil(2.0 * self.c1 / self.epsilon)


@dataclass(frozen=True)
class DegreeBound:
    """A bound ``B`` stored through ``log(B)``; ``value`` is inf on overflow."""

    log_value: float
    c3: int = 0

    @property
    def log10(self) -> float:
        return self.log_value / math.log(10.0)

    @property
    def value(self) -> float:
        return math.exp(self.log_value) if self.log_value < 709.0 else math.inf

    @property
    def overflow(self) -> bool:
        return not math.isfinite(self.value)


def _log_exp_power(log_c: float, log_inner: float, power: float) -> float:
    # log(c * exp(inner**power)) = log c + exp(power * log inner)
    z = power * log_inner
    return log_c + (math.exp(z) if z < 709.0 else math.inf)


def eval_degree_bound(inputs: DegreeBoundInputs) -> DegreeBound:
    """Degree after which the hierarchy gap is below ``epsilon``:

    ``c2 * exp[(3 c3^2 (3 r n)^c3 (2 c_G vol(B_n) + eps) / eps)^c2]`` with
    ``c3 = ceil(2 c1 / eps)``.
    """
    eps, c3 = inputs.epsilon, inputs.c3
    log_inner = (
        math.log(3.0)
        + 2.0 * math.log(c3)
        + c3 * math.log(3.0 * inputs.r * inputs.n)
        + math.log(2.0 * inputs.c_G * volume_of_ball(inputs.n) + eps)
        - math.log(eps)
    )
    return DegreeBound(_log_exp_power(math.log(inputs.c2), log_inner, inputs.c2), c3)


def asymptotic_degree_bound(inputs: DegreeBoundInputs) -> DegreeBound:
    """``exp[(3 r n)^(2 c1 / eps) / eps^(3 c2)]``, the large-``1/eps`` form."""
    eps = inputs.epsilon
    z = (2.0 * inputs.c1 / eps) * math.log(3.0 * inputs.r * inputs.n) - 3.0 * inputs.c2 * math.log(eps)
    return DegreeBound(math.exp(z) if z < 709.0 else math.inf, inputs.c3)


def nie_bound(deg_p: int, n: int, r: float, p_max: float, p_min: float, c2: float) -> DegreeBound:
    """Degree from which a polynomial positive on S lies in its quadratic module:

    ``c2 * exp[(k(deg p) deg(p)^2 n^deg(p) max_S p / min_S p)^c2]``.
    """
    if p_min <= 0:
        raise ValueError("the polynomial must be strictly positive on the set")
    if deg_p < 1:
        raise ValueError("deg_p must be >= 1")
    log_inner = (
        (deg_p + 1) * math.log(3.0)
        + deg_p * math.log(r)
        + 2.0 * math.log(deg_p)
        + deg_p * math.log(n)
        + math.log(p_max / p_min)
    )
    return DegreeBound(_log_exp_power(math.log(c2), log_inner, c2))


# rate fitting ----------------------------------------------------------------------

POWER_LAW = "PowerLaw"
LOG = "Log"
LOGLOG = "LogLog"


@dataclass
class RateFit:
    model: str
    params: tuple[float, ...]
    sse: float
    best: bool = False
    degenerate: bool = False

    def predict(self, d) -> np.ndarray:
        d = np.asarray(d, dtype=float)
        if self.model == POWER_LAW:
            a, b = self.params
            return a / d**b
        if self.model == LOG:
            return self.params[0] / np.log(d)
        return self.params[0] / np.log(np.log(d))

    def describe(self) -> str:
        form = {POWER_LAW: "a / d^b", LOG: "a / log d", LOGLOG: "a / log log d"}[self.model]
        ps = ", ".join(f"{v:.6g}" for v in self.params)
        flags = (" [best]" if self.best else "") + (" [degenerate]" if self.degenerate else "")
        return f"{self.model:8s} {form:14s} params=({ps}) sse={self.sse:.6g}{flags}"


def rate_fit(degrees, values=None, vol_ref: float = 0.0) -> list[RateFit]:
    """Fit ``gap(d) = value(d) - vol_ref`` with three decay models.

    ``degrees`` may be a :class:`~sosvol.hierarchy.HierarchySequence`, in which
    case its solved levels supply both columns.  Only points with ``d >= 3``
    (so that ``log log d > 0``) and a positive gap are used, the same set for
    all three models, so their SSEs are comparable.  The power law is fitted in
    log-log space; the two logarithmic models by direct least squares on the
    gap.
    """
    if values is None:
        levels = degrees.solved()
        degrees = [lv.d for lv in levels]
        values = [lv.v_d for lv in levels]
    d = np.asarray(degrees, dtype=float)
    gap = np.asarray(values, dtype=float) - vol_ref
    keep = (d >= 3) & (gap > 0) & np.isfinite(gap)
    d, gap = d[keep], gap[keep]
    if len(d) < 4:
        raise InsufficientData(f"need at least 4 points with d >= 3 above vol_ref, have {len(d)}")

    flat = float(np.ptp(gap)) <= 1e-12 * float(np.max(np.abs(gap)))
    fits = []
    slope, intercept = np.polyfit(np.log(d), np.log(gap), 1)
    fits.append(RateFit(POWER_LAW, (float(math.exp(intercept)), float(-slope)), 0.0))
    for model, u in ((LOG, 1.0 / np.log(d)), (LOGLOG, 1.0 / np.log(np.log(d)))):
        a = float(gap @ u / (u @ u))
        fits.append(RateFit(model, (a,), 0.0))
    for fit in fits:
        fit.sse = float(np.sum((gap - fit.predict(d)) ** 2))
        fit.degenerate = flat or not all(math.isfinite(p) for p in fit.params)
    live = [f for f in fits if not f.degenerate]
    if live:
        min(live, key=lambda f: f.sse).best = True
    return fits


def empirical_c1(degrees, e_values) -> float:
    """``max_d d * e(d)``: an empirical stand-in for the constant of the ``c1/d`` rate."""
    return float(np.max(np.asarray(degrees, dtype=float) * np.asarray(e_values, dtype=float)))


# CSV output ----------------------------------------------------------------------


def write_approx_csv(path, approxs: list[OneSidedApprox]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["d", "e_d", "sup_norm"])
        for a in approxs:
            w.writerow([a.d, f"{a.e_d:.17g}", f"{a.sup_norm:.17g}"])


def write_modulus_csv(path, estimates: list[ModulusEstimate]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "omega_bar", "tube_vol", "std_error"])
        for m in estimates:
            w.writerow([f"{m.t:.17g}", f"{m.omega_bar:.17g}", f"{m.tube_vol:.17g}", f"{m.std_error:.17g}"])


def format_rate_report(fits: list[RateFit], vol_ref: float) -> str:
    lines = [f"rate fit against vol_ref = {vol_ref:.17g}"]
    lines += ["  " + f.describe() for f in fits]
    best = [f.model for f in fits if f.best]
    lines.append(f"best model: {best[0] if best else 'none (all fits degenerate)'}")
    return "\n".join(lines) + "\n"
