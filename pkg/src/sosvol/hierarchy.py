"""Sum-of-squares upper bounds on the volume of a basic semialgebraic set.

At even degree ``d`` we solve

    minimize    int_X p
    subject to  p - 1 = sum_i g_i^K s_i^K,   p = sum_i g_i^X s_i^X,
                s_i SOS with deg(g_i s_i) <= d,

with ``g_0 = 1`` for both sets.  Each SOS multiplier is a PSD Gram matrix in
the graded basis of degree ``(d - deg g_i) // 2``.  The Grams are the matrix
variable ``Z`` of an :class:`~sosvol.sdp.SdpProblem`; the scalar variables
``y`` are the dual (moment) variables, one per basis element of degree
``<= d``, and ``p`` is read off from the X-side Grams.
"""
from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import sdp
from .poly import CHEBYSHEV, MONOMIAL, Polynomial, _index_map, basis_size, graded_basis, product_terms, to_basis
from .semialg import INNER_K, OUTER_X, OuterDomain, SemialgebraicSet, integrate

log = logging.getLogger(__name__)


class DegreeTooSmall(ValueError):
    pass


class CertificateMismatch(RuntimeError):
    pass


def default_options(n: int) -> sdp.SolverOptions:
    tol = 1e-8 if n == 1 else 1e-6
    return sdp.SolverOptions(feas_tol=tol, gap_tol=tol)


@dataclass
class Multiplier:
    """One SOS multiplier ``s_i`` attached to inequality ``g_i``."""

    g: Polynomial
    exponents: list[tuple[int, ...]]
    block: int


@dataclass
class Assembly:
    problem: sdp.SdpProblem
    d: int
    basis: str
    n: int
    outer: list[Multiplier]
    inner: list[Multiplier]
    moments: np.ndarray

    @property
    def p_size(self) -> int:
        return self.problem.m

    def gram_sides(self) -> dict[str, list[int]]:
        return {
            OUTER_X: [len(mu.exponents) for mu in self.outer],
            INNER_K: [len(mu.exponents) for mu in self.inner],
        }

    def p_coefficients(self, Z) -> np.ndarray:
        m = self.problem.m
        out = np.zeros(m)
        for mu in self.outer:
            out += self.problem.A[mu.block].reshape(m, -1) @ Z[mu.block].reshape(-1)
        return out


@dataclass
class QuadraticModuleCertificate:
    grams: list[np.ndarray]
    multipliers: list[Polynomial]
    exponents: list[list[tuple[int, ...]]]
    role: str
    basis: str

    @property
    def min_eigenvalues(self) -> list[float]:
        return [float(np.linalg.eigvalsh(g)[0]) for g in self.grams]


@dataclass
class LevelResult:
    d: int
    basis: str
    status: str
    v_d: float = float("nan")
    p: Polynomial | None = None
    cert_K: QuadraticModuleCertificate | None = None
    cert_X: QuadraticModuleCertificate | None = None
    solver_gaps: dict = field(default_factory=dict)
    cert_residual: float = float("nan")
    dual_value: float = float("nan")
    iterations: int = 0
    seconds: float = 0.0
    retried: bool = False
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == sdp.OPTIMAL


def _gram_tensor(g: Polynomial, exps, d: int, basis: str) -> np.ndarray:
    """``T[alpha, a, b]`` = coefficient of ``phi_alpha`` in ``g phi_a phi_b``."""
    n = g.dimension
    index = _index_map(n, d)
    size = len(exps)
    T = np.zeros((basis_size(n, d), size, size))
    gterms = list(g.terms())
    for a in range(size):
        for b in range(a, size):
            for gam, w1 in product_terms(exps[a], exps[b], basis):
                for beta, c in gterms:
                    for delta, w2 in product_terms(gam, beta, basis):
                        T[index[delta], a, b] += c * w1 * w2
            if a != b:
                T[:, b, a] = T[:, a, b]
    return T


def assemble(K: SemialgebraicSet, X: OuterDomain, d: int, basis: str = MONOMIAL) -> Assembly:
    """Build the degree-``d`` SDP and the maps back to ``p`` and the Grams."""
    if d % 2:
        raise ValueError(f"degree must be even, got {d}")
    n = K.dimension
    if X.dimension != n:
        raise ValueError("K and X have different dimensions")
    Kn = K.normalized()
    Xs = X.as_set
    one = Polynomial.constant(n, 1.0)
    gs_x = [one] + list(Xs.inequalities)
    gs_k = [one] + list(Kn.inequalities)
    for g in gs_x + gs_k:
        if g.degree > d:
            raise DegreeTooSmall(f"degree {d} is below the degree {g.degree} of a defining polynomial")

    m = basis_size(n, d)
    moments = X.basis_moments(d, basis)
    blocks, Cs, As = [], [], []
    outer, inner = [], []
    for role, gs in ((OUTER_X, gs_x), (INNER_K, gs_k)):
        for g in gs:
            gb = to_basis(g, basis)
            exps = graded_basis(n, (d - g.degree) // 2)
            T = _gram_tensor(gb, exps, d, basis)
            mu = Multiplier(gb, exps, len(blocks))
            blocks.append(len(exps))
            if role == OUTER_X:
                Cs.append(np.tensordot(moments, T, axes=1))
                As.append(T)
                outer.append(mu)
            else:
                Cs.append(np.zeros((len(exps), len(exps))))
                As.append(-T)
                inner.append(mu)
    b = np.zeros(m)
    b[0] = 1.0
    problem = sdp.SdpProblem(blocks, b, Cs, As)
    return Assembly(problem, d, basis, n, outer, inner, moments)


def feasible_point(asm: Assembly, slack: float = 1.0) -> list[np.ndarray]:
    """Grams representing the constant ``p = 1 + slack``: a feasible ``Z``."""
    Z = [np.zeros((s, s)) for s in asm.problem.blocks]
    Z[asm.outer[0].block][0, 0] = 1.0 + slack
    Z[asm.inner[0].block][0, 0] = slack
    return Z


def sos_polynomial(G: np.ndarray, exps, n: int, basis: str) -> Polynomial:
    """``v^T G v`` for the basis vector ``v`` indexed by ``exps``."""
    terms: dict[tuple[int, ...], float] = {}
    for a in range(len(exps)):
        for b in range(len(exps)):
            if G[a, b] == 0:
                continue
            for gam, w in product_terms(exps[a], exps[b], basis):
                terms[gam] = terms.get(gam, 0.0) + G[a, b] * w
    if not terms:
        return Polynomial.zero(n, basis)
    return Polynomial.from_terms(n, terms, basis)


def certify(p: Polynomial, cert: QuadraticModuleCertificate, S: SemialgebraicSet | None = None) -> float:
    """Max coefficient deviation between ``sum_i g_i v^T G_i v`` and the target.

    The target is ``p`` for an outer certificate and ``p - 1`` for an inner one.
    ``S`` is accepted for symmetry with the mathematical statement; the
    multipliers stored on the certificate already carry the ``g_i``.
    """
    n = p.dimension
    total = Polynomial.zero(n, cert.basis)
    for g, G, exps in zip(cert.multipliers, cert.grams, cert.exponents):
        total = total + to_basis(g, cert.basis) * sos_polynomial(G, exps, n, cert.basis)
    target = to_basis(p, cert.basis)
    if cert.role == INNER_K:
        target = target - 1.0
    d = max(total.degree, target.degree)
    diff = total.padded(d) - target.padded(d)
    return float(np.max(np.abs(diff)))


def _certificate(asm: Assembly, Z, role: str) -> QuadraticModuleCertificate:
    mults = asm.outer if role == OUTER_X else asm.inner
    return QuadraticModuleCertificate(
        grams=[np.array(Z[mu.block]) for mu in mults],
        multipliers=[mu.g for mu in mults],
        exponents=[mu.exponents for mu in mults],
        role=role,
        basis=asm.basis,
    )


def solve_level(
    K: SemialgebraicSet,
    X: OuterDomain,
    d: int,
    basis: str = MONOMIAL,
    opts: sdp.SolverOptions | None = None,
    cert_tol: float = 1e-6,
    retry_chebyshev: bool = True,
) -> LevelResult:
    """Solve one level and verify both SOS certificates independently."""
    opts = opts or default_options(K.dimension)
    t0 = time.perf_counter()
    asm = assemble(K, X, d, basis)
    sol = sdp.solve(asm.problem, opts)
    if (
        sol.status == sdp.ILL_CONDITIONED
        and basis == MONOMIAL
        and K.dimension == 1
        and retry_chebyshev
    ):
        log.info("degree %d ill-conditioned in monomial basis, retrying in Chebyshev basis", d)
        out = solve_level(K, X, d, CHEBYSHEV, opts, cert_tol, retry_chebyshev=False)
        out.retried = True
        out.seconds = time.perf_counter() - t0
        return out

    p = Polynomial(K.dimension, asm.p_coefficients(sol.Z), basis)
    cert_X = _certificate(asm, sol.Z, OUTER_X)
    cert_K = _certificate(asm, sol.Z, INNER_K)
    residual = max(certify(p, cert_X), certify(p, cert_K))
    result = LevelResult(
        d=d,
        basis=basis,
        status=sol.status,
        v_d=integrate(X, p),
        p=p,
        cert_K=cert_K,
        cert_X=cert_X,
        solver_gaps=sol.gaps,
        cert_residual=residual,
        dual_value=sol.dual_objective,
        iterations=sol.iterations,
        seconds=time.perf_counter() - t0,
    )
    if sol.status == sdp.OPTIMAL and residual > 10 * cert_tol:
        raise CertificateMismatch(
            f"solver reported Optimal at d={d} but certificate residual is {residual:.3g}"
        )
    return result


@dataclass
class HierarchySequence:
    levels: list[LevelResult]
    reference_volume: float | None = None

    @property
    def degrees(self) -> list[int]:
        return [lv.d for lv in self.levels]

    @property
    def values(self) -> np.ndarray:
        return np.array([lv.v_d for lv in self.levels])

    def solved(self) -> list[LevelResult]:
        return [lv for lv in self.levels if lv.ok]

    def is_monotone(self, tol: float = 1e-6) -> bool:
        v = [lv.v_d for lv in self.solved()]
        return all(b <= a + tol for a, b in zip(v, v[1:]))

    def above_reference(self, tol: float = 1e-6) -> bool:
        if self.reference_volume is None:
            return True
        return all(lv.v_d >= self.reference_volume - tol for lv in self.solved())

    def write_csv(self, path, timings: bool = False) -> None:
        """One row per level; ``seconds`` is only written when ``timings`` is set,
        so that default output is reproducible byte for byte."""
        cols = ["d", "v_d", "cert_residual", "solver_status", "gap"]
        if timings:
            cols.append("seconds")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for lv in self.levels:
                row = [
                    lv.d,
                    f"{lv.v_d:.17g}",
                    f"{lv.cert_residual:.17g}",
                    lv.status,
                    f"{lv.solver_gaps.get('gap', float('nan')):.17g}",
                ]
                if timings:
                    row.append(f"{lv.seconds:.3f}")
                w.writerow(row)


def run(
    K: SemialgebraicSet,
    X: OuterDomain,
    d_min: int,
    d_max: int,
    step: int = 2,
    basis: str = MONOMIAL,
    opts: sdp.SolverOptions | None = None,
    reference_volume: float | None = None,
    workers: int = 1,
    cert_tol: float = 1e-6,
) -> HierarchySequence:
    """Sweep ``d = d_min, d_min + step, ..., d_max``; a failing level is recorded, not fatal."""
    if d_min % 2 or step % 2 or step <= 0:
        raise ValueError("d_min and step must be even and step positive")
    if d_max < d_min:
        raise ValueError("d_max must be >= d_min")
    degrees = list(range(d_min, d_max + 1, step))

    def one(d: int) -> LevelResult:
        try:
            return solve_level(K, X, d, basis, opts, cert_tol)
        except (DegreeTooSmall, CertificateMismatch, np.linalg.LinAlgError) as exc:
            return LevelResult(d=d, basis=basis, status=type(exc).__name__, message=str(exc))

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            levels = list(pool.map(one, degrees))
    else:
        levels = [one(d) for d in degrees]
    seq = HierarchySequence(levels, reference_volume)
    if not seq.is_monotone():
        log.warning("hierarchy values are not monotone within tolerance: %s", seq.values)
    return seq
