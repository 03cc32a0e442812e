"""Dense block-diagonal semidefinite programming.

Problems are stored in the form

    maximize    b^T y
    subject to  C - sum_j y_j A_j  is positive semidefinite,

whose conic dual is

    minimize    <C, Z>
    subject to  <A_j, Z> = b_j,  Z positive semidefinite.

Each block is either a dense symmetric matrix or, when its declared side is
negative (SDPA convention), a diagonal block stored as a vector, which makes
linear programs a special case.

The solver is an infeasible primal-dual path-following method using the HKM
search direction with a Mehrotra predictor-corrector, and a dense Cholesky
factorization of the Schur complement.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

log = logging.getLogger(__name__)

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
ILL_CONDITIONED = "IllConditioned"
ITERATION_LIMIT = "IterationLimit"


class SolverError(RuntimeError):
    pass


@dataclass
class SdpProblem:
    """``blocks[k] > 0``: dense block of that side; ``< 0``: diagonal block.

    ``C[k]`` has shape (N, N) or (N,); ``A[k]`` has shape (m, N, N) or (m, N).
    """

    blocks: list[int]
    b: np.ndarray
    C: list[np.ndarray]
    A: list[np.ndarray]

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        self.C = [np.asarray(c, dtype=float) for c in self.C]
        self.A = [np.asarray(a, dtype=float) for a in self.A]
        self.validate()

    @property
    def m(self) -> int:
        return self.b.size

    def validate(self):
        if self.m < 1:
            raise ValueError("an SDP needs at least one scalar variable")
        if not (len(self.blocks) == len(self.C) == len(self.A)):
            raise ValueError("blocks, C and A disagree on the number of blocks")
        for side, c, a in zip(self.blocks, self.C, self.A):
            n = abs(int(side))
            if side < 0:
                if c.shape != (n,) or a.shape != (self.m, n):
                    raise ValueError(f"diagonal block of side {n} has bad data shapes")
            else:
                if c.shape != (n, n) or a.shape != (self.m, n, n):
                    raise ValueError(f"dense block of side {n} has bad data shapes")
                if not np.allclose(c, c.T) or not np.allclose(a, a.transpose(0, 2, 1)):
                    raise ValueError("constraint matrices must be symmetric")

    def slack(self, y) -> list[np.ndarray]:
        """``C - sum_j y_j A_j`` block by block."""
        y = np.asarray(y, dtype=float)
        return [c - np.tensordot(y, a, axes=1) for c, a in zip(self.C, self.A)]

    def apply(self, Z) -> np.ndarray:
        """``(<A_j, Z>)_j``."""
        out = np.zeros(self.m)
        for a, z in zip(self.A, Z):
            out += a.reshape(self.m, -1) @ np.asarray(z).reshape(-1)
        return out

    def objective_primal(self, Z) -> float:
        return float(sum(np.sum(c * z) for c, z in zip(self.C, Z)))

    def scaled(self, factor: float) -> "SdpProblem":
        return SdpProblem(list(self.blocks), self.b * factor, self.C, self.A)


@dataclass
class SolverOptions:
    feas_tol: float = 1e-8
    gap_tol: float = 1e-8
    max_iter: int = 200
    step_fraction: float = 0.95
    divergence: float = 1e12
    stall_window: int = 15


@dataclass
class SdpSolution:
    y: np.ndarray
    S: list[np.ndarray]
    Z: list[np.ndarray]
    status: str
    primal_residual: float
    dual_residual: float
    gap: float
    iterations: int
    primal_objective: float = float("nan")
    dual_objective: float = float("nan")
    trace: list[dict] = field(default_factory=list)

    @property
    def gaps(self) -> dict:
        return {"primal": self.primal_residual, "dual": self.dual_residual, "gap": self.gap}


@dataclass(frozen=True)
class Residuals:
    """Absolute residuals recomputed from problem data.

    ``primal``: how far ``C - sum y_j A_j`` is from PSD (negated smallest
    eigenvalue, clipped at 0).  ``dual``: max of the equality mismatch
    ``|<A_j, Z> - b_j|`` and the negated smallest eigenvalue of ``Z``.
    ``gap``: ``<C, Z> - b^T y``.
    """

    primal: float
    dual: float
    gap: float
    primal_scale: float
    dual_scale: float
    objective_scale: float

    def within(self, feas_tol: float, gap_tol: float) -> bool:
        return (
            self.primal <= feas_tol * self.primal_scale
            and self.dual <= feas_tol * self.dual_scale
            and abs(self.gap) <= gap_tol * self.objective_scale
        )


def _min_eig(block: np.ndarray) -> float:
    if block.ndim == 1:
        return float(block.min()) if block.size else 0.0
    return float(sla.eigvalsh(block, subset_by_index=[0, 0])[0])


def residuals(problem: SdpProblem, solution: SdpSolution | None = None, *, y=None, Z=None) -> Residuals:
    """Residuals of ``(y, Z)`` computed from scratch, without solver internals."""
    if solution is not None:
        y = solution.y if y is None else y
        Z = solution.Z if Z is None else Z
    y = np.asarray(y, dtype=float)
    S = problem.slack(y)
    primal = max(0.0, -min(_min_eig(s) for s in S))
    eq = np.max(np.abs(problem.apply(Z) - problem.b))
    psd = max(0.0, -min(_min_eig(np.asarray(z)) for z in Z))
    pobj = problem.objective_primal(Z)
    dobj = float(problem.b @ y)
    cmax = max(float(np.max(np.abs(c))) if c.size else 0.0 for c in problem.C)
    return Residuals(
        primal=primal,
        dual=max(float(eq), psd),
        gap=pobj - dobj,
        primal_scale=1.0 + cmax,
        dual_scale=1.0 + float(np.max(np.abs(problem.b))),
        objective_scale=1.0 + abs(pobj) + abs(dobj),
    )


# block helpers -------------------------------------------------------------------


def _inner(U, V) -> float:
    return float(sum(np.sum(u * v) for u, v in zip(U, V)))


def _trace(X) -> float:
    return float(sum(x.sum() if x.ndim == 1 else np.trace(x) for x in X))


def _sym(w):
    return w if w.ndim == 1 else 0.5 * (w + w.T)


def _max_step(X, dX) -> float:
    """Largest alpha with X + alpha dX PSD, over all blocks."""
    alpha = np.inf
    for x, dx in zip(X, dX):
        if x.ndim == 1:
            neg = dx < 0
            if np.any(neg):
                alpha = min(alpha, float(np.min(-x[neg] / dx[neg])))
            continue
        try:
            L = np.linalg.cholesky(x)
            Li = sla.solve_triangular(L, np.eye(len(x)), lower=True)
        except np.linalg.LinAlgError:
            w, V = np.linalg.eigh(x)
            floor = np.finfo(float).eps * max(float(w[-1]), 1e-300)
            if w[0] < -1e3 * floor:
                raise
            Li = (V / np.sqrt(np.maximum(w, floor))).T
        lam = sla.eigvalsh(_sym(Li @ dx @ Li.T), subset_by_index=[0, 0])[0]
        if lam < 0:
            alpha = min(alpha, -1.0 / lam)
    return alpha


def _inverse_pd(s):
    if s.ndim == 1:
        return 1.0 / s
    try:
        c = sla.cho_factor(s, lower=True)
        return _sym(sla.cho_solve(c, np.eye(len(s))))
    except np.linalg.LinAlgError:
        # numerically singular but PD by construction: floor the spectrum
        lam, V = np.linalg.eigh(s)
        floor = np.finfo(float).eps * max(float(lam[-1]), 1e-300)
        if lam[0] < -1e3 * floor:
            raise
        return _sym((V / np.maximum(lam, floor)) @ V.T)


def _schur(problem: SdpProblem, X, Sinv) -> np.ndarray:
    m = problem.m
    M = np.zeros((m, m))
    for a, x, si in zip(problem.A, X, Sinv):
        if x.ndim == 1:
            M += (a * (x * si)) @ a.T
            continue
        T = np.matmul(np.matmul(x, a), si)  # X A_j S^-1
        M += a.reshape(m, -1) @ T.transpose(0, 2, 1).reshape(m, -1).T
    return 0.5 * (M + M.T)


def _factor(M):
    scale = float(np.max(np.abs(np.diag(M)))) or 1.0
    for reg in (0.0, 1e-14, 1e-12, 1e-10, 1e-8):
        try:
            return sla.cho_factor(M + reg * scale * np.eye(len(M)), lower=True)
        except np.linalg.LinAlgError:
            continue
    return None


def _initial_point(problem: SdpProblem):
    X, S = [], []
    bnorm = 1.0 + np.abs(problem.b)
    for side, c, a in zip(problem.blocks, problem.C, problem.A):
        n = abs(side)
        anorm = np.linalg.norm(a.reshape(problem.m, -1), axis=1)
        xi = max(10.0, np.sqrt(n), n * float(np.max(bnorm / (1.0 + anorm))))
        eta = max(10.0, np.sqrt(n), float(max(np.max(anorm), np.linalg.norm(c))))
        if side < 0:
            X.append(np.full(n, xi))
            S.append(np.full(n, eta))
        else:
            X.append(xi * np.eye(n))
            S.append(eta * np.eye(n))
    return X, np.zeros(problem.m), S


def solve(problem: SdpProblem, opts: SolverOptions | None = None, **kw) -> SdpSolution:
    """Solve ``problem``; keyword arguments override fields of ``opts``."""
    opts = opts or SolverOptions()
    if kw:
        opts = SolverOptions(**{**opts.__dict__, **kw})
    # equilibrate rows: y_j is solved for in units of 1/||A_j||
    row = np.zeros(problem.m)
    for a in problem.A:
        row = np.maximum(row, np.max(np.abs(a.reshape(problem.m, -1)), axis=1))
    row[row == 0] = 1.0
    P = SdpProblem(
        problem.blocks,
        problem.b / row,
        problem.C,
        [a / row.reshape((-1,) + (1,) * (a.ndim - 1)) for a in problem.A],
    )
    N = sum(abs(s) for s in P.blocks)
    X, y, S = _initial_point(P)
    bnorm = 1.0 + np.linalg.norm(P.b)
    cnorm = 1.0 + np.sqrt(sum(np.sum(c * c) for c in P.C))
    trace: list[dict] = []
    best = np.inf
    status = ITERATION_LIMIT
    it = 0

    for it in range(opts.max_iter + 1):
        AX = P.apply(X)
        Rp = P.b - AX
        Rd = [c - s - np.tensordot(y, a, axes=1) for c, s, a in zip(P.C, S, P.A)]
        pobj = P.objective_primal(X)
        dobj = float(P.b @ y)
        xs = _inner(X, S)
        mu = xs / N
        pinf = float(np.linalg.norm(Rp)) / bnorm
        dinf = float(np.sqrt(sum(np.sum(r * r) for r in Rd))) / cnorm
        denom = 1.0 + abs(pobj) + abs(dobj)
        relgap = max(abs(pobj - dobj), xs) / denom
        trace.append(
            dict(iter=it, pobj=pobj, dobj=dobj, gap=xs, relgap=relgap, pinf=pinf, dinf=dinf,
                 merit=max(pinf, dinf, relgap))
        )

        if pinf <= opts.feas_tol and dinf <= opts.feas_tol and relgap <= opts.gap_tol:
            status = OPTIMAL
            break
        if np.linalg.norm(y) > opts.divergence or _trace(X) > opts.divergence:
            status = INFEASIBLE
            break
        if it == opts.max_iter:
            break
        merit = max(pinf, dinf, relgap)
        best = min(best, merit)
        if it >= opts.stall_window and best >= 0.5 * trace[-opts.stall_window]["merit"]:
            status = ILL_CONDITIONED
            log.debug("stopping at iteration %d: no progress in %d iterations", it, opts.stall_window)
            break

        try:
            Sinv = [_inverse_pd(s) for s in S]
        except np.linalg.LinAlgError:
            status = ILL_CONDITIONED
            log.debug("stopping at iteration %d: slack inverse failed", it)
            break
        M = _schur(P, X, Sinv)
        cf = _factor(M)
        if cf is None:
            status = ILL_CONDITIONED
            log.debug("stopping at iteration %d: Schur complement factorization failed", it)
            break

        XRdSi = [x * r * si if x.ndim == 1 else x @ r @ si for x, r, si in zip(X, Rd, Sinv)]
        base = Rp + P.apply([_sym(w) for w in XRdSi])

        def direction(H):
            rhs = base - P.apply([_sym(h) for h in H])
            dy = sla.cho_solve(cf, rhs)
            for _ in range(2):
                dy = dy + sla.cho_solve(cf, rhs - M @ dy)
            dS = [r - np.tensordot(dy, a, axes=1) for r, a in zip(Rd, P.A)]
            dX = []
            for h, x, ds, si in zip(H, X, dS, Sinv):
                if x.ndim == 1:
                    dX.append(h - x * ds * si)
                else:
                    dX.append(_sym(h - x @ ds @ si))
            return dy, dX, dS

        # predictor
        H = [-x for x in X]
        with np.errstate(over="ignore", invalid="ignore"):
            dy, dX, dS = direction(H)
        if not np.all(np.isfinite(dy)):
            status = ILL_CONDITIONED
            log.debug("stopping at iteration %d: non-finite predictor direction", it)
            break
        try:
            ap = min(1.0, _max_step(X, dX))
            ad = min(1.0, _max_step(S, dS))
        except np.linalg.LinAlgError:
            status = ILL_CONDITIONED
            log.debug("stopping at iteration %d: predictor step length failed", it)
            break
        mu_aff = _inner([x + ap * d for x, d in zip(X, dX)], [s + ad * d for s, d in zip(S, dS)]) / N
        sigma = float(np.clip((mu_aff / mu) ** 3, 0.0, 1.0))

        # corrector
        H = []
        for x, si, dxp, dsp in zip(X, Sinv, dX, dS):
            if x.ndim == 1:
                H.append(sigma * mu * si - x - dxp * dsp * si)
            else:
                H.append(sigma * mu * si - x - dxp @ dsp @ si)
        with np.errstate(over="ignore", invalid="ignore"):
            dy, dX, dS = direction(H)
        if not (np.all(np.isfinite(dy)) and all(np.all(np.isfinite(d)) for d in dX)):
            status = ILL_CONDITIONED
            log.debug("stopping at iteration %d: non-finite search direction", it)
            break
        try:
            gamma = opts.step_fraction
            ap = min(1.0, gamma * _max_step(X, dX))
            ad = min(1.0, gamma * _max_step(S, dS))
        except np.linalg.LinAlgError:
            status = ILL_CONDITIONED
            log.debug("stopping at iteration %d: corrector step length failed", it)
            break
        trace[-1].update(alpha_p=ap, alpha_d=ad, sigma=sigma)
        if max(ap, ad) < 1e-12:
            status = ILL_CONDITIONED
            log.debug("stopping at iteration %d: step length collapsed", it)
            break

        X = [x + ap * d for x, d in zip(X, dX)]
        y = y + ad * dy
        S = [s + ad * d for s, d in zip(S, dS)]
        log.debug("it %d pobj %.10g dobj %.10g gap %.3g pinf %.3g dinf %.3g", it, pobj, dobj, xs, pinf, dinf)

    y = y / row
    res = residuals(problem, y=y, Z=X)
    sol = SdpSolution(
        y=y,
        S=problem.slack(y),
        Z=X,
        status=status,
        primal_residual=res.primal,
        dual_residual=res.dual,
        gap=res.gap,
        iterations=it,
        primal_objective=problem.objective_primal(X),
        dual_objective=float(problem.b @ y),
        trace=trace,
    )
    return sol
