"""Independent reference computations used by the tests.

Nothing here calls the package's solver: SDPs go through cvxpy, LPs through
scipy's HiGHS, polynomial identities through sympy.
"""
import itertools
import math

import numpy as np
from scipy.optimize import linprog

from sosvol.sdp import SdpProblem


def random_sdp(rng, blocks=(6, 4, -5), m=5):
    """A problem with known optimum built from complementary ``(S, Z, y)``.

    ``Z`` and ``S`` share an eigenbasis with disjoint supports, so
    ``<S, Z> = 0``; setting ``C = S + sum y_j A_j`` and ``b = A(Z)`` makes
    ``y`` optimal.  Strict complementarity makes it the unique optimum.
    """
    C, A, Zs = [], [], []
    y = rng.standard_normal(m)
    for side in blocks:
        n = abs(side)
        if side < 0:
            mask = rng.random(n) < 0.5
            mask[0], mask[-1] = True, False
            z = np.where(mask, rng.uniform(0.5, 2, n), 0.0)
            s = np.where(mask, 0.0, rng.uniform(0.5, 2, n))
            a = rng.standard_normal((m, n))
        else:
            Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
            r = max(1, n // 3)
            z = Q[:, :r] @ np.diag(rng.uniform(0.5, 2, r)) @ Q[:, :r].T
            s = Q[:, r:] @ np.diag(rng.uniform(0.5, 2, n - r)) @ Q[:, r:].T
            a = rng.standard_normal((m, n, n))
            a = a + a.transpose(0, 2, 1)
        A.append(a)
        Zs.append(z)
        c = s + np.tensordot(y, a, axes=1)
        C.append(c if c.ndim == 1 else 0.5 * (c + c.T))
    b = SdpProblem(list(blocks), np.zeros(m), C, A).apply(Zs)
    return SdpProblem(list(blocks), b, C, A), y, Zs


def _monomials(n, d):
    out = []
    for k in range(d + 1):
        out += [a for a in itertools.product(range(k + 1), repeat=n) if sum(a) == k]
    return out


def _ball_moment(alpha, radius=1.0):
    if any(a % 2 for a in alpha):
        return 0.0
    n, s = len(alpha), sum(alpha)
    num = math.prod(math.gamma((a + 1) / 2) for a in alpha)
    return radius ** (n + s) * num / math.gamma((n + s) / 2 + 1)


def _box_moment(alpha, half):
    return math.prod(0.0 if a % 2 else 2 * h ** (a + 1) / (a + 1) for a, h in zip(alpha, half))


def cvxpy_volume_bound(K_polys, X_polys, n, d, moment):
    """Solve min int_X p s.t. p - 1 in Q_d(K), p in Q_d(X) with cvxpy.

    ``K_polys`` / ``X_polys`` are dicts ``{exponent tuple: coefficient}``;
    ``moment(alpha)`` integrates ``x^alpha`` over X.  Written from scratch in
    the monomial basis, sharing no code with the package.
    """
    import cvxpy as cp

    mons = _monomials(n, d)
    p = {a: cp.Variable() for a in mons}
    cons = []

    def module(gs, target):
        expr = {a: 0 for a in mons}
        for g in [{(0,) * n: 1.0}] + gs:
            dg = max(sum(a) for a in g)
            half = (d - dg) // 2
            if half < 0:
                raise ValueError("degree too small")
            basis = _monomials(n, half)
            G = cp.Variable((len(basis), len(basis)), PSD=True)
            for i, u in enumerate(basis):
                for j, v in enumerate(basis):
                    for ga, gc in g.items():
                        key = tuple(x + y + z for x, y, z in zip(u, v, ga))
                        expr[key] = expr[key] + gc * G[i, j]
        for a in mons:
            cons.append(expr[a] == target[a])

    one = {a: (1.0 if sum(a) == 0 else 0.0) for a in mons}
    module(K_polys, {a: p[a] - one[a] for a in mons})
    module(X_polys, p)
    obj = cp.Minimize(sum(moment(a) * p[a] for a in mons))
    prob = cp.Problem(obj, cons)
    prob.solve(solver=cp.CLARABEL)
    return prob.value


def interval_oracle(d):
    K = [{(0,): 0.25, (2,): -1.0}, {(0,): 1.0, (2,): -1.0}]
    X = [{(0,): 1.0, (2,): -1.0}]
    return cvxpy_volume_bound(K, X, 1, d, lambda a: _box_moment(a, [1.0]))


def disk_oracle(d):
    K = [{(0, 0): 0.25, (2, 0): -1.0, (0, 2): -1.0}, {(0, 0): 1.0, (2, 0): -1.0, (0, 2): -1.0}]
    X = [{(0, 0): 1.0, (2, 0): -1.0, (0, 2): -1.0}]
    return cvxpy_volume_bound(K, X, 2, d, _ball_moment)


def grid_lp_upper(d, grid, inside, weights_moment):
    """min sum_k c_k m_k s.t. sum_k c_k x_j^k >= I_K(x_j): a monomial LP in 1-D via HiGHS."""
    V = np.vander(grid, d + 1, increasing=True)
    res = linprog(weights_moment, A_ub=-V, b_ub=-inside.astype(float), bounds=[(None, None)] * (d + 1), method="highs")
    assert res.status == 0, res.message
    return res.fun, res.x
