import numpy as np
import pytest

from oracles import random_sdp
from sosvol import sdp
from sosvol.sdp import SdpProblem, residuals, solve
from sosvol.sdpa import read_sdpa, write_sdpa


def one_by_one():
    # maximize y s.t. 1 - y >= 0
    return SdpProblem([1], np.array([1.0]), [np.array([[1.0]])], [np.array([[[1.0]]])])


def two_by_two():
    # maximize y s.t. [[1, y], [y, 1]] PSD
    off = np.array([[[0.0, -1.0], [-1.0, 0.0]]])
    return SdpProblem([2], np.array([1.0]), [np.eye(2)], [off])


def test_scalar_example():
    sol = solve(one_by_one())
    assert sol.status == sdp.OPTIMAL
    assert sol.y[0] == pytest.approx(1.0, abs=1e-7)
    r = residuals(one_by_one(), sol)
    assert r.primal <= 1e-8 and r.dual <= 1e-8 and abs(r.gap) <= 1e-8


def test_determinant_boundary_example():
    sol = solve(two_by_two())
    assert sol.status == sdp.OPTIMAL
    assert sol.y[0] == pytest.approx(1.0, abs=1e-7)


def test_residual_perturbation():
    P = one_by_one()
    sol = solve(P)
    r = residuals(P, y=sol.y + 0.1, Z=sol.Z)
    assert r.primal == pytest.approx(0.1, abs=1e-7)


def test_residual_zero_y():
    P = two_by_two()
    Z = [np.array([[2.0, 0.3], [0.3, 1.0]])]
    r = residuals(P, y=np.zeros(1), Z=Z)
    assert r.primal == 0.0
    assert r.gap == pytest.approx(3.0)


def test_residual_reports_dual_infeasibility():
    P = two_by_two()
    r = residuals(P, y=np.zeros(1), Z=[np.array([[1.0, 0.0], [0.0, -0.5]])])
    assert r.dual >= 0.5


def test_lp_block():
    # maximize y1 + y2 s.t. 1 - y1 >= 0, 2 - y2 >= 0, 4 - y1 - y2 >= 0
    A = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
    P = SdpProblem([-3], np.array([1.0, 1.0]), [np.array([1.0, 2.0, 4.0])], [A])
    sol = solve(P)
    assert sol.status == sdp.OPTIMAL
    np.testing.assert_allclose(sol.y, [1.0, 2.0], atol=1e-7)


@pytest.mark.parametrize("k", range(20))
def test_random_constructed_problems(k):
    rng = np.random.default_rng(1000 + k)
    P, y_star, _ = random_sdp(rng)
    sol = solve(P, feas_tol=1e-10, gap_tol=1e-10)
    assert sol.status == sdp.OPTIMAL
    assert np.max(np.abs(sol.y - y_star)) <= 1e-6
    assert residuals(P, sol).within(1e-8, 1e-8)


def test_random_mixed_shapes():
    rng = np.random.default_rng(7)
    for blocks, m in [((3,), 2), ((8, -2), 7), ((5, 5, 3), 4), ((-6,), 3)]:
        P, y_star, _ = random_sdp(rng, blocks, m)
        sol = solve(P, feas_tol=1e-10, gap_tol=1e-10)
        assert sol.status == sdp.OPTIMAL
        assert residuals(P, sol).within(1e-8, 1e-8)
        # small blocks can have a flat optimal face direction; y is then only sqrt(gap)-accurate
        np.testing.assert_allclose(sol.y, y_star, atol=1e-5)


def test_gap_decreases_along_trace():
    rng = np.random.default_rng(3)
    P, _, _ = random_sdp(rng, (10, 6, -4), 8)
    sol = solve(P)
    gaps = [t["gap"] for t in sol.trace][5:]
    assert all(b <= 1.1 * a for a, b in zip(gaps, gaps[1:]))


def test_scaling_invariance():
    rng = np.random.default_rng(4)
    P, _, _ = random_sdp(rng)
    a = solve(P, feas_tol=1e-10, gap_tol=1e-10)
    b = solve(P.scaled(10.0), feas_tol=1e-10, gap_tol=1e-10)
    np.testing.assert_allclose(a.y, b.y, atol=1e-6)


def test_deterministic():
    rng = np.random.default_rng(5)
    P, _, _ = random_sdp(rng)
    a, b = solve(P), solve(P)
    assert np.array_equal(a.y, b.y) and a.iterations == b.iterations


def test_iteration_limit():
    rng = np.random.default_rng(6)
    P, _, _ = random_sdp(rng)
    sol = solve(P, max_iter=2)
    assert sol.status == sdp.ITERATION_LIMIT


def test_unbounded_reported_infeasible():
    # maximize y s.t. 1 + y >= 0 has no finite optimum
    P = SdpProblem([1], np.array([1.0]), [np.array([[1.0]])], [np.array([[[-1.0]]])])
    assert solve(P).status == sdp.INFEASIBLE


def test_validation_rejects_asymmetric():
    with pytest.raises(ValueError):
        SdpProblem([2], np.array([1.0]), [np.array([[1.0, 1.0], [0.0, 1.0]])], [np.zeros((1, 2, 2))])


def test_sdpa_round_trip(tmp_path):
    rng = np.random.default_rng(8)
    P, _, _ = random_sdp(rng, (4, -3, 2), 3)
    path = tmp_path / "p.dat-s"
    write_sdpa(P, path, "random problem")
    Q = read_sdpa(path)
    assert Q.blocks == P.blocks
    np.testing.assert_array_equal(Q.b, P.b)
    for a, b in zip(P.C + P.A, Q.C + Q.A):
        np.testing.assert_array_equal(a, b)


def test_sdpa_layout(tmp_path):
    path = tmp_path / "p.dat-s"
    write_sdpa(two_by_two(), path)
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith('"')]
    # minimize -y s.t. y F1 - F0 PSD with F0 = -I, F1 = [[0,1],[1,0]]
    assert lines[:4] == ["1", "1", "2", "-1.0"]
    assert sorted(lines[4:]) == ["0 1 1 1 -1.0", "0 1 2 2 -1.0", "1 1 1 2 1.0"]


def test_sdpa_reader_tolerates_punctuation(tmp_path):
    path = tmp_path / "q.dat-s"
    path.write_text('* comment\n1 =mdim\n1 =nblock\n{2}\n{-1.0}\n0 1 1 1 -1.0\n0 1 2 2 -1.0\n1 1 1 2 1.0\n')
    sol = solve(read_sdpa(path))
    assert sol.y[0] == pytest.approx(1.0, abs=1e-7)
