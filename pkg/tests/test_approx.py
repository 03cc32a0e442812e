import math

import numpy as np
import pytest

import oracles
from conftest import disk_set, interval_set
from sosvol import approx
from sosvol.approx import (
    DegreeBoundInputs,
    InsufficientData,
    best_upper_L1,
    eval_degree_bound,
    k_factor,
    nie_bound,
    rate_fit,
)
from sosvol.hierarchy import solve_level
from sosvol.poly import CHEBYSHEV, MONOMIAL, Polynomial
from sosvol.semialg import INNER_K, Ball, Box, SemialgebraicSet


@pytest.fixture(scope="module")
def interval_sweep():
    K, X = interval_set(), Box([1.0])
    return {d: best_upper_L1(K, X, d, vol_ref=1.0) for d in (0, 2, 4, 6, 8, 16, 32, 64)}


def test_degree_zero(interval_sweep):
    a = interval_sweep[0]
    assert a.e_d == pytest.approx(1.0, abs=1e-8)
    assert a.p_tilde.coeffs[0] == pytest.approx(1.0, abs=1e-8)


def test_non_increasing(interval_sweep):
    e = [interval_sweep[d].e_d for d in sorted(interval_sweep)]
    assert all(b <= a + 1e-9 for a, b in zip(e, e[1:]))


def test_rate_bounded(interval_sweep):
    de = [d * interval_sweep[d].e_d for d in (4, 8, 16, 32, 64)]
    assert max(de) / min(de) <= 10
    assert interval_sweep[16].e_d > 0


def test_invariants(interval_sweep):
    K = interval_set().normalized()
    for a in interval_sweep.values():
        assert a.e_d >= -1e-9
        assert a.violation <= 1e-6
        grid = approx.lp_grid(Box([1.0]), 40 * (a.d + 1))
        assert np.all(a.p_tilde(grid[:, :]) >= K.contains(grid) - 1e-9)


@pytest.mark.parametrize("d", [2, 4, 8])
def test_matches_independent_lp_on_dense_grid(d, interval_sweep):
    # HiGHS on a 4001-point grid that contains the jumps at +-1/2
    grid = np.linspace(-1, 1, 4001)
    mom = np.array([0.0 if k % 2 else 2 / (k + 1) for k in range(d + 1)])
    val, _ = oracles.grid_lp_upper(d, grid, np.abs(grid) <= 0.5, mom)
    assert interval_sweep[d].e_d == pytest.approx(val - 1.0, abs=1e-6)


def test_K_equals_X_gives_one():
    X = Box([1.0])
    K = SemialgebraicSet(1, [Polynomial.ball(1)], INNER_K)
    for d in (2, 6):
        a = best_upper_L1(K, X, d, vol_ref=2.0)
        assert a.sup_norm == pytest.approx(1.0, abs=1e-6)
        assert a.e_d == pytest.approx(0.0, abs=1e-6)


def test_disk_monomial():
    a = best_upper_L1(disk_set(), Ball(2), 4, vol_ref=math.pi / 4)
    assert a.e_d > 0 and a.violation <= 1e-6


def test_vol_ref_from_monte_carlo():
    a = best_upper_L1(interval_set(), Box([1.0]), 4, seed=3)
    assert abs(a.vol_ref - 1.0) <= 4 * a.vol_ref_std_error
    assert a.vol_ref_std_error > 0


def test_grid_size_precondition():
    with pytest.raises(ValueError):
        best_upper_L1(interval_set(), Box([1.0]), 8, grid_points=50, vol_ref=1.0)


def test_grid_too_coarse_is_reported():
    with pytest.raises(approx.GridTooCoarse):
        best_upper_L1(interval_set(), Box([1.0]), 16, grid_points=170, vol_ref=1.0, max_refine=0)


@pytest.mark.parametrize("basis", [MONOMIAL, CHEBYSHEV])
def test_hierarchy_gap_dominates_lp_error(basis):
    K, X = interval_set(), Box([1.0])
    for d in (2, 4, 8):
        v = solve_level(K, X, d, basis).v_d
        e = best_upper_L1(K, X, d, vol_ref=1.0).e_d
        assert v - 1.0 >= e - 1e-5


def test_gibbs_probe():
    rep = approx.gibbs_probe(interval_set(), Box([1.0]), [8, 16, 32], vol_ref=1.0)
    assert len(rep.sup_norms) == 3 and all(s >= 1 - 1e-9 for s in rep.sup_norms)
    assert rep.growth == (rep.sup_norms[-1] > 1.5 * rep.sup_norms[0])
    K = SemialgebraicSet(1, [Polynomial.ball(1)], INNER_K)
    flat = approx.gibbs_probe(K, Box([1.0]), [4, 8], vol_ref=2.0)
    np.testing.assert_allclose(flat.sup_norms, 1.0, atol=1e-6)
    assert not flat.growth


# tubes and modulus -------------------------------------------------------------------


@pytest.fixture(scope="module")
def disk_cloud():
    return approx.boundary_cloud(disk_set(), Ball(2), 2000, seed=0)


def test_boundary_cloud_on_circle(disk_cloud):
    r = np.linalg.norm(disk_cloud, axis=1)
    assert len(disk_cloud) == 2000
    assert np.max(np.abs(r - 0.5)) <= 1e-6


@pytest.mark.parametrize("t", [0.05, 0.1])
def test_tube_matches_annulus(t, disk_cloud):
    est = approx.tube_volume(disk_set(), Ball(2), t, 200_000, seed=0, cloud=disk_cloud)
    assert abs(est.value - 2 * math.pi * t) <= 4 * est.std_error


def test_tube_linear_growth(disk_cloud):
    a = approx.tube_volume(disk_set(), Ball(2), 0.05, 100_000, seed=1, cloud=disk_cloud)
    b = approx.tube_volume(disk_set(), Ball(2), 0.1, 100_000, seed=1, cloud=disk_cloud)
    assert 1.6 <= b.value / a.value <= 2.4


def test_tube_zero(disk_cloud):
    est = approx.tube_volume(disk_set(), Ball(2), 0.0, 10_000, cloud=disk_cloud)
    assert est.value <= est.resolution


def test_degenerate_boundary():
    X = Ball(2)
    with pytest.raises(approx.DegenerateBoundary):
        approx.boundary_cloud(X.as_set, X, 500, max_batches=3)


def test_modulus_zero():
    m = approx.avg_modulus(interval_set(), Box([1.0]), 0.0, 1000)
    assert m.omega_bar == 0.0


@pytest.mark.parametrize("t", [0.05, 0.1])
def test_modulus_below_tube_disk(t, disk_cloud):
    m = approx.avg_modulus(disk_set(), Ball(2), t, 40_000, 32, seed=0, cloud=disk_cloud)
    assert 0 <= m.omega_bar <= m.tube_vol + 3 * m.std_error
    assert m.consistent()


def test_modulus_interval():
    m = approx.avg_modulus(interval_set(), Box([1.0]), 0.1, 50_000, 64, seed=0)
    # two bands of width 2t; inner sampling misses points very close to the band edge
    assert m.omega_bar == pytest.approx(0.4, abs=0.03)
    assert abs(m.omega_bar - m.tube_vol) <= 3 * math.hypot(m.std_error, m.tube_std_error) + 0.02
    assert m.consistent()


def test_modulus_deterministic():
    a = approx.avg_modulus(interval_set(), Box([1.0]), 0.1, 5000, 16, seed=4)
    b = approx.avg_modulus(interval_set(), Box([1.0]), 0.1, 5000, 16, seed=4)
    assert a == b


def test_t_out_of_range():
    with pytest.raises(ValueError):
        approx.avg_modulus(interval_set(), Box([1.0]), 1.5)
    with pytest.raises(ValueError):
        approx.tube_volume(interval_set(), Box([1.0]), -0.1)


# degree bounds -------------------------------------------------------------------------


def test_bound_hand_case():
    inp = DegreeBoundInputs(epsilon=2.0, c1=1, c2=1, c_G=1, r=1, n=1)
    assert inp.c3 == 1
    b = eval_degree_bound(inp)
    assert abs(b.log_value - 27.0) <= 1e-10 * 27
    assert b.value == pytest.approx(math.exp(27), rel=1e-12)


def test_bound_general_c2():
    inp = DegreeBoundInputs(epsilon=1.0, c1=1.5, c2=2.0, c_G=0.7, r=1.3, n=2)
    c3 = math.ceil(2 * 1.5 / 1.0)
    inner = 3 * c3**2 * (3 * 1.3 * 2) ** c3 * (2 * 0.7 * math.pi + 1.0) / 1.0
    assert eval_degree_bound(inp).log_value == pytest.approx(math.log(2.0) + inner**2.0, rel=1e-12)


def test_bound_overflow_flag():
    b = eval_degree_bound(DegreeBoundInputs(epsilon=0.01, c1=1, c2=1, c_G=1, r=2, n=3))
    assert b.overflow and b.value == math.inf
    assert math.isfinite(b.log10) or b.log10 == math.inf


def test_bound_monotone_in_epsilon():
    for c1, c2, r, n in [(1, 1, 1, 1), (0.5, 1.2, 2, 2), (2, 0.5, 1.5, 3)]:
        eps = np.geomspace(0.05, 4.0, 10)
        logs = [eval_degree_bound(DegreeBoundInputs(e, c1, c2, 1.0, r, n)).log_value for e in eps]
        assert all(b <= a for a, b in zip(logs, logs[1:]))
        for e in eps:
            lo = eval_degree_bound(DegreeBoundInputs(e, c1, c2, 1.0, r, n)).log_value
            hi = eval_degree_bound(DegreeBoundInputs(e / 2, c1, c2, 1.0, r, n)).log_value
            assert hi >= lo


def test_bound_monotone_in_r_n_cG():
    base = dict(epsilon=1.0, c1=1.0, c2=1.0, c_G=1.0, r=1.0, n=1)
    ref = eval_degree_bound(DegreeBoundInputs(**base)).log_value
    for key, val in (("r", 2.0), ("n", 2), ("c_G", 3.0)):
        assert eval_degree_bound(DegreeBoundInputs(**{**base, key: val})).log_value >= ref


def test_bound_inputs_positive():
    with pytest.raises(ValueError):
        DegreeBoundInputs(0.0, 1, 1, 1, 1, 1)


def test_k_factor():
    assert k_factor(3, 2) == 648


def test_nie_bound():
    b = nie_bound(deg_p=2, n=1, r=1, p_max=2.0, p_min=1.0, c2=1.0)
    assert b.log_value == pytest.approx(k_factor(2, 1) * 4 * 1 * 2.0)
    with pytest.raises(ValueError):
        nie_bound(2, 1, 1, 1.0, 0.0, 1.0)


def test_asymptotic_form():
    b = approx.asymptotic_degree_bound(DegreeBoundInputs(2.0, 1, 1, 1, 1, 1))
    assert b.log_value == pytest.approx(3 / 8)


# rate fitting --------------------------------------------------------------------------


def test_power_law_recovered():
    d = np.arange(4, 65, 4)
    fits = {f.model: f for f in rate_fit(d, 5 / d**2)}
    assert fits["PowerLaw"].params[1] == pytest.approx(2.0, abs=0.05)
    assert fits["PowerLaw"].params[0] == pytest.approx(5.0, rel=1e-6)
    assert fits["PowerLaw"].best


def test_log_model_selected():
    d = np.arange(4, 65, 4)
    fits = {f.model: f for f in rate_fit(d, 1 / np.log(d))}
    assert fits["Log"].best
    assert fits["Log"].sse < min(fits["PowerLaw"].sse, fits["LogLog"].sse)


def test_loglog_model_selected():
    d = np.arange(4, 200, 8)
    fits = {f.model: f for f in rate_fit(d, 0.7 / np.log(np.log(d)))}
    assert fits["LogLog"].best


def test_vol_ref_offset():
    d = np.arange(4, 65, 4)
    fits = {f.model: f for f in rate_fit(d, 1.0 + 5 / d**2, vol_ref=1.0)}
    assert fits["PowerLaw"].params[1] == pytest.approx(2.0, abs=0.05)


def test_constant_gaps_degenerate():
    fits = rate_fit([4, 8, 16, 32], [0.3] * 4)
    assert all(f.degenerate for f in fits)
    assert not any(f.best for f in fits)


def test_insufficient_data():
    with pytest.raises(InsufficientData):
        rate_fit([4, 8, 16], [0.5, 0.4, 0.3])
    with pytest.raises(InsufficientData):
        rate_fit([2, 4, 8, 16, 32], [1.0, 1.0, 1.0, 0.9, 0.8], vol_ref=0.95)


def test_fit_invariants():
    d = np.arange(4, 40, 2)
    for f in rate_fit(d, 1 / np.sqrt(d)):
        assert f.sse >= 0 and all(math.isfinite(p) for p in f.params)


def test_csv_writers(tmp_path, interval_sweep):
    approx.write_approx_csv(tmp_path / "a.csv", [interval_sweep[4], interval_sweep[8]])
    lines = (tmp_path / "a.csv").read_text().splitlines()
    assert lines[0] == "d,e_d,sup_norm" and lines[1].startswith("4,")
    m = approx.ModulusEstimate(0.1, 0.3, 0.31, 0.01)
    approx.write_modulus_csv(tmp_path / "m.csv", [m])
    assert (tmp_path / "m.csv").read_text().splitlines()[0] == "t,omega_bar,tube_vol,std_error"
