import math
import warnings

import numpy as np
import pytest

from polarce.array_channel import (
    ArrayGeometry,
    FrequencyGrid,
    PathParam,
    far_steering,
    near_steering,
    sample_random_paths,
    steering_matrix,
    synthesize_channel,
)
from polarce.bench.records import nmse
from polarce.estimators import (
    MLObjective,
    RankDeficiencyWarning,
    angular_polar_dictionary,
    genie_ls,
    gradient_inv_r,
    gradient_theta,
    ls_baseline,
    ml_objective,
    p_sigw,
    p_somp,
    ss_sigw_baseline,
    sw_omp_baseline,
    uniform_dictionary,
)
from polarce.observation import generate_combiner, observe, whiten
from polarce.polar_dictionary import DictionaryConfig, build_polar_dictionary


def db(x):
    return 10 * math.log10(x)


def make_obs(H, pilots, num_rf, noise_var, seed):
    rng = np.random.default_rng(seed)
    comb = generate_combiner(rng, pilots, num_rf, H.shape[0])
    obs = observe(H, comb, noise_var, rng)
    whiten(obs)
    return obs


@pytest.fixture(scope="module")
def geom256():
    return ArrayGeometry(256, 0.003)


@pytest.fixture(scope="module")
def dict256(geom256):
    return build_polar_dictionary(DictionaryConfig(geom256, 1.2, 3.0))


@pytest.fixture(scope="module")
def geom32():
    return ArrayGeometry(32, 0.003)


@pytest.fixture(scope="module")
def grid4():
    return FrequencyGrid(4, 100e6, 100e9)


# ------------------------------------------------------------------ P-SOMP

def test_psomp_one_sparse(dict256):
    q = 2 * 256 + 77
    H = dict256.W[:, [q]] @ np.array([[1.0 - 2j, 0.5j, -1.0]])
    obs = make_obs(H, 4, 4, 0.0, 0)
    res = p_somp(obs, dict256, 1)
    assert list(res.support) == [q]
    assert db(nmse(H, res.H_hat)) < -120
    assert res.angles[0] == dict256.angle[q]
    assert res.distances[0] == pytest.approx(dict256.distance[q])


def test_psomp_four_sparse_table2(dict256):
    rng = np.random.default_rng(1)
    cols = np.array([0 * 256 + 20, 1 * 256 + 90, 3 * 256 + 150, 5 * 256 + 220])
    X = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    H = dict256.W[:, cols] @ X
    obs = make_obs(H, 32, 4, 0.0, 2)
    res = p_somp(obs, dict256, 4)
    assert sorted(res.support) == sorted(cols)
    assert db(nmse(H, res.H_hat)) < -100


def test_psomp_residual_monotone_and_unique(dict256, grid4, geom256):
    paths = sample_random_paths(np.random.default_rng(3), 6)
    ch = synthesize_channel(geom256, grid4, paths)
    obs = make_obs(ch.H, 32, 4, 0.1, 4)
    res = p_somp(obs, dict256, 12)
    assert len(set(res.support.tolist())) == 12
    assert np.all(np.diff(res.residual_norms) <= 1e-12)
    assert res.H_hat.shape == ch.H.shape and np.all(np.isfinite(res.H_hat))


def test_psomp_argument_errors(geom32):
    d = build_polar_dictionary(DictionaryConfig(geom32, 1.2, 0.2))
    obs = make_obs(np.ones((32, 2), complex), 2, 2, 0.0, 0)
    with pytest.raises(ValueError):
        p_somp(obs, d, 0)
    with pytest.raises(ValueError):
        p_somp(obs, d, 5)  # only 4 measurements


def test_psomp_rank_deficiency_warns(geom32):
    # two identical dictionary columns: the second pick cannot add rank
    W = far_steering(geom32, 0.25)[:, None].repeat(2, axis=1)
    d = angular_polar_dictionary(geom32)
    d = type(d)(W=W, ring=np.zeros(2, int), angle=np.array([0.25, 0.25]),
                distance=np.full(2, np.inf), num_rings=1, geometry=geom32, kind="angular")
    obs = make_obs(W[:, :1] @ np.ones((1, 2)), 2, 2, 0.0, 0)
    with pytest.warns(RankDeficiencyWarning):
        p_somp(obs, d, 2)


# ------------------------------------------------------ ML objective/grads

def _random_problem(seed, num_paths=2, n=32, pilots=4, m=4, noise=0.05):
    geom = ArrayGeometry(n, 0.003)
    paths = sample_random_paths(np.random.default_rng(seed), num_paths,
                                distance_range=(0.5, 5.0))
    ch = synthesize_channel(geom, FrequencyGrid(m, 100e6, 100e9), paths)
    obs = make_obs(ch.H, pilots, 4, noise, seed + 1)
    return geom, paths, obs


def test_objective_captures_noiseless_single_path():
    geom, paths, obs = _random_problem(5, num_paths=1, noise=0.0)
    p = paths[0]
    val = ml_objective(geom, [p.angle], [p.distance], obs.Ybar, obs.sensing)
    assert val == pytest.approx(-np.linalg.norm(obs.Ybar) ** 2, rel=1e-10)
    assert ml_objective(geom, [p.angle], [p.distance], 0 * obs.Ybar, obs.sensing) == 0.0
    worse = ml_objective(geom, [p.angle + 0.01], [p.distance], obs.Ybar, obs.sensing)
    assert worse > val


def test_objective_bounds():
    geom, _, obs = _random_problem(6)
    rng = np.random.default_rng(0)
    for _ in range(10):
        th = rng.uniform(-1, 1, 3)
        r = rng.uniform(0.5, 10, 3)
        val = ml_objective(geom, th, r, obs.Ybar, obs.sensing)
        assert -np.linalg.norm(obs.Ybar) ** 2 - 1e-9 <= val <= 1e-12


def test_objective_accepts_infinite_distance():
    geom, _, obs = _random_problem(7)
    a = ml_objective(geom, [0.2, -0.4], [np.inf, 3.0], obs.Ybar, obs.sensing)
    b = MLObjective(geom, obs.sensing, obs.Ybar).value(np.array([0.2, -0.4]),
                                                        np.array([0.0, 1 / 3.0]))
    assert a == b


def test_projection_idempotent():
    geom, _, obs = _random_problem(8)
    rng = np.random.default_rng(1)
    Psi = obs.sensing @ steering_matrix(geom, rng.uniform(-1, 1, 3), rng.uniform(0, 2, 3))
    P = Psi @ np.linalg.pinv(Psi, rcond=1e-10)
    assert np.max(np.abs(P @ P - P)) < 1e-8


def _central(f, x, h):
    return (f(x + h) - f(x - h)) / (2 * h)


def _richardson(f, x, h):
    return (4 * _central(f, x, h) - _central(f, x, 2 * h)) / 3


@pytest.mark.parametrize("seed", range(6))
def test_gradients_match_central_differences(seed):
    geom, paths, obs = _random_problem(10 + seed, num_paths=3)
    rng = np.random.default_rng(seed)
    th = np.clip([p.angle for p in paths] + rng.normal(0, 0.02, 3), -0.95, 0.95)
    u = 1 / np.array([p.distance for p in paths]) * rng.uniform(0.8, 1.2, 3)
    f = MLObjective(geom, obs.sensing, obs.Ybar)
    g_t, g_u = f.gradients(th, u)
    fd_t, fd_u, rich_t, rich_u = (np.empty(3) for _ in range(4))
    for i in range(3):
        e = np.eye(3)[i]
        ft = lambda s: f.value(th + s * e, u)  # noqa: E731
        fu = lambda s: f.value(th, u + s * e)  # noqa: E731
        fd_t[i], fd_u[i] = _central(ft, 0.0, 1e-6), _central(fu, 0.0, 1e-7)
        rich_t[i], rich_u[i] = _richardson(ft, 0.0, 1e-4), _richardson(fu, 0.0, 1e-4)
    # blockwise relative error at the small steps
    assert np.max(np.abs(g_t - fd_t)) < 1e-5 * np.max(np.abs(fd_t))
    assert np.max(np.abs(g_u - fd_u)) < 1e-5 * np.max(np.abs(fd_u))
    # per coordinate against the extrapolated (round-off free) difference
    np.testing.assert_allclose(g_t, rich_t, rtol=1e-6, atol=1e-9)
    np.testing.assert_allclose(g_u, rich_u, rtol=1e-6, atol=1e-9)
    np.testing.assert_array_equal(gradient_theta(geom, th, 1 / u, obs.Ybar, obs.sensing), g_t)
    np.testing.assert_allclose(gradient_inv_r(geom, th, 1 / u, obs.Ybar, obs.sensing), g_u,
                               rtol=1e-12)


def test_gradient_vanishes_at_noiseless_optimum():
    geom, paths, obs = _random_problem(20, num_paths=2, noise=0.0)
    th = np.array([p.angle for p in paths])
    u = 1 / np.array([p.distance for p in paths])
    g_t, g_u = MLObjective(geom, obs.sensing, obs.Ybar).gradients(th, u)
    scale = np.linalg.norm(obs.Ybar) ** 2
    assert np.linalg.norm(np.concatenate([g_t, g_u])) < 1e-6 * scale


def test_gradient_mirror_symmetry(geom32):
    # sensing S = [R; R J] maps mirrored steering vectors onto row-swapped
    # measurements, so the objective is invariant under (t1, t2) -> (-t2, -t1)
    rng = np.random.default_rng(2)
    R = rng.standard_normal((6, 32)) + 1j * rng.standard_normal((6, 32))
    S = np.vstack([R, R[:, ::-1]])
    h = near_steering(geom32, 0.31, 1.7) + near_steering(geom32, -0.31, 1.7)
    Ybar = (S @ h)[:, None] * np.array([[1.0, 0.3 - 0.2j]])
    th = np.array([0.27, -0.27])
    r = np.array([1.5, 1.5])
    g = gradient_theta(geom32, th, r, Ybar, S)
    assert abs(g[0] + g[1]) < 1e-8 * max(1.0, abs(g[0]))
    assert abs(g[0]) > 1e-6
    gu = gradient_inv_r(geom32, th, r, Ybar, S)
    assert abs(gu[0] - gu[1]) < 1e-8 * max(1.0, abs(gu[0]))


# ------------------------------------------------------------------ P-SIGW

def test_psigw_zero_iterations_is_psomp(dict256, grid4, geom256):
    ch = synthesize_channel(geom256, grid4, sample_random_paths(np.random.default_rng(4), 6))
    obs = make_obs(ch.H, 32, 4, 0.1, 5)
    a = p_somp(obs, dict256, 12)
    b = p_sigw(obs, dict256, 12, 0)
    np.testing.assert_array_equal(a.H_hat, b.H_hat)
    np.testing.assert_array_equal(a.support, b.support)
    assert len(b.objective_trace) == 1
    with pytest.raises(ValueError):
        p_sigw(obs, dict256, 12, -1)


def test_psigw_refines_off_grid_path(dict256, geom256):
    grid = FrequencyGrid(32, 100e6, 100e9)
    theta, r = 0.1237, 7.31
    ch = synthesize_channel(geom256, grid, [PathParam(1 + 0.5j, theta, r)])
    obs = make_obs(ch.H, 32, 4, 0.0, 6)
    on_grid = p_somp(obs, dict256, 1)
    res = p_sigw(obs, dict256, 1, 10)
    assert abs(res.angles[0] - theta) < 1e-4
    err = db(nmse(ch.H, res.H_hat))
    assert err < -40
    assert err < db(nmse(ch.H, on_grid.H_hat))


def test_psigw_trace_monotone_and_clamped(dict256, grid4, geom256):
    for seed in range(3):
        ch = synthesize_channel(geom256, grid4, sample_random_paths(np.random.default_rng(seed), 6))
        obs = make_obs(ch.H, 32, 4, 0.1, 50 + seed)
        res = p_sigw(obs, dict256, 12, 10)
        trace = np.array(res.objective_trace)
        assert len(trace) == 11
        assert np.all(np.diff(trace) <= 0)
        assert np.all(np.abs(res.angles) <= 1)
        # distances stay outside the innermost ring r = rho_min (1 - theta^2)
        u_max = 1 / (3.0 * np.maximum(1 - res.angles**2, 1e-2))
        assert np.all(res.inv_distances <= u_max * (1 + 1e-12))
        assert np.all(res.inv_distances >= 0)


# --------------------------------------------------------------- baselines

def test_swomp_equals_single_ring_psomp(geom256, grid4):
    d1 = build_polar_dictionary(DictionaryConfig(geom256, 1.2, 1e3))
    ch = synthesize_channel(geom256, grid4, sample_random_paths(np.random.default_rng(9), 6))
    obs = make_obs(ch.H, 16, 4, 0.1, 10)
    a = sw_omp_baseline(obs, geom256, 6)
    b = p_somp(obs, d1, 6)
    np.testing.assert_array_equal(a.H_hat, b.H_hat)
    assert a.method == "sw_omp"


def test_swomp_far_field_exact(geom256):
    grid = FrequencyGrid(4, 100e6, 100e9)
    ch = synthesize_channel(geom256, grid, [PathParam(1.0, 41 * 2 / 256 - 255 / 256, np.inf)])
    obs = make_obs(ch.H, 4, 4, 0.0, 0)
    assert db(nmse(ch.H, sw_omp_baseline(obs, geom256, 1).H_hat)) < -120


def test_near_field_energy_spread(geom256):
    F = angular_polar_dictionary(geom256).W
    energy = np.sort(np.abs(F.conj().T @ near_steering(geom256, 0.2, 5.0)) ** 2)[::-1]
    needed = int(np.searchsorted(np.cumsum(energy), 0.9) + 1)
    assert needed >= 3


def test_ss_sigw(geom256):
    grid = FrequencyGrid(8, 100e6, 100e9)
    ch = synthesize_channel(geom256, grid, [PathParam(0.9 - 0.3j, 0.3012, np.inf)])
    obs = make_obs(ch.H, 16, 4, 1e-3, 1)
    sw = sw_omp_baseline(obs, geom256, 1)
    ss0 = ss_sigw_baseline(obs, geom256, 1, 0)
    np.testing.assert_array_equal(ss0.H_hat, sw.H_hat)
    assert ss0.method == "ss_sigw"
    ss = ss_sigw_baseline(obs, geom256, 1, 10)
    assert nmse(ch.H, ss.H_hat) < nmse(ch.H, sw.H_hat)
    assert np.all(ss.inv_distances == 0)


def test_ss_sigw_worse_than_psigw_in_near_field(geom256, dict256):
    grid = FrequencyGrid(8, 100e6, 100e9)
    ch = synthesize_channel(geom256, grid, [PathParam(1.0, 0.2113, 5.0)])
    obs = make_obs(ch.H, 32, 4, 0.01, 3)
    assert nmse(ch.H, p_sigw(obs, dict256, 1).H_hat) < nmse(ch.H, ss_sigw_baseline(obs, geom256, 1).H_hat)


def test_ls_exact_when_square(geom32):
    H = np.random.default_rng(0).standard_normal((32, 3)) + 0j
    obs = make_obs(H, 8, 4, 0.0, 1)
    assert db(nmse(H, ls_baseline(obs).H_hat)) < -120


def test_genie_noiseless(geom256, grid4):
    paths = sample_random_paths(np.random.default_rng(2), 6)
    ch = synthesize_channel(geom256, grid4, paths)
    obs = make_obs(ch.H, 8, 4, 0.0, 3)
    res = genie_ls(obs, geom256, paths)
    assert db(nmse(ch.H, res.H_hat)) < -120
    np.testing.assert_allclose(res.distances, [p.distance for p in paths])


def test_genie_handles_far_field_paths(geom256, grid4):
    paths = [PathParam(1.0, 0.1, np.inf), PathParam(0.5j, -0.3, 6.0)]
    ch = synthesize_channel(geom256, grid4, paths)
    obs = make_obs(ch.H, 4, 4, 0.0, 3)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        res = genie_ls(obs, geom256, paths)
    assert db(nmse(ch.H, res.H_hat)) < -120
    assert res.inv_distances[0] == 0


def test_uniform_dictionary_reexported(geom256):
    d = uniform_dictionary(geom256, 1, 3.0, 98.3)
    assert d.num_columns == 256 and np.all(d.distance == 3.0)
