import math

import numpy as np
import pytest
from scipy import integrate, stats

from deepwh import StableParams
from deepwh import densities as dens
from deepwh import stable_sim as sim
from deepwh.errors import DomainError, RegimeError


def cfg(**kw):
    base = dict(n_paths=200, dt=1e-3, seed=11, workers=1)
    base.update(kw)
    return sim.McConfig(**base)


def test_config_validation():
    for bad in (dict(n_paths=0), dict(dt=0.0), dict(r_stop=1.0), dict(eps_abs=1.5), dict(t_max=0.0),
                dict(seed=-1), dict(workers=0), dict(clock="sundial")):
        with pytest.raises(DomainError):
            cfg(**bad)


def test_workers_from_environment(monkeypatch):
    monkeypatch.setenv("DEEPWH_WORKERS", "3")
    assert sim.McConfig().workers == 3
    monkeypatch.setenv("DEEPWH_WORKERS", "zero")
    with pytest.raises(DomainError):
        sim.default_workers()


def test_beta_rho_round_trip():
    for alpha in (0.3, 0.7, 1.4, 1.8):
        for rho in (0.3, 0.5, 1 - 0.9 / alpha if alpha > 1 else 0.8):
            assert sim.rho_from_beta(alpha, sim.beta_from_rho(alpha, rho)) == pytest.approx(rho, abs=1e-14)


def test_path_streams_are_reproducible_and_distinct():
    a = sim.path_rng(5, 3).random(4)
    np.testing.assert_array_equal(a, sim.path_rng(5, 3).random(4))
    assert not np.array_equal(a, sim.path_rng(5, 4).random(4))
    assert not np.array_equal(a, sim.path_rng(6, 3).random(4))


def test_increment_sign_frequency():
    p = StableParams(0.7, 0.4)
    n = 100_000
    s = sim.sample_stable_increment(0.5, p, sim.path_rng(1, 0), n)
    freq = np.mean(s >= 0)
    assert abs(freq - 0.4) < 3 * math.sqrt(0.4 * 0.6 / n)


def test_increment_cauchy_law():
    s = sim.sample_stable_increment(1.0, StableParams(1.0, 0.5), sim.path_rng(2, 0), 100_000)
    assert abs(np.median(s)) < 0.02
    assert stats.kstest(s, stats.cauchy.cdf).statistic < 0.01


def test_increment_scaling():
    p = StableParams(1.5, 0.5)
    a = sim.sample_stable_increment(1.0, p, sim.path_rng(3, 0), 1000)
    b = sim.sample_stable_increment(8.0, p, sim.path_rng(3, 0), 1000)
    np.testing.assert_allclose(b, 8.0 ** (1 / 1.5) * a, rtol=1e-13)


def test_simulate_path_low_escapes():
    p = StableParams(0.6, 0.5)
    reasons = [sim.simulate_path(1.0, p, cfg(t_max=1e4), i).stop_reason for i in range(40)]
    assert reasons.count("outer") == 40


def test_simulate_path_high_absorbs():
    p = StableParams(1.5, 0.5)
    paths = [sim.simulate_path(1.0, p, cfg(eps_abs=1e-2, t_max=1e6), i) for i in range(40)]
    assert all(pt.stop_reason == "inner" for pt in paths)
    assert all(abs(pt.values[pt.absorbed]) < 1e-2 for pt in paths)


def test_lamperti_kiu_round_trip():
    p = StableParams(0.7, 0.4)
    path = sim.simulate_path(-2.0, p, cfg(), 0)
    m = sim.lamperti_kiu(path, p)
    assert m.xi[0] == 0.0 and m.j[0] == -1
    back = sim.lamperti_kiu_inverse(m, p)
    np.testing.assert_allclose(back.values, path.values, rtol=1e-12)
    np.testing.assert_allclose(back.times, path.times, rtol=1e-10, atol=1e-12)


def test_closest_event_matches_map_event():
    # {closest point > 1/2} for X from 1 is {xi stays above log(1/2), J = +1 at its infimum}
    p = StableParams(0.6, 0.5)
    c = cfg(n_paths=100)
    ss = sim.closest_reach_mc(1.0, p, c)
    via_map = [sim.map_infimum_event(sim.lamperti_kiu(sim.simulate_path(1.0, p, c, i), p), math.log(0.5))
               for i in range(100)]
    np.testing.assert_array_equal(ss.values > 0.5, via_map)


def test_closest_mc_support_and_regime():
    p = StableParams(0.6, 0.5)
    ss = sim.closest_reach_mc(1.0, p, cfg())
    assert np.all(np.abs(ss.samples) <= 1.0)
    assert ss.n_accepted + ss.n_censored == 200
    with pytest.raises(RegimeError):
        sim.closest_reach_mc(1.0, StableParams(1.5, 0.5), cfg())


def test_closest_mc_scale_invariance():
    p = StableParams(0.6, 0.4)
    a = sim.closest_reach_mc(1.0, p, cfg(n_paths=50))
    b = sim.closest_reach_mc(4.0, p, cfg(n_paths=50))
    np.testing.assert_allclose(b.values, 4.0 * a.values, rtol=1e-12)


def test_worker_count_does_not_change_samples():
    p = StableParams(1.5, 0.5)
    a = sim.furthest_reach_mc(1.0, p, cfg(n_paths=64, workers=1))
    b = sim.furthest_reach_mc(1.0, p, cfg(n_paths=64, workers=2))
    np.testing.assert_array_equal(a.values, b.values)
    np.testing.assert_array_equal(a.steps, b.steps)


def test_furthest_mc_support():
    ss = sim.furthest_reach_mc(1.0, StableParams(1.5, 0.5), cfg())
    assert np.all(np.abs(ss.samples) >= 1.0)


def test_reflected_symmetric_mean():
    p = StableParams(0.5, 0.5)
    ss = sim.reflected_stationary_mc(p, cfg(n_paths=2000, t_max=100.0))
    v = ss.samples
    assert np.all(np.abs(v) <= 1.0)
    assert abs(v.mean()) < 3 * v.std() / math.sqrt(v.size)


def test_reflected_needs_horizon():
    with pytest.raises(DomainError):
        sim.reflected_stationary_mc(StableParams(0.5, 0.5), cfg())


def test_avoid_limits():
    p = StableParams(0.7, 0.5)
    near = sim.avoid_strip_mc(1.001, p, cfg(n_paths=300, r_stop=1e6))
    far = sim.avoid_strip_mc(1e4, p, cfg(n_paths=300, r_stop=1e6))
    assert near.estimate < 0.15
    assert far.estimate > 0.85
    assert near.ci_low <= near.estimate <= near.ci_high


@pytest.mark.slow
def test_cauchy_exit_constant_by_box_mass():
    x = 0.2
    u, y, n = sim.cauchy_exit_mc(x, sim.McConfig(n_paths=20000, dt=1e-3, seed=5, workers=1))
    for a, b, c, d in ((0.2, 0.4, 0.2, 0.6), (0.0, 0.3, 0.0, 0.5), (0.1, 0.5, 1.0, 5.0)):
        k = np.count_nonzero((u >= a) & (u < b) & (y >= c) & (y < d))
        exact = integrate.dblquad(lambda yy, uu: dens.cauchy_exit_density(x, uu, yy), a, b, c, d, epsabs=1e-10)[0]
        sd = math.sqrt(exact * (1 - exact) / n)
        assert abs(k / n - exact) < 4 * sd + 0.005


@pytest.mark.slow
def test_hit_point_by_interval_extrapolation():
    # bias of the interval target shrinks like eps^(1/2); extrapolate from eps and eps/4
    p = StableParams(1.5, 0.5)
    x, y = 0.2, 0.5
    est = []
    for eps in (0.01, 0.0025):
        c = sim.McConfig(n_paths=10_000, dt=1e-3, seed=1, workers=1, clock="boundary")
        est.append(sim.hit_interval_mc(x, y - eps, y + eps, p, c).estimate)
    extrapolated = 2 * est[1] - est[0]
    assert est[0] > est[1] > dens.hit_point_before_exit(x, y, p)
    assert extrapolated == pytest.approx(dens.hit_point_before_exit(x, y, p), abs=0.04)
