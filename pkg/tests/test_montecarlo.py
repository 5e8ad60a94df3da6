import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lowsing import fields as F
from lowsing.montecarlo import Estimate, PathConfig, ThinningError, counter_uniform, exit_time_mc, \
    radial_sampler, resolvent_mc, sample_gamma_increments, sample_vg_path, simulate_endpoints, \
    simulate_thinned_sde
from lowsing.operator import CoefficientField
from lowsing.symbols import SubordinatorSpec, kernel_tail_mass

GAMMA = SubordinatorSpec.gamma()
u64 = st.integers(0, 2 ** 63 - 1)


@given(u64, u64, st.integers(0, 10 ** 6), st.integers(0, 3))
def test_counter_uniform_is_pure_and_in_unit_interval(seed, path, event, slot):
    a = counter_uniform(seed, np.array([path], dtype=np.uint64), event, slot)
    b = counter_uniform(seed, np.array([path], dtype=np.uint64), event, slot)
    assert a[0] == b[0] and 0.0 < a[0] < 1.0


def test_counter_uniform_moments():
    u = counter_uniform(3, np.arange(200_000, dtype=np.uint64), 7, 1)
    assert abs(u.mean() - 0.5) < 0.003
    assert abs(u.var() - 1 / 12) < 0.002
    # slots are decorrelated
    v = counter_uniform(3, np.arange(200_000, dtype=np.uint64), 7, 2)
    assert abs(np.corrcoef(u, v)[0, 1]) < 0.01


def test_gamma_increments_moments(rng):
    x = sample_gamma_increments(0.3, 400_000, rng)
    assert x.mean() == pytest.approx(0.3, rel=0.01)
    assert x.var() == pytest.approx(0.3, rel=0.02)
    with pytest.raises(ValueError):
        sample_gamma_increments(0.0, 3, rng)


def test_variance_gamma_characteristic_function(rng):
    # E exp(i xi Z_t) = (1 + xi^2)^{-t}
    z = sample_vg_path([0.5, 1.0], rng, n_paths=200_000)[:, :, 0]
    for col, t in ((0, 0.5), (1, 1.0)):
        emp = np.mean(np.cos(1.3 * z[:, col]))
        assert emp == pytest.approx((1 + 1.3 ** 2) ** (-t), abs=0.006)
    with pytest.raises(ValueError):
        sample_vg_path([1.0, 0.5], rng)


def test_radial_sampler_matches_tail_mass():
    s = radial_sampler(GAMMA, 1e-3, 8.0)
    r = np.sort(s(counter_uniform(1, np.arange(40_000, dtype=np.uint64), 0, 1)))
    total = kernel_tail_mass(GAMMA, 1e-3) - kernel_tail_mass(GAMMA, 8.0)
    assert s.mass == pytest.approx(total, rel=1e-6)
    for q in (0.01, 0.1, 0.5, 2.0):
        exact = (kernel_tail_mass(GAMMA, 1e-3) - kernel_tail_mass(GAMMA, q)) / total
        emp = np.searchsorted(r, q) / r.size
        assert abs(emp - exact) < 4 * math.sqrt(exact * (1 - exact) / r.size) + 1e-4


def test_endpoint_characteristic_function():
    # a = 1: X_T has characteristic function exp(-T psi(xi)) up to the truncations
    cfg = PathConfig(T=1.0, eps=1e-3, n_paths=40_000, seed=5)
    x = simulate_endpoints(CoefficientField.constant(1.0), GAMMA, cfg)[:, 0]
    emp = np.mean(np.cos(x))
    assert emp == pytest.approx(math.exp(-GAMMA.psi(1.0)), abs=4 * 0.5 / math.sqrt(cfg.n_paths) + 1e-3)


def test_paths_are_reproducible(tmp_path):
    a = CoefficientField.from_expression("1+0.1*sin(2*pi*x/L)", 0.9, 16.0)
    cfg = PathConfig(T=2.0, seed=11, n_paths=4)
    p1 = simulate_thinned_sde(a, GAMMA, cfg, path_index=2)
    p2 = simulate_thinned_sde(a, GAMMA, cfg, path_index=2)
    assert np.array_equal(p1.states, p2.states) and p1.times.size > 0
    assert np.allclose(p1.states[1:] - p1.states[:-1], p1.jumps)
    assert np.array_equal(p1.state_at(2.0), p1.states[-1])
    p1.to_csv(tmp_path / "e.csv")
    lines = (tmp_path / "e.csv").read_text().splitlines()
    assert lines[0] == "time [time units],jump_x [length],state_x [length]"
    assert len(lines) == p1.times.size + 1


def test_single_path_agrees_with_batch():
    a = CoefficientField.constant(1.0)
    cfg = PathConfig(T=1.0, seed=2, n_paths=6)
    batch = simulate_endpoints(a, GAMMA, cfg)
    one = simulate_thinned_sde(a, GAMMA, cfg, path_index=4)
    assert np.allclose(one.states[-1], batch[4])


def test_resolvent_of_constant_is_exact():
    f = F.GridField(np.ones(64), 16.0)
    est = resolvent_mc(f, 2.0, PathConfig(T=3.0, n_paths=100))
    assert est.mean == pytest.approx((1 - math.exp(-6.0)) / 2.0, rel=1e-12)
    assert est.stderr < 1e-12


def test_resolvent_matches_spectral_solution():
    from lowsing.operator import solve_homogeneous
    f = F.GridField.from_function(lambda x: np.exp(-x * x / 2), 512, 16.0)
    u = solve_homogeneous(f, 2.0, GAMMA).u
    est = resolvent_mc(f, 2.0, PathConfig(T=12.0, n_paths=10_000, seed=3))
    assert abs(est.mean - u.value_at_origin()) < 4 * est.stderr + est.total_bias()


def test_exit_time_bounded_by_jump_intensity():
    lam, delta = 16.0, 0.1
    est = exit_time_mc((0.0,), delta, lam, PathConfig(T=4.0, n_paths=4_000, seed=1))
    assert lam * est.mean <= kernel_tail_mass(GAMMA, delta) / 1.0 + 4 * lam * est.stderr
    with pytest.raises(ValueError):
        exit_time_mc((0.0,), 0.0, lam, PathConfig())


def test_acceptance_probability_checked():
    a = CoefficientField.from_expression("3+0*r", 0.9, 16.0)
    with pytest.raises(ThinningError):
        simulate_endpoints(a, GAMMA, PathConfig(n_paths=10))


@pytest.mark.parametrize("kwargs", [dict(T=0.0), dict(n_paths=0), dict(eps=1.0, r_max=0.5)])
def test_path_config_validation(kwargs):
    with pytest.raises(ValueError):
        PathConfig(**kwargs)


def test_estimate_is_order_independent(rng):
    x = rng.standard_normal(1001) * 1e8 + 1.0
    assert Estimate.from_samples(x).mean == Estimate.from_samples(x[::-1]).mean
    with pytest.raises(ValueError):
        Estimate.from_samples(np.ones(1))
