from dataclasses import replace

import numpy as np
import pytest

from lcashe.errors import ConfigError, NotAutomorphism, NotDiscrete
from lcashe.groups import Cyclic, Isomorphism, Torus
from lcashe.initial import InitialCondition
from lcashe.moments import solve_volterra
from lcashe.montecarlo import (SimConfig, block_rng, induced_grid_model, invariance_check,
                               local_time_identity, propagator, simulate_energy, simulate_grid)
from lcashe.sigma import Bounded, Linear
from lcashe.spectral import CyclicRates, Stable, TorusBrownian

U0 = InitialCondition()
LIN = Linear(1.0)


def test_propagator_is_stochastic_and_exact():
    m = CyclicRates((1.0, 0.5, 0.0))
    P = propagator(m, 0.3)
    assert np.allclose(P.sum(axis=1), 1.0)
    assert np.allclose(propagator(m, 0.1) @ propagator(m, 0.2), P)


def test_config_rules():
    with pytest.raises(ConfigError, match="0.1"):
        simulate_energy(CyclicRates((1.0,)), U0, LIN, 1.0, SimConfig(dt=0.2, t_end=1.0, n_paths=10))
    with pytest.raises(ConfigError):
        SimConfig(dt=-1.0)
    with pytest.raises(NotDiscrete):
        propagator(Stable(2.0), 0.1)


def test_trivial_group_moment():
    # on one point, u_T = exp(lam B_T - lam^2 T/2) exactly with the linear scheme's product
    cfg = SimConfig(dt=1e-3, t_end=0.5, n_paths=40_000, seed=7)
    est = simulate_energy(CyclicRates(()), U0, LIN, 0.8, cfg)
    exact = np.exp(0.64 * 0.5)
    # Euler product: E prod (1 + lam dB)^2 = (1 + lam^2 dt)^n
    euler = (1 + 0.64 * 1e-3) ** 500
    assert abs(est.mean - euler) < 3 * est.se
    assert abs(euler - exact) < 1e-3


def test_cyclic_mc_against_volterra():
    m = CyclicRates((1.0, 1.0))
    cfg = SimConfig(dt=1e-2, t_end=1.0, n_paths=20_000, seed=11)
    est = simulate_energy(m, U0, LIN, 0.5, cfg)
    exact = np.exp(solve_volterra(m, U0, LIN, 0.5, [0.0, 1.0]).log_energy_sq[-1])
    assert abs(est.mean - exact) < 3 * est.se


def test_determinism_threads_and_noise_scaling():
    m = CyclicRates((1.0,))
    cfg = SimConfig(dt=1e-2, t_end=0.5, n_paths=1000, seed=3, block=128)
    a = simulate_energy(m, U0, LIN, 0.7, cfg, keep_samples=True)
    b = simulate_energy(m, U0, LIN, 0.7, replace(cfg, threads=4), keep_samples=True)
    assert np.array_equal(a.samples, b.samples)
    c = simulate_energy(m, U0, LIN, 1.4, cfg, keep_samples=True)
    d = simulate_energy(m, U0, LIN, 0.7, cfg, noise_scale=2.0, keep_samples=True)
    assert np.array_equal(c.samples, d.samples)
    e = simulate_energy(m, U0, LIN, 0.7, replace(cfg, seed=4), keep_samples=True)
    assert not np.array_equal(a.samples, e.samples)


def test_block_streams_differ():
    x = block_rng(1, 0).standard_normal(5)
    y = block_rng(1, 1).standard_normal(5)
    assert not np.allclose(x, y)
    assert np.array_equal(x, block_rng(1, 0).standard_normal(5))


def test_grid_simulation_on_torus():
    m = TorusBrownian(0.1, Torus(16))
    cyc, h = induced_grid_model(m)
    assert h == pytest.approx(1 / 16)
    assert cyc.group == Cyclic(16)
    est = simulate_grid(m, InitialCondition("constant"), LIN, 0.5,
                        SimConfig(dt=1e-3, t_end=1.0, n_paths=2000, seed=5))
    exact = np.exp(solve_volterra(m, InitialCondition("constant"), LIN, 0.5, [0, 1]).log_energy_sq[-1])
    assert abs(est.mean - exact) < 3 * est.se


def test_local_time_identity():
    r = local_time_identity(CyclicRates(()), 10)
    assert r.lhs == 1.0 and r.rhs == 1.0 and r.ok
    assert r.literal_rhs == pytest.approx(2.0)
    r = local_time_identity(CyclicRates((1.0,)), 20_000, seed=9)
    assert r.rhs == pytest.approx(2 / 3)
    assert r.ok and not r.literal_ok
    with pytest.raises(NotDiscrete):
        local_time_identity(Stable(2.0))


def test_invariance_under_automorphism():
    m = CyclicRates((1.0, 0.0, 0.0, 1.0))
    h = Isomorphism(Cyclic(5), Cyclic(5), "multiplier", 2)
    u0 = InitialCondition.from_values([1.0, 2.0, 0.5, -1.0, 3.0])
    r = invariance_check(m, h, u0, Linear(1.0), 1.0, SimConfig(dt=1e-2, t_end=1.0, n_paths=100))
    assert r.ok and r.max_abs_diff < 1e-10
    r = invariance_check(CyclicRates((0.2, 1.0, 0.0, 0.3)), h, u0, Bounded(2.0, 0.5), 1.0,
                         SimConfig(dt=1e-2, t_end=0.5, n_paths=50))
    assert r.ok
    with pytest.raises(NotAutomorphism):
        invariance_check(CyclicRates((1.0,)), h, u0, LIN, 1.0, SimConfig(dt=1e-2, n_paths=5))
