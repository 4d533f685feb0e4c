import mpmath as mp
import numpy as np
import pytest

from lcashe.errors import NonFinite
from lcashe.groups import Cyclic, Product, RealLine, Torus, convolve, points
from lcashe.spectral import (CyclicRates, DalangStatus, LatticeWalk, ProductIndependent, Stable,
                             TorusBrownian, Zero, dalang_check, heat_kernel, pbar0,
                             pbar0_integral, projection_compare, psi_values, stable_density,
                             tauberian_check, upsilon, upsilon_inverse, upsilon_profile,
                             upsilon_time_domain)
from lcashe.groups import Lattice


def test_cyclic3_exponent():
    assert np.allclose(psi_values(CyclicRates((1.0, 1.0))), [0, 3, 3])


def test_cyclic2_upsilon():
    # (1/2) (1/beta + 1/(beta + 4))
    assert upsilon(CyclicRates((1.0,)), 1.0) == pytest.approx(0.6, abs=1e-15)


def test_cyclic2_heat_kernel_two_state_chain():
    t = 0.7
    p = heat_kernel(CyclicRates((1.0,)), t)
    assert p == pytest.approx([(1 + np.exp(-2 * t)) / 2, (1 - np.exp(-2 * t)) / 2], abs=1e-14)


def test_asymmetric_walk_kernel_matches_matrix_exponential():
    from scipy.linalg import expm
    rates = (0.7, 0.0, 0.2, 1.1)
    n = len(rates) + 1
    Q = np.zeros((n, n))
    for x in range(n):
        for j, r in enumerate(rates, start=1):
            Q[x, (x + j) % n] += r
            Q[x, x] -= r
    p = heat_kernel(CyclicRates(rates), 0.9)
    assert np.allclose(p, expm(0.9 * Q)[0], atol=1e-13)


def test_torus_kernel_matches_theta_function():
    kappa, t = 0.05, 0.3
    m = TorusBrownian(kappa, Torus(32))
    q = mp.exp(-4 * mp.pi ** 2 * kappa * t)
    exact = [float(mp.jtheta(3, mp.pi * x, q)) for x in points(Torus(32))]
    assert np.allclose(heat_kernel(m, t), exact, atol=1e-12)


def test_gaussian_kernel():
    m = Stable(2.0, RealLine(10.0, 2000))
    x = points(m.group)
    for t in (0.25, 1.0):
        exact = np.exp(-x ** 2 / (4 * t)) / np.sqrt(4 * np.pi * t)
        inner = np.abs(x) < 8
        assert np.max(np.abs(heat_kernel(m, t)[inner] - exact[inner])) < 1e-8


def test_cauchy_density():
    x = np.array([0.0, 0.5, 2.0])
    assert np.allclose(stable_density(1.0, 0.7, x), 0.7 / (np.pi * (0.49 + x ** 2)), atol=1e-10)


def test_chapman_kolmogorov_on_lattice():
    m = LatticeWalk(Lattice(2, 1.0, 4), 1.5)
    p = heat_kernel(m, 0.2)
    q = heat_kernel(m, 0.5)
    assert np.max(np.abs(convolve(m.group, p, q) - heat_kernel(m, 0.7))) < 1e-12


def test_stable_upsilon_closed_form():
    assert upsilon(Stable(2.0), 3.0) == pytest.approx(1 / (2 * np.sqrt(6)), rel=1e-12)
    for al, b in ((1.5, 0.7), (1.25, 4.0)):
        # x = exp(s) turns the algebraic tail into an exponential one
        oracle = mp.quad(lambda s: mp.exp(s) / (b + 2 * mp.exp(al * s)), [-mp.inf, 0, mp.inf]) / mp.pi
        assert upsilon(Stable(al), b) == pytest.approx(float(oracle), rel=1e-10)


def test_torus_upsilon_against_direct_sum():
    kappa, beta = 0.3, 2.0
    oracle = mp.nsum(lambda n: 1 / (beta + 2 * kappa * (2 * mp.pi * n) ** 2), [-mp.inf, mp.inf])
    val = upsilon(TorusBrownian(kappa), beta)
    assert val == pytest.approx(float(oracle), rel=1e-12)
    assert val == pytest.approx(0.63173815372, rel=1e-10)


def test_stable_return_profile():
    al, t = 1.5, 0.4
    oracle = mp.quad(lambda x: mp.exp(-2 * t * x ** al), [0, mp.inf]) / mp.pi
    assert pbar0(Stable(al), t) == pytest.approx(float(oracle), rel=1e-12)


def test_upsilon_two_routes_and_inverse():
    for m in (CyclicRates((1.0, 0.5)), TorusBrownian(0.2), Stable(1.5),
              ProductIndependent((CyclicRates((1.0,)), Stable(2.0)))):
        for b in (0.3, 5.0):
            u = upsilon(m, b)
            assert upsilon_time_domain(m, b) == pytest.approx(u, rel=1e-8)
            assert upsilon_inverse(m, u) == pytest.approx(b, rel=1e-9)


def test_dalang_status():
    assert dalang_check(CyclicRates((1.0,))) is DalangStatus.HOLDS_BY_DISCRETENESS
    assert dalang_check(Stable(1.5)) is DalangStatus.HOLDS
    assert dalang_check(Stable(0.9)) is DalangStatus.FAILS
    assert dalang_check(Stable(1.0)) is DalangStatus.FAILS
    assert dalang_check(Zero(RealLine())) is DalangStatus.FAILS
    with pytest.raises(NonFinite):
        upsilon(Stable(0.9), 1.0)
    with pytest.raises(NonFinite):
        heat_kernel(Stable(0.9), 1.0)
    assert not upsilon_profile(Stable(0.9)).finite


def test_tauberian_values():
    r = tauberian_check(Stable(1.5), 1.0)
    assert r.ok
    assert (r.lhs, r.mid, r.rhs) == pytest.approx((0.1784, 0.5431, 1.318), abs=1e-3)


def test_occupation_integral_trivial_and_cyclic():
    assert pbar0_integral(CyclicRates(()), 2.0) == pytest.approx(2.0, abs=1e-13)
    # pbar_t(0) = (1 + exp(-4t)) / 2 on Z/2 with unit rate
    exact = 0.5 * (1.5 + (1 - np.exp(-6)) / 4)
    assert pbar0_integral(CyclicRates((1.0,)), 1.5) == pytest.approx(exact, abs=1e-13)


def test_projection():
    r = projection_compare(ProductIndependent((CyclicRates((1.0,)), CyclicRates((1.0, 1.0)))),
                           np.logspace(-2, 3, 20))
    assert r.ok and r.full_finite
    # a compact circle factor makes the full Upsilon infinite on R x T
    mixed = ProductIndependent((Stable(2.0), TorusBrownian(1.0, Torus(32))))
    r = projection_compare(mixed, [1.0, 10.0], slack=1e-8)
    assert r.ok and not r.full_finite
    assert projection_compare(mixed, [1.0, 10.0], slack=1e-8, dual_window=True).ok


def test_product_kernel_factorizes():
    m = ProductIndependent((CyclicRates((1.0,)), TorusBrownian(0.1, Torus(8))))
    p = heat_kernel(m, 0.5).reshape(2, 8)
    assert np.allclose(p, np.outer(heat_kernel(CyclicRates((1.0,)), 0.5),
                                   heat_kernel(TorusBrownian(0.1, Torus(8)), 0.5)))
    assert Product((Cyclic(2), Torus(8))) == m.group
