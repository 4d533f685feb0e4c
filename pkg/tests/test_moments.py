import numpy as np
import pytest
from scipy.linalg import expm
from scipy.special import gammaln

from lcashe.errors import GridTooCoarse, HypothesisViolated, NonFinite, NotLinear
from lcashe.groups import Lattice
from lcashe.initial import InitialCondition
from lcashe.moments import (EnergyCurve, deterministic_energy, lemma_sums_floor,
                            log_series_sum, lower_bound_constant, lower_bound_series, nbeta_norm,
                            solve_volterra, upper_bound_picard)
from lcashe.sigma import Bounded, Linear, SinPlusSlope
from lcashe.spectral import CyclicRates, LatticeWalk, Stable, TorusBrownian

U0 = InitialCondition()
LIN = Linear(1.0)


def pair_correlation_energy(Q, lam, t):
    """E||u_t||^2 from the closed linear ODE for M(x, y) = E u_t(x) u_t(y).

    dM = (Q M + M Q^T) dt + lam^2 diag(M) dt, u_0 = point mass at 0.
    """
    n = Q.shape[0]
    I = np.eye(n)
    A = np.kron(Q, I) + np.kron(I, Q)
    diag = np.arange(n) * (n + 1)
    A[diag, diag] += lam ** 2
    M0 = np.zeros(n * n)
    M0[0] = 1.0
    M = expm(t * A) @ M0
    return M[diag].sum()


def cyclic_generator(rates):
    n = len(rates) + 1
    Q = np.zeros((n, n))
    for x in range(n):
        for j, r in enumerate(rates, start=1):
            Q[x, (x + j) % n] += r
            Q[x, x] -= r
    return Q


def test_trivial_group_exact():
    for lam in (0.5, 1.0, 5.0, 20.0):
        c = solve_volterra(CyclicRates(()), U0, LIN, lam, [0.0, 0.5, 1.0])
        assert np.allclose(c.log_energy_sq, lam ** 2 * np.array([0, 0.5, 1.0]), atol=1e-6)


@pytest.mark.parametrize("rates", [(1.0,), (1.0, 1.0), (0.3, 0.0, 1.2),
                                   tuple(CyclicRates.nearest_neighbour(6).rates)])
@pytest.mark.parametrize("lam", [0.5, 2.0, 6.0])
def test_volterra_matches_pair_correlation_ode(rates, lam):
    exact = pair_correlation_energy(cyclic_generator(rates), lam, 1.0)
    got = solve_volterra(CyclicRates(rates), U0, LIN, lam, [0.0, 1.0]).log_energy_sq[-1]
    assert got == pytest.approx(np.log(exact), abs=1e-6)


def test_volterra_on_lattice():
    m = LatticeWalk(Lattice(1, 1.0, 6), 2.0)
    n = m.group.size
    Q = np.zeros((n, n))
    for x in range(n):
        for s in (1, -1):
            Q[x, (x + s) % n] += 1.0
            Q[x, x] -= 1.0
    exact = pair_correlation_energy(Q, 1.5, 0.8)
    got = solve_volterra(m, U0, LIN, 1.5, [0.0, 0.8]).log_energy_sq[-1]
    assert got == pytest.approx(np.log(exact), abs=1e-6)


def test_cyclic2_frozen_values():
    m = CyclicRates((1.0,))
    assert solve_volterra(m, U0, LIN, 1.0, [0, 1]).log_energy_sq[-1] == pytest.approx(0.09538351246650151, abs=1e-8)
    assert solve_volterra(m, U0, LIN, 10.0, [0, 1]).log_energy_sq[-1] == pytest.approx(98.03958441231845, abs=1e-6)


# log E||u_t||^2 for Stable(2), gaussian u0, from a Talbot inverse Laplace transform
TALBOT = {(0.5, 0.5): 0.305656313981836, (0.5, 1.0): 0.142915813640953,
          (1.0, 0.5): 0.564855055695704, (1.0, 1.0): 0.543826915328195,
          (2.0, 0.5): 1.975859056513154, (2.0, 1.0): 2.986277123877947}


def test_stable_brownian_against_inverse_laplace():
    for lam in (0.5, 1.0, 2.0):
        c = solve_volterra(Stable(2.0), U0, LIN, lam, [0.0, 0.5, 1.0])
        assert c.log_energy_sq[1] == pytest.approx(TALBOT[(lam, 0.5)], abs=2e-5)
        assert c.log_energy_sq[2] == pytest.approx(TALBOT[(lam, 1.0)], abs=2e-5)


def test_deterministic_energy_gaussian():
    t = np.array([0.0, 0.3, 2.0])
    assert np.allclose(np.exp(deterministic_energy(Stable(2.0), U0, t)), np.sqrt(np.pi / (1 + 2 * t)),
                       rtol=1e-12)


def test_volterra_preconditions():
    with pytest.raises(NotLinear):
        solve_volterra(CyclicRates((1.0,)), U0, Bounded(1.0, 0.5), 1.0, [0, 1])
    with pytest.raises(NonFinite, match="Dalang"):
        solve_volterra(Stable(0.9), U0, LIN, 1.0, [0, 1])
    with pytest.raises(GridTooCoarse):
        solve_volterra(Stable(2.0), U0, LIN, 200.0, [0, 1])


def test_energy_monotone_in_lambda():
    m = CyclicRates.nearest_neighbour(6)
    vals = [solve_volterra(m, U0, LIN, lam, [0, 1]).log_energy_sq[-1] for lam in (0.1, 1, 3, 9)]
    assert np.all(np.diff(vals) > 0)


@pytest.mark.parametrize("model", [CyclicRates(()), CyclicRates((1.0,)), CyclicRates((1.0, 1.0)),
                                   CyclicRates.nearest_neighbour(6), Stable(2.0), Stable(1.5)])
@pytest.mark.parametrize("lam", [0.5, 1.0])
def test_sandwich(model, lam):
    f = solve_volterra(model, U0, LIN, lam, [0.0, 1.0]).log_energy_sq[-1]
    assert lower_bound_series(model, U0, LIN, lam, 1.0) <= f + 1e-6
    assert f <= upper_bound_picard(model, LIN, U0, lam, 1.0) + 1e-6


def test_upper_bound_trivial_closed_form():
    # Upsilon(beta) = 1/beta, so the exponent is t (1+eps)^2 lam^2
    eps, lam = 0.5, 3.0
    val = upper_bound_picard(CyclicRates(()), LIN, U0, lam, 1.0, eps)
    assert val == pytest.approx(2 * np.log(5.0) + (1.5 * lam) ** 2, rel=1e-10)


def test_lower_bound_needs_positive_slope():
    with pytest.raises(HypothesisViolated):
        lower_bound_series(CyclicRates((1.0,)), U0, Bounded(1.0, 0.5), 1.0, 1.0)
    assert lower_bound_series(CyclicRates((1.0,)), U0, SinPlusSlope(1.0, 0.5), 2.0, 1.0) < \
        lower_bound_series(CyclicRates((1.0,)), U0, LIN, 2.0, 1.0)


def test_lower_bound_constant():
    assert lower_bound_constant(CyclicRates((1.0,)), U0) == pytest.approx(4.0)
    # gaussian u0 = exp(-x^2/2): half of |u0hat|^2 lies in |xi| <= r with erf(r) = 1/2
    r = 0.4769362762044699
    assert lower_bound_constant(Stable(2.0), U0) == pytest.approx(2 * r ** 2, rel=1e-9)
    assert lower_bound_constant(TorusBrownian(1.0), InitialCondition("constant")) == 0.0


def test_log_series_sum_exponential():
    x = 50.0
    val = log_series_sum(lambda n: n * np.log(x) - gammaln(n + 1), start=1)
    assert val == pytest.approx(np.log(np.expm1(x)), rel=1e-12)


def test_log_series_sum_huge_argument_uses_tail():
    x = 1e7
    val = log_series_sum(lambda n: n * np.log(x) - gammaln(n + 1), start=1)
    assert val == pytest.approx(x, rel=1e-6)


def test_nbeta_norm():
    t = np.linspace(0, 1, 11)
    c = EnergyCurve(t, 2.0 * t, 1.0, "test")
    r = nbeta_norm(c, 2.0)
    assert r.converged and r.value == pytest.approx(1.0)
    r = nbeta_norm(c, 0.5)
    assert not r.converged and r.log_value == pytest.approx(0.5)
    # beta = lam^2 / 2 on the trivial group gives a flat curve: bounded, not divergent
    assert nbeta_norm(EnergyCurve(t, 4.0 * t, 2.0, "test"), 2.0).converged


def test_lemma_sums():
    for a in (0, 1, 2):
        for rho in (0.5, 1.0, 2.0):
            for b in (1.0, 10.0, 100.0):
                r = lemma_sums_floor(a, rho, b)
                assert r.ok and r.explicit_ok
    # rho = 1, a = 0: sum b^j / j^j; at b = 1 the floor is calibrated to equality
    r = lemma_sums_floor(0, 1.0, 1.0)
    assert r.log_sum == pytest.approx(r.log_floor, abs=1e-12)
    direct = np.log(1 + sum(1.0 / j ** j for j in range(1, 40)))
    assert r.log_sum == pytest.approx(direct, abs=1e-13)
