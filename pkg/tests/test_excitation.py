import numpy as np
import pytest

from lcashe.errors import HypothesisViolated, TooFewPoints
from lcashe.excitation import (LambdaSweep, constant_sigma_energy, dichotomy_report, fit_index,
                               linear_excitation_check, predicted_index, sweep)
from lcashe.initial import InitialCondition
from lcashe.montecarlo import SimConfig
from lcashe.sigma import Bounded, Linear
from lcashe.spectral import CyclicRates, Stable, TorusBrownian

U0 = InitialCondition()
LIN = Linear(1.0)


def test_trivial_sweep_is_exact():
    lams = np.logspace(1, 3, 21)
    sw = sweep(CyclicRates(()), LIN, U0, 1.0, lams)
    assert np.allclose(sw.log_log_energy, np.log(lams ** 2 / 2), atol=1e-8)
    est = fit_index(sw)
    assert est.slope == pytest.approx(2.0, abs=0.01)
    assert est.verdict == "Discrete2"


def test_synthetic_quartic_fit():
    lams = np.logspace(1, 2, 11)
    sw = LambdaSweep(lams, 2 * lams ** 4, "lower_bound", 1.0)
    assert fit_index(sw, 1.0).slope == pytest.approx(4.0, abs=1e-12)


def test_fit_needs_five_points():
    sw = LambdaSweep(np.array([1.0, 2, 3, 4]), np.array([1.0, 2, 3, 4]), "volterra", 1.0)
    with pytest.raises(TooFewPoints):
        fit_index(sw, 1.0)


def test_sweep_gaps_are_recorded():
    # the direct solver gives up at large lambda; those points become NaN
    sw = sweep(Stable(2.0), LIN, U0, 1.0, [1.0, 300.0])
    assert np.isfinite(sw.log_energy_sq[0]) and np.isnan(sw.log_energy_sq[1])
    assert 300.0 in sw.failures


def test_stable_lower_bound_index():
    sw = sweep(Stable(1.5), LIN, U0, 1.0, np.logspace(1, 2, 21), "lower_bound")
    assert fit_index(sw).slope == pytest.approx(6.0, abs=0.3)


def test_mc_sweep_matches_volterra():
    m = CyclicRates((1.0,))
    lams = [0.25, 0.5, 1.0]
    cfg = SimConfig(dt=1e-2, t_end=1.0, n_paths=20_000, seed=1)
    mc = sweep(m, LIN, U0, 1.0, lams, "mc", sim_cfg=cfg)
    ex = sweep(m, LIN, U0, 1.0, lams, "volterra")
    assert np.allclose(mc.log_energy_sq, ex.log_energy_sq, atol=0.05)


def test_predicted_index():
    assert predicted_index(CyclicRates((0.0,) * 16), LIN)[0] == 2.0
    assert predicted_index(LIN, Stable(2.0))[0] == pytest.approx(4.0)
    assert predicted_index(Stable(1.25), LIN)[0] == pytest.approx(10.0)
    assert predicted_index(TorusBrownian(1.0), Bounded(1.0, 0.5))[0] == 0.0
    val, tag = predicted_index(TorusBrownian(1.0), LIN)
    assert val is None and "4" in tag
    assert predicted_index(Stable(0.9), LIN)[0] is None


def test_constant_sigma_energy_trivial():
    for lam in (1.0, 2.0, 5.0, 10.0):
        e = constant_sigma_energy(CyclicRates(()), InitialCondition("constant"), 1.0, lam, 1.0)
        assert e == pytest.approx(1 + lam ** 2, rel=1e-12)


def test_linear_excitation_checks():
    lams = np.logspace(0, 3, 13)
    r = linear_excitation_check(CyclicRates(()), Bounded(1.0, 1.0), InitialCondition("constant"), 1.0, lams)
    assert r.ok
    assert np.allclose(r.exact_ratio ** 2 * lams ** 2, 1 + lams ** 2, rtol=1e-9)
    r = linear_excitation_check(CyclicRates((1.0,)), Bounded(1.0, 0.5), InitialCondition("constant"), 1.0, lams)
    assert r.ok and 0 < r.inf_ratio < r.sup_ratio < np.inf
    r = linear_excitation_check(TorusBrownian(1.0), Bounded(1.0, 1.0), InitialCondition("constant"), 1.0, lams)
    assert r.ok
    with pytest.raises(HypothesisViolated):
        linear_excitation_check(Stable(2.0), Bounded(1.0, 1.0), U0, 1.0, lams)
    with pytest.raises(HypothesisViolated):
        linear_excitation_check(TorusBrownian(1.0), Bounded(1.0, 0.0), InitialCondition("constant"), 1.0, lams)


def test_dichotomy():
    entries = [("trivial", CyclicRates(()), LIN, U0),
               ("cyclic6", CyclicRates.nearest_neighbour(6), LIN, U0),
               ("stable2", Stable(2.0), LIN, U0),
               ("stable1.25", Stable(1.25), LIN, U0)]
    rows = dichotomy_report(entries)
    assert all(r.passed for r in rows)
    by = {r.model_id: r for r in rows}
    assert by["stable1.25"].slope == pytest.approx(10.0, abs=0.5)
    assert by["stable1.25"].verdict == "StableTheta"
    assert by["cyclic6"].kind == "discrete" and by["stable2"].kind == "connected"
