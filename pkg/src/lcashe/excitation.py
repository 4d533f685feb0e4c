"""Noise-excitation indices from lambda sweeps.

The excitation index is the slope of ``log log E_t(lambda)`` against
``log lambda`` for large lambda, where ``E_t(lambda)^2 = E ||u_t||^2``.
Discrete groups give 2, stable processes on R give ``2 alpha / (alpha - 1)``,
and connected groups give at least 4.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import HypothesisViolated, NumericFailure, TooFewPoints
from .groups import haar_weight
from .initial import InitialCondition, inf_abs, norm_sq
from .moments import deterministic_energy, lower_bound_series, solve_volterra, upper_bound_picard
from .montecarlo import MC_EXPONENT_LIMIT, SimConfig, simulate_energy
from .sigma import Bounded, SigmaSpec
from .spectral import (DalangStatus, LevyModel, Stable, dalang_check,
                       pbar0_integral, upsilon)

__all__ = [
    "LambdaSweep", "sweep", "IndexEstimate", "fit_index", "predicted_index",
    "LinearExcitationReport", "linear_excitation_check", "constant_sigma_energy",
    "DichotomyRow", "dichotomy_report", "SOURCES", "VERDICTS",
]

SOURCES = ("volterra", "mc", "lower_bound", "upper_bound")
VERDICTS = ("Discrete2", "ConnectedAtLeast4", "StableTheta", "Sublinear0", "Indeterminate")


@dataclass
class LambdaSweep:
    """``log E||u_t||^2`` against lambda; failed points are stored as NaN."""

    lambdas: np.ndarray
    log_energy_sq: np.ndarray
    source: str
    t: float
    failures: dict = field(default_factory=dict)

    @property
    def log_log_energy(self) -> np.ndarray:
        """``log log E_t = log(log F / 2)``; NaN where ``log F <= 0``."""
        with np.errstate(invalid="ignore", divide="ignore"):
            half = 0.5 * self.log_energy_sq
            return np.where(half > 0, np.log(np.where(half > 0, half, 1.0)), np.nan)


def _point(model, sigma, u0, t, lam, source, eps, sim_cfg):
    if source == "volterra":
        return solve_volterra(model, u0, sigma, lam, [0.0, t]).log_energy_sq[-1]
    if source == "lower_bound":
        return lower_bound_series(model, u0, sigma, lam, t)
    if source == "upper_bound":
        return upper_bound_picard(model, sigma, u0, lam, t, eps)
    if source == "mc":
        if (lam * sigma.lip) ** 2 * t > MC_EXPONENT_LIMIT:
            raise NumericFailure("lambda too large for a second-moment Monte Carlo estimate")
        cfg = sim_cfg or SimConfig(t_end=t)
        est = simulate_energy(model, u0, sigma, lam, cfg)
        return np.log(est.mean)
    raise ValueError(f"unknown sweep source {source!r}; choose from {SOURCES}")


def sweep(model: LevyModel, sigma: SigmaSpec, u0: InitialCondition, t: float, lambdas,
          source: str = "volterra", *, eps: float = 0.5, threads: int = 1,
          sim_cfg: SimConfig | None = None) -> LambdaSweep:
    """Evaluate ``log E||u_t||^2`` over ``lambdas`` from one source.

    Numeric failures at single lambdas become gaps (NaN) recorded in
    ``failures``; they do not abort the sweep.
    """
    if source not in SOURCES:
        raise ValueError(f"unknown sweep source {source!r}; choose from {SOURCES}")
    lambdas = np.asarray(lambdas, dtype=float)
    if np.any(np.diff(lambdas) <= 0) or np.any(lambdas <= 0):
        raise ValueError("lambdas must be positive and strictly increasing")

    def one(lam):
        try:
            return float(_point(model, sigma, u0, t, lam, source, eps, sim_cfg)), None
        except NumericFailure as exc:
            return np.nan, f"{type(exc).__name__}: {exc}"

    if threads == 1:
        res = [one(l) for l in lambdas]
    else:
        with ThreadPoolExecutor(max_workers=threads or None) as ex:
            res = list(ex.map(one, lambdas))
    vals = np.array([r[0] for r in res])
    fails = {float(l): r[1] for l, r in zip(lambdas, res) if r[1] is not None}
    return LambdaSweep(lambdas, vals, source, t, fails)


@dataclass(frozen=True)
class IndexEstimate:
    slope: float
    ci_halfwidth: float
    n_points: int
    verdict: str


def _verdict(slope: float, predicted: float | None) -> str:
    if slope < 1.0:
        return "Sublinear0"
    if abs(slope - 2.0) <= 0.2:
        return "Discrete2"
    if predicted is not None and predicted > 4 and abs(slope - predicted) <= 0.5:
        return "StableTheta"
    if slope >= 3.8:
        return "ConnectedAtLeast4"
    return "Indeterminate"


def fit_index(sw: LambdaSweep, tail_fraction: float = 0.5,
              predicted: float | None = None) -> IndexEstimate:
    """Least-squares slope of ``log log E`` on ``log lambda`` over the top tail.

    ``ci_halfwidth`` is twice the residual-based standard error of the slope.
    """
    if not 0 < tail_fraction <= 1:
        raise ValueError("tail_fraction must lie in (0, 1]")
    n = sw.lambdas.size
    start = n - max(1, int(round(tail_fraction * n)))
    x = np.log(sw.lambdas[start:])
    y = sw.log_log_energy[start:]
    ok = np.isfinite(y)
    if ok.sum() < 5:
        raise TooFewPoints(f"only {int(ok.sum())} usable points in the fitting tail (need 5)")
    r = stats.linregress(x[ok], y[ok])
    half = float(2.0 * r.stderr)
    return IndexEstimate(float(r.slope), half, int(ok.sum()), _verdict(float(r.slope), predicted))


def predicted_index(a, b):
    """Index predicted by theory as ``(value or None, tag)``.

    Accepts ``(model, sigma)`` in either order.
    """
    model, sigma = (a, b) if isinstance(a, LevyModel) else (b, a)
    if not isinstance(model, LevyModel) or not isinstance(sigma, SigmaSpec):
        raise TypeError("predicted_index takes a Levy model and a sigma")
    g = model.group
    if dalang_check(model) is DalangStatus.FAILS:
        return None, "Dalang condition fails"
    if sigma.ell > 0 and sigma.vanishes_at_zero:
        if g.is_discrete:
            return 2.0, "discrete group"
        if isinstance(model, Stable):
            al = model.alpha
            return 2 * al / (al - 1), "stable process on R"
        return None, "general connected bound gives only e >= 4"
    if isinstance(sigma, Bounded) and g.is_compact and sigma.inf > 0:
        return 0.0, "bounded sigma on a compact group"
    return None, "no prediction for this sigma"


# ---------------------------------------------------------------------------
# bounded sigma on compact groups


def constant_sigma_energy(model: LevyModel, u0: InitialCondition, s: float, lam: float,
                          t: float) -> float:
    """Exact ``E||u_t||^2`` for ``sigma = s`` constant (Gaussian solution)."""
    mass = float(np.sum(haar_weight(model.group)))
    det = float(np.exp(deterministic_energy(model, u0, t)))
    return det + (lam * s) ** 2 * mass * pbar0_integral(model, t)


@dataclass(frozen=True)
class LinearExcitationReport:
    lambdas: np.ndarray
    lower_ratio: np.ndarray   # lower bound of E_t(lambda) / lambda
    upper_ratio: np.ndarray   # upper bound of E_t(lambda) / lambda
    exact_ratio: np.ndarray | None
    inf_ratio: float
    sup_ratio: float
    ok: bool


def linear_excitation_check(model: LevyModel, sigma: Bounded, u0: InitialCondition, t: float,
                            lambdas) -> LinearExcitationReport:
    """Two-sided bounds on ``E_t(lambda) / lambda`` for bounded sigma on a compact group.

    ``E^2 <= m(G) (||u0||^2/m(G) + e lambda^2 sup|sigma|^2 Upsilon(1/t))`` and
    ``E^2 >= m(G) (inf|u0|^2 + lambda^2 inf|sigma|^2 int_0^t pbar_s(0) ds)``, with
    ``m(G)`` the total Haar mass (1 except for finite groups with counting measure).
    """
    g = model.group
    if not g.is_compact:
        raise HypothesisViolated("linear excitation needs a compact group")
    if not isinstance(sigma, Bounded) or not sigma.inf > 0:
        raise HypothesisViolated("linear excitation needs a bounded sigma with inf |sigma| > 0")
    lambdas = np.asarray(lambdas, dtype=float)
    mass = float(np.sum(haar_weight(g)))
    ups = upsilon(model, 1.0 / t)
    occ = pbar0_integral(model, t)
    u_sq = norm_sq(u0, g)
    lo_sq = mass * (inf_abs(u0, g) ** 2 + lambdas ** 2 * sigma.inf ** 2 * occ)
    hi_sq = u_sq + mass * np.e * lambdas ** 2 * sigma.sup ** 2 * ups
    lo, hi = np.sqrt(lo_sq) / lambdas, np.sqrt(hi_sq) / lambdas
    exact = None
    ok = bool(np.all(lo <= hi * (1 + 1e-12)))
    if sigma.cap == sigma.floor:
        ex = np.array([constant_sigma_energy(model, u0, sigma.cap, l, t) for l in lambdas])
        exact = np.sqrt(ex) / lambdas
        ok = ok and bool(np.all(lo <= exact * (1 + 1e-9)) and np.all(exact <= hi * (1 + 1e-9)))
    inf_r, sup_r = float(lo.min()), float(hi.max())
    ok = ok and inf_r > 0 and np.isfinite(sup_r)
    return LinearExcitationReport(lambdas, lo, hi, exact, inf_r, sup_r, ok)


# ---------------------------------------------------------------------------
# dichotomy


@dataclass(frozen=True)
class DichotomyRow:
    model_id: str
    kind: str          # "discrete" or "connected"
    source: str
    slope: float
    ci_halfwidth: float
    predicted: float | None
    verdict: str
    passed: bool
    note: str = ""


def dichotomy_report(entries, t: float = 1.0, lambdas=None) -> list:
    """Fit indices and compare with the discrete / connected dichotomy.

    ``entries`` are ``(model_id, model, sigma, u0)`` tuples. Discrete models
    are fitted from the exact energy, connected ones from the lower bound.
    Pass: discrete slope within 0.2 of 2, connected slope at least 3.8.
    """
    rows = []
    for model_id, model, sigma, u0 in entries:
        discrete = model.group.is_discrete
        lams = lambdas if lambdas is not None else (
            np.logspace(1, 3, 21) if discrete else np.logspace(1, 2, 21))
        source = "volterra" if discrete else "lower_bound"
        pred, tag = predicted_index(model, sigma)
        try:
            est = fit_index(sweep(model, sigma, u0, t, lams, source), predicted=pred)
        except (TooFewPoints, NumericFailure, HypothesisViolated) as exc:
            rows.append(DichotomyRow(model_id, "discrete" if discrete else "connected", source,
                                     float("nan"), float("nan"), pred, "Indeterminate", False,
                                     str(exc)))
            continue
        passed = abs(est.slope - 2) <= 0.2 if discrete else est.slope >= 3.8
        rows.append(DichotomyRow(model_id, "discrete" if discrete else "connected", source,
                                 est.slope, est.ci_halfwidth, pred, est.verdict, bool(passed), tag))
    return rows
