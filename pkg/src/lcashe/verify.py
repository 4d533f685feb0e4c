"""Verification suites: acceptance criteria and engine invariants.

Every check returns a ``CheckResult``; ``run_all`` is what ``shecli
verify-all`` executes and the acceptance tests call the same functions.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import pi, sqrt

import numpy as np

from .catalog import catalog, discrete_catalog
from .excitation import fit_index, linear_excitation_check, predicted_index, sweep
from .groups import (Cyclic, Isomorphism, Lattice, Product, RealLine, Torus, compose, convolve,
                     dual, fourier, haar_weight, inverse, modulus)
from .initial import InitialCondition
from .moments import lemma_sums_floor, lower_bound_series, solve_volterra, upper_bound_picard
from .montecarlo import SimConfig, invariance_check, local_time_identity, simulate_energy
from .sigma import Bounded, Linear
from .spectral import (CyclicRates, ProductIndependent, Stable, TorusBrownian, heat_kernel,
                       projection_compare, tauberian_check, upsilon, upsilon_time_domain)

__all__ = ["CheckResult", "CRITERIA", "INVARIANTS", "run_all", "DEFAULT_SEED"]

DEFAULT_SEED = 20140415
U0 = InitialCondition()
LIN = Linear(1.0)
DISCRETE_SWEEP = ("trivial", "cyclic2", "cyclic6_nn")


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str
    data: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.ok else 'FAIL'}] {self.name}: {self.detail}"


def _discrete_sweep_models():
    cat = catalog()
    return {k: cat[k] for k in DISCRETE_SWEEP}


# ---------------------------------------------------------------------------
# acceptance criteria


def c01_trivial_exact(**_) -> CheckResult:
    m = CyclicRates(())
    errs = {lam: abs(solve_volterra(m, U0, LIN, lam, [0.0, 1.0]).log_energy_sq[-1] - lam ** 2)
            for lam in (0.5, 1.0, 5.0, 20.0)}
    worst = max(errs.values())
    return CheckResult("01 trivial-group exactness", worst <= 1e-6,
                       f"max |log F - lambda^2 t| = {worst:.2e} (tol 1e-6)", {"errors": errs})


def c02_discrete_index(**_) -> CheckResult:
    lams = np.logspace(1, 3, 21)
    slopes = {k: fit_index(sweep(m, LIN, U0, 1.0, lams, "volterra")).slope
              for k, m in _discrete_sweep_models().items()}
    ok = all(1.8 <= s <= 2.2 for s in slopes.values())
    det = ", ".join(f"{k}={s:.4f}" for k, s in slopes.items())
    return CheckResult("02 discrete index = 2 (Volterra)", ok, f"slopes {det} in [1.8, 2.2]", slopes)


def c03_discrete_upper(**_) -> CheckResult:
    lams = np.logspace(1, 3, 21)
    slopes = {k: fit_index(sweep(m, LIN, U0, 1.0, lams, "upper_bound")).slope
              for k, m in _discrete_sweep_models().items()}
    ok = all(s <= 2.05 for s in slopes.values())
    det = ", ".join(f"{k}={s:.4f}" for k, s in slopes.items())
    return CheckResult("03 discrete upper-bound slope", ok, f"slopes {det} <= 2.05", slopes)


def c04_connected_lower(**_) -> CheckResult:
    lams = np.logspace(1, 2, 21)
    s = fit_index(sweep(Stable(2.0), LIN, U0, 1.0, lams, "lower_bound")).slope
    return CheckResult("04 connected lower bound >= 4", 3.8 <= s <= 4.2,
                       f"Stable(2) lower-bound slope {s:.4f} in [3.8, 4.2]", {"slope": s})


def c05_stable_family(**_) -> CheckResult:
    lams = np.logspace(1, 2, 21)
    out, ok = {}, True
    for al in (1.25, 1.5, 2.0):
        target = 2 * al / (al - 1)
        m = Stable(al)
        lo = fit_index(sweep(m, LIN, U0, 1.0, lams, "lower_bound")).slope
        up = fit_index(sweep(m, LIN, U0, 1.0, lams, "upper_bound")).slope
        out[al] = (lo, up, target)
        ok &= abs(lo - target) <= 0.5 and abs(up - target) <= 0.3
    det = "; ".join(f"alpha={a}: lower {v[0]:.3f}, upper {v[1]:.3f} vs {v[2]:g}" for a, v in out.items())
    return CheckResult("05 stable index family 2a/(a-1)", ok, det, out)


def c06_tauberian(**_) -> CheckResult:
    bad = []
    n = 0
    for name, m in catalog().items():
        for t in (0.1, 1.0, 10.0):
            r = tauberian_check(m, t, slack=1e-6)
            n += 1
            if not r.ok:
                bad.append((name, t))
    return CheckResult("06 Tauberian sandwich", not bad,
                       f"{n - len(bad)}/{n} (model, t) pairs hold with 1e-6 slack", {"failures": bad})


def c07_projection(**_) -> CheckResult:
    betas = np.logspace(-2, 3, 20)
    finite = ProductIndependent((CyclicRates((1.0,)), CyclicRates((1.0, 1.0))))
    mixed = ProductIndependent((Stable(2.0), TorusBrownian(1.0, Torus(32))))
    r1 = projection_compare(finite, betas, slack=1e-12)
    r2 = projection_compare(mixed, betas, slack=1e-8)
    r3 = projection_compare(mixed, betas, slack=1e-8, dual_window=True)
    ok = r1.ok and r2.ok and r3.ok
    det = (f"Cyclic(2)xCyclic(3): {r1.ok}; Stable(2)xTorus: {r2.ok} "
           f"(full Upsilon finite: {r2.full_finite}), windowed torus dual: {r3.ok}")
    return CheckResult("07 projection inequality", ok, det)


def c08_mc_vs_volterra(n_paths=100_000, seed=DEFAULT_SEED, **_) -> CheckResult:
    m = CyclicRates((1.0,))
    exact = float(np.exp(solve_volterra(m, U0, LIN, 1.0, [0.0, 1.0]).log_energy_sq[-1]))
    est = simulate_energy(m, U0, LIN, 1.0, SimConfig(dt=1e-3, t_end=1.0, n_paths=n_paths, seed=seed))
    z = (est.mean - exact) / est.se
    return CheckResult("08 MC vs Volterra", abs(z) <= 3,
                       f"MC {est.mean:.5f} +/- {est.se:.5f} vs exact {exact:.5f} ({z:+.2f} SE)",
                       {"mc": est.as_dict(), "exact": exact})


def c09_local_time(n_paths=100_000, seed=DEFAULT_SEED, **_) -> CheckResult:
    rs = {"trivial": local_time_identity(CyclicRates(()), n_paths, seed),
          "cyclic2": local_time_identity(CyclicRates((1.0,)), n_paths, seed),
          "cyclic3": local_time_identity(CyclicRates((1.0, 1.0)), n_paths, seed)}
    triv = rs["trivial"]
    ok = abs(triv.lhs - 1) <= 1e-12 and abs(triv.rhs - 1) <= 1e-12 and all(r.ok for r in rs.values())
    parts = [f"{k}: lhs {r.lhs:.5f}+/-{r.se:.5f}, rhs {r.rhs:.5f}, literal 2*Upsilon(1) = {r.literal_rhs:.5f}"
             f"{' (discrepant)' if not r.literal_ok else ''}" for k, r in rs.items()]
    return CheckResult("09 local-time identity", ok, "; ".join(parts), rs)


def c10_invariance(seed=DEFAULT_SEED, **_) -> CheckResult:
    m = CyclicRates((1.0, 0.0, 0.0, 1.0))
    h = Isomorphism(Cyclic(5), Cyclic(5), "multiplier", 2)
    u0 = InitialCondition.from_values([1.0, 2.0, 0.5, -1.0, 3.0])
    r = invariance_check(m, h, u0, Linear(1.0), 1.0, SimConfig(dt=1e-2, t_end=1.0, n_paths=100, seed=seed))
    return CheckResult("10 group invariance", r.ok, f"max |v(hx) - u(x)| = {r.max_abs_diff:.2e} (tol 1e-10)")


def c11_sandwich(**_) -> CheckResult:
    lams = np.concatenate([[0.25, 0.5, 1.0, 2.0, 5.0], np.logspace(1, 3, 21)])
    worst = np.inf
    for name, m in discrete_catalog().items():
        for lam in lams:
            f = solve_volterra(m, U0, LIN, lam, [0.0, 1.0]).log_energy_sq[-1]
            lo = lower_bound_series(m, U0, LIN, lam, 1.0)
            hi = upper_bound_picard(m, LIN, U0, lam, 1.0)
            worst = min(worst, f - lo, hi - f)
    return CheckResult("11 sandwich lower <= exact <= upper", worst >= -1e-6,
                       f"smallest log margin {worst:.3e} (slack 1e-6)")


def c12_lemma_sums(**_) -> CheckResult:
    bad = [(a, r, b) for a in (0, 1, 2) for r in (0.5, 1.0, 2.0) for b in (1.0, 10.0, 100.0)
           if not lemma_sums_floor(a, r, b).ok]
    return CheckResult("12 series floor c exp((rho/e) b^(1/rho))", not bad,
                       f"{27 - len(bad)}/27 grid points hold", {"failures": bad})


def c13_linear_excitation(**_) -> CheckResult:
    lams = np.logspace(0, 3, 13)
    r0 = linear_excitation_check(CyclicRates(()), Bounded(1.0, 1.0), InitialCondition("constant"), 1.0, lams)
    err = float(np.max(np.abs(r0.exact_ratio ** 2 * lams ** 2 - (1 + lams ** 2)) / (1 + lams ** 2)))
    r1 = linear_excitation_check(CyclicRates((1.0,)), Bounded(1.0, 0.5), InitialCondition("constant"), 1.0, lams)
    r2 = linear_excitation_check(TorusBrownian(1.0), Bounded(1.0, 1.0), InitialCondition("constant"), 1.0, lams)
    ok = err <= 1e-9 and r0.ok and r1.ok and r2.ok
    return CheckResult("13 linear excitation", ok,
                       f"trivial rel. error {err:.1e}; Cyclic(2) ratios in [{r1.inf_ratio:.3f}, {r1.sup_ratio:.3f}]; "
                       f"Torus ratios in [{r2.inf_ratio:.3f}, {r2.sup_ratio:.3f}]")


def c14_gaussian_kernel(**_) -> CheckResult:
    g = RealLine(10.0, 2000)
    m = Stable(2.0, g)
    x = -g.halfwidth + g.dx * np.arange(g.resolution)
    worst = 0.0
    for t in (0.25, 1.0):
        p = heat_kernel(m, t)
        for x0 in (0.0, 1.0):
            i = int(np.argmin(np.abs(x - x0)))
            exact = np.exp(-x[i] ** 2 / (4 * t)) / sqrt(4 * pi * t)
            worst = max(worst, abs(p[i] - exact))
    return CheckResult("14 Gaussian kernel", worst <= 1e-8, f"max error {worst:.2e} (tol 1e-8)")


CRITERIA = [c01_trivial_exact, c02_discrete_index, c03_discrete_upper, c04_connected_lower,
            c05_stable_family, c06_tauberian, c07_projection, c08_mc_vs_volterra, c09_local_time,
            c10_invariance, c11_sandwich, c12_lemma_sums, c13_linear_excitation, c14_gaussian_kernel]


# ---------------------------------------------------------------------------
# engine invariants


def inv_plancherel(**_) -> CheckResult:
    rng = np.random.default_rng(0)
    worst = 0.0
    for g in (Cyclic(7), Product((Cyclic(2), Cyclic(3))), Torus(16), RealLine(5.0, 64)):
        f = rng.standard_normal(g.size) + 1j * rng.standard_normal(g.size)
        lhs = np.sum(np.abs(f) ** 2 * haar_weight(g))
        rhs = np.sum(np.abs(fourier(g, f)) ** 2 * haar_weight(dual(g)))
        worst = max(worst, abs(lhs - rhs) / lhs)
    return CheckResult("Plancherel on sampled groups", worst <= 1e-10, f"max rel. error {worst:.1e}")


def inv_kernel(**_) -> CheckResult:
    worst_sum, worst_ck = 0.0, 0.0
    for name, m in discrete_catalog().items():
        g = m.group
        p1, p2, p3 = heat_kernel(m, 0.3), heat_kernel(m, 0.5), heat_kernel(m, 0.8)
        worst_sum = max(worst_sum, abs(p1.sum() - 1))
        worst_ck = max(worst_ck, float(np.max(np.abs(convolve(g, p1, p2) - p3))))
    ok = worst_sum <= 1e-10 and worst_ck <= 1e-10
    return CheckResult("heat kernels: mass 1 and Chapman-Kolmogorov", ok,
                       f"mass error {worst_sum:.1e}, semigroup error {worst_ck:.1e}")


def inv_upsilon_routes(**_) -> CheckResult:
    worst = 0.0
    for name, m in catalog().items():
        for b in (0.5, 2.0, 20.0):
            u1, u2 = upsilon(m, b), upsilon_time_domain(m, b)
            worst = max(worst, abs(u1 - u2) / u1)
    return CheckResult("Upsilon: dual sum vs time-domain transform", worst <= 1e-6,
                       f"max rel. difference {worst:.1e}")


def inv_modulus(**_) -> CheckResult:
    h = Isomorphism(RealLine(5.0, 100), RealLine(10.0, 100), "scaling", 2.0)
    mu = modulus(h)
    mass_ratio = haar_weight(h.target).sum() / haar_weight(h.source).sum()
    ok = abs(mu - 2) < 1e-15 and abs(mass_ratio - mu) < 1e-12
    return CheckResult("modulus of x -> 2x on R", ok, f"mu = {mu}, window mass ratio {mass_ratio}")


def inv_haar_and_duality(**_) -> CheckResult:
    bad = []
    for g in (Cyclic(4), Torus(16), Lattice(2, 0.5, 3), RealLine(4.0, 32),
              Product((Cyclic(2), Torus(8)))):
        w = haar_weight(g)
        if g.is_discrete and not np.all(w == 1.0):
            bad.append(f"{g.kind}: discrete weights not 1")
        # compact factors carry probability Haar measure, finite ones counting measure
        mass = np.prod([f.size for f in g.factors_() if f.is_finite] or [1])
        if g.is_compact and abs(w.sum() - mass) > 1e-12 * mass:
            bad.append(f"{g.kind}: compact mass {w.sum()} (expected {mass})")
        d = dual(g)
        if (d.is_discrete, d.is_compact) != (g.is_compact, g.is_discrete) or dual(d) != g:
            bad.append(f"{g.kind}: dual does not flip")
    return CheckResult("Haar normalization and dual flip", not bad, "; ".join(bad) or "all groups")


def inv_modulus_algebra(**_) -> CheckResult:
    a, b, c = RealLine(1.0, 50), RealLine(3.0, 50), RealLine(1.5, 50)
    f, g = Isomorphism(a, b, "scaling", 3.0), Isomorphism(b, c, "scaling", 0.5)
    e1 = abs(modulus(compose(g, f)) - modulus(g) * modulus(f))
    e2 = abs(modulus(inverse(f)) * modulus(f) - 1)
    h = Isomorphism(Cyclic(7), Cyclic(7), "multiplier", 3)
    e3 = abs(modulus(compose(h, inverse(h))) - 1)
    worst = max(e1, e2, e3)
    return CheckResult("modulus multiplicative under composition and inversion", worst <= 1e-12,
                       f"max error {worst:.1e}")


def inv_kernel_positive(**_) -> CheckResult:
    worst = 0.0
    for name, m in catalog().items():
        for t in (0.05, 1.0):
            worst = min(worst, float(heat_kernel(m, t).min()))
    return CheckResult("heat kernels nonnegative", worst >= -1e-10, f"min value {worst:.1e}")


def inv_upsilon_small(**_) -> CheckResult:
    worst = -np.inf
    for name, m in discrete_catalog().items():
        b = np.logspace(-3, 3, 25)
        worst = max(worst, float(np.max(upsilon(m, b) * b)))
    return CheckResult("beta * Upsilon(beta) <= 1 on discrete models", worst <= 1 + 1e-12,
                       f"max beta*Upsilon = {worst:.6f}")


def inv_lambda_monotone(**_) -> CheckResult:
    bad = []
    for name, m in discrete_catalog().items():
        vals = [solve_volterra(m, U0, LIN, lam, [0.0, 1.0]).log_energy_sq[-1]
                for lam in (0.5, 1.0, 2.0, 4.0)]
        if np.any(np.diff(vals) < 0):
            bad.append(name)
    return CheckResult("log F nondecreasing in lambda", not bad, ", ".join(bad) or "all discrete models")


def inv_index_consistency(**_) -> CheckResult:
    lams = np.logspace(1, 3, 21)
    bad = []
    for name, m in _discrete_sweep_models().items():
        s = {src: fit_index(sweep(m, LIN, U0, 1.0, lams, src)).slope
             for src in ("lower_bound", "volterra", "upper_bound")}
        if not s["lower_bound"] <= s["volterra"] + 0.1 <= s["upper_bound"] + 0.2:
            bad.append(f"{name} {s}")
    lo = [fit_index(sweep(Stable(a), LIN, U0, 1.0, np.logspace(1, 2, 21), "lower_bound")).slope
          for a in (1.25, 1.5, 2.0)]
    mono = bool(np.all(np.diff(lo) < 0))
    if not mono:
        bad.append(f"stable slopes not decreasing: {lo}")
    return CheckResult("index sandwich and stable monotonicity", not bad, "; ".join(bad) or
                       "lower <= volterra + 0.1 <= upper + 0.2; stable slopes "
                       + ", ".join(f"{v:.3f}" for v in lo))


def inv_predicted_index(**_) -> CheckResult:
    bad = []
    for name, m in catalog().items():
        for sg in (LIN, Bounded(1.0, 0.5)):
            if predicted_index(m, sg) != predicted_index(sg, m):
                bad.append(name)
    return CheckResult("predicted_index order invariant and total", not bad, ", ".join(bad) or "ok")


def inv_mc_determinism(seed=DEFAULT_SEED, **_) -> CheckResult:
    m = CyclicRates((1.0, 1.0))
    cfg = SimConfig(dt=1e-2, t_end=0.5, n_paths=600, seed=seed, block=128)
    a = simulate_energy(m, U0, LIN, 0.7, cfg, keep_samples=True)
    b = simulate_energy(m, U0, LIN, 0.7, replace(cfg, threads=3), keep_samples=True)
    c = simulate_energy(m, U0, LIN, 1.4, cfg, keep_samples=True)
    d = simulate_energy(m, U0, LIN, 0.7, cfg, noise_scale=2.0, keep_samples=True)
    ok = np.array_equal(a.samples, b.samples) and np.array_equal(c.samples, d.samples)
    return CheckResult("MC determinism and noise scaling", ok,
                       "bit-identical across thread counts; doubled noise == doubled lambda")


INVARIANTS = [inv_plancherel, inv_haar_and_duality, inv_modulus, inv_modulus_algebra, inv_kernel,
              inv_kernel_positive, inv_upsilon_routes, inv_upsilon_small, inv_lambda_monotone,
              inv_index_consistency, inv_predicted_index, inv_mc_determinism]


def run_all(n_paths: int = 100_000, seed: int = DEFAULT_SEED) -> list:
    out = []
    for fn in INVARIANTS + CRITERIA:
        try:
            out.append(fn(n_paths=n_paths, seed=seed))
        except Exception as exc:  # a crashing suite is a failing suite
            out.append(CheckResult(fn.__name__, False, f"{type(exc).__name__}: {exc}"))
    return out
