"""Monte Carlo simulation of the stochastic heat equation on finite groups.

Time stepping is the stochastic exponential integrator

    u_{k+1} = P_dt (u_k + lambda sigma(u_k) dB_k),

where ``P_dt`` is the exact semigroup built from the heat kernel, so the
linear part carries no discretization error. ``dB_k(x)`` are independent
N(0, dt) (counting Haar measure).

Random numbers come from Philox streams keyed by ``(seed, block)``; paths are
processed in fixed-size blocks, so results do not depend on ``threads``.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import sqrt

import numpy as np

from .errors import ConfigError, NotAutomorphism, NotDiscrete, Unstable
from .groups import FiniteIndexer, Isomorphism, dual, haar_weight
from .initial import InitialCondition, sample
from .sigma import SigmaSpec
from .spectral import (CyclicRates, LevyModel, Stable, TorusBrownian, heat_kernel,
                       jump_rates, psi_values, transport_model)

__all__ = [
    "SimConfig", "McEstimate", "simulate_energy", "simulate_grid", "induced_grid_model",
    "propagator", "local_time_identity", "LocalTimeReport", "invariance_check",
    "InvarianceReport", "block_rng", "MC_EXPONENT_LIMIT",
]

OVERFLOW = 1e300
# second-moment MC is attempted only while lambda^2 Lip^2 t stays below this
MC_EXPONENT_LIMIT = 16.0


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    t_end: float = 1.0
    n_paths: int = 10_000
    seed: int = 20140415
    threads: int = 1
    block: int = 4096

    def __post_init__(self):
        if not (self.dt > 0 and self.t_end > 0 and self.n_paths > 0 and self.block > 0):
            raise ConfigError("dt, t_end, n_paths and block must be positive")
        if self.threads < 0:
            raise ConfigError("threads must be >= 0")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass(frozen=True)
class McEstimate:
    mean: float
    se: float
    n_paths: int
    seed: int
    samples: np.ndarray | None = None

    def as_dict(self) -> dict:
        return {"mean": self.mean, "se": self.se, "n_paths": self.n_paths, "seed": self.seed}


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Independent Philox stream for one block of paths."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def propagator(model: LevyModel, t: float) -> np.ndarray:
    """Matrix of ``P_t`` on a finite group: ``(P_t f)(x) = sum_z p_t(z - x) f(z)``."""
    g = model.group
    if not g.is_finite:
        raise NotDiscrete("simulation needs a finite group")
    p = heat_kernel(model, t)
    ix = FiniteIndexer(g)
    idx = np.arange(ix.size)
    return p[ix.sub(idx[None, :], idx[:, None])]


def check_config(model: LevyModel, cfg: SimConfig) -> None:
    """Explicit-scheme safety rule ``dt * (total jump rate) <= 0.1``."""
    total = float(jump_rates(model).sum())
    if cfg.dt * total > 0.1:
        raise ConfigError(f"dt * total jump rate = {cfg.dt * total:.3g} exceeds 0.1; reduce dt")
    if abs(cfg.n_steps * cfg.dt - cfg.t_end) > 1e-9 * cfg.t_end:
        raise ConfigError("t_end must be a whole number of steps dt")


def _evolve(P, u, sigma, lam, noise):
    """Run the scheme over the increments yielded by ``noise``; returns the final state."""
    PT = P.T
    for dB in noise:
        u = (u + (lam * sigma(u)) * dB) @ PT
        if not np.all(np.abs(u) < OVERFLOW):
            raise Unstable("a path crossed the overflow guard; reduce lambda or t")
    return u


def _blocks(cfg: SimConfig):
    nb = -(-cfg.n_paths // cfg.block)
    return [(b, min(cfg.block, cfg.n_paths - b * cfg.block)) for b in range(nb)]


def _run_blocks(fn, cfg: SimConfig):
    blocks = _blocks(cfg)
    if cfg.threads == 1 or len(blocks) == 1:
        return [fn(b) for b in blocks]
    with ThreadPoolExecutor(max_workers=cfg.threads or None) as ex:
        return list(ex.map(fn, blocks))


def simulate_energy(model: LevyModel, u0: InitialCondition, sigma: SigmaSpec, lam: float,
                    cfg: SimConfig, *, noise_scale: float = 1.0,
                    keep_samples: bool = False) -> McEstimate:
    """Estimate ``E ||u_T||^2`` at ``T = cfg.t_end``.

    ``noise_scale`` multiplies every Brownian increment; with linear sigma,
    scaling the increments by 2 gives bitwise the same paths as doubling lambda.
    """
    check_config(model, cfg)
    g = model.group
    P = propagator(model, cfg.dt)
    v0 = sample(u0, g)
    w = haar_weight(g)
    sd = sqrt(cfg.dt) * noise_scale
    n = g.size

    def run(block):
        b, nb = block
        rng = block_rng(cfg.seed, b)
        noise = (rng.standard_normal((nb, n)) * sd for _ in range(cfg.n_steps))
        u = _evolve(P, np.tile(v0, (nb, 1)), sigma, lam, noise)
        return (u * u) @ w

    e = np.concatenate(_run_blocks(run, cfg))
    se = float(e.std(ddof=1) / sqrt(e.size)) if e.size > 1 else float("nan")
    return McEstimate(float(e.mean()), se, cfg.n_paths, cfg.seed, e if keep_samples else None)


# ---------------------------------------------------------------------------
# continuum models on a grid


def induced_grid_model(model: LevyModel):
    """Nearest-neighbour walk that discretizes a Brownian-type generator.

    Returns ``(cyclic_model, cell_mass)``. The grid equation for white noise
    is the cyclic equation with noise level ``lambda / sqrt(cell_mass)``, and
    the energy is ``cell_mass * sum_x u(x)^2``.
    """
    if isinstance(model, TorusBrownian):
        m = model.group.resolution
        h = 1.0 / m
        kappa = model.kappa
    elif isinstance(model, Stable) and model.alpha == 2.0:
        m = model.group.resolution
        h = model.group.dx
        kappa = 1.0
    else:
        raise NotDiscrete("grid simulation supports TorusBrownian and Stable(alpha=2)")
    if m < 3:
        raise ConfigError("grid needs at least 3 points")
    return CyclicRates.nearest_neighbour(m, kappa / h ** 2), h


def simulate_grid(model: LevyModel, u0: InitialCondition, sigma: SigmaSpec, lam: float,
                  cfg: SimConfig) -> McEstimate:
    """Energy estimate for a torus / real-line model on its sample grid."""
    cyc, cell = induced_grid_model(model)
    top = float(np.max(psi_values(cyc).real))
    if cfg.dt * top > 0.5:
        raise ConfigError(f"dt * max Re Psi = {cfg.dt * top:.3g} exceeds 0.5; reduce dt")
    v0 = InitialCondition.from_values(sample(u0, model.group))
    est = simulate_energy(cyc, v0, sigma, lam / sqrt(cell), cfg)
    return McEstimate(est.mean * cell, est.se * cell, est.n_paths, est.seed)


# ---------------------------------------------------------------------------
# local times


@dataclass(frozen=True)
class LocalTimeReport:
    lhs: float            # E sum_x l(x)^2
    se: float
    rhs: float            # sum m*(chi) / (1 + Re Psi(chi))
    literal_rhs: float  # 2 Upsilon(1)
    ok: bool
    literal_ok: bool


def local_time_identity(model: LevyModel, n_paths: int = 100_000, seed: int = 20140415,
                        block: int = 8192, cutoff: float = 1e-18) -> LocalTimeReport:
    """Check ``E sum_x l(x)^2 = sum_chi m*(chi) / (1 + Re Psi(chi))``.

    ``l(x) = 2 int_0^inf 1{S_s = x} exp(-2s) ds`` is the exponentially killed
    occupation density of the symmetrized walk ``S = X - X'``.
    """
    g = model.group
    if not g.is_discrete or not g.is_finite:
        raise NotDiscrete("local time identity is checked on finite groups")
    ix = FiniteIndexer(g)
    n = ix.size
    r = jump_rates(model)
    rs = r + r[ix.neg(np.arange(n))]
    R = rs.sum()
    w_dual = haar_weight(dual(g))
    re = psi_values(model).real
    rhs = float(np.sum(w_dual / (1 + re)))
    literal = float(2 * np.sum(w_dual / (1 + 2 * re)))
    if R == 0:
        lhs, se = 1.0, 0.0
    else:
        add = ix.add(np.arange(n)[:, None], np.arange(n)[None, :])
        offsets = np.nonzero(rs)[0]
        probs = rs[offsets] / R
        vals = []
        for b in range(-(-n_paths // block)):
            nb = min(block, n_paths - b * block)
            rng = block_rng(seed, b)
            pos = np.full(nb, ix.identity)
            tau = np.zeros(nb)
            ell = np.zeros((nb, n))
            rows = np.arange(nb)
            while True:
                alive = np.exp(-2 * tau) > cutoff
                if not alive.any():
                    break
                hold = rng.exponential(1.0 / R, nb)
                jump = offsets[rng.choice(offsets.size, size=nb, p=probs)]
                new_tau = tau + hold
                inc = np.where(alive, np.exp(-2 * tau) - np.exp(-2 * new_tau), 0.0)
                np.add.at(ell, (rows, pos), inc)
                tau = new_tau
                pos = add[pos, jump]
            vals.append((ell ** 2).sum(axis=1))
        v = np.concatenate(vals)
        lhs, se = float(v.mean()), float(v.std(ddof=1) / sqrt(v.size))
    tol = max(3 * se, 1e-12)
    return LocalTimeReport(lhs, se, rhs, literal, abs(lhs - rhs) <= tol, abs(lhs - literal) <= tol)


# ---------------------------------------------------------------------------
# invariance under automorphisms


@dataclass(frozen=True)
class InvarianceReport:
    max_abs_diff: float
    ok: bool


def invariance_check(model: LevyModel, h: Isomorphism, u0: InitialCondition, sigma: SigmaSpec,
                     lam: float, cfg: SimConfig, tol: float = 1e-10) -> InvarianceReport:
    """Pathwise check that ``v(h x) = u(x)`` solves the equation driven by ``h(X)``.

    Both solutions are computed independently: ``v`` uses the transported
    generator, initial data ``u0 o h^-1`` and the pushed-forward noise.
    """
    g = model.group
    if h.source != g or h.target != g:
        raise NotAutomorphism("the map must be an automorphism of the model's group")
    check_config(model, cfg)
    hx = np.asarray(h.apply(np.arange(g.size)))
    tmodel = transport_model(model, h)
    P = propagator(model, cfg.dt)
    Q = propagator(tmodel, cfg.dt)
    u0v = sample(u0, g)
    v0v = np.empty_like(u0v)
    v0v[hx] = u0v
    rng = block_rng(cfg.seed, 0)
    sd = sqrt(cfg.dt)
    steps = [rng.standard_normal((cfg.n_paths, g.size)) * sd for _ in range(cfg.n_steps)]
    pushed = []
    for dB in steps:
        d2 = np.empty_like(dB)
        d2[:, hx] = dB
        pushed.append(d2)
    u = np.tile(u0v, (cfg.n_paths, 1))
    v = np.tile(v0v, (cfg.n_paths, 1))
    worst = 0.0
    for dB, dB2 in zip(steps, pushed):
        u = _evolve(P, u, sigma, lam, [dB])
        v = _evolve(Q, v, sigma, lam, [dB2])
        worst = max(worst, float(np.max(np.abs(v[:, hx] - u)) / max(1.0, np.max(np.abs(u)))))
    return InvarianceReport(worst, worst <= tol)
