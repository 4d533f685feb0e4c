"""Levy generators on groups and their spectral functionals.

Everything here is driven by the characteristic exponent ``Psi`` on the dual:
heat kernels, the return profile ``pbar_t(0) = int exp(-2t Re Psi) dm*`` and
its resolvent ``Upsilon(beta) = int dm* / (beta + 2 Re Psi)``.

Models
------
``Zero``, ``CyclicRates``, ``LatticeWalk``, ``Stable``, ``TorusBrownian`` and
``ProductIndependent`` (independent components on a product group).

Internally a model splits into a *finite block* (all finite-dual factors,
flattened) and at most a few *continuous pieces* (torus or real-line factors)
that are handled in closed form.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache, reduce
from math import gamma, pi, sin, sqrt

import numpy as np
from scipy import integrate

from .errors import HypothesisViolated, NonFinite, NotDiscrete, OutOfRange, ResolutionError
from .groups import (Cyclic, FiniteIndexer, GroupSpec, Isomorphism, Lattice, Product,
                     RealLine, Torus, dual, dual_points, fourier,
                     haar_weight, inverse_fourier, points)
from .initial import InitialCondition, resolve_factors, sample

__all__ = [
    "LevyModel", "Zero", "CyclicRates", "LatticeWalk", "Stable", "TorusBrownian",
    "ProductIndependent", "DalangStatus", "psi", "psi_values", "heat_kernel",
    "stable_density", "pbar0", "pbar0_integral", "upsilon", "upsilon_time_domain",
    "upsilon_inverse", "upsilon_profile", "UpsilonProfile", "dalang_check",
    "tauberian_check", "TauberianReport", "projection_compare", "ProjectionReport",
    "jump_rates", "transport_model", "modes", "Modes", "spectral_masses",
]

BETA_MIN = 1e-12
BETA_MAX = 1e300


class LevyModel:
    """Base class; subclasses are frozen dataclasses exposing ``group``."""

    kind = "Levy"

    @property
    def components(self) -> tuple:
        return (self,)


@dataclass(frozen=True)
class Zero(LevyModel):
    """The constant process (Psi = 0) on any group."""

    group: GroupSpec = Cyclic(1)
    kind = "Zero"


@dataclass(frozen=True)
class CyclicRates(LevyModel):
    """Walk on Z/n jumping by ``+j`` at rate ``rates[j-1]``, j = 1..n-1."""

    rates: tuple = ()
    kind = "CyclicRates"

    def __post_init__(self):
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        if any(r < 0 for r in self.rates):
            raise ValueError("jump rates must be nonnegative")

    @property
    def group(self):
        return Cyclic(len(self.rates) + 1)

    @classmethod
    def nearest_neighbour(cls, n: int, kappa: float = 1.0) -> "CyclicRates":
        """Symmetric walk with rate kappa to each neighbour."""
        r = np.zeros(max(n - 1, 0))
        if n == 2:
            r[0] = kappa
        elif n > 2:
            r[0] += kappa
            r[-1] += kappa
        return cls(tuple(r))


@dataclass(frozen=True)
class LatticeWalk(LevyModel):
    """Compound Poisson walk on a periodized lattice.

    ``jumps`` is a tuple of ``(offset, probability)`` pairs with integer offsets
    in lattice units; the default is the symmetric nearest-neighbour law.
    """

    group: Lattice = Lattice(1)
    rate: float = 1.0
    jumps: tuple | None = None
    kind = "LatticeWalk"

    def __post_init__(self):
        if self.jumps is None:
            d = self.group.d
            js = []
            for i in range(d):
                for s in (1, -1):
                    e = [0] * d
                    e[i] = s
                    js.append((tuple(e), 1.0 / (2 * d)))
            object.__setattr__(self, "jumps", tuple(js))
        else:
            object.__setattr__(self, "jumps", tuple((tuple(int(c) for c in y), float(p))
                                                    for y, p in self.jumps))
        if self.rate < 0 or any(p < 0 for _, p in self.jumps):
            raise ValueError("rates and jump probabilities must be nonnegative")


@dataclass(frozen=True)
class Stable(LevyModel):
    """Symmetric alpha-stable process on R, Psi(xi) = |xi|^alpha."""

    alpha: float = 2.0
    group: RealLine = RealLine()
    kind = "Stable"

    def __post_init__(self):
        if not 0 < self.alpha <= 2:
            raise ValueError("stable index must lie in (0, 2]")


@dataclass(frozen=True)
class TorusBrownian(LevyModel):
    """Brownian motion on R/Z with Psi(n) = kappa (2 pi n)^2."""

    kappa: float = 1.0
    group: Torus = Torus()
    kind = "TorusBrownian"


@dataclass(frozen=True)
class ProductIndependent(LevyModel):
    """Independent components, one per factor of the product group."""

    parts: tuple = ()
    kind = "ProductIndependent"

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if not self.parts:
            raise ValueError("ProductIndependent needs at least one component")
        if any(isinstance(p, ProductIndependent) for p in self.parts):
            raise ValueError("nest products by listing all components in one product")

    @property
    def group(self):
        return Product(tuple(p.group for p in self.parts))

    @property
    def components(self):
        return self.parts


class DalangStatus(enum.Enum):
    HOLDS_BY_DISCRETENESS = "HoldsByDiscreteness"
    HOLDS = "Holds"
    FAILS = "Fails"


# ---------------------------------------------------------------------------
# exponents


def _component_psi(m: LevyModel) -> np.ndarray:
    """Psi on the canonical dual sample of a single component."""
    g = m.group
    if isinstance(m, Zero):
        return np.zeros(g.size, dtype=complex)
    if isinstance(m, CyclicRates):
        n = g.n
        k = np.arange(n)
        j = np.arange(1, n)
        kap = np.asarray(m.rates)
        if n == 1:
            return np.zeros(1, dtype=complex)
        return (kap[None, :] * (1 - np.exp(2j * pi * np.outer(k, j) / n))).sum(axis=1)
    if isinstance(m, LatticeWalk):
        ix = FiniteIndexer(g)
        k = ix.coords(np.arange(g.size))
        out = np.zeros(g.size, dtype=complex)
        for y, p in m.jumps:
            out += m.rate * p * (1 - np.exp(2j * pi * (k @ np.asarray(y)) / g.side))
        return out
    if isinstance(m, Stable):
        return np.abs(dual_points(g)).astype(complex) ** m.alpha
    if isinstance(m, TorusBrownian):
        return (m.kappa * (2 * pi * dual_points(g)) ** 2).astype(complex)
    raise TypeError(m)


def psi_values(model: LevyModel) -> np.ndarray:
    """Psi over the canonical (truncated) dual sample of ``model.group``."""
    parts = [_component_psi(c) for c in model.components]
    return reduce(np.add.outer, parts).ravel()


def psi(model: LevyModel, chi):
    """Characteristic exponent at dual index ``chi``."""
    return psi_values(model)[chi]


# ---------------------------------------------------------------------------
# spectral decomposition


@dataclass(frozen=True)
class _Spectrum:
    finite_psi: np.ndarray      # Psi over the flattened finite block
    finite_w: np.ndarray        # dual weights of the finite block
    cont: tuple                 # ('torus', kappa, group) | ('stable', alpha, group) | ('flat', group)
    finite_idx: tuple           # component positions of the finite block


def _is_finite_component(c: LevyModel) -> bool:
    return c.group.is_finite


@lru_cache(maxsize=256)
def _spectrum(model: LevyModel) -> _Spectrum:
    fin_psi, fin_w, cont, idx = [], [], [], []
    for i, c in enumerate(model.components):
        if _is_finite_component(c):
            fin_psi.append(_component_psi(c))
            fin_w.append(haar_weight(dual(c.group)))
            idx.append(i)
        elif isinstance(c, TorusBrownian) and c.kappa > 0:
            cont.append(("torus", float(c.kappa), c.group))
        elif isinstance(c, Stable):
            cont.append(("stable", float(c.alpha), c.group))
        else:
            cont.append(("flat", c.group))
    if fin_psi:
        p = reduce(np.add.outer, fin_psi).ravel()
        w = reduce(np.multiply.outer, fin_w).ravel()
    else:
        p = np.zeros(1, dtype=complex)
        w = np.ones(1)
    return _Spectrum(p, w, tuple(cont), tuple(idx))


def dalang_check(model: LevyModel) -> DalangStatus:
    """Whether ``Upsilon(beta) < inf``; discrete groups hold without quadrature."""
    if model.group.is_discrete:
        return DalangStatus.HOLDS_BY_DISCRETENESS
    try:
        v = upsilon(model, 1.0)
    except NonFinite:
        return DalangStatus.FAILS
    return DalangStatus.HOLDS if np.isfinite(v) else DalangStatus.FAILS


def _require_dalang(model):
    if dalang_check(model) is DalangStatus.FAILS:
        raise NonFinite(f"Dalang condition fails for {_describe(model)}")


def _describe(model) -> str:
    if isinstance(model, Stable):
        return f"Stable(alpha={model.alpha})"
    if isinstance(model, ProductIndependent):
        return "Product(" + ", ".join(_describe(p) for p in model.parts) + ")"
    return model.kind


# ---------------------------------------------------------------------------
# heat kernels


def _torus_cutoff(kappa: float, t: float) -> int:
    # exp(-t kappa (2 pi N)^2) < 1e-17
    return int(np.ceil(sqrt(40.0 / (t * kappa)) / (2 * pi))) + 1


def stable_density(alpha: float, t: float, x) -> np.ndarray:
    """Transition density of the symmetric alpha-stable process by Fourier inversion."""
    x = np.abs(np.atleast_1d(np.asarray(x, dtype=float)))
    s = t ** (1.0 / alpha)
    y = x / s
    out = np.empty_like(y)
    uniq, inv = np.unique(np.round(y, 14), return_inverse=True)
    vals = np.empty_like(uniq)
    for i, yy in enumerate(uniq):
        if yy == 0:
            vals[i] = gamma(1 + 1 / alpha) / pi
        else:
            vals[i] = integrate.quad(lambda u: np.exp(-u ** alpha), 0, np.inf, weight="cos",
                                     wvar=yy, limlst=200)[0] / pi
    out = vals[inv] / s
    return out


def _component_kernel(c: LevyModel, t: float) -> np.ndarray:
    g = c.group
    if _is_finite_component(c):
        p = inverse_fourier(g, np.exp(-t * _component_psi(c)))
        return p.real
    if isinstance(c, TorusBrownian):
        N = max(_torus_cutoff(c.kappa, t), g.resolution // 2)
        n = np.arange(1, N + 1)
        x = points(g)
        return 1 + 2 * (np.cos(2 * pi * np.outer(x, n)) * np.exp(-t * c.kappa * (2 * pi * n) ** 2)).sum(axis=1)
    if isinstance(c, Stable):
        return stable_density(c.alpha, t, points(g))
    raise NonFinite(f"{c.kind} on {g.kind} has no density")


def heat_kernel(model: LevyModel, t: float, tol: float = 1e-10) -> np.ndarray:
    """Density ``p_t`` of ``X_t`` w.r.t. Haar measure on the group sample.

    Raises ``ResolutionError`` when the computed kernel is negative beyond
    ``tol`` (relative to its maximum); tiny negatives are clamped to zero.
    """
    if not t > 0:
        raise ValueError("heat_kernel needs t > 0")
    _require_dalang(model)
    parts = [_component_kernel(c, t) for c in model.components]
    p = reduce(np.multiply.outer, parts).ravel()
    lo = p.min()
    if lo < -tol * max(1.0, p.max()):
        raise ResolutionError(f"heat kernel negative ({lo:.3e}); refine the resolution")
    return np.maximum(p, 0.0)


# ---------------------------------------------------------------------------
# return profile and resolvent


def _stable_pbar0(alpha, t):
    return gamma(1 + 1 / alpha) * (2 * t) ** (-1 / alpha) / pi


def _torus_pbar0(kappa, t):
    n = np.arange(1, _torus_cutoff(kappa, 2 * t) + 1)
    return 1 + 2 * np.exp(-2 * t * kappa * (2 * pi * n) ** 2).sum()


def pbar0(model: LevyModel, t: float) -> float:
    """``pbar_t(0) = ||p_t||^2 = int exp(-2 t Re Psi) dm*``."""
    if not t > 0:
        raise ValueError("pbar0 needs t > 0")
    _require_dalang(model)
    return _pbar0(model, t)


def _pbar0(model, t):
    sp = _spectrum(model)
    out = float(np.sum(sp.finite_w * np.exp(-2 * t * sp.finite_psi.real)))
    for c in sp.cont:
        out *= _torus_pbar0(c[1], t) if c[0] == "torus" else _stable_pbar0(c[1], t)
    return out


def _singularity(model) -> float:
    """Exponent nu with pbar_t(0) ~ t^-nu as t -> 0."""
    nu = 0.0
    for c in _spectrum(model).cont:
        nu += 0.5 if c[0] == "torus" else 1.0 / c[1]
    return nu


def _time_integrand(model, f):
    """Integrand in ``s`` for ``int_0^inf f(t) pbar_t(0) dt`` after ``t = s^k``.

    ``k = 1/(1 - nu)`` cancels the small-time singularity ``t^-nu``.
    """
    nu = _singularity(model)
    if nu >= 1:
        raise NonFinite("return profile is not integrable at 0")
    k = 1.0 / (1.0 - nu)
    c0 = _small_time_const(model)

    def g(s):
        if s <= 0:
            return f(0.0) * c0 * k
        t = s ** k
        return f(t) * _pbar0(model, t) * k * s ** (k - 1)

    return g, k


def _small_time_const(model) -> float:
    """``lim t^nu pbar_t(0)``."""
    sp = _spectrum(model)
    c = float(np.sum(sp.finite_w))
    for p in sp.cont:
        if p[0] == "torus":
            c *= 1.0 / sqrt(8 * pi * p[1])
        else:
            c *= gamma(1 + 1 / p[1]) * 2 ** (-1 / p[1]) / pi
    return c


def pbar0_integral(model: LevyModel, t: float) -> float:
    """``int_0^t pbar_s(0) ds`` by adaptive quadrature."""
    _require_dalang(model)
    g, k = _time_integrand(model, lambda s: 1.0)
    val, _ = integrate.quad(g, 0.0, t ** (1.0 / k), epsabs=0, epsrel=1e-12, limit=200)
    return val


def _finite_modes(sp: _Spectrum):
    return 2 * sp.finite_psi.real, sp.finite_w


def _cont_upsilon(cont: tuple, B: np.ndarray) -> np.ndarray:
    """Resolvent of the continuous pieces at shifted arguments ``B``."""
    if not cont:
        return 1.0 / B
    if len(cont) > 1:
        raise NonFinite("Dalang condition fails: more than one continuous factor")
    c = cont[0]
    if c[0] == "flat":
        raise NonFinite(f"Dalang condition fails: constant process on {c[1].kind}")
    if c[0] == "torus":
        cc = 8 * c[1] * pi ** 2
        z = pi * np.sqrt(B / cc)
        # sum_n 1/(B + cc n^2) = pi/sqrt(cc B) coth(pi sqrt(B/cc))
        coth = np.where(z > 20, 1.0, 1.0 / np.tanh(np.minimum(z, 20)))
        return pi / np.sqrt(cc * B) * coth
    a = c[1]
    if a <= 1:
        raise NonFinite(f"Dalang condition fails: Stable(alpha={a}) needs alpha > 1")
    return (B / 2) ** (1 / a) / (B * a * sin(pi / a))


def upsilon(model: LevyModel, beta, dual_window: bool = False):
    """``Upsilon(beta) = int m*(dchi) / (beta + 2 Re Psi(chi))``.

    With ``dual_window`` the torus factors are summed over their truncated
    dual sample instead of all of Z.
    """
    b = np.asarray(beta, dtype=float)
    if np.any(~(b > 0)):
        raise ValueError("beta must be positive")
    sp = _spectrum(model)
    a, w = _finite_modes(sp)
    cont = sp.cont
    if dual_window:
        for c in [c for c in cont if c[0] == "torus"]:
            n = dual_points(c[2])
            a = np.add.outer(a, 2 * c[1] * (2 * pi * n) ** 2).ravel()
            w = np.multiply.outer(w, np.ones(n.size)).ravel()
        cont = tuple(c for c in cont if c[0] != "torus")
    B = b[..., None] + a
    out = (w * _cont_upsilon(cont, B)).sum(axis=-1)
    if np.any(~np.isfinite(out)):
        raise NonFinite("Upsilon is not finite")
    return float(out) if out.ndim == 0 else out


def upsilon_time_domain(model: LevyModel, beta: float) -> float:
    """``int_0^inf exp(-beta t) pbar_t(0) dt`` by quadrature (independent route)."""
    _require_dalang(model)
    g, _ = _time_integrand(model, lambda t: np.exp(-beta * t))
    val, _ = integrate.quad(g, 0.0, np.inf, epsabs=0, epsrel=1e-11, limit=400)
    return val


def upsilon_inverse(model: LevyModel, y: float, lo: float = BETA_MIN, hi: float = BETA_MAX,
                    rtol: float = 1e-13) -> float:
    """Solve ``Upsilon(beta) = y`` by bisection in ``log beta``."""
    if not y > 0:
        raise ValueError("Upsilon inverse needs y > 0")
    flo, fhi = upsilon(model, lo), upsilon(model, hi)
    if not flo >= y >= fhi:
        raise OutOfRange(f"y={y:.6g} outside [Upsilon({hi:g}), Upsilon({lo:g})] = [{fhi:.3g}, {flo:.3g}]")
    a, b = np.log(lo), np.log(hi)
    for _ in range(400):
        m = 0.5 * (a + b)
        v = upsilon(model, np.exp(m))
        if v > y:
            a = m
        else:
            b = m
        if b - a < rtol:
            break
    return float(np.exp(0.5 * (a + b)))


@dataclass(frozen=True)
class UpsilonProfile:
    """Sampled map ``beta -> Upsilon(beta)`` on a log grid."""

    betas: np.ndarray
    values: np.ndarray
    finite: bool


def upsilon_profile(model: LevyModel, betas=None) -> UpsilonProfile:
    betas = np.logspace(-3, 6, 91) if betas is None else np.asarray(betas, dtype=float)
    try:
        vals = np.asarray(upsilon(model, betas))
        return UpsilonProfile(betas, vals, True)
    except NonFinite:
        return UpsilonProfile(betas, np.full(betas.shape, np.inf), False)


@dataclass(frozen=True)
class TauberianReport:
    t: float
    lhs: float   # Upsilon(1/t) / e
    mid: float   # int_0^t pbar_s(0) ds
    rhs: float   # e Upsilon(1/t)
    ok: bool


def tauberian_check(model: LevyModel, t: float, slack: float = 1e-6) -> TauberianReport:
    """Check ``Upsilon(1/t)/e <= int_0^t pbar_s(0) ds <= e Upsilon(1/t)``."""
    u = upsilon(model, 1.0 / t)
    mid = pbar0_integral(model, t)
    lhs, rhs = u / np.e, np.e * u
    return TauberianReport(t, lhs, mid, rhs, bool(lhs <= mid + slack and mid <= rhs + slack))


@dataclass(frozen=True)
class ProjectionReport:
    betas: np.ndarray
    projected: np.ndarray
    full: np.ndarray
    ok: bool
    full_finite: bool


def projection_compare(model: ProductIndependent, betas, slack: float = 1e-12,
                       dual_window: bool = False) -> ProjectionReport:
    """Compare ``Upsilon`` of the projection onto the first factor with the full one.

    The second factor K must be compact; it carries its probability Haar
    measure (counting measure on its dual), as the comparison requires.
    """
    if not isinstance(model, ProductIndependent) or len(model.parts) != 2:
        raise HypothesisViolated("projection_compare needs a two-factor product model")
    G, K = model.parts
    if not K.group.is_compact:
        raise HypothesisViolated("the projected-out factor must be compact")
    betas = np.asarray(betas, dtype=float)
    proj = np.asarray(upsilon(G, betas, dual_window=dual_window), dtype=float)
    scale = K.group.size if _is_finite_component(K) else 1.0
    try:
        full = scale * np.asarray(upsilon(model, betas, dual_window=dual_window), dtype=float)
        finite = True
    except NonFinite:
        full = np.full(betas.shape, np.inf)
        finite = False
    ok = bool(np.all(proj <= full * (1 + slack) + slack))
    return ProjectionReport(betas, proj, full, ok, finite)


# ---------------------------------------------------------------------------
# helpers for the moment engine and the simulator


@dataclass(frozen=True)
class Modes:
    """Finite spectral data grouped by rate ``a = 2 Re Psi``.

    ``w`` are dual weights and ``q`` the matching masses ``|u0hat|^2 dm*``;
    ``cont`` holds the remaining continuous pieces.
    """

    a: np.ndarray
    w: np.ndarray
    q: np.ndarray
    cont: tuple
    cont_u0: tuple


def spectral_masses(model: LevyModel, u0: InitialCondition):
    """Masses ``|u0hat|^2 dm*`` over the finite block plus continuous u0 data."""
    sp = _spectrum(model)
    g = model.group
    comps = model.components
    facs = resolve_factors(u0, g)
    if facs is None:
        if sp.cont:
            raise ValueError("explicit u0 values need a finite group")
        uh = fourier(g, sample(u0, g))
        return sp.finite_w * np.abs(uh) ** 2, ()
    qs, cont_u0 = [], []
    for c, ic in zip(comps, facs):
        if _is_finite_component(c):
            uh = fourier(c.group, sample(ic, c.group))
            qs.append(haar_weight(dual(c.group)) * np.abs(uh) ** 2)
        elif isinstance(c, TorusBrownian):
            if ic.kind != "constant":
                raise ValueError("torus factors support constant initial data")
            cont_u0.append(("constant", float(ic.scale)))
        else:
            if ic.kind != "gaussian":
                raise ValueError("real-line factors support gaussian initial data")
            cont_u0.append(("gaussian", float(ic.scale)))
    q = reduce(np.multiply.outer, qs).ravel() if qs else np.ones(1)
    return q, tuple(cont_u0)


def modes(model: LevyModel, u0: InitialCondition, torus_modes: int | None = None,
          rtol: float = 1e-12) -> Modes:
    """Grouped modes ``(a, w, q)``; torus factors are truncated to ``|n| <= torus_modes``."""
    sp = _spectrum(model)
    a = 2 * sp.finite_psi.real
    w = sp.finite_w.copy()
    q, cont_u0 = spectral_masses(model, u0)
    rest, rest_u0 = [], []
    for c, cu in zip(sp.cont, cont_u0):
        if c[0] == "torus":
            N = torus_modes if torus_modes is not None else max(64, c[2].resolution // 2)
            n = np.arange(-N, N + 1)
            an = 2 * c[1] * (2 * pi * n) ** 2
            qn = np.where(n == 0, cu[1] ** 2, 0.0)
            a = np.add.outer(a, an).ravel()
            w = np.multiply.outer(w, np.ones(n.size)).ravel()
            q = np.multiply.outer(q, qn).ravel()
        else:
            rest.append(c)
            rest_u0.append(cu)
    a = np.maximum(a, 0.0)
    order = np.argsort(a, kind="stable")
    a, w, q = a[order], w[order], q[order]
    # merge equal rates
    keys = np.empty(a.size, dtype=int)
    k = 0
    for i in range(a.size):
        if i > 0 and abs(a[i] - a[i - 1]) > rtol * max(1.0, a[i]):
            k += 1
        keys[i] = k
    A = np.array([a[keys == j][0] for j in range(k + 1)])
    W = np.bincount(keys, weights=w)
    Q = np.bincount(keys, weights=q)
    return Modes(A, W, Q, tuple(rest), tuple(rest_u0))


def jump_rates(model: LevyModel) -> np.ndarray:
    """Rate of a jump by ``y`` for every point index ``y`` of a finite group."""
    g = model.group
    if not g.is_finite:
        raise NotDiscrete("jump rates exist for finite groups only")
    ix = FiniteIndexer(g)
    out = np.zeros(ix.size)
    naxes = [len(FiniteIndexer(c.group).sizes) for c in model.components]
    start = 0
    for c, na in zip(model.components, naxes):
        sub = FiniteIndexer(c.group)
        r = np.zeros(sub.size)
        if isinstance(c, CyclicRates):
            r[1:] = c.rates
        elif isinstance(c, LatticeWalk):
            for y, p in c.jumps:
                r[sub.index(np.asarray(y))] += c.rate * p
        elif not isinstance(c, Zero):
            raise NotDiscrete(c.kind)
        for y in np.nonzero(r)[0]:
            coord = np.zeros(len(ix.sizes), dtype=int)
            coord[start:start + na] = sub.coords(y)
            out[ix.index(coord)] += r[y]
        start += na
    if np.any(out[ix.identity] != 0):
        out[ix.identity] = 0.0
    return out


def transport_model(model: LevyModel, h: Isomorphism) -> LevyModel:
    """Law of ``h(X)`` for a unit-multiplier automorphism of Z/n."""
    if h.kind == "identity":
        return model
    if h.kind != "multiplier" or not isinstance(model, (CyclicRates, Zero)):
        raise HypothesisViolated("transport is implemented for multiplier maps on Z/n")
    if isinstance(model, Zero):
        return model
    n = model.group.n
    new = np.zeros(n)
    for j, r in enumerate(model.rates, start=1):
        new[(int(h.param) * j) % n] += r
    return CyclicRates(tuple(new[1:]))

