"""Locally compact abelian groups used by the solvers.

Each group is a small frozen dataclass with a finite sample of points, Haar
weights on that sample, and a dual with matching weights so that the discrete
Fourier transform satisfies Plancherel exactly.

Normalization
-------------
* finite and lattice groups: counting measure, dual has total mass 1;
* Torus: points ``j/m`` with weight ``1/m``, dual frequencies with weight 1;
* RealLine: Lebesgue measure on ``[-L, L)``, dual measure ``dxi / 2 pi``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from math import gcd, pi

import numpy as np

from .errors import IncompatibleMap, NotAutomorphism, NotDiscrete

__all__ = [
    "GroupSpec", "Cyclic", "Trivial", "Lattice", "Torus", "RealLine", "Product",
    "DualSpec", "dual", "haar_weight", "points", "dual_points", "pairing",
    "character_matrix", "fourier", "inverse_fourier", "convolve",
    "FiniteIndexer", "Isomorphism", "modulus", "compose", "inverse",
]


class GroupSpec:
    """Common interface of the group descriptors."""

    kind = "Group"
    is_discrete = False
    is_compact = False
    is_finite = False

    @property
    def size(self) -> int:
        raise NotImplementedError

    @property
    def dual_size(self) -> int:
        return self.size

    def factors_(self) -> tuple:
        return (self,)


@dataclass(frozen=True)
class Cyclic(GroupSpec):
    """Z/nZ. ``Cyclic(1)`` is the trivial group."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"Cyclic order must be a positive integer, got {self.n}")

    is_discrete = True
    is_compact = True
    is_finite = True

    @property
    def kind(self):
        return "Trivial" if self.n == 1 else "Cyclic"

    @property
    def size(self):
        return int(self.n)


def Trivial() -> Cyclic:
    """The one-point group, identical to ``Cyclic(1)``."""
    return Cyclic(1)


@dataclass(frozen=True)
class Lattice(GroupSpec):
    """``delta Z^d`` sampled on the periodized box ``{-r..r}^d``."""

    d: int
    delta: float = 1.0
    radius: int = 10

    def __post_init__(self):
        if self.d < 1 or self.radius < 0 or not self.delta > 0:
            raise ValueError("Lattice needs d >= 1, radius >= 0 and delta > 0")

    kind = "Lattice"
    is_discrete = True
    is_compact = False
    is_finite = True  # finite after periodization

    @property
    def side(self) -> int:
        return 2 * int(self.radius) + 1

    @property
    def size(self):
        return self.side ** self.d


@dataclass(frozen=True)
class Torus(GroupSpec):
    """R/Z sampled at ``resolution`` equally spaced points."""

    resolution: int = 64

    def __post_init__(self):
        if self.resolution < 1:
            raise ValueError("Torus resolution must be positive")

    kind = "Torus"
    is_compact = True

    @property
    def size(self):
        return int(self.resolution)


@dataclass(frozen=True)
class RealLine(GroupSpec):
    """R sampled on the window ``[-halfwidth, halfwidth)``."""

    halfwidth: float = 10.0
    resolution: int = 2000

    def __post_init__(self):
        if not self.halfwidth > 0 or self.resolution < 2:
            raise ValueError("RealLine needs halfwidth > 0 and resolution >= 2")

    kind = "RealLine"

    @property
    def size(self):
        return int(self.resolution)

    @property
    def dx(self) -> float:
        return 2.0 * self.halfwidth / self.resolution


@dataclass(frozen=True)
class Product(GroupSpec):
    """Direct product; points are enumerated with the first factor slowest."""

    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("Product needs at least one factor")

    kind = "Product"

    @property
    def is_discrete(self):
        return all(f.is_discrete for f in self.factors)

    @property
    def is_compact(self):
        return all(f.is_compact for f in self.factors)

    @property
    def is_finite(self):
        return all(f.is_finite for f in self.factors)

    @property
    def size(self):
        return int(np.prod([f.size for f in self.factors]))

    def factors_(self):
        return self.factors


# ---------------------------------------------------------------------------
# duals


@dataclass(frozen=True)
class DualSpec:
    """The dual group of ``of``, truncated to the same number of points."""

    of: GroupSpec

    @property
    def kind(self):
        g = self.of
        return {"Trivial": "Trivial", "Cyclic": "Cyclic", "Lattice": "Torus",
                "Torus": "Lattice", "RealLine": "RealLine", "Product": "Product"}[g.kind]

    @property
    def is_discrete(self):
        return self.of.is_compact

    @property
    def is_compact(self):
        return self.of.is_discrete

    @property
    def size(self):
        return self.of.size

    @property
    def factors(self):
        return tuple(DualSpec(f) for f in self.of.factors_())

    def as_group(self) -> GroupSpec:
        """Structural group description, for the self-dual kinds."""
        g = self.of
        if isinstance(g, Cyclic):
            return g
        if isinstance(g, RealLine):
            return RealLine(pi * g.resolution / (2 * g.halfwidth), g.resolution)
        if isinstance(g, Product):
            return Product(tuple(DualSpec(f).as_group() for f in g.factors))
        raise ValueError(f"dual of {g.kind} has no group descriptor of the same kind")


def dual(g):
    """Dual of a group; the dual of a dual returns the original group."""
    if isinstance(g, DualSpec):
        return g.of
    return DualSpec(g)


def _centered(m: int) -> np.ndarray:
    return np.arange(m) - m // 2


def points(g: GroupSpec):
    """Coordinates of the sample points.

    Returns a 1-D array for single factors (lattice: shape ``(size, d)``)
    and a list of per-factor arrays for products.
    """
    if isinstance(g, Cyclic):
        return np.arange(g.n)
    if isinstance(g, Lattice):
        return _lattice_coords(g) * g.delta
    if isinstance(g, Torus):
        return np.arange(g.resolution) / g.resolution
    if isinstance(g, RealLine):
        return -g.halfwidth + g.dx * np.arange(g.resolution)
    if isinstance(g, Product):
        return [points(f) for f in g.factors]
    raise TypeError(g)


def _lattice_coords(g: Lattice) -> np.ndarray:
    ax = np.arange(-g.radius, g.radius + 1)
    grids = np.meshgrid(*([ax] * g.d), indexing="ij")
    return np.stack([x.ravel() for x in grids], axis=1)


def dual_points(g: GroupSpec):
    """Frequencies of the dual sample, in the canonical order."""
    if isinstance(g, DualSpec):
        return points(g.of)
    if isinstance(g, Cyclic):
        return np.arange(g.n)
    if isinstance(g, Lattice):
        return _lattice_coords(g) * (2 * pi / (g.side * g.delta))
    if isinstance(g, Torus):
        return _centered(g.resolution)
    if isinstance(g, RealLine):
        return _centered(g.resolution) * (pi / g.halfwidth)
    if isinstance(g, Product):
        return [dual_points(f) for f in g.factors]
    raise TypeError(g)


def haar_weight(g) -> np.ndarray:
    """Haar weight of every sample point (dual weights for a ``DualSpec``)."""
    if isinstance(g, DualSpec):
        return _dual_weight(g.of)
    if isinstance(g, (Cyclic, Lattice)):
        return np.ones(g.size)
    if isinstance(g, Torus):
        return np.full(g.size, 1.0 / g.resolution)
    if isinstance(g, RealLine):
        return np.full(g.size, g.dx)
    if isinstance(g, Product):
        return reduce(np.multiply.outer, [haar_weight(f) for f in g.factors]).ravel()
    raise TypeError(g)


def _dual_weight(g: GroupSpec) -> np.ndarray:
    if isinstance(g, (Cyclic, Lattice)):
        return np.full(g.size, 1.0 / g.size)
    if isinstance(g, Torus):
        return np.ones(g.size)
    if isinstance(g, RealLine):
        return np.full(g.size, 1.0 / (2 * g.halfwidth))
    if isinstance(g, Product):
        return reduce(np.multiply.outer, [_dual_weight(f) for f in g.factors]).ravel()
    raise TypeError(g)


def _factor_phase(g: GroupSpec, x: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Phase ``theta`` with ``(x, chi) = exp(i theta)`` for point/char indices."""
    if isinstance(g, Cyclic):
        return 2 * pi * np.outer(x, k) / g.n
    if isinstance(g, Lattice):
        c = _lattice_coords(g)
        return 2 * pi * (c[x] @ c[k].T) / g.side
    if isinstance(g, Torus):
        return 2 * pi * np.outer(points(g)[x], dual_points(g)[k])
    if isinstance(g, RealLine):
        return np.outer(points(g)[x], dual_points(g)[k])
    raise TypeError(g)


def character_matrix(g: GroupSpec, x=None, k=None) -> np.ndarray:
    """Matrix ``C[i, j] = (x_i, chi_j)`` over the chosen point/character indices."""
    x = np.arange(g.size) if x is None else np.atleast_1d(np.asarray(x))
    k = np.arange(g.size) if k is None else np.atleast_1d(np.asarray(k))
    if isinstance(g, Product):
        sizes = [f.size for f in g.factors]
        xs = np.unravel_index(x, sizes)
        ks = np.unravel_index(k, sizes)
        theta = sum(_factor_phase(f, xi, ki) for f, xi, ki in zip(g.factors, xs, ks))
    else:
        theta = _factor_phase(g, x, k)
    return np.exp(1j * theta)


def pairing(g: GroupSpec, x, chi):
    """Value ``(x, chi)`` of character index ``chi`` at point index ``x``."""
    out = character_matrix(g, x, chi)
    return out[0, 0] if np.ndim(x) == 0 and np.ndim(chi) == 0 else out


def fourier(g: GroupSpec, f) -> np.ndarray:
    """``fhat(chi) = int (x, chi) f(x) m(dx)`` on the sample."""
    f = np.asarray(f, dtype=complex)
    return (f * haar_weight(g)) @ character_matrix(g)


def inverse_fourier(g: GroupSpec, fhat) -> np.ndarray:
    """``f(x) = int conj((x, chi)) fhat(chi) m*(dchi)``."""
    fhat = np.asarray(fhat, dtype=complex)
    return character_matrix(g).conj() @ (fhat * haar_weight(dual(g)))


# ---------------------------------------------------------------------------
# finite group arithmetic


class FiniteIndexer:
    """Index arithmetic on a finite group (cyclic and periodized lattice axes)."""

    def __init__(self, g: GroupSpec):
        if not g.is_finite:
            raise NotDiscrete(f"{g.kind} is not a finite discrete group")
        sizes, offsets = [], []
        for f in g.factors_():
            if isinstance(f, Cyclic):
                sizes.append(f.n)
                offsets.append(0)
            elif isinstance(f, Lattice):
                sizes.extend([f.side] * f.d)
                offsets.extend([f.radius] * f.d)
            else:
                raise NotDiscrete(f"{f.kind} is not a finite discrete group")
        self.group = g
        self.sizes = tuple(sizes)
        self.offsets = np.array(offsets)
        self.size = int(np.prod(sizes)) if sizes else 1

    def coords(self, i) -> np.ndarray:
        """Integer coordinates (lattice axes centred) of point index ``i``."""
        c = np.stack(np.unravel_index(np.asarray(i), self.sizes), axis=-1)
        return c - self.offsets

    def index(self, c) -> np.ndarray:
        c = (np.asarray(c) + self.offsets) % np.array(self.sizes)
        return np.ravel_multi_index(tuple(np.moveaxis(c, -1, 0)), self.sizes)

    def add(self, i, j):
        return self.index(self.coords(i) + self.coords(j))

    def neg(self, i):
        return self.index(-self.coords(i))

    def sub(self, i, j):
        return self.index(self.coords(i) - self.coords(j))

    @property
    def identity(self) -> int:
        return int(self.index(np.zeros(len(self.sizes), dtype=int)))


def convolve(g: GroupSpec, f, h) -> np.ndarray:
    """``(f * h)(x) = sum_y f(y) h(x - y)`` on a finite group."""
    ix = FiniteIndexer(g)
    f = np.asarray(f)
    h = np.asarray(h)
    idx = np.arange(ix.size)
    diff = ix.sub(idx[:, None], idx[None, :])  # x - y
    return h[diff] @ f


# ---------------------------------------------------------------------------
# isomorphisms


@dataclass(frozen=True)
class Isomorphism:
    """Topological isomorphism ``source -> target``.

    kind
        ``identity``, ``multiplier`` (``param`` = unit a of Z/n),
        ``permutation`` (``param`` = factor order), ``scaling`` (``param`` = c),
        ``compose`` (``param`` = tuple of maps, applied right to left).
    """

    source: GroupSpec
    target: GroupSpec
    kind: str = "identity"
    param: object = None

    def __post_init__(self):
        _validate_map(self)

    def apply(self, i):
        """Image of point indices (finite groups only)."""
        i = np.asarray(i)
        if self.kind == "identity":
            return i
        if self.kind == "multiplier":
            return (int(self.param) * i) % self.source.n
        if self.kind == "compose":
            for h in reversed(self.param):
                i = h.apply(i)
            return i
        if self.kind == "permutation":
            sizes = [f.size for f in self.source.factors]
            c = np.unravel_index(i, sizes)
            return np.ravel_multi_index(tuple(c[p] for p in self.param),
                                        [sizes[p] for p in self.param])
        raise IncompatibleMap(f"cannot apply a {self.kind} map to point indices")


def _validate_map(h: Isomorphism):
    s, t = h.source, h.target
    if h.kind == "identity":
        if s != t:
            raise IncompatibleMap("identity map needs source == target")
    elif h.kind == "multiplier":
        if not isinstance(s, Cyclic) or s != t:
            raise IncompatibleMap("multiplier maps act on a single Cyclic group")
        if gcd(int(h.param), s.n) != 1:
            raise NotAutomorphism(f"x -> {h.param}x is not invertible on Z/{s.n}")
    elif h.kind == "permutation":
        if not (isinstance(s, Product) and isinstance(t, Product)):
            raise IncompatibleMap("permutation maps act on Product groups")
        p = tuple(h.param)
        if sorted(p) != list(range(len(s.factors))):
            raise IncompatibleMap("permutation must reorder every factor once")
        if tuple(s.factors[j] for j in p) != t.factors:
            raise IncompatibleMap("target factors are not the permuted source factors")
    elif h.kind == "scaling":
        c = float(h.param)
        if c == 0:
            raise IncompatibleMap("scaling by 0 is not invertible")
        if isinstance(s, RealLine):
            ok = isinstance(t, RealLine) and t.resolution == s.resolution \
                and np.isclose(t.halfwidth, abs(c) * s.halfwidth, rtol=1e-12)
        elif isinstance(s, Lattice):
            ok = isinstance(t, Lattice) and t.d == s.d and t.radius == s.radius \
                and np.isclose(t.delta, abs(c) * s.delta, rtol=1e-12)
        else:
            ok = False
        if not ok:
            raise IncompatibleMap("scaling target is not the scaled source window")
    elif h.kind == "compose":
        maps = tuple(h.param)
        if not maps:
            raise IncompatibleMap("empty composition")
        for a, b in zip(maps[:-1], maps[1:]):
            if b.target != a.source:
                raise IncompatibleMap("composition chain does not match up")
        if maps[-1].source != s or maps[0].target != t:
            raise IncompatibleMap("composition endpoints do not match")
    else:
        raise IncompatibleMap(f"unknown map kind {h.kind!r}")


def modulus(h: Isomorphism) -> float:
    """``mu(h)`` with ``m_target(h(B)) = mu(h) m_source(B)``."""
    if h.kind in ("identity", "multiplier", "permutation"):
        return 1.0
    if h.kind == "scaling":
        return abs(float(h.param)) if isinstance(h.source, RealLine) else 1.0
    if h.kind == "compose":
        return float(np.prod([modulus(m) for m in h.param]))
    raise IncompatibleMap(h.kind)


def compose(*maps: Isomorphism) -> Isomorphism:
    """``compose(h, g) = h o g``."""
    if len(maps) == 1:
        return maps[0]
    return Isomorphism(maps[-1].source, maps[0].target, "compose", tuple(maps))


def inverse(h: Isomorphism) -> Isomorphism:
    if h.kind == "identity":
        return h
    if h.kind == "multiplier":
        return Isomorphism(h.target, h.source, "multiplier", pow(int(h.param), -1, h.source.n))
    if h.kind == "scaling":
        return Isomorphism(h.target, h.source, "scaling", 1.0 / float(h.param))
    if h.kind == "permutation":
        p = list(h.param)
        return Isomorphism(h.target, h.source, "permutation", tuple(int(j) for j in np.argsort(p)))
    if h.kind == "compose":
        return compose(*[inverse(m) for m in reversed(h.param)])
    raise IncompatibleMap(h.kind)

