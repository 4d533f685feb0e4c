"""Initial conditions u0 and their spectral masses."""
from __future__ import annotations

from dataclasses import dataclass
from math import pi, sqrt

import numpy as np

from .groups import Cyclic, GroupSpec, Lattice, RealLine, Torus, FiniteIndexer, haar_weight

__all__ = ["InitialCondition", "resolve_factors"]


@dataclass(frozen=True)
class InitialCondition:
    """Descriptor of u0.

    kind
        ``point``     unit mass at the identity (discrete factors);
        ``constant``  ``u0 = scale`` (compact factors);
        ``gaussian``  ``u0(x) = exp(-x^2 / (2 scale^2))`` (RealLine);
        ``values``    explicit samples on a finite group;
        ``default``   point / constant / gaussian according to each factor.
    factors
        optional per-factor descriptors for product groups.
    """

    kind: str = "default"
    scale: float = 1.0
    values: tuple | None = None
    factors: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("point", "constant", "gaussian", "values", "default"):
            raise ValueError(f"unknown initial condition kind {self.kind!r}")
        if self.values is not None:
            object.__setattr__(self, "values", tuple(float(v) for v in np.ravel(self.values)))
        if self.factors is not None:
            object.__setattr__(self, "factors", tuple(self.factors))

    @classmethod
    def from_values(cls, values) -> "InitialCondition":
        return cls("values", values=tuple(np.ravel(values)))


def _factor_kind(ic: InitialCondition, g: GroupSpec) -> str:
    k = ic.kind
    if k == "default":
        if isinstance(g, (Cyclic, Lattice)):
            return "point"
        return "constant" if isinstance(g, Torus) else "gaussian"
    return k


def resolve_factors(ic: InitialCondition, g: GroupSpec) -> list:
    """Per-factor descriptors, or ``None`` when u0 is not a tensor product."""
    fs = g.factors_()
    if ic.factors is not None:
        if len(ic.factors) != len(fs):
            raise ValueError("one initial descriptor per group factor is required")
        return [InitialCondition(_factor_kind(f_ic, f), f_ic.scale, f_ic.values)
                for f_ic, f in zip(ic.factors, fs)]
    if ic.kind == "values":
        if len(fs) == 1:
            return [ic]
        return None
    out = []
    for f in fs:
        k = _factor_kind(ic, f)
        out.append(InitialCondition(k, ic.scale))
    return out


def sample(ic: InitialCondition, g: GroupSpec) -> np.ndarray:
    """u0 on the sample points of ``g``."""
    if ic.kind == "values" and ic.factors is None:
        v = np.asarray(ic.values, dtype=float)
        if v.size != g.size:
            raise ValueError(f"u0 has {v.size} values but the group has {g.size} points")
        return v
    parts = [_sample_factor(fic, f) for fic, f in zip(resolve_factors(ic, g), g.factors_())]
    out = parts[0]
    for p in parts[1:]:
        out = np.multiply.outer(out, p).ravel()
    return out


def _sample_factor(ic: InitialCondition, g: GroupSpec) -> np.ndarray:
    if ic.kind == "values":
        v = np.asarray(ic.values, dtype=float)
        if v.size != g.size:
            raise ValueError("u0 values do not match the factor size")
        return v
    if ic.kind == "point":
        if not g.is_discrete:
            raise ValueError("a point mass initial condition needs a discrete factor")
        out = np.zeros(g.size)
        out[FiniteIndexer(g).identity] = 1.0
        return out
    if ic.kind == "constant":
        return np.full(g.size, float(ic.scale))
    if ic.kind == "gaussian":
        if not isinstance(g, RealLine):
            raise ValueError("gaussian initial data lives on RealLine")
        x = -g.halfwidth + g.dx * np.arange(g.resolution)
        return np.exp(-x ** 2 / (2 * ic.scale ** 2))
    raise ValueError(ic.kind)


def norm_sq(ic: InitialCondition, g: GroupSpec) -> float:
    """||u0||^2 in L^2(m_G); exact on continuous factors."""
    fs = resolve_factors(ic, g)
    if fs is None:
        v = sample(ic, g)
        return float(np.sum(v * v * haar_weight(g)))
    out = 1.0
    for fic, f in zip(fs, g.factors_()):
        if fic.kind == "gaussian":
            out *= fic.scale * sqrt(pi)
        else:
            v = _sample_factor(fic, f)
            out *= float(np.sum(v * v * haar_weight(f)))
    return out


def inf_abs(ic: InitialCondition, g: GroupSpec) -> float:
    return float(np.min(np.abs(sample(ic, g))))
