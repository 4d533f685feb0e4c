"""Noise coefficients sigma and their Lipschitz data."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SigmaSpec", "Linear", "Bounded", "SinPlusSlope", "SINC_MIN"]

# min over z of sin(z)/z, attained near z = 4.4934
SINC_MIN = -0.21723362821122166


class SigmaSpec:
    """Lipschitz sigma with ``lip`` = Lip(sigma) and ``ell`` = inf |sigma(z)/z|."""

    kind = "Sigma"

    def __call__(self, z):
        raise NotImplementedError

    @property
    def lip(self) -> float:
        raise NotImplementedError

    @property
    def ell(self) -> float:
        raise NotImplementedError

    @property
    def vanishes_at_zero(self) -> bool:
        return float(self(np.array(0.0))) == 0.0


@dataclass(frozen=True)
class Linear(SigmaSpec):
    """``sigma(z) = slope * z``."""

    slope: float = 1.0
    kind = "Linear"

    def __call__(self, z):
        return self.slope * z

    @property
    def lip(self):
        return abs(self.slope)

    @property
    def ell(self):
        return abs(self.slope)


@dataclass(frozen=True)
class Bounded(SigmaSpec):
    """Smooth bounded sigma with values in ``[floor, cap]``.

    ``sigma(z) = floor + (cap - floor) (1 + tanh z) / 2``; constant when
    ``cap == floor``.
    """

    cap: float = 1.0
    floor: float = 0.0
    kind = "Bounded"

    def __post_init__(self):
        if not 0 <= self.floor <= self.cap:
            raise ValueError("Bounded sigma needs 0 <= floor <= cap")

    def __call__(self, z):
        if self.cap == self.floor:
            return np.full_like(np.asarray(z, dtype=float), self.cap)
        return self.floor + (self.cap - self.floor) * 0.5 * (1.0 + np.tanh(z))

    @property
    def lip(self):
        return 0.5 * (self.cap - self.floor)

    @property
    def ell(self):
        return 0.0

    @property
    def sup(self):
        return self.cap

    @property
    def inf(self):
        return self.floor


@dataclass(frozen=True)
class SinPlusSlope(SigmaSpec):
    """``sigma(z) = slope * z + amp * sin z``, a genuinely nonlinear example."""

    slope: float = 1.0
    amp: float = 0.5
    kind = "SinPlusSlope"

    def __post_init__(self):
        if abs(self.amp) >= abs(self.slope):
            raise ValueError("need |amp| < |slope| so that inf |sigma(z)/z| > 0")

    def __call__(self, z):
        return self.slope * z + self.amp * np.sin(z)

    @property
    def lip(self):
        return abs(self.slope) + abs(self.amp)

    @property
    def ell(self):
        # sigma(z)/z = slope + amp sinc(z) with sinc ranging over [SINC_MIN, 1]
        s, a = self.slope, self.amp
        lo = min(s + a, s + a * SINC_MIN)
        hi = max(s + a, s + a * SINC_MIN)
        return 0.0 if lo <= 0 <= hi else min(abs(lo), abs(hi))
