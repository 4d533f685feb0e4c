"""Named reference models used by the verification suites and the CLI."""
from __future__ import annotations

from .groups import Lattice, RealLine, Torus
from .spectral import (CyclicRates, LatticeWalk, ProductIndependent, Stable,
                       TorusBrownian)

__all__ = ["catalog", "discrete_catalog"]


def catalog() -> dict:
    """Every model here satisfies Dalang's condition."""
    return {
        "trivial": CyclicRates(()),
        "cyclic2": CyclicRates((1.0,)),
        "cyclic3": CyclicRates((1.0, 1.0)),
        "cyclic6_nn": CyclicRates.nearest_neighbour(6),
        "lattice1_nn": LatticeWalk(Lattice(1, 1.0, 10), 1.0),
        "lattice2_nn": LatticeWalk(Lattice(2, 1.0, 4), 1.0),
        "torus": TorusBrownian(1.0, Torus(64)),
        "stable_1.25": Stable(1.25, RealLine(10.0, 2000)),
        "stable_1.5": Stable(1.5, RealLine(10.0, 2000)),
        "stable_2": Stable(2.0, RealLine(10.0, 2000)),
        "cyclic2_x_cyclic3": ProductIndependent((CyclicRates((1.0,)), CyclicRates((1.0, 1.0)))),
        "cyclic2_x_torus": ProductIndependent((CyclicRates((1.0,)), TorusBrownian(1.0, Torus(32)))),
    }


def discrete_catalog() -> dict:
    return {k: m for k, m in catalog().items() if m.group.is_discrete}
