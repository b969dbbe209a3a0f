"""D3Q27 velocity set and quadrature weights.

Velocity ordering is fixed: index 0 is the rest particle, 1-6 are the
axis-aligned links, 7-18 the edge diagonals and 19-26 the corners. Every
moment index and relaxation rate elsewhere in the package depends on it.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

_CX = (0, 1, -1, 0, 0, 0, 0, 1, -1, 1, -1, 1, -1, 1, -1, 0, 0, 0, 0, 1, -1, 1, -1, 1, -1, 1, -1)
_CY = (0, 0, 0, 1, -1, 0, 0, 1, 1, -1, -1, 0, 0, 0, 0, 1, -1, 1, -1, 1, 1, -1, -1, 1, 1, -1, -1)
_CZ = (0, 0, 0, 0, 0, 1, -1, 0, 0, 0, 0, 1, 1, -1, -1, 1, 1, -1, -1, 1, 1, 1, 1, -1, -1, -1, -1)

# weight per number of nonzero velocity components
_WEIGHT_CLASS = {0: Fraction(8, 27), 1: Fraction(2, 27), 2: Fraction(1, 54), 3: Fraction(1, 216)}

CS2 = Fraction(1, 3)


@dataclass(frozen=True)
class LatticeModel:
    velocities: tuple[tuple[int, int, int], ...]
    weights: tuple[Fraction, ...]
    cs2: Fraction
    opposite: tuple[int, ...]

    @property
    def q(self) -> int:
        return len(self.velocities)

    @property
    def c(self) -> np.ndarray:
        """Velocities as an int64 array of shape (27, 3)."""
        return np.array(self.velocities, dtype=np.int64)

    @property
    def w(self) -> np.ndarray:
        return np.array([float(x) for x in self.weights])


def _check_quadrature(velocities, weights, cs2) -> None:
    q = len(velocities)
    if sum(weights) != 1:
        raise ValueError("weights do not sum to one")
    for a in range(3):
        if sum(weights[i] * velocities[i][a] for i in range(q)) != 0:
            raise ValueError("first moment of the weights is not zero")
        for b in range(3):
            second = sum(weights[i] * velocities[i][a] * velocities[i][b] for i in range(q))
            if second != (cs2 if a == b else 0):
                raise ValueError("second moment of the weights is not isotropic")
    # fourth order isotropy: sum w c_a^2 c_b^2 = cs2^2 (1 + 2 delta_ab)
    for a in range(3):
        for b in range(3):
            fourth = sum(weights[i] * velocities[i][a] ** 2 * velocities[i][b] ** 2 for i in range(q))
            if fourth != cs2 * cs2 * (3 if a == b else 1):
                raise ValueError("fourth moment of the weights is not isotropic")


@lru_cache(maxsize=None)
def d3q27() -> LatticeModel:
    velocities = tuple(zip(_CX, _CY, _CZ))
    if len(set(velocities)) != 27:
        raise ValueError("duplicate lattice velocity")
    weights = tuple(_WEIGHT_CLASS[sum(abs(v) for v in c)] for c in velocities)
    _check_quadrature(velocities, weights, CS2)
    index = {c: i for i, c in enumerate(velocities)}
    opposite = tuple(index[(-c[0], -c[1], -c[2])] for c in velocities)
    return LatticeModel(velocities=velocities, weights=weights, cs2=CS2, opposite=opposite)


# Module-level float views used by the numerical kernels.
LATTICE = d3q27()
C = LATTICE.c
W = LATTICE.w
OPPOSITE = np.array(LATTICE.opposite, dtype=np.int64)
Q = 27
