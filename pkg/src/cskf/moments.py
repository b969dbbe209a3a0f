"""Non-orthogonal central-moment transform for D3Q27.

Two routes compute the same transform:

* ``build_basis`` assembles the velocity-dependent 27x27 matrix ``M`` column by
  column from its monomial definitions and inverts ``M^T`` by LU. This is the
  reference route, used for single cells and for checking.
* ``central_moments`` / ``populations`` work on whole fields. Every basis
  column is a short integer combination of the separable monomials
  ``cbar_x^m cbar_y^n cbar_z^p`` (m, n, p <= 2), and those are obtained by three
  per-axis 3x3 shifts, so no per-cell matrix is ever formed or inverted.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .lattice import C, Q

# Each basis column as a list of (coefficient, (m, n, p)) terms.
BASIS_TERMS: tuple[tuple[tuple[int, tuple[int, int, int]], ...], ...] = (
    ((1, (0, 0, 0)),),
    ((1, (1, 0, 0)),),
    ((1, (0, 1, 0)),),
    ((1, (0, 0, 1)),),
    ((1, (1, 1, 0)),),
    ((1, (1, 0, 1)),),
    ((1, (0, 1, 1)),),
    ((1, (2, 0, 0)), (-1, (0, 2, 0))),
    ((1, (2, 0, 0)), (-1, (0, 0, 2))),
    ((1, (2, 0, 0)), (1, (0, 2, 0)), (1, (0, 0, 2))),
    ((1, (1, 2, 0)), (1, (1, 0, 2))),
    ((1, (2, 1, 0)), (1, (0, 1, 2))),
    ((1, (2, 0, 1)), (1, (0, 2, 1))),
    ((1, (1, 2, 0)), (-1, (1, 0, 2))),
    ((1, (2, 1, 0)), (-1, (0, 1, 2))),
    ((1, (2, 0, 1)), (-1, (0, 2, 1))),
    ((1, (1, 1, 1)),),
    ((1, (2, 2, 0)), (1, (2, 0, 2)), (1, (0, 2, 2))),
    ((1, (2, 2, 0)), (1, (2, 0, 2)), (-1, (0, 2, 2))),
    ((1, (2, 2, 0)), (-1, (2, 0, 2))),
    ((1, (2, 1, 1)),),
    ((1, (1, 2, 1)),),
    ((1, (1, 1, 2)),),
    ((1, (1, 2, 2)),),
    ((1, (2, 1, 2)),),
    ((1, (2, 2, 1)),),
    ((1, (2, 2, 2)),),
)


def _monomial_index(mnp: tuple[int, int, int]) -> int:
    m, n, p = mnp
    return 9 * m + 3 * n + p


@lru_cache(maxsize=None)
def _combination_exact() -> tuple[tuple[Fraction, ...], ...]:
    rows = []
    for terms in BASIS_TERMS:
        row = [Fraction(0)] * Q
        for coef, mnp in terms:
            row[_monomial_index(mnp)] += coef
        rows.append(tuple(row))
    return tuple(rows)


@lru_cache(maxsize=None)
def _combination_inverse_exact() -> tuple[tuple[Fraction, ...], ...]:
    # Gauss-Jordan in rationals; the integer basis has a small exact inverse.
    a = [list(r) + [Fraction(int(i == j)) for j in range(Q)] for i, r in enumerate(_combination_exact())]
    for col in range(Q):
        piv = next(r for r in range(col, Q) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(Q):
            if r != col and a[r][col] != 0:
                fac = a[r][col]
                a[r] = [x - fac * y for x, y in zip(a[r], a[col])]
    return tuple(tuple(row[Q:]) for row in a)


def _sparse(rows) -> tuple[np.ndarray, np.ndarray]:
    """Pad each row's nonzeros to a fixed width: (index, coef) arrays of shape (27, w)."""
    width = max(sum(1 for x in r if x != 0) for r in rows)
    idx = np.zeros((Q, width), dtype=np.int64)
    coef = np.zeros((Q, width))
    for j, r in enumerate(rows):
        nz = [(k, float(x)) for k, x in enumerate(r) if x != 0]
        for t, (k, x) in enumerate(nz):
            idx[j, t] = k
            coef[j, t] = x
    return idx, coef


COMBINE = np.array([[float(x) for x in r] for r in _combination_exact()])
COMBINE_INV = np.array([[float(x) for x in r] for r in _combination_inverse_exact()])
COMBINE_IDX, COMBINE_COEF = _sparse(_combination_exact())
COMBINE_INV_IDX, COMBINE_INV_COEF = _sparse(_combination_inverse_exact())

# GRID_TO_POP[9a + 3b + c] is the population whose velocity is (a-1, b-1, c-1).
GRID_TO_POP = np.empty(Q, dtype=np.int64)
for _i, (_x, _y, _z) in enumerate(C):
    GRID_TO_POP[9 * (_x + 1) + 3 * (_y + 1) + (_z + 1)] = _i
POP_TO_GRID = np.argsort(GRID_TO_POP)

U_LIMIT = 0.4


@dataclass(frozen=True)
class MomentBasis:
    u: np.ndarray
    M: np.ndarray
    T: np.ndarray


def basis_matrix(u) -> np.ndarray:
    """M_ij for the shifted velocities cbar_i = c_i - u."""
    cbar = C - np.asarray(u, dtype=float)
    powers = cbar[:, :, None] ** np.arange(3)  # (27, 3 axes, 3 powers)
    M = np.zeros((Q, Q))
    for j, terms in enumerate(BASIS_TERMS):
        for coef, (m, n, p) in terms:
            M[:, j] += coef * powers[:, 0, m] * powers[:, 1, n] * powers[:, 2, p]
    return M


def build_basis(u) -> MomentBasis:
    u = np.asarray(u, dtype=float).reshape(3)
    if np.linalg.norm(u) > U_LIMIT:
        raise ValueError(f"|u| = {np.linalg.norm(u):.3g} exceeds the incompressible bound {U_LIMIT}")
    M = basis_matrix(u)
    T = np.linalg.solve(M.T, np.eye(Q))
    residual = np.abs(M.T @ T - np.eye(Q)).max()
    if residual > 1e-8:
        raise ArithmeticError(f"central-moment basis inversion residual {residual:.3g}")
    return MomentBasis(u=u, M=M, T=T)


def to_moments(f, basis: MomentBasis) -> np.ndarray:
    return basis.M.T @ np.asarray(f, dtype=float)


def from_moments(m, basis: MomentBasis) -> np.ndarray:
    return basis.T @ np.asarray(m, dtype=float)


def equilibrium_moments(rho, u) -> np.ndarray:
    """Equilibrium central moments.

    ``rho`` may be a scalar or an array of shape (N,); ``u`` has shape (3,) or
    (3, N). Returns shape (27,) or (27, N).
    """
    u = np.asarray(u, dtype=float)
    rho = np.asarray(rho, dtype=float)
    ux, uy, uz = u[0], u[1], u[2]
    x2, y2, z2 = ux * ux, uy * uy, uz * uz
    shape = np.broadcast(rho, ux).shape
    meq = np.zeros((Q,) + shape)
    meq[0] = rho
    meq[9] = rho
    meq[10] = -rho * ux * (y2 + z2)
    meq[11] = -rho * uy * (x2 + z2)
    meq[12] = -rho * uz * (x2 + y2)
    meq[13] = -rho * ux * (y2 - z2)
    meq[14] = -rho * uy * (x2 - z2)
    meq[15] = -rho * uz * (x2 - y2)
    meq[16] = -rho * ux * uy * uz
    meq[17] = rho / 3.0 * (9.0 * x2 * y2 + 9.0 * x2 * z2 + 9.0 * y2 * z2 + 1.0)
    meq[18] = rho / 9.0 * (27.0 * x2 * y2 + 27.0 * x2 * z2 - 27.0 * y2 * z2 + 1.0)
    meq[19] = 3.0 * rho * x2 * (y2 - z2)
    meq[20] = 3.0 * rho * x2 * uy * uz
    meq[21] = 3.0 * rho * ux * y2 * uz
    meq[22] = 3.0 * rho * ux * uy * z2
    meq[23] = -rho / 3.0 * ux * (18.0 * y2 * z2 + y2 + z2)
    meq[24] = -rho / 3.0 * uy * (18.0 * x2 * z2 + x2 + z2)
    meq[25] = -rho / 3.0 * uz * (18.0 * x2 * y2 + x2 + y2)
    meq[26] = rho * (10.0 * x2 * y2 * z2 + x2 * y2 + x2 * z2 + y2 * z2 + 1.0 / 27.0)
    return meq


# --- field route --------------------------------------------------------------

def _shift_forward(F: np.ndarray, u: np.ndarray, axis: int) -> np.ndarray:
    fm, f0, fp = (np.take(F, k, axis=axis) for k in range(3))
    r0 = fm + f0 + fp
    r1 = fp - fm
    r2 = fp + fm
    return np.stack((r0, r1 - u * r0, r2 - 2.0 * u * r1 + u * u * r0), axis=axis)


def _shift_inverse(K: np.ndarray, u: np.ndarray, axis: int) -> np.ndarray:
    k0, k1, k2 = (np.take(K, k, axis=axis) for k in range(3))
    r1 = k1 + u * k0
    r2 = k2 + 2.0 * u * k1 + u * u * k0
    return np.stack((0.5 * (r2 - r1), k0 - r2, 0.5 * (r2 + r1)), axis=axis)


def _combine(idx: np.ndarray, coef: np.ndarray, v: np.ndarray) -> np.ndarray:
    out = coef[:, 0, None] * v[idx[:, 0]]
    for t in range(1, idx.shape[1]):
        out += coef[:, t, None] * v[idx[:, t]]
    return out


def central_moments(f: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Moment vectors for populations ``f`` (27, N) about velocities ``u`` (3, N)."""
    n = f.shape[1]
    F = f[GRID_TO_POP].reshape(3, 3, 3, n)
    for axis in range(3):
        F = _shift_forward(F, u[axis], axis)
    return _combine(COMBINE_IDX, COMBINE_COEF, F.reshape(Q, n))


def populations(m: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse of :func:`central_moments`."""
    n = m.shape[1]
    K = _combine(COMBINE_INV_IDX, COMBINE_INV_COEF, m).reshape(3, 3, 3, n)
    for axis in range(3):
        K = _shift_inverse(K, u[axis], axis)
    return K.reshape(Q, n)[POP_TO_GRID]


def equilibrium(rho, u) -> np.ndarray:
    """Equilibrium populations T m_eq for (N,) densities and (3, N) velocities."""
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    u = np.asarray(u, dtype=float).reshape(3, -1)
    rho = np.broadcast_to(rho, u.shape[1:])
    return populations(equilibrium_moments(rho, u), u)


def macroscopic(f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Density and velocity of populations with the lattice axis first."""
    rho = f.sum(axis=0)
    flat = f.reshape(Q, -1)
    mom = (C.T.astype(float) @ flat).reshape((3,) + f.shape[1:])
    return rho, mom / rho
