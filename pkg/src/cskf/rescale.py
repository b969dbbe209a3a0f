"""Inter-scale mapping of distribution functions.

A state stored on one scale is carried to another by keeping its equilibrium
moments and multiplying the non-equilibrium central moments by a diagonal
factor that keeps the local Reynolds number consistent. Spatial trilinear and
temporal Lagrange interpolation handle grids that do not line up.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import moments
from .collision import RelaxationDiagonal, RelaxationSpec, relaxation_diagonal
from .lattice import Q, W

SINGULAR_TOL = 1e-9
SNAP_TOL = 1e-9


class SingularRelaxationError(ValueError):
    pass


class OutOfHullError(ValueError):
    pass


class CoincidentNodesError(ValueError):
    pass


def rescaled_viscosity(nu_ref: float, dx_ref: float, dx_s: float) -> float:
    """Lattice viscosity on a scale of spacing ``dx_s`` with the same physical viscosity."""
    if min(nu_ref, dx_ref, dx_s) <= 0:
        raise ValueError("viscosity and spacings must be positive")
    return nu_ref * dx_ref / dx_s


@dataclass(frozen=True)
class ScaleMapping:
    alpha: float
    K: np.ndarray
    K_hat: np.ndarray

    @property
    def is_identity(self) -> bool:
        return bool(np.all(self.K_hat == 1.0))


def build_mapping(S_src: RelaxationDiagonal, S_dst: RelaxationDiagonal, alpha: float) -> ScaleMapping:
    """K scales the viscous (4..8) non-equilibrium moments; K_hat folds in the collision.

    Args:
        S_src: relaxation diagonal of the source scale.
        S_dst: relaxation diagonal of the destination scale.
        alpha: source spacing over destination spacing.

    Returns:
        The diagonal mapping with K_hat = (1 - S_dst) K (1 - S_src)^-1.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    s_src = np.asarray(S_src.s, dtype=float)
    s_dst = np.asarray(S_dst.s, dtype=float)
    if np.any(np.abs(s_src - 1.0) < SINGULAR_TOL) or np.any(np.abs(s_dst - 1.0) < SINGULAR_TOL):
        raise SingularRelaxationError("a relaxation rate equals 1; the mapping is undefined")
    K = np.ones(Q)
    K[4:9] = s_src[4:9] / (alpha * s_dst[4:9])
    K_hat = (1.0 - s_dst) * K / (1.0 - s_src)
    return ScaleMapping(alpha=float(alpha), K=K, K_hat=K_hat)


def mapping_between(src: RelaxationSpec, dst: RelaxationSpec, dx_src: float, dx_dst: float) -> ScaleMapping:
    """Mapping built from the base (non-adaptive) diagonals of two scales."""
    return build_mapping(relaxation_diagonal(src), relaxation_diagonal(dst), dx_src / dx_dst)


def map_distribution(f_src, rho: float, u, mapping: ScaleMapping) -> np.ndarray:
    """Single-cell mapping through the explicit basis."""
    f_src = np.asarray(f_src, dtype=float)
    if mapping.is_identity:
        return f_src.copy()
    basis = moments.build_basis(u)
    m = moments.to_moments(f_src, basis)
    meq = moments.equilibrium_moments(rho, basis.u)
    return moments.from_moments(meq + mapping.K_hat * (m - meq), basis)


def map_field(f: np.ndarray, mapping: ScaleMapping) -> np.ndarray:
    """Map populations (27, n); density and velocity come from ``f`` itself."""
    if mapping.is_identity:
        return f.copy()
    rho, u = moments.macroscopic(f)
    m = moments.central_moments(f, u)
    meq = moments.equilibrium_moments(rho, u)
    return moments.populations(meq + mapping.K_hat[:, None] * (m - meq), u)


def lattice_coordinates(block, points: np.ndarray) -> np.ndarray:
    """Fractional cell coordinates, snapped to integers when within rounding distance."""
    g = (np.asarray(points, dtype=float) - block.origin) / block.spacing
    r = np.round(g)
    return np.where(np.abs(g - r) < SNAP_TOL, r, g)


def trilinear_field(block, points: np.ndarray, field: np.ndarray | None = None) -> np.ndarray:
    """Interpolate a per-cell field (k, X, Y, Z) at physical points (n, 3); returns (k, n).

    Solid corners are dropped and the remaining weights renormalized. A point
    whose eight corners are all solid receives the rest-state weights.
    """
    from .block import CellFlag

    src = block.f if field is None else field
    k = src.shape[0]
    flat = src.reshape(k, -1)
    g = lattice_coordinates(block, points).reshape(-1, 3)
    dims = np.asarray(block.dims)
    if np.any(g < 0) or np.any(g > dims - 1):
        raise OutOfHullError("interpolation point outside the block hull")
    i0 = np.minimum(np.floor(g).astype(np.int64), np.maximum(dims - 2, 0))
    t = g - i0
    i1 = np.minimum(i0 + 1, dims - 1)
    solid = (block.flags == CellFlag.SOLID).reshape(-1)
    out = np.zeros((k, len(g)))
    wsum = np.zeros(len(g))
    for cx in (0, 1):
        wx = t[:, 0] if cx else 1.0 - t[:, 0]
        ix = i1[:, 0] if cx else i0[:, 0]
        for cy in (0, 1):
            wy = t[:, 1] if cy else 1.0 - t[:, 1]
            iy = i1[:, 1] if cy else i0[:, 1]
            for cz in (0, 1):
                wz = t[:, 2] if cz else 1.0 - t[:, 2]
                iz = i1[:, 2] if cz else i0[:, 2]
                idx = (ix * block.dims[1] + iy) * block.dims[2] + iz
                w = wx * wy * wz
                w = np.where(solid[idx], 0.0, w)
                nz = w != 0.0
                if np.any(nz):
                    out[:, nz] += w[nz] * flat[:, idx[nz]]
                wsum += w
    empty = wsum == 0.0
    partial = ~empty & (wsum != 1.0)
    out[:, partial] /= wsum[partial]
    if np.any(empty):
        if k != Q:
            raise OutOfHullError("interpolation point surrounded by solid cells")
        out[:, empty] = W[:, None]
    return out


def trilinear_f(block, p) -> tuple[np.ndarray, float, np.ndarray]:
    """Populations, density and velocity interpolated at one physical point."""
    f = trilinear_field(block, np.asarray(p, dtype=float).reshape(1, 3))[:, 0]
    rho, u = moments.macroscopic(f)
    return f, float(rho), u


def temporal_linear(f_a, f_b, theta: float):
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    if theta == 0.0:
        return np.array(f_a, dtype=float, copy=True)
    if theta == 1.0:
        return np.array(f_b, dtype=float, copy=True)
    return (1.0 - theta) * np.asarray(f_a) + theta * np.asarray(f_b)


def lagrange_weights(t0: float, t1: float, t2: float, t: float) -> tuple[float, float, float]:
    if t0 == t1 or t1 == t2 or t0 == t2:
        raise CoincidentNodesError("quadratic interpolation needs three distinct nodes")
    l0 = (t - t1) * (t - t2) / ((t0 - t1) * (t0 - t2))
    l1 = (t - t0) * (t - t2) / ((t1 - t0) * (t1 - t2))
    l2 = (t - t0) * (t - t1) / ((t2 - t0) * (t2 - t1))
    return l0, l1, l2


def temporal_quadratic(f_0, f_1, f_2, t0: float, t1: float, t2: float, t_eval: float):
    """Lagrange quadratic through (t0, f_0), (t1, f_1), (t2, f_2) evaluated at ``t_eval``."""
    if not (t0 < t1 < t2):
        if len({t0, t1, t2}) < 3:
            raise CoincidentNodesError("quadratic interpolation needs three distinct nodes")
        raise ValueError("nodes must be increasing")
    if not t0 <= t_eval <= t2:
        raise ValueError("evaluation time outside the node interval")
    for node, val in ((t0, f_0), (t1, f_1), (t2, f_2)):
        if t_eval == node:
            return np.array(val, dtype=float, copy=True)
    l0, l1, l2 = lagrange_weights(t0, t1, t2, t_eval)
    return l0 * np.asarray(f_0) + l1 * np.asarray(f_1) + l2 * np.asarray(f_2)
