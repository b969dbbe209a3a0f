"""One uniform-resolution lattice block.

State convention: between steps ``f`` holds post-collision populations and
``rho``/``u`` their macroscopic fields. A step streams, applies boundary
conditions, lets an optional hook overwrite scale-boundary samples and then
collides. Stored states are therefore always of the same kind, which is what
the inter-scale mapping acts on.
"""
from __future__ import annotations

from enum import IntEnum
from typing import Callable, Optional

import numba
import numpy as np

from . import collision, moments
from .collision import RelaxationSpec
from .lattice import C, OPPOSITE, Q, W


class CellFlag(IntEnum):
    FLUID = 0
    SOLID = 1
    INLET = 2
    OUTFLOW = 3
    SCALE_BOUNDARY = 4
    OVERLAP_INTERIOR = 5


class NonPositiveDensityError(FloatingPointError):
    pass


_CX = np.ascontiguousarray(C[:, 0])
_CY = np.ascontiguousarray(C[:, 1])
_CZ = np.ascontiguousarray(C[:, 2])
_QTENSOR = np.einsum("ia,ib->iab", C, C).astype(float) - np.eye(3) / 3.0


@numba.njit(cache=True, parallel=True)
def _stream_kernel(src, dst, cx, cy, cz):
    q, nx, ny, nz = src.shape
    for t in numba.prange(q * nx):
        i = t // nx
        x = t % nx
        xs = (x - cx[i]) % nx
        for y in range(ny):
            ys = (y - cy[i]) % ny
            for z in range(nz):
                dst[i, x, y, z] = src[i, xs, ys, (z - cz[i]) % nz]


def macroscopics(f) -> tuple[float, np.ndarray]:
    """Density and velocity of a single cell's 27 populations."""
    f = np.asarray(f, dtype=float)
    rho = f.sum()
    if rho <= 0:
        raise NonPositiveDensityError(f"density {rho}")
    return float(rho), (C.T @ f) / rho


class ScaleBlock:
    """Uniform lattice with physical placement.

    Args:
        origin: physical position of cell (0, 0, 0).
        spacing: physical cell size.
        dims: cell counts along x, y, z.
        relax: relaxation parameters with this block's lattice viscosity.
        periodic: per-axis periodicity.
        dt: physical time step (acoustic scaling makes it proportional to spacing).
    """

    def __init__(self, origin, spacing: float, dims, relax: RelaxationSpec,
                 periodic=(False, False, False), dt: Optional[float] = None, name: str = ""):
        self.origin = np.asarray(origin, dtype=float).reshape(3)
        self.spacing = float(spacing)
        self.dims = tuple(int(d) for d in dims)
        if min(self.dims) < 1:
            raise ValueError("block dimensions must be positive")
        self.relax = relax
        self.periodic = tuple(bool(p) for p in periodic)
        self.dt = float(spacing if dt is None else dt)
        self.name = name
        shape = (Q,) + self.dims
        self.f = np.zeros(shape)
        self.f_next = np.zeros(shape)
        self.rho = np.ones(self.dims)
        self.u = np.zeros((3,) + self.dims)
        self.flags = np.zeros(self.dims, dtype=np.uint8)
        self.bc_velocity = np.zeros((3,) + self.dims)
        self.t_local = 0
        self.time = 0.0
        self.dynamic = False
        self._topology_dirty = True

    # --- geometry ---------------------------------------------------------

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.dims))

    @property
    def hull(self) -> tuple[np.ndarray, np.ndarray]:
        """Physical bounds of the sample positions."""
        return self.origin.copy(), self.origin + self.spacing * (np.asarray(self.dims) - 1)

    @property
    def interior_hull(self) -> tuple[np.ndarray, np.ndarray]:
        """Bounds of the samples inside the one-cell boundary layer."""
        lo, hi = self.hull
        pad = np.where(self.periodic, 0.0, self.spacing)
        return lo + pad, hi - pad

    def positions(self) -> np.ndarray:
        from .geometry import cell_centers
        return cell_centers(self.origin, self.spacing, self.dims)

    def contains(self, p, interior: bool = False, tol: float = 1e-9) -> np.ndarray:
        lo, hi = self.interior_hull if interior else self.hull
        eps = tol * self.spacing
        p = np.asarray(p, dtype=float)
        return np.all((p >= lo - eps) & (p <= hi + eps), axis=-1)

    # --- flags ------------------------------------------------------------

    def set_flags(self, mask: np.ndarray, flag: CellFlag, velocity=None) -> None:
        self.flags[mask] = flag
        if velocity is not None:
            self.bc_velocity[:, mask] = np.asarray(velocity, dtype=float).reshape(3, 1)
        self._topology_dirty = True

    def mark_scale_boundary(self) -> None:
        """Flag the outer layer on non-periodic axes as ScaleBoundary, the rest as OverlapInterior."""
        edge = np.zeros(self.dims, dtype=bool)
        for a in range(3):
            if not self.periodic[a]:
                sl = [slice(None)] * 3
                sl[a] = 0
                edge[tuple(sl)] = True
                sl[a] = -1
                edge[tuple(sl)] = True
        fluid = self.flags == CellFlag.FLUID
        self.flags[fluid] = CellFlag.OVERLAP_INTERIOR
        self.flags[edge & (self.flags != CellFlag.SOLID)] = CellFlag.SCALE_BOUNDARY
        self._topology_dirty = True

    def _refresh_topology(self) -> None:
        flags = self.flags
        solid = flags == CellFlag.SOLID
        idx = np.indices(self.dims)
        missing = np.zeros((Q,) + self.dims, dtype=bool)
        for i in range(1, Q):
            src_solid = np.roll(solid, shift=tuple(C[i]), axis=(0, 1, 2))
            outside = np.zeros(self.dims, dtype=bool)
            for a in range(3):
                if not self.periodic[a] and C[i, a] != 0:
                    src = idx[a] - C[i, a]
                    outside |= (src < 0) | (src >= self.dims[a])
            missing[i] = src_solid | outside
        wet = (flags == CellFlag.FLUID) | (flags == CellFlag.OVERLAP_INTERIOR)
        bc = wet & missing.any(axis=0)
        self._bc_cells = np.flatnonzero(bc)
        self._bc_missing = missing.reshape(Q, -1)[:, self._bc_cells]
        self._solid_cells = np.flatnonzero(solid)
        self._inlet_cells = np.flatnonzero(flags == CellFlag.INLET)
        out = np.argwhere(flags == CellFlag.OUTFLOW)
        step = np.zeros_like(out)
        for a in range(3):
            if not self.periodic[a]:
                step[:, a] += (out[:, a] == 0).astype(int)
                step[:, a] -= (out[:, a] == self.dims[a] - 1).astype(int)
        self._outflow_dst = np.ravel_multi_index(out.T, self.dims) if len(out) else np.zeros(0, int)
        self._outflow_src = (np.ravel_multi_index((out + step).T, self.dims)
                             if len(out) else np.zeros(0, int))
        self._active = np.ascontiguousarray(
            (wet | (flags == CellFlag.OUTFLOW)).reshape(-1))
        self._topology_dirty = False

    # --- state ------------------------------------------------------------

    def initialize(self, rho0: float = 1.0, u0=None, stress: bool = False) -> None:
        """Equilibrium state from a uniform density and a velocity field (3, X, Y, Z) or 3-vector.

        With ``stress`` the non-equilibrium part matching the velocity gradient
        is added, which suppresses the start-up transient of a sheared field.
        """
        if rho0 <= 0:
            raise ValueError("initial density must be positive")
        u = np.zeros((3,) + self.dims)
        if u0 is not None:
            u0 = np.asarray(u0, dtype=float)
            u[:] = u0.reshape(3, 1, 1, 1) if u0.ndim == 1 else u0
        inlet = self.flags == CellFlag.INLET
        u[:, inlet] = self.bc_velocity[:, inlet]
        u[:, self.flags == CellFlag.SOLID] = 0.0
        rho = np.full(self.dims, float(rho0))
        rho[self.flags == CellFlag.SOLID] = 1.0
        self.set_equilibrium(rho, u, stress=stress)
        self.t_local = 0

    def set_equilibrium(self, rho: np.ndarray, u: np.ndarray, stress: bool = False) -> None:
        """Equilibrium populations, optionally with the strain-consistent viscous stress."""
        f = moments.equilibrium(rho.reshape(-1), u.reshape(3, -1))
        if stress:
            f += strain_nonequilibrium(rho, u, self.periodic, 1.0 / (3.0 * self.relax.nu + 0.5))
        self.f[:] = f.reshape(self.f.shape)
        self.update_macroscopics()

    def update_macroscopics(self) -> None:
        collision.macroscopics_field(self.f.reshape(Q, -1), self.rho.reshape(-1), self.u.reshape(3, -1))

    def f_flat(self) -> np.ndarray:
        return self.f.reshape(Q, -1)

    # --- step -------------------------------------------------------------

    def stream(self) -> None:
        _stream_kernel(self.f, self.f_next, _CX, _CY, _CZ)
        self.f, self.f_next = self.f_next, self.f

    def apply_boundaries(self) -> None:
        if self._topology_dirty:
            self._refresh_topology()
        f = self.f.reshape(Q, -1)
        if len(self._bc_cells):
            uw = self.bc_velocity.reshape(3, -1)[:, self._bc_cells]
            f[:, self._bc_cells] = regularized_wall(f[:, self._bc_cells], self._bc_missing, uw)
        if len(self._inlet_cells):
            uin = self.bc_velocity.reshape(3, -1)[:, self._inlet_cells]
            f[:, self._inlet_cells] = moments.equilibrium(np.ones(len(self._inlet_cells)), uin)
        if len(self._outflow_dst):
            f[:, self._outflow_dst] = f[:, self._outflow_src]
        if len(self._solid_cells):
            f[:, self._solid_cells] = W[:, None]

    def adaptive_factors(self) -> np.ndarray:
        if not self.relax.adaptive:
            return np.ones(self.n_cells)
        g = collision.gradient_norm(self.u, self.periodic)
        return np.ascontiguousarray(collision.adaptive_factor(g, self.relax).reshape(-1))

    def collide(self) -> None:
        if self._topology_dirty:
            self._refresh_topology()
        factor = self.adaptive_factors()
        collision.collide_field(self.f.reshape(Q, -1), self._active, factor, self.relax,
                                self.rho.reshape(-1), self.u.reshape(3, -1))

    def step(self, boundary_hook: Optional[Callable[["ScaleBlock"], None]] = None) -> None:
        self.stream()
        self.apply_boundaries()
        if boundary_hook is not None:
            boundary_hook(self)
        self.collide()
        if not np.all(self.rho.reshape(-1)[self._active] > 0):
            raise NonPositiveDensityError(f"non-positive density in block {self.name!r}")
        self.t_local += 1
        self.time += self.dt

    def velocity_gradient(self, cell) -> np.ndarray:
        """3x3 tensor d u_a / d x_b at one cell."""
        x, y, z = cell
        lo = [max(0, c - 2) for c in cell]
        if any(self.periodic):
            grad = collision.velocity_gradient_field(self.u, self.periodic)
            return grad[:, :, x, y, z]
        hi = [min(d, c + 3) for c, d in zip(cell, self.dims)]
        sub = self.u[:, lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]]
        grad = collision.velocity_gradient_field(sub, self.periodic)
        return grad[:, :, x - lo[0], y - lo[1], z - lo[2]]

    # --- snapshots --------------------------------------------------------

    def snapshot(self) -> np.ndarray:
        return self.f.copy()

    def load(self, f: np.ndarray) -> None:
        self.f[:] = f
        self.update_macroscopics()


def regularized_wall(f: np.ndarray, missing: np.ndarray, uw: np.ndarray) -> np.ndarray:
    """Regularized reconstruction at wet wall nodes.

    Args:
        f: streamed populations (27, n); entries flagged in ``missing`` are unknown.
        missing: (27, n) mask of populations with no valid source.
        uw: wall velocity (3, n).

    Returns:
        Equilibrium at the wall density and velocity plus the second-order
        non-equilibrium part rebuilt from the bounce-back-completed populations.
    """
    out = np.array(f, dtype=float, order="C", copy=True)
    _regularized_kernel(out, np.ascontiguousarray(missing), np.ascontiguousarray(uw, dtype=float),
                        C.astype(float), W, OPPOSITE)
    return out


@numba.njit(cache=True)
def _regularized_kernel(f, missing, uw, c, w, opp):
    # second-order polynomial equilibrium; identical to T m_eq for this basis
    n = f.shape[1]
    feq1 = np.empty(27)
    full = np.empty(27)
    for k in range(n):
        ux = uw[0, k]
        uy = uw[1, k]
        uz = uw[2, k]
        usq = ux * ux + uy * uy + uz * uz
        num = 0.0
        den = 1.0
        for i in range(27):
            cu = c[i, 0] * ux + c[i, 1] * uy + c[i, 2] * uz
            feq1[i] = w[i] * (1.0 + 3.0 * cu + 4.5 * cu * cu - 1.5 * usq)
            if not missing[i, k]:
                num += f[i, k]
            elif not missing[opp[i], k]:
                num += f[opp[i], k]
                den -= 6.0 * w[i] * cu
            else:
                den -= feq1[i]
        rho = num / den
        pxx = 0.0
        pyy = 0.0
        pzz = 0.0
        pxy = 0.0
        pxz = 0.0
        pyz = 0.0
        for i in range(27):
            if not missing[i, k]:
                full[i] = f[i, k]
            elif not missing[opp[i], k]:
                cu = c[i, 0] * ux + c[i, 1] * uy + c[i, 2] * uz
                full[i] = f[opp[i], k] + 6.0 * w[i] * rho * cu
            else:
                full[i] = rho * feq1[i]
            d = full[i] - rho * feq1[i]
            pxx += c[i, 0] * c[i, 0] * d
            pyy += c[i, 1] * c[i, 1] * d
            pzz += c[i, 2] * c[i, 2] * d
            pxy += c[i, 0] * c[i, 1] * d
            pxz += c[i, 0] * c[i, 2] * d
            pyz += c[i, 1] * c[i, 2] * d
        for i in range(27):
            cx = c[i, 0]
            cy = c[i, 1]
            cz = c[i, 2]
            qpi = ((cx * cx - 1.0 / 3.0) * pxx + (cy * cy - 1.0 / 3.0) * pyy
                   + (cz * cz - 1.0 / 3.0) * pzz
                   + 2.0 * (cx * cy * pxy + cx * cz * pxz + cy * cz * pyz))
            f[i, k] = rho * feq1[i] + 4.5 * w[i] * qpi


def strain_nonequilibrium(rho: np.ndarray, u: np.ndarray, periodic, s_visc: float) -> np.ndarray:
    """Post-collision second-order non-equilibrium populations (27, N) of a velocity field.

    Uses Pi_neq = -(1 - s) 2 rho cs^2 / s * strain, projected with w_i Q_i / (2 cs^4).
    """
    grad = collision.velocity_gradient_field(u, periodic)
    strain = 0.5 * (grad + grad.transpose(1, 0, 2, 3, 4))
    pi = -(1.0 - s_visc) * (2.0 * rho / 3.0 / s_visc) * strain
    return 4.5 * W[:, None] * np.einsum("iab,abn->in", _QTENSOR, pi.reshape(3, 3, -1))
