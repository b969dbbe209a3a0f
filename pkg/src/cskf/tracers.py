"""Passive smoke tracers: seeded injection and RK3 advection through the composite field."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .scheduler import ROLE_DOI, ROLE_FFD, ScaleGraph

DEFAULT_INJECT_RATE = 2000


class OutOfDomainError(ValueError):
    pass


@dataclass
class DiskRegion:
    center: tuple[float, float, float]
    radius: float
    normal: tuple[float, float, float]

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        nrm = np.asarray(self.normal, dtype=float)
        nrm = nrm / np.linalg.norm(nrm)
        helper = np.array([1.0, 0.0, 0.0]) if abs(nrm[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        e1 = np.cross(nrm, helper)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(nrm, e1)
        r = self.radius * np.sqrt(rng.random(n))
        th = 2.0 * np.pi * rng.random(n)
        return (np.asarray(self.center, dtype=float)
                + (r * np.cos(th))[:, None] * e1 + (r * np.sin(th))[:, None] * e2)

    def contains(self, p, tol: float = 1e-9) -> np.ndarray:
        nrm = np.asarray(self.normal, dtype=float)
        nrm = nrm / np.linalg.norm(nrm)
        d = np.asarray(p, dtype=float) - np.asarray(self.center, dtype=float)
        h = d @ nrm
        radial = np.linalg.norm(d - h[..., None] * nrm, axis=-1)
        return (np.abs(h) <= tol * max(self.radius, 1.0)) & (radial <= self.radius * (1 + tol))


@dataclass
class BoxRegion:
    lo: tuple[float, float, float]
    hi: tuple[float, float, float]

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        return lo + (hi - lo) * rng.random((n, 3))

    def contains(self, p, tol: float = 0.0) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return np.all((p >= np.asarray(self.lo) - tol) & (p <= np.asarray(self.hi) + tol), axis=-1)


Region = Union[DiskRegion, BoxRegion]


@dataclass
class TracerSet:
    inlet_region: Optional[Region] = None
    inject_rate: int = DEFAULT_INJECT_RATE
    positions: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    ages: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    ids: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    next_id: int = 0
    injected: int = 0
    culled: int = 0
    rng: np.random.Generator = field(default_factory=lambda: np.random.default_rng(0))

    def __len__(self) -> int:
        return len(self.positions)

    def keep(self, mask: np.ndarray) -> None:
        self.culled += int(np.count_nonzero(~mask))
        self.positions = self.positions[mask]
        self.ages = self.ages[mask]
        self.ids = self.ids[mask]


def inject(tracers: TracerSet, count: int, rng_seed: Optional[int] = None) -> None:
    """Add ``count`` particles uniformly in the inlet region.

    With ``rng_seed`` the draw uses a fresh generator; otherwise the set's own stream.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    if count == 0:
        return
    if tracers.inlet_region is None:
        raise ValueError("tracer set has no inlet region")
    rng = tracers.rng if rng_seed is None else np.random.default_rng(rng_seed)
    new = tracers.inlet_region.sample(rng, count)
    tracers.positions = np.concatenate([tracers.positions, new])
    tracers.ages = np.concatenate([tracers.ages, np.zeros(count, dtype=np.int64)])
    tracers.ids = np.concatenate([tracers.ids, tracers.next_id + np.arange(count, dtype=np.int64)])
    tracers.next_id += count
    tracers.injected += count


# --- composite velocity -------------------------------------------------------

def _sampling_order(graph: ScaleGraph) -> list:
    doi = sorted((b for b in graph.blocks if b.role == ROLE_DOI), key=lambda b: b.spacing)
    ffd = sorted((b for b in graph.blocks if b.role == ROLE_FFD), key=lambda b: b.spacing)
    return doi + [graph.ref] + ffd


def _outer(graph: ScaleGraph):
    ffd = [b for b in graph.blocks if b.role == ROLE_FFD]
    return max(ffd, key=lambda b: b.spacing) if ffd else graph.ref


def domain_box(graph: ScaleGraph) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Lower corner, upper corner and periodic mask of the global domain.

    Periodic axes span the full period (dims * spacing), others the sample hull.
    """
    blk = _outer(graph)
    per = np.asarray(blk.periodic, dtype=bool)
    lo = blk.origin.copy()
    hi = np.where(per, blk.origin + blk.spacing * np.asarray(blk.dims), blk.hull[1])
    return lo, hi, per


def _block_velocity(blk, pts: np.ndarray) -> np.ndarray:
    g = (pts - blk.origin) / blk.spacing
    dims = np.asarray(blk.dims)
    per = np.asarray(blk.periodic, dtype=bool)
    i0 = np.floor(g).astype(np.int64)
    i0 = np.where(per, i0, np.minimum(np.maximum(i0, 0), np.maximum(dims - 2, 0)))
    t = g - i0
    i1 = np.where(per, (i0 + 1) % dims, np.minimum(i0 + 1, dims - 1))
    i0 = np.where(per, i0 % dims, i0)
    u = blk.u.reshape(3, -1)
    out = np.zeros((len(pts), 3))
    for cx in (0, 1):
        wx = t[:, 0] if cx else 1.0 - t[:, 0]
        ix = i1[:, 0] if cx else i0[:, 0]
        for cy in (0, 1):
            wy = t[:, 1] if cy else 1.0 - t[:, 1]
            iy = i1[:, 1] if cy else i0[:, 1]
            for cz in (0, 1):
                wz = t[:, 2] if cz else 1.0 - t[:, 2]
                iz = i1[:, 2] if cz else i0[:, 2]
                idx = (ix * dims[1] + iy) * dims[2] + iz
                out += (wx * wy * wz)[:, None] * u[:, idx].T
    return out * (blk.spacing / blk.dt)


def sample_velocity(graph: ScaleGraph, p) -> np.ndarray:
    """Physical velocity at points (n, 3) or a single point, from the finest block whose
    interior hull holds the point. Points outside the domain give NaN rows."""
    pts = np.asarray(p, dtype=float)
    single = pts.ndim == 1
    pts = pts.reshape(-1, 3)
    lo, hi, per = domain_box(graph)
    span = hi - lo
    pts = np.where(per, lo + np.mod(pts - lo, span), pts)
    out = np.full((len(pts), 3), np.nan)
    todo = np.all((pts >= lo - 1e-12) & (pts <= hi + 1e-12), axis=1)
    for blk in _sampling_order(graph):
        if not np.any(todo):
            break
        inside = todo & blk.contains(pts, interior=True)
        if np.any(inside):
            out[inside] = _block_velocity(blk, pts[inside])
            todo &= ~inside
    if np.any(todo):  # boundary layer of the outermost block
        outer = _outer(graph)
        out[todo] = _block_velocity(outer, pts[todo])
    return out[0] if single else out


VelocityField = Callable[[np.ndarray], np.ndarray]


def advect_rk3(tracers: TracerSet, graph: Union[ScaleGraph, VelocityField], dt: float,
               domain: Optional[tuple] = None) -> None:
    """Three-stage third-order step; particles leaving the domain are removed.

    ``graph`` may be a ScaleGraph or any callable mapping (n, 3) points to
    (n, 3) velocities (NaN marks out-of-domain).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if isinstance(graph, ScaleGraph):
        vel = lambda q: sample_velocity(graph, q)  # noqa: E731
        if domain is None:
            domain = domain_box(graph)
    else:
        vel = graph
    p = tracers.positions
    if len(p):
        k1 = vel(p)
        k2 = vel(p + 0.5 * dt * k1)
        k3 = vel(p + dt * (-k1 + 2.0 * k2))
        p = p + dt / 6.0 * (k1 + 4.0 * k2 + k3)
        ok = np.all(np.isfinite(p), axis=1)
        if domain is not None:
            lo, hi, per = domain
            p = np.where(per, lo + np.mod(p - lo, hi - lo), p)
            ok &= np.all((p >= lo) & (p <= hi), axis=1)
        tracers.positions = p
        tracers.ages = tracers.ages + 1
        tracers.keep(ok)


def write_particles(tracers: TracerSet, path) -> None:
    """Plain text, one particle per line: ``id x y z age``."""
    with open(path, "w") as fh:
        for i, (x, y, z), a in zip(tracers.ids, tracers.positions, tracers.ages):
            fh.write(f"{int(i)} {float(x)!r} {float(y)!r} {float(z)!r} {int(a)}\n")


def read_particles(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    data = np.loadtxt(path, ndmin=2)
    if data.size == 0:
        return np.zeros(0, dtype=np.int64), np.zeros((0, 3)), np.zeros(0, dtype=np.int64)
    return data[:, 0].astype(np.int64), data[:, 1:4], data[:, 4].astype(np.int64)
