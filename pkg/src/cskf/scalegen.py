"""Scale construction.

Static scales come from a distance map of the geometry quantized into levels,
refined further in the wake shadow cast by solids when the inlet is treated
as an area light. Dynamic scales are rebuilt during the run from velocity
gradient and speed thresholds on the reference block.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numba
import numpy as np
from scipy.ndimage import distance_transform_edt

from .block import CellFlag
from .collision import gradient_norm
from .geometry import cell_centers, voxelize
from .scheduler import (ROLE_DOI, ROLE_FFD, ROLE_REFERENCE, BlockSpec, ScaleGraph,
                        initialize_from_coarser)

GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))
DEFAULT_PAD = 4


@dataclass
class WakeSpec:
    center: tuple[float, float, float]
    radius: float
    normal: tuple[float, float, float]
    ray_count: int = 16
    max_level: Optional[int] = None  # finest level reachable by wake refinement


@dataclass
class DynamicSpec:
    """Threshold pairs (gradient, speed) with the spacing of the block each one creates."""
    gradient_thresholds: list[float] = field(default_factory=list)
    velocity_thresholds: list[float] = field(default_factory=list)
    spacings: list[float] = field(default_factory=list)
    rebuild_interval: int = 40
    pad: int = DEFAULT_PAD

    def __post_init__(self):
        n = len(self.spacings)
        if len(self.gradient_thresholds) != n or len(self.velocity_thresholds) != n:
            raise ValueError("dynamic thresholds and spacings must pair up")
        if self.rebuild_interval < 1:
            raise ValueError("rebuild interval must be positive")


@dataclass
class ScalePlan:
    n_levels: int = 1
    dx_min: float = 1.0
    dx_max: float = 1.0
    level_spacings: Optional[list[float]] = None
    ffd_spacings: list[float] = field(default_factory=list)
    quantization: Optional[list[float]] = None  # distance thresholds, ascending, n_levels - 1 entries
    domain_boundary: bool = False
    pad: int = DEFAULT_PAD
    wake: Optional[WakeSpec] = None
    dynamic: Optional[DynamicSpec] = None

    def __post_init__(self):
        if self.n_levels < 1:
            raise ValueError("n_levels must be at least 1")
        if self.level_spacings is None and self.n_levels > 1 and not self.dx_min < self.dx_max:
            raise ValueError("dx_min must be smaller than dx_max")
        if any(s <= 0 for s in self.ffd_spacings):
            raise ValueError("spacings must be positive")

    def spacings(self) -> list[float]:
        """Spacing per level, level 0 coarsest."""
        if self.level_spacings is not None:
            return sorted((float(s) for s in self.level_spacings), reverse=True)
        n = self.n_levels
        if n == 1:
            return [float(self.dx_max)]
        lin = [self.dx_min + k / (n - 1) * (self.dx_max - self.dx_min) for k in range(n)]
        return lin[::-1]

    @property
    def levels(self) -> int:
        return len(self.spacings())

    def thresholds(self) -> list[float]:
        n = self.levels
        if self.quantization is not None:
            q = [float(t) for t in self.quantization]
            if len(q) != n - 1 or any(b <= a for a, b in zip(q, q[1:])):
                raise ValueError("quantization needs n_levels - 1 ascending thresholds")
            return q
        # default bands: a few finest-level cells per level step
        band = 6.0 * self.spacings()[-1]
        return [band * (k + 1) for k in range(n - 1)]


# --- distance map -------------------------------------------------------------

def distance_map(dims, spacing: float, solids: np.ndarray, domain_boundary: bool = True) -> np.ndarray:
    """Euclidean distance from every cell center to the nearest solid (or domain-edge) cell center."""
    target = np.asarray(solids, dtype=bool).copy()
    if target.shape != tuple(dims):
        raise ValueError("solid mask does not match dims")
    if domain_boundary:
        target[0, :, :] = target[-1, :, :] = True
        target[:, 0, :] = target[:, -1, :] = True
        target[:, :, 0] = target[:, :, -1] = True
    if not target.any():
        raise ValueError("distance map needs at least one boundary voxel")
    return distance_transform_edt(~target, sampling=spacing)


def quantize(dist: np.ndarray, thresholds: Sequence[float]) -> np.ndarray:
    """Level per cell: distances below the first threshold get the finest level, level 0 is coarsest."""
    th = np.asarray(thresholds, dtype=float)
    n = len(th) + 1
    return (n - 1) - np.searchsorted(th, dist, side="right")


# --- wake occlusion -----------------------------------------------------------

def disk_points(center, radius: float, normal, count: int) -> np.ndarray:
    """Stratified (sunflower) points on a disk."""
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    helper = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(n, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    j = np.arange(count)
    r = radius * np.sqrt((j + 0.5) / count)
    th = j * GOLDEN_ANGLE
    return np.asarray(center, dtype=float) + r[:, None] * (np.cos(th)[:, None] * e1 + np.sin(th)[:, None] * e2)


@numba.njit(cache=True)
def _segment_blocked(solid, a, b):
    # voxel traversal; voxel i covers [i - 1/2, i + 1/2) in grid coordinates
    nx, ny, nz = solid.shape
    pa = np.empty(3)
    d = np.empty(3)
    cur = np.empty(3, dtype=np.int64)
    end = np.empty(3, dtype=np.int64)
    step = np.empty(3, dtype=np.int64)
    tmax = np.empty(3)
    tdelta = np.empty(3)
    dims = (nx, ny, nz)
    for k in range(3):
        pa[k] = a[k] + 0.5
        d[k] = b[k] - a[k]
        cur[k] = int(np.floor(pa[k]))
        end[k] = int(np.floor(b[k] + 0.5))
        if d[k] > 0:
            step[k] = 1
            tmax[k] = (cur[k] + 1 - pa[k]) / d[k]
            tdelta[k] = 1.0 / d[k]
        elif d[k] < 0:
            step[k] = -1
            tmax[k] = (cur[k] - pa[k]) / d[k]
            tdelta[k] = -1.0 / d[k]
        else:
            step[k] = 0
            tmax[k] = np.inf
            tdelta[k] = np.inf
    for _ in range(nx + ny + nz + 3):
        inside = True
        for k in range(3):
            if cur[k] < 0 or cur[k] >= dims[k]:
                inside = False
        if inside and solid[cur[0], cur[1], cur[2]]:
            return True
        if cur[0] == end[0] and cur[1] == end[1] and cur[2] == end[2]:
            return False
        k = 0
        if tmax[1] < tmax[k]:
            k = 1
        if tmax[2] < tmax[k]:
            k = 2
        if tmax[k] > 1.0:
            return False
        cur[k] += step[k]
        tmax[k] += tdelta[k]
    return False


@numba.njit(cache=True)
def _occlusion_kernel(solid, pts, lights):
    out = np.zeros(pts.shape[0])
    for i in range(pts.shape[0]):
        hits = 0
        for j in range(lights.shape[0]):
            if _segment_blocked(solid, pts[i], lights[j]):
                hits += 1
        out[i] = hits / lights.shape[0]
    return out


def segment_blocked(solid: np.ndarray, a, b) -> bool:
    """Whether the segment between grid coordinates ``a`` and ``b`` crosses a solid voxel."""
    return bool(_segment_blocked(np.ascontiguousarray(solid, dtype=np.bool_),
                                 np.asarray(a, dtype=float), np.asarray(b, dtype=float)))


def occlusion_fraction(solid: np.ndarray, origin, spacing: float, points: np.ndarray,
                       wake: WakeSpec) -> np.ndarray:
    """Fraction of rays from each point to the inlet disk that hit a solid voxel.

    Points on the upstream side of the inlet plane get zero.
    """
    lights = disk_points(wake.center, wake.radius, wake.normal, wake.ray_count)
    origin = np.asarray(origin, dtype=float)
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    g_pts = (pts - origin) / spacing
    g_lights = (lights - origin) / spacing
    frac = _occlusion_kernel(np.ascontiguousarray(solid, dtype=np.bool_), g_pts, g_lights)
    n = np.asarray(wake.normal, dtype=float)
    downstream = (pts - np.asarray(wake.center, dtype=float)) @ n > 0
    return np.where(downstream, frac, 0.0)


def wake_levels(fraction: np.ndarray, max_level: int) -> np.ndarray:
    """Linear map from occlusion fraction to a level: 0 for no shadow, ``max_level`` in the umbra."""
    return np.floor(np.clip(fraction, 0.0, 1.0) * max_level + 0.5).astype(np.int64)


# --- static layout ------------------------------------------------------------

@dataclass
class StaticLayout:
    blocks: list[BlockSpec]
    levels: np.ndarray
    occlusion: Optional[np.ndarray]
    reference_dims: tuple[int, int, int]


def _grid_dims(lo, hi, spacing: float) -> tuple[int, int, int]:
    ext = np.asarray(hi, dtype=float) - np.asarray(lo, dtype=float)
    return tuple(int(np.floor(e / spacing + 1e-9)) + 1 for e in ext)


def padded_box(mask: np.ndarray, origin, spacing: float, pad_len: float, clip_lo, clip_hi):
    """Physical AABB of a cell mask, grown by ``pad_len`` and clipped to a box; None if empty."""
    idx = np.argwhere(mask)
    if len(idx) == 0:
        return None
    origin = np.asarray(origin, dtype=float)
    lo = origin + spacing * idx.min(axis=0) - pad_len
    hi = origin + spacing * idx.max(axis=0) + pad_len
    lo = np.maximum(lo, clip_lo)
    hi = np.minimum(hi, clip_hi)
    if np.any(hi <= lo):
        return None
    return lo, hi


def static_scales(plan: ScalePlan, doi_lo, doi_hi, solids=(), domain_lo=None, domain_hi=None) -> StaticLayout:
    """Block layout: reference over the DOI, one padded block per finer level, FFD boxes outward.

    Args:
        plan: levels, spacings, thresholds and optional wake settings.
        doi_lo, doi_hi: domain-of-interest box (physical).
        solids: solid primitives with a ``contains`` method.
        domain_lo, domain_hi: full domain box for the FFD shells (defaults to the DOI).

    Returns:
        A :class:`StaticLayout`; block specs are ordered FFD, reference, finer levels.
    """
    doi_lo = np.asarray(doi_lo, dtype=float)
    doi_hi = np.asarray(doi_hi, dtype=float)
    spacings = plan.spacings()
    dx0 = spacings[0]
    ref_dims = _grid_dims(doi_lo, doi_hi, dx0)
    ref_hi = doi_lo + dx0 * (np.asarray(ref_dims) - 1)
    solid = voxelize(solids, doi_lo, dx0, ref_dims) if solids else np.zeros(ref_dims, dtype=bool)
    n = len(spacings)
    if n > 1 and (solid.any() or plan.domain_boundary):
        dist = distance_map(ref_dims, dx0, solid, plan.domain_boundary)
        levels = quantize(dist, plan.thresholds())
    else:
        levels = np.zeros(ref_dims, dtype=np.int64)
    occ = None
    if plan.wake is not None and n > 1 and solid.any():
        pts = cell_centers(doi_lo, dx0, ref_dims)
        occ = occlusion_fraction(solid, doi_lo, dx0, pts.reshape(-1, 3), plan.wake).reshape(ref_dims)
        top = n - 1 if plan.wake.max_level is None else min(plan.wake.max_level, n - 1)
        levels = np.maximum(levels, wake_levels(occ, top))
    levels = np.where(solid, 0, levels)

    blocks = []
    dlo = doi_lo if domain_lo is None else np.asarray(domain_lo, dtype=float)
    dhi = ref_hi if domain_hi is None else np.asarray(domain_hi, dtype=float)
    ffd = sorted(plan.ffd_spacings)
    for j, sp in enumerate(ffd):
        if sp <= dx0:
            raise ValueError("FFD spacings must exceed the reference spacing")
        frac = (j + 1) / len(ffd)
        lo = doi_lo + frac * (dlo - doi_lo)
        hi = ref_hi + frac * (dhi - ref_hi)
        lo = np.minimum(lo, doi_lo - sp)
        dims = tuple(int(np.ceil((hi[a] - lo[a]) / sp - 1e-9)) + 1 for a in range(3))
        blocks.append(BlockSpec(tuple(lo), sp, dims, role=ROLE_FFD))
    blocks.sort(key=lambda b: -b.spacing)
    blocks.append(BlockSpec(tuple(doi_lo), dx0, ref_dims, role=ROLE_REFERENCE))
    for k in range(1, n):
        sp = spacings[k]
        box = padded_box(levels >= k, doi_lo, dx0, plan.pad * sp, doi_lo, ref_hi)
        if box is None:
            continue
        lo, hi = box
        blocks.append(BlockSpec(tuple(lo), sp, _grid_dims(lo, hi, sp), role=ROLE_DOI))
    return StaticLayout(blocks=blocks, levels=levels, occlusion=occ, reference_dims=ref_dims)


# --- dynamic scales -----------------------------------------------------------

def percentile_threshold(field: np.ndarray, q: float, mask: Optional[np.ndarray] = None) -> float:
    """Helper turning a percentile of a field into an absolute threshold."""
    vals = field[mask] if mask is not None else field.reshape(-1)
    return float(np.percentile(vals, q)) if vals.size else float("inf")


def dynamic_mask(u: np.ndarray, g_thresh: float, u_thresh: float, periodic, exclude=None) -> np.ndarray:
    g = gradient_norm(u, periodic)
    speed = np.sqrt((u * u).sum(axis=0))
    mask = (g >= g_thresh) & (speed >= u_thresh)
    if exclude is not None:
        mask &= ~exclude
    return mask


def dynamic_scales(graph: ScaleGraph, spec: DynamicSpec) -> list[BlockSpec]:
    """Padded bounding boxes of the thresholded reference field, one per threshold pair."""
    if any(t <= 0 for t in spec.gradient_thresholds + spec.velocity_thresholds):
        raise ValueError("dynamic thresholds must be positive")
    ref = graph.ref
    lo0, hi0 = ref.hull
    exclude = ref.flags == CellFlag.SOLID
    out = []
    pairs = sorted(zip(spec.gradient_thresholds, spec.velocity_thresholds, spec.spacings),
                   key=lambda p: -p[2])
    for g_t, u_t, sp in pairs:
        mask = dynamic_mask(ref.u, g_t, u_t, ref.periodic, exclude)
        box = padded_box(mask, ref.origin, ref.spacing, spec.pad * sp, lo0, hi0)
        if box is None:
            continue
        lo, hi = box
        out.append(BlockSpec(tuple(lo), sp, _grid_dims(lo, hi, sp), role=ROLE_DOI, dynamic=True))
    return out


class DynamicRebuilder:
    """Scheduler hook: discard dynamic blocks and rebuild them from the current reference field."""

    def __init__(self, spec: DynamicSpec):
        self.spec = spec
        self.history: list[int] = []

    def __call__(self, graph: ScaleGraph, snapshots: dict) -> None:
        self.history.append(graph.iteration)
        for b in [b for b in graph.blocks if b.dynamic]:
            graph.remove_block(b)
            snapshots.pop(id(b), None)
        for k, bs in enumerate(dynamic_scales(graph, self.spec)):
            blk = graph.make_block(bs, name=f"dynamic{k}")
            graph.add_block(blk)
            initialize_from_coarser(graph, blk, snapshots)
