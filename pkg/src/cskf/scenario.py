"""Turn a :class:`SimulationConfig` into a ready-to-advance ScaleGraph."""
from __future__ import annotations

from pathlib import Path
from typing import Optional

import numpy as np

from .block import CellFlag, ScaleBlock
from .collision import RelaxationSpec, default_schedule
from .config import SimulationConfig
from .geometry import Box, Mesh, Sphere, Tube, voxelize
from .scalegen import (DynamicRebuilder, DynamicSpec, ScalePlan, StaticLayout, WakeSpec,
                       static_scales)
from .scheduler import ROLE_FFD, ROLE_REFERENCE, ScaleGraph
from .tracers import BoxRegion, DiskRegion, TracerSet

_AXIS = {"x": 0, "y": 1, "z": 2}


def build_solids(cfg: SimulationConfig) -> list:
    out = []
    for s in cfg.solids:
        kind = s["type"]
        if kind == "sphere":
            out.append(Sphere(tuple(s["center"]), float(s["radius"])))
        elif kind == "box":
            out.append(Box(tuple(s["lo"]), tuple(s["hi"])))
        elif kind == "tube":
            out.append(Tube(tuple(s["start"]), tuple(s["end"]), float(s["radius"])))
        else:
            p = Path(s["path"])
            out.append(Mesh.load(p if p.is_absolute() else Path(cfg.base_dir) / p))
    return out


def build_relaxation(cfg: SimulationConfig) -> RelaxationSpec:
    r = cfg.relaxation
    nu_p = default_schedule().nu_prime.copy()
    if r.nu_prime is not None:
        nu_p[9:] = np.asarray(r.nu_prime, dtype=float)
    return RelaxationSpec(nu=cfg.fluid.nu0, nu_prime=nu_p, a=r.a, b=r.b, g_max=r.g_max, adaptive=r.adaptive)


def doi_box(cfg: SimulationConfig) -> tuple[np.ndarray, np.ndarray]:
    d = cfg.domain
    lo = np.asarray(d.doi_lo if d.doi_lo is not None else d.lo, dtype=float)
    hi = np.asarray(d.doi_hi if d.doi_hi is not None else d.hi, dtype=float)
    return lo, hi


def inlet_disk(cfg: SimulationConfig) -> Optional[tuple[np.ndarray, float, np.ndarray]]:
    """Center, radius and inward normal of the velocity inlet, if any."""
    inl = cfg.inlet
    if inl.face is None:
        return None
    a = _AXIS[inl.face[0]]
    lo = np.asarray(cfg.domain.lo, dtype=float)
    hi = np.asarray(cfg.domain.hi, dtype=float)
    normal = np.zeros(3)
    normal[a] = 1.0 if inl.face[1] == "-" else -1.0
    if inl.center is not None:
        center = np.asarray(inl.center, dtype=float)
    else:
        center = 0.5 * (lo + hi)
        center[a] = lo[a] if inl.face[1] == "-" else hi[a]
    if inl.radius is not None:
        radius = float(inl.radius)
    else:
        others = [hi[k] - lo[k] for k in range(3) if k != a]
        radius = 0.5 * float(np.hypot(*others))
    return center, radius, normal


def scale_plan(cfg: SimulationConfig) -> ScalePlan:
    s = cfg.scales
    wake = None
    if s.wake.enabled:
        disk = inlet_disk(cfg)
        center = s.wake.center if s.wake.center is not None else (disk[0] if disk else None)
        radius = s.wake.radius if s.wake.radius is not None else (disk[1] if disk else None)
        normal = s.wake.normal if s.wake.normal is not None else (disk[2] if disk else None)
        if center is None or radius is None or normal is None:
            raise ValueError("wake refinement needs an inlet or an explicit wake disk")
        wake = WakeSpec(tuple(center), float(radius), tuple(normal), s.wake.ray_count, s.wake.max_level)
    dyn = None
    if s.dynamic.spacings:
        dyn = DynamicSpec(list(s.dynamic.gradient_thresholds), list(s.dynamic.velocity_thresholds),
                          list(s.dynamic.spacings), s.dynamic.rebuild_interval, s.dynamic.pad)
    return ScalePlan(n_levels=s.n_levels, dx_min=s.dx_min, dx_max=s.dx_max, level_spacings=s.level_spacings,
                     ffd_spacings=list(s.ffd_spacings), quantization=s.quantization,
                     domain_boundary=s.domain_boundary, pad=s.pad, wake=wake, dynamic=dyn)


def _face_mask(dims, face: str) -> np.ndarray:
    a = _AXIS[face[0]]
    m = np.zeros(dims, dtype=bool)
    sl = [slice(None)] * 3
    sl[a] = 0 if face[1] == "-" else dims[a] - 1
    m[tuple(sl)] = True
    return m


def apply_faces(blk: ScaleBlock, cfg: SimulationConfig) -> None:
    """Domain faces of the outermost block: walls stay wet nodes, inlets and outflows are flagged."""
    kinds = cfg.face_kinds()
    solid = blk.flags == CellFlag.SOLID
    edge = np.zeros(blk.dims, dtype=bool)
    for face, kind in kinds.items():
        if kind != "periodic":
            edge |= _face_mask(blk.dims, face)
    # an FFD shell starts fully flagged as scale boundary; its domain faces are not
    sb = blk.flags == CellFlag.SCALE_BOUNDARY
    blk.flags[sb & edge] = CellFlag.OVERLAP_INTERIOR
    for face, kind in kinds.items():
        m = _face_mask(blk.dims, face) & ~solid
        if kind == "outflow":
            blk.set_flags(m, CellFlag.OUTFLOW)
        elif kind == "inlet":
            blk.set_flags(m, CellFlag.INLET, _inlet_velocity(cfg))
    disk = inlet_disk(cfg)
    if disk is not None and cfg.inlet.radius is not None:
        center, radius, normal = disk
        p = blk.positions()
        d = p - center
        h = d @ normal
        radial = np.linalg.norm(d - h[..., None] * normal, axis=-1)
        m = _face_mask(blk.dims, cfg.inlet.face) & (radial <= radius) & ~solid
        blk.set_flags(m, CellFlag.INLET, _inlet_velocity(cfg))
    blk._topology_dirty = True


def _inlet_velocity(cfg: SimulationConfig) -> np.ndarray:
    disk = inlet_disk(cfg)
    return cfg.inlet.speed * disk[2]


def build_graph(cfg: SimulationConfig, layout: Optional[StaticLayout] = None) -> ScaleGraph:
    """Static layout, blocks with solids and face conditions, rest-state initial field."""
    solids = build_solids(cfg)
    relax = build_relaxation(cfg)
    plan = scale_plan(cfg)
    lo, hi = doi_box(cfg)
    if layout is None:
        layout = static_scales(plan, lo, hi, solids, cfg.domain.lo, cfg.domain.hi)
    ref_spec = next(b for b in layout.blocks if b.role == ROLE_REFERENCE)
    has_ffd = any(b.role == ROLE_FFD for b in layout.blocks)
    periodic = cfg.periodic() if not has_ffd else (False, False, False)
    dx0 = ref_spec.spacing
    ref = ScaleBlock(ref_spec.origin, dx0, ref_spec.dims, relax, periodic=periodic, dt=dx0, name="reference")
    ref.role = ROLE_REFERENCE
    if solids:
        ref.set_flags(voxelize(solids, ref.origin, dx0, ref.dims), CellFlag.SOLID)
    graph = ScaleGraph(blocks=[ref], reference=0, dt0=dx0, nu0=cfg.fluid.nu0, relax=relax, solids=solids)
    names = {ROLE_FFD: "ffd", "doi": "level"}
    counters = {ROLE_FFD: 0, "doi": 0}
    for spec in layout.blocks:
        if spec.role == ROLE_REFERENCE:
            continue
        counters[spec.role] += 1
        blk = graph.make_block(spec, name=f"{names[spec.role]}{counters[spec.role]}")
        graph.add_block(blk)
    graph.check_topology()
    if has_ffd:
        ref.mark_scale_boundary()
        outer = max(graph.ffd_blocks(), key=lambda b: b.spacing)
    else:
        outer = ref
    apply_faces(outer, cfg)
    u0 = np.asarray(cfg.domain.initial_velocity, dtype=float)
    for b in graph.blocks:
        b.initialize(1.0, u0)
    if plan.dynamic is not None:
        graph.rebuild = DynamicRebuilder(plan.dynamic)
        graph.rebuild_interval = plan.dynamic.rebuild_interval
    return graph


def build_tracers(cfg: SimulationConfig) -> Optional[TracerSet]:
    t = cfg.run.tracers
    if not t.enabled:
        return None
    if t.region == "box":
        if t.lo is None or t.hi is None:
            raise ValueError("box tracer region needs lo and hi")
        region = BoxRegion(tuple(t.lo), tuple(t.hi))
    else:
        disk = inlet_disk(cfg)
        center = t.center if t.center is not None else (disk[0] if disk else None)
        radius = t.radius if t.radius is not None else (disk[1] if disk else None)
        normal = t.normal if t.normal is not None else (disk[2] if disk else None)
        if center is None or radius is None or normal is None:
            raise ValueError("disk tracer region needs an inlet or explicit center, radius and normal")
        region = DiskRegion(tuple(center), float(radius), tuple(normal))
    return TracerSet(inlet_region=region, inject_rate=t.inject_rate, rng=np.random.default_rng(cfg.run.seed))
