"""Field diagnostics and the verification flows (Taylor-Green, Couette, Poiseuille,
two-scale consistency, shear layer)."""
from __future__ import annotations

import json
import time as _time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import scheduler as sch
from .block import CellFlag, NonPositiveDensityError, ScaleBlock
from .collision import RelaxationSpec, default_schedule
from .lattice import Q


# --- per-block quantities -------------------------------------------------------

def kinetic_energy(block: ScaleBlock, mask: Optional[np.ndarray] = None) -> float:
    """1/2 sum rho |u|^2 in lattice units."""
    e = 0.5 * block.rho * np.einsum("a...,a...->...", block.u, block.u)
    return float(e[mask].sum() if mask is not None else e.sum())


def max_speed(block: ScaleBlock) -> float:
    return float(np.sqrt(np.einsum("a...,a...->...", block.u, block.u)).max())


def total_mass(block: ScaleBlock) -> float:
    """Sum of all populations over non-solid cells."""
    fluid = (block.flags != CellFlag.SOLID).reshape(-1)
    return float(block.f.reshape(Q, -1)[:, fluid].sum())


def composite_kinetic_energy(graph: sch.ScaleGraph) -> float:
    """Energy of the multi-scale field, each region counted once on its finest block,
    weighted by physical cell volume relative to the reference cell."""
    order = sorted(graph.blocks, key=lambda b: b.spacing)
    total = 0.0
    for k, blk in enumerate(order):
        pts = blk.positions()
        own = blk.flags != CellFlag.SOLID
        if blk.role != sch.ROLE_REFERENCE or any(b.role == sch.ROLE_FFD for b in graph.blocks):
            own &= blk.flags != CellFlag.SCALE_BOUNDARY
        for finer in order[:k]:
            own &= ~finer.contains(pts, interior=True)
        total += kinetic_energy(blk, own) * (blk.spacing / graph.dx0) ** 3
    return total


@dataclass
class DiagnosticsReport:
    time: float
    iteration: int
    total_kinetic_energy: dict = field(default_factory=dict)
    max_speed: dict = field(default_factory=dict)
    total_mass: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def to_line(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def report(graph: sch.ScaleGraph) -> DiagnosticsReport:
    ke, vmax, mass = {}, {}, {}
    for i, b in enumerate(graph.blocks):
        key = b.name or f"block{i}"
        ke[key] = kinetic_energy(b)
        vmax[key] = max_speed(b)
        mass[key] = total_mass(b)
    ke["global"] = composite_kinetic_energy(graph)
    return DiagnosticsReport(time=graph.time, iteration=graph.iteration, total_kinetic_energy=ke,
                             max_speed=vmax, total_mass=mass, timings=dict(graph.timings))


def has_nan(graph: sch.ScaleGraph) -> Optional[str]:
    """Name of the first block holding a non-finite population, else None."""
    for i, b in enumerate(graph.blocks):
        if not np.isfinite(b.f.max()) or not np.isfinite(b.f.min()):
            return b.name or f"block{i}"
    return None


# --- Taylor-Green -----------------------------------------------------------------

def taylor_green_field(block: ScaleBlock, amplitude: float, wavenumber: int = 1,
                       mode: str = "2d") -> np.ndarray:
    """Velocity (3, X, Y, Z) of the Taylor-Green vortex on a periodic block.

    ``"2d"`` is the column vortex with no z dependence; ``"3d"`` multiplies both
    components by cos kz.
    """
    nx = block.dims[0]
    k = 2.0 * np.pi * wavenumber / nx
    x, y, z = np.meshgrid(*(np.arange(n, dtype=float) for n in block.dims), indexing="ij")
    zf = np.cos(k * z) if mode == "3d" else 1.0
    if mode not in ("2d", "3d"):
        raise ValueError("mode must be '2d' or '3d'")
    return np.stack([amplitude * np.sin(k * x) * np.cos(k * y) * zf,
                     -amplitude * np.cos(k * x) * np.sin(k * y) * zf,
                     np.zeros_like(x)])


def taylor_green_init(block: ScaleBlock, amplitude: float, wavenumber: int = 1,
                      mode: str = "2d", stress: bool = True) -> None:
    if not all(block.periodic):
        raise ValueError("Taylor-Green needs a fully periodic block")
    if abs(amplitude) > 0.05:
        raise ValueError("amplitude must not exceed 0.05")
    block.initialize(1.0, taylor_green_field(block, amplitude, wavenumber, mode), stress=stress)


def taylor_green_energy(amplitude: float, n_cells: int, mode: str = "2d") -> float:
    """Closed-form initial kinetic energy (unit density)."""
    mean_u2 = amplitude ** 2 * (0.5 if mode == "2d" else 0.25)
    return 0.5 * mean_u2 * n_cells


def effective_k2(n: int, wavenumber: int = 1, mode: str = "2d") -> float:
    k = 2.0 * np.pi * wavenumber / n
    return (2.0 if mode == "2d" else 3.0) * k * k


def fit_decay_viscosity(times: np.ndarray, energy: np.ndarray, k_eff2: float) -> float:
    """Least-squares slope of log E; E ~ exp(-2 nu k_eff^2 t)."""
    slope = np.polyfit(np.asarray(times, dtype=float), np.log(np.asarray(energy)), 1)[0]
    return float(-slope / (2.0 * k_eff2))


@dataclass
class BenchmarkResult:
    name: str
    value: float
    tolerance: float
    passed: bool
    seconds: float
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        return (f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.value:.6g} "
                f"(tolerance {self.tolerance:g}, {self.seconds:.1f} s)")


def taylor_green_benchmark(n: int = 32, nu: float = 0.01, amplitude: float = 0.02, steps: int = 2000,
                           tolerance: float = 0.03, mode: str = "2d") -> BenchmarkResult:
    t0 = _time.perf_counter()
    blk = ScaleBlock((0, 0, 0), 1.0, (n,) * 3, default_schedule(nu), periodic=(True,) * 3)
    taylor_green_init(blk, amplitude, 1, mode)
    energy = [kinetic_energy(blk)]
    for _ in range(steps):
        blk.step()
        energy.append(kinetic_energy(blk))
    energy = np.array(energy)
    ts = np.arange(len(energy), dtype=float)
    nu_fit = fit_decay_viscosity(ts, energy, effective_k2(n, 1, mode))
    err = abs(nu_fit / nu - 1.0)
    monotone = bool(np.all(np.diff(energy) < 0))
    return BenchmarkResult(f"taylor-green n={n} nu={nu}", err, tolerance, err < tolerance,
                           _time.perf_counter() - t0,
                           {"nu_fit": nu_fit, "monotone": monotone, "energy": energy})


def couette_benchmark(n: int = 16, nu: float = 0.1, wall_speed: float = 0.05, steps: int = 3000,
                      tolerance: float = 0.01) -> BenchmarkResult:
    """Plane Couette flow between a resting wall at y=0 and a moving wall at y=n-1."""
    t0 = _time.perf_counter()
    blk = ScaleBlock((0, 0, 0), 1.0, (n,) * 3, default_schedule(nu), periodic=(True, False, True))
    blk.bc_velocity[0, :, n - 1, :] = wall_speed
    blk.initialize()
    for _ in range(steps):
        blk.step()
    prof = blk.u[0].mean(axis=(0, 2))
    exact = wall_speed * np.arange(n) / (n - 1)
    dev = float(np.abs(prof - exact).max() / wall_speed)
    return BenchmarkResult(f"couette n={n}", dev, tolerance, dev < tolerance,
                           _time.perf_counter() - t0, {"profile": prof})


def poiseuille_benchmark(dims=(16, 16, 64), nu: float = 0.1, speed: float = 0.05, steps: int = 2000,
                         tolerance: float = 0.02) -> BenchmarkResult:
    """Channel between solid plates at y=0 and y=ny-1, plug inlet at z=0, outflow at the far end.

    The profile three quarters downstream is compared with its best-fit parabola
    vanishing on the wall nodes.
    """
    t0 = _time.perf_counter()
    nx, ny, nz = dims
    blk = ScaleBlock((0, 0, 0), 1.0, dims, default_schedule(nu), periodic=(True, False, False))
    solid = np.zeros(dims, dtype=bool)
    solid[:, [0, ny - 1], :] = True
    blk.set_flags(solid, CellFlag.SOLID)
    inlet = np.zeros(dims, dtype=bool)
    inlet[:, 1:ny - 1, 0] = True
    blk.set_flags(inlet, CellFlag.INLET, (0.0, 0.0, speed))
    outlet = np.zeros(dims, dtype=bool)
    outlet[:, 1:ny - 1, nz - 1] = True
    blk.set_flags(outlet, CellFlag.OUTFLOW)
    blk.initialize(1.0, (0.0, 0.0, speed))
    for _ in range(steps):
        blk.step()
    y = np.arange(1, ny - 1)
    prof = blk.u[2, :, 1:ny - 1, (3 * nz) // 4].mean(axis=0)
    shape = (y - 1.0) * (ny - 2.0 - y)
    amp = (prof @ shape) / (shape @ shape)
    err = float(np.abs(prof - amp * shape).max() / prof.max())
    return BenchmarkResult(f"poiseuille {nx}x{ny}x{nz}", err, tolerance, err < tolerance,
                           _time.perf_counter() - t0, {"profile": prof, "mean_density": float(blk.rho.mean())})


def _tg_graph(n: int, nu: float, amplitude: float, fine: Optional[tuple] = None) -> sch.ScaleGraph:
    ref = ScaleBlock((0, 0, 0), 1.0, (n,) * 3, default_schedule(nu), periodic=(True,) * 3, name="reference")
    taylor_green_init(ref, amplitude)
    graph = sch.single_block_graph(ref)
    if fine is not None:
        origin, spacing, cells = fine
        blk = graph.make_block(sch.BlockSpec((origin,) * 3, spacing, (cells,) * 3), name="fine")
        # same analytic field sampled at the fine nodes, periodic in the reference frame
        k = 2.0 * np.pi / n
        p = blk.positions()
        u = np.stack([amplitude * np.sin(k * p[..., 0]) * np.cos(k * p[..., 1]),
                      -amplitude * np.cos(k * p[..., 0]) * np.sin(k * p[..., 1]),
                      np.zeros(blk.dims)])
        blk.initialize(1.0, u, stress=True)
        graph.add_block(blk)
    return graph


def two_scale_benchmark(alpha: float = 1.4, n: int = 32, nu: float = 0.01, amplitude: float = 0.02,
                        steps: int = 500, tolerance: float = 0.05) -> BenchmarkResult:
    """Reference Taylor-Green with a fine block; compares against the single-scale run.

    For alpha == 1 the block is coincident with reference nodes and the overlap
    must stay bit-identical; otherwise the block covers half the domain volume
    and the global energy trace must stay within ``tolerance``.
    """
    t0 = _time.perf_counter()
    h = 1.0 / alpha
    if alpha == 1.0:
        origin, cells = n / 4.0, n // 2 + 1
    else:
        side = n * 0.5 ** (1.0 / 3.0)
        cells = int(round(side / h)) + 1
        origin = 0.5 * (n - 1 - (cells - 1) * h)
    graph = _tg_graph(n, nu, amplitude, (origin, h, cells))
    single = _tg_graph(n, nu, amplitude)
    fine = next(b for b in graph.blocks if b.name == "fine")
    e_multi, e_single, overlap = [], [], 0.0
    for _ in range(steps):
        sch.advance(graph)
        sch.advance(single)
        e_multi.append(composite_kinetic_energy(graph))
        e_single.append(kinetic_energy(single.ref))
        if alpha == 1.0:
            i0 = int(round(origin))
            sl = (slice(None),) + (slice(i0 + 1, i0 + cells - 1),) * 3
            overlap = max(overlap, float(np.abs(graph.ref.f[sl] - fine.f[(slice(None),) + (slice(1, -1),) * 3]).max()))
    e_multi, e_single = np.array(e_multi), np.array(e_single)
    if alpha == 1.0:
        value, tol, passed = overlap, 0.0, overlap == 0.0
    else:
        value = float(np.abs(e_multi / e_single - 1.0).max())
        tol, passed = tolerance, value < tolerance
    return BenchmarkResult(f"two-scale alpha={alpha:g}", value, tol, passed, _time.perf_counter() - t0,
                           {"energy": e_multi, "energy_single": e_single, "origin": origin, "cells": cells})


def shear_layer_run(dims=(64, 32, 32), nu: float = 1e-4, speed: float = 0.1, steps: int = 2000,
                    adaptive: bool = True, pure: bool = False, width: float = 1.0,
                    perturbation: float = 0.05) -> dict:
    """Periodic double shear layer; returns the step reached and whether it stayed finite.

    ``pure`` zeroes every high-order artificial viscosity.
    """
    relax = default_schedule(nu)
    if pure:
        nup = np.array(relax.nu_prime, dtype=float)
        nup[9:] = 0.0
        relax = RelaxationSpec(nu=nu, nu_prime=nup, adaptive=False)
    elif not adaptive:
        relax = RelaxationSpec(nu=nu, nu_prime=relax.nu_prime, adaptive=False)
    blk = ScaleBlock((0, 0, 0), 1.0, dims, relax, periodic=(True,) * 3)
    nx, ny, _ = dims
    x, y, _z = np.meshgrid(*(np.arange(n, dtype=float) for n in dims), indexing="ij")
    ux = np.where(y < ny / 2, speed * np.tanh((y - ny / 4) / width), speed * np.tanh((3 * ny / 4 - y) / width))
    uy = perturbation * speed * np.sin(2.0 * np.pi * x / nx)
    blk.initialize(1.0, np.stack([ux, uy, np.zeros_like(x)]))
    t0 = _time.perf_counter()
    reached = 0
    finite = True
    for s in range(steps):
        try:
            blk.step()
        except (NonPositiveDensityError, FloatingPointError):
            finite = False
            break
        if not np.isfinite(blk.u).all():
            finite = False
            break
        reached = s + 1
    return {"steps": reached, "finite": finite, "seconds": _time.perf_counter() - t0,
            "max_speed": max_speed(blk) if finite else float("nan")}
