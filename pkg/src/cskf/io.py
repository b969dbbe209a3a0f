"""Binary field dumps, manifests and checkpoints."""
from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Optional

import numpy as np

from .block import ScaleBlock
from .collision import RelaxationSpec
from .lattice import C, W
from .scheduler import ScaleGraph
from .tracers import TracerSet

MAGIC = b"CSKF"
DUMP_VERSION = 1
CHECKPOINT_VERSION = 1
HEADER = struct.Struct("<4sI3I3dddI")
FIELD_COUNT = 4  # rho, ux, uy, uz


class CheckpointError(ValueError):
    pass


class VersionMismatchError(CheckpointError):
    pass


def block_filename(index: int, iteration: int) -> str:
    return f"block{index:02d}_it{iteration:06d}.cskf"


def write_block(blk: ScaleBlock, path, time: float) -> None:
    """Header then rho (f32 per cell) and u (three f32 per cell), cells ordered x fastest."""
    head = HEADER.pack(MAGIC, DUMP_VERSION, *blk.dims, *blk.origin, blk.spacing, time, FIELD_COUNT)
    rho = np.asarray(blk.rho, dtype="<f4").ravel(order="F")
    u = np.asarray(blk.u, dtype="<f4").transpose(3, 2, 1, 0).reshape(-1)
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(rho.tobytes())
        fh.write(u.tobytes())


def read_block(path) -> tuple[dict, np.ndarray, np.ndarray]:
    raw = Path(path).read_bytes()
    if len(raw) < HEADER.size:
        raise CheckpointError("truncated dump header")
    magic, version, nx, ny, nz, ox, oy, oz, spacing, time, count = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise CheckpointError("not a field dump")
    if version != DUMP_VERSION:
        raise VersionMismatchError(f"dump version {version}, expected {DUMP_VERSION}")
    n = nx * ny * nz
    if len(raw) != HEADER.size + 4 * count * n:
        raise CheckpointError("dump size does not match its header")
    body = np.frombuffer(raw, dtype="<f4", offset=HEADER.size)
    rho = body[:n].reshape((nx, ny, nz), order="F")
    u = body[n:].reshape(nz, ny, nx, 3).transpose(3, 2, 1, 0)
    header = {"dims": (nx, ny, nz), "origin": (ox, oy, oz), "spacing": spacing, "time": time,
              "field_count": count, "version": version}
    return header, rho, u


def dump_fields(graph: ScaleGraph, path, iteration: int) -> list[Path]:
    """One dump per block plus ``manifest_it<iteration>.txt`` listing blocks by spacing, coarsest first."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    rows = []
    for k, blk in enumerate(graph.blocks):
        name = block_filename(k, iteration)
        write_block(blk, out / name, graph.time)
        files.append(out / name)
        rows.append((blk.spacing, name, blk))
    rows.sort(key=lambda r: -r[0])
    lines = [f"# iteration {iteration} time {graph.time!r}", "# file spacing role name origin dims"]
    for spacing, name, blk in rows:
        o = " ".join(repr(float(v)) for v in blk.origin)
        d = " ".join(str(v) for v in blk.dims)
        lines.append(f"{name} {spacing!r} {blk.role} {blk.name or '-'} {o} {d}")
    manifest = out / f"manifest_it{iteration:06d}.txt"
    manifest.write_text("\n".join(lines) + "\n")
    files.append(manifest)
    return files


# --- checkpoints -------------------------------------------------------------

def _lattice_signature() -> np.ndarray:
    return np.concatenate([C.astype(float).ravel(), W])


def checkpoint(graph: ScaleGraph, path, tracers: Optional[TracerSet] = None, config_text: str = "") -> None:
    """Everything needed to continue bit-identically: populations, flags, clocks, tracers, RNG."""
    data = {
        "version": np.array(CHECKPOINT_VERSION),
        "lattice": _lattice_signature(),
        "config": np.array(config_text),
        "graph_meta": np.array(json.dumps({
            "reference": graph.reference, "dt0": graph.dt0, "nu0": graph.nu0, "time": graph.time,
            "iteration": graph.iteration, "rebuild_interval": graph.rebuild_interval,
            "relax": {"nu": graph.relax.nu, "nu_prime": list(map(float, graph.relax.nu_prime)),
                      "a": graph.relax.a, "b": graph.relax.b, "g_max": graph.relax.g_max,
                      "adaptive": graph.relax.adaptive},
            "n_blocks": len(graph.blocks),
        })),
    }
    for k, b in enumerate(graph.blocks):
        meta = {"origin": list(map(float, b.origin)), "spacing": b.spacing, "dims": list(b.dims),
                "periodic": list(b.periodic), "dt": b.dt, "name": b.name, "role": b.role,
                "dynamic": bool(b.dynamic), "t_local": b.t_local, "time": b.time,
                "nu": b.relax.nu}
        data[f"b{k}_meta"] = np.array(json.dumps(meta))
        data[f"b{k}_f"] = b.f
        data[f"b{k}_flags"] = b.flags
        data[f"b{k}_bcu"] = b.bc_velocity
    if tracers is not None:
        data["tracer_positions"] = tracers.positions
        data["tracer_ages"] = tracers.ages
        data["tracer_ids"] = tracers.ids
        data["tracer_meta"] = np.array(json.dumps({
            "next_id": tracers.next_id, "injected": tracers.injected, "culled": tracers.culled,
            "inject_rate": tracers.inject_rate, "rng": tracers.rng.bit_generator.state,
        }))
    with open(path, "wb") as fh:
        np.savez_compressed(fh, **data)


def restore(path, solids=(), tracers: Optional[TracerSet] = None) -> tuple[ScaleGraph, Optional[TracerSet], str]:
    """Rebuild the graph (and tracer state into ``tracers`` if given).

    Returns the graph, the tracer set and the stored config text.
    """
    try:
        npz = np.load(path, allow_pickle=False)
    except (OSError, ValueError) as exc:
        raise CheckpointError(f"cannot read checkpoint: {exc}") from exc
    with npz:
        try:
            version = int(npz["version"])
            lattice = npz["lattice"]
        except KeyError as exc:
            raise CheckpointError("corrupt checkpoint") from exc
        if version != CHECKPOINT_VERSION:
            raise VersionMismatchError(f"checkpoint version {version}, expected {CHECKPOINT_VERSION}")
        sig = _lattice_signature()
        if lattice.shape != sig.shape or not np.array_equal(lattice, sig):
            raise VersionMismatchError("checkpoint was written with a different lattice ordering")
        gm = json.loads(str(npz["graph_meta"]))
        r = gm["relax"]
        relax = RelaxationSpec(nu=r["nu"], nu_prime=np.array(r["nu_prime"]), a=r["a"], b=r["b"],
                               g_max=r["g_max"], adaptive=r["adaptive"])
        blocks = []
        for k in range(gm["n_blocks"]):
            m = json.loads(str(npz[f"b{k}_meta"]))
            b = ScaleBlock(m["origin"], m["spacing"], m["dims"], relax.with_nu(m["nu"]),
                           periodic=m["periodic"], dt=m["dt"], name=m["name"])
            b.role, b.dynamic, b.t_local, b.time = m["role"], m["dynamic"], m["t_local"], m["time"]
            b.f[:] = npz[f"b{k}_f"]
            b.flags[:] = npz[f"b{k}_flags"]
            b.bc_velocity[:] = npz[f"b{k}_bcu"]
            b._topology_dirty = True
            b.update_macroscopics()
            blocks.append(b)
        graph = ScaleGraph(blocks=blocks, reference=gm["reference"], dt0=gm["dt0"], nu0=gm["nu0"],
                           relax=relax, solids=list(solids), time=gm["time"], iteration=gm["iteration"],
                           rebuild_interval=gm["rebuild_interval"])
        if "tracer_meta" in npz.files:
            tm = json.loads(str(npz["tracer_meta"]))
            if tracers is None:
                tracers = TracerSet()
            tracers.positions = np.array(npz["tracer_positions"], dtype=float).reshape(-1, 3)
            tracers.ages = np.array(npz["tracer_ages"], dtype=np.int64)
            tracers.ids = np.array(npz["tracer_ids"], dtype=np.int64)
            tracers.next_id, tracers.injected, tracers.culled = tm["next_id"], tm["injected"], tm["culled"]
            tracers.inject_rate = tm["inject_rate"]
            rng = np.random.default_rng()
            rng.bit_generator.state = tm["rng"]
            tracers.rng = rng
        config_text = str(npz["config"])
    return graph, tracers, config_text
