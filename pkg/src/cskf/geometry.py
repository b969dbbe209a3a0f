"""Solid primitives and voxelization."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class Sphere:
    center: tuple[float, float, float]
    radius: float

    def contains(self, p: np.ndarray) -> np.ndarray:
        d = p - np.asarray(self.center, dtype=float)
        return np.einsum("...k,...k->...", d, d) <= self.radius ** 2


@dataclass(frozen=True)
class Box:
    lo: tuple[float, float, float]
    hi: tuple[float, float, float]

    def contains(self, p: np.ndarray) -> np.ndarray:
        return np.all((p >= np.asarray(self.lo)) & (p <= np.asarray(self.hi)), axis=-1)


@dataclass(frozen=True)
class Tube:
    """Finite cylinder between two axis end points."""
    start: tuple[float, float, float]
    end: tuple[float, float, float]
    radius: float

    def contains(self, p: np.ndarray) -> np.ndarray:
        a = np.asarray(self.start, dtype=float)
        axis = np.asarray(self.end, dtype=float) - a
        length2 = axis @ axis
        d = p - a
        t = (d @ axis) / length2
        radial = d - t[..., None] * axis
        r2 = np.einsum("...k,...k->...", radial, radial)
        return (t >= 0.0) & (t <= 1.0) & (r2 <= self.radius ** 2)


class Mesh:
    """Closed triangle mesh (ASCII STL or OBJ), inside test by ray parity along +z."""

    def __init__(self, triangles: np.ndarray):
        self.triangles = np.asarray(triangles, dtype=float).reshape(-1, 3, 3)
        if len(self.triangles) == 0:
            raise ValueError("mesh has no triangles")

    @classmethod
    def load(cls, path) -> "Mesh":
        path = Path(path)
        text = path.read_text()
        if path.suffix.lower() == ".obj":
            verts, tris = [], []
            for line in text.splitlines():
                parts = line.split()
                if not parts:
                    continue
                if parts[0] == "v":
                    verts.append([float(x) for x in parts[1:4]])
                elif parts[0] == "f":
                    idx = [int(tok.split("/")[0]) - 1 for tok in parts[1:]]
                    for k in range(1, len(idx) - 1):
                        tris.append([idx[0], idx[k], idx[k + 1]])
            v = np.asarray(verts)
            return cls(v[np.asarray(tris)])
        pts = [[float(x) for x in line.split()[1:4]]
               for line in text.splitlines() if line.strip().startswith("vertex")]
        return cls(np.asarray(pts))

    def contains(self, p: np.ndarray) -> np.ndarray:
        shape = p.shape[:-1]
        pts = p.reshape(-1, 3)
        v0, v1, v2 = self.triangles[:, 0], self.triangles[:, 1], self.triangles[:, 2]
        # 2D barycentric test in the xy plane, then crossing height above the point
        e1 = v1[:, :2] - v0[:, :2]
        e2 = v2[:, :2] - v0[:, :2]
        det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        ok = np.abs(det) > 1e-14
        count = np.zeros(len(pts), dtype=np.int64)
        for t in np.nonzero(ok)[0]:
            d = pts[:, :2] - v0[t, :2]
            # tiny skew avoids double counting rays through shared edges
            d = d + 1e-9 * np.array([1.0, 0.7071])
            b1 = (d[:, 0] * e2[t, 1] - d[:, 1] * e2[t, 0]) / det[t]
            b2 = (e1[t, 0] * d[:, 1] - e1[t, 1] * d[:, 0]) / det[t]
            inside = (b1 >= 0) & (b2 >= 0) & (b1 + b2 <= 1)
            z = v0[t, 2] + b1 * (v1[t, 2] - v0[t, 2]) + b2 * (v2[t, 2] - v0[t, 2])
            count += inside & (z > pts[:, 2])
        return (count % 2 == 1).reshape(shape)


def voxelize(solids, origin, spacing: float, dims) -> np.ndarray:
    """Boolean mask of cell centers covered by any solid."""
    pts = cell_centers(origin, spacing, dims)
    mask = np.zeros(tuple(dims), dtype=bool)
    for s in solids:
        mask |= s.contains(pts)
    return mask


def cell_centers(origin, spacing: float, dims) -> np.ndarray:
    axes = [np.asarray(origin[a], dtype=float) + spacing * np.arange(dims[a]) for a in range(3)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
