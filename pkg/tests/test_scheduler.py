import types

import numpy as np
import pytest

from cskf import scheduler as sch
from cskf.block import CellFlag, ScaleBlock
from cskf.collision import default_schedule
from cskf.diagnostics import taylor_green_init, two_scale_benchmark
from cskf.lattice import Q, W


def ref_graph(n=16, nu=0.01, periodic=True):
    ref = ScaleBlock((0, 0, 0), 1.0, (n,) * 3, default_schedule(nu), periodic=(periodic,) * 3, name="reference")
    ref.initialize()
    return sch.single_block_graph(ref)


def add(graph, origin, spacing, cells, name, role=sch.ROLE_DOI):
    blk = graph.make_block(sch.BlockSpec((origin,) * 3, spacing, (cells,) * 3, role=role), name=name)
    blk.initialize()
    graph.add_block(blk)
    return blk


@pytest.mark.parametrize("ratio, l", [(2.5, 3), (2.0, 3), (1.4, 2), (3.0, 4), (1.0, 2)])
def test_substep_count(ratio, l):
    assert sch.substep_count(1.0, 1.0 / ratio) == l


def test_single_block_equivalence():
    a = ScaleBlock((0, 0, 0), 1.0, (8,) * 3, default_schedule(0.01), periodic=(True,) * 3)
    b = ScaleBlock((0, 0, 0), 1.0, (8,) * 3, default_schedule(0.01), periodic=(True,) * 3)
    taylor_green_init(a, 0.02)
    taylor_green_init(b, 0.02)
    g = sch.single_block_graph(a)
    for _ in range(5):
        sch.advance(g)
        b.step()
    assert np.array_equal(a.f, b.f)
    assert g.iteration == 5 and g.time == pytest.approx(5.0)


def test_coincident_scale_bit_identical():
    res = two_scale_benchmark(alpha=1.0, n=16, steps=20)
    assert res.value == 0.0


def test_clock_alignment():
    g = ref_graph()
    add(g, 4.0, 1 / 1.4, 12, "fine")
    for _ in range(3):
        sch.advance(g)
    for b in g.blocks:
        assert b.time == pytest.approx(g.time, rel=1e-9)
    g.blocks[1].time += 0.1
    with pytest.raises(sch.MisalignedClockError):
        sch.advance(g)


def test_topology_checks():
    g = ref_graph()
    add(g, 10.0, 0.5, 20, "outside")
    with pytest.raises(sch.TopologyError):
        g.check_topology()
    g = ref_graph()
    g.add_block(g.make_block(sch.BlockSpec((2.0,) * 3, 2.0, (4,) * 3), name="coarse"))
    with pytest.raises(sch.TopologyError):
        g.check_topology()


def nested():
    g = ref_graph()
    s1 = add(g, 4.0, 0.5, 17, "s1")
    s2 = add(g, 6.0, 0.25, 17, "s2")
    return g, s1, s2


def test_nearest_coarser_source():
    g, s1, s2 = nested()
    cells = np.flatnonzero(s2.flags.reshape(-1) == CellFlag.SCALE_BOUNDARY)
    pts = sch._sample_positions(s2, cells)
    cand = sch.coarser_candidates(g, s2)
    owner = sch.assign_sources(pts, cand)
    assert np.all(np.array([cand[o] for o in owner]) == s1)


def test_processing_order(monkeypatch):
    g, s1, s2 = nested()
    order = []
    orig = sch.fine_substep

    def spy(graph, blk, t_n, snaps):
        order.append(blk.name)
        return orig(graph, blk, t_n, snaps)

    monkeypatch.setattr(sch, "fine_substep", spy)
    sch.advance(g)
    assert order == ["s1", "s2"]
    assert [b.name for b in g.blocks] == ["reference", "s1", "s2"]


def test_post_map_keeps_destination_boundary():
    g = ref_graph()
    s1 = add(g, 4.0, 0.5, 17, "s1")
    s2 = add(g, 2.0, 0.25, 25, "s2")
    rng = np.random.default_rng(3)
    s2.initialize(1.0, 0.01 * rng.standard_normal((3,) + s2.dims))
    before = s1.f.copy()
    sch.post_map(g, s2)
    bnd = s1.flags == CellFlag.SCALE_BOUNDARY
    assert np.array_equal(s1.f[:, bnd], before[:, bnd])
    lo, hi = s2.interior_hull
    inside = s1.contains(s1.positions(), interior=False) & np.all(
        (s1.positions() >= lo) & (s1.positions() <= hi), axis=-1) & ~bnd
    assert np.abs(s1.f[:, inside] - before[:, inside]).max() > 1e-6


def test_equilibrium_preserved_across_scales():
    g, s1, s2 = nested()
    for b in g.blocks:
        b.initialize(1.0, (0.02, -0.01, 0.005))
    f_ref = {b.name: b.f.copy() for b in g.blocks}
    sch.advance(g)
    for b in g.blocks:
        assert np.abs(b.f - f_ref[b.name]).max() < 1e-12


def _manufactured(blk, q):
    def step(self, boundary_hook=None):
        self.f[:] = q(self.time + self.dt) * W[:, None, None, None]
        if boundary_hook is not None:
            boundary_hook(self)
        self.time += self.dt
        self.t_local += 1
    blk.step = types.MethodType(step, blk)


def test_fine_substep_quadratic_in_time():
    q = lambda t: 1.0 + 0.1 * t + 0.05 * t * t  # noqa: E731
    g = ref_graph(periodic=False)
    g.ref.mark_scale_boundary()
    fine = add(g, 4.0, 0.4, 16, "fine")
    fine.f[:] = q(0.0) * W[:, None, None, None]
    snaps = {id(b): b.snapshot() for b in g.blocks}
    _manufactured(fine, q)
    l = sch.fine_substep(g, fine, 0.0, snaps)
    assert l == 3
    inner = fine.flags == CellFlag.OVERLAP_INTERIOR
    err = np.abs(fine.f[:, inner] - q(1.0) * W[:, None]).max()
    assert err < 1e-12


def test_coarse_substep_linear_in_time():
    lin = lambda t: 1.0 + 0.2 * t  # noqa: E731
    ref = ScaleBlock((0, 0, 0), 1.0, (8,) * 3, default_schedule(0.01), name="reference")
    ref.initialize()
    g = sch.single_block_graph(ref)
    ffd = add(g, -3.0, 1.5, 11, "ffd", role=sch.ROLE_FFD)
    ffd.f[:] = lin(0.0) * W[:, None, None, None]
    snap = ffd.snapshot()
    _manufactured(ffd, lin)
    sch.coarse_substep(g, ffd, 0.0, snap)
    outside = ~ref.contains(ffd.positions(), interior=True)
    assert g.dt0 / ffd.dt == pytest.approx(2 / 3)
    assert np.abs(ffd.f[:, outside] - lin(1.0) * W[:, None]).max() < 1e-12
