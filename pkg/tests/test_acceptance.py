"""Acceptance criteria 1-11. Each test prints one PASS/FAIL line."""
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from cskf import diagnostics as dg
from cskf import moments, rescale
from cskf import scalegen as sg
from cskf import scheduler as sch
from cskf.block import CellFlag, ScaleBlock
from cskf.collision import (adaptive_factor, collide, collide_field, default_schedule,
                            relaxation_diagonal)
from cskf.lattice import C, W
from cskf.tracers import TracerSet, advect_rk3


@pytest.fixture
def verdict(capsys):
    def report(name, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {name}: {detail}")
        assert ok, detail
    return report


def random_states(rng, n, umax=0.2):
    u = rng.uniform(-1, 1, (3, n))
    u *= umax * rng.random(n) / np.linalg.norm(u, axis=0)
    rho = rng.uniform(0.8, 1.2, n)
    f = moments.equilibrium(rho, u)
    return f * (1 + 0.05 * rng.standard_normal(f.shape))


def test_criterion_01_moments(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    res, trip = 0.0, 0.0
    for _ in range(1000):
        u = rng.uniform(-1, 1, 3)
        u *= 0.2 * rng.random() / np.linalg.norm(u)
        b = moments.build_basis(u)
        res = max(res, np.abs(b.M.T @ b.T - np.eye(27)).max())
        f = rng.random(27)
        trip = max(trip, np.abs(moments.from_moments(moments.to_moments(f, b), b) - f).max())
    expected = np.zeros(27)
    expected[[0, 9, 17, 18, 26]] = [1, 1, 1 / 3, 1 / 9, 1 / 27]
    rho = 1.7
    eq = np.abs(moments.equilibrium_moments(rho, (0, 0, 0)) - rho * expected).max()
    secs = time.perf_counter() - t0
    ok = res < 1e-10 and trip < 1e-10 and eq <= 1e-15 and secs < 5
    verdict(1, ok, f"residual {res:.2e}, round trip {trip:.2e}, equilibrium {eq:.1e}, {secs:.2f} s")


def test_criterion_02_conservation(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    n = 100_000
    f = random_states(rng, n)
    before_m, before_p = f.sum(axis=0), C.T @ f
    spec = default_schedule(0.01)
    collide_field(f, np.ones(n, dtype=bool), rng.uniform(1, 5, n), spec, np.empty(n), np.empty((3, n)))
    dm = np.abs(f.sum(axis=0) - before_m).max()
    dp = np.abs(C.T @ f - before_p).max()
    # explicit-basis route on a subset
    g = random_states(rng, 1000)
    S = relaxation_diagonal(spec, 2.0)
    dm1 = dp1 = 0.0
    for k in range(g.shape[1]):
        rho = g[:, k].sum()
        out = collide(g[:, k], rho, C.T @ g[:, k] / rho, S)
        dm1 = max(dm1, abs(out.sum() - rho))
        dp1 = max(dp1, np.abs(C.T @ out - C.T @ g[:, k]).max())
    blk = ScaleBlock((0, 0, 0), 1.0, (16,) * 3, default_schedule(0.01), periodic=(True,) * 3)
    blk.initialize(1.0, 0.02 * rng.standard_normal((3, 16, 16, 16)))
    m0 = blk.f.sum()
    drift = 0.0
    for _ in range(1000):
        blk.step()
        drift = max(drift, abs(blk.f.sum() - m0) / m0)
    secs = time.perf_counter() - t0
    ok = max(dm, dp, dm1, dp1) < 1e-12 and drift < 1e-12 and secs < 60
    verdict(2, ok, f"collide mass {max(dm, dm1):.1e} momentum {max(dp, dp1):.1e}; "
                   f"16^3 mass drift {drift:.1e} over 1000 steps, {secs:.1f} s")


def test_criterion_03_viscosity(verdict):
    t0 = time.perf_counter()
    a = dg.taylor_green_benchmark(n=32, nu=0.01, amplitude=0.02, steps=2000, tolerance=0.03)
    b = dg.taylor_green_benchmark(n=32, nu=0.002, amplitude=0.02, steps=2000, tolerance=0.05)
    secs = time.perf_counter() - t0
    ok = a.passed and b.passed and a.detail["monotone"] and secs < 120
    verdict(3, ok, f"nu=0.01 error {a.value:.2%}, nu=0.002 error {b.value:.2%}, "
                   f"energy monotone {a.detail['monotone']}, {secs:.1f} s")


def test_criterion_04_boundaries(verdict):
    t0 = time.perf_counter()
    c = dg.couette_benchmark(n=16)
    p = dg.poiseuille_benchmark(dims=(16, 16, 64))
    secs = time.perf_counter() - t0
    ok = c.value < 0.01 and p.value < 0.02 and secs < 120
    verdict(4, ok, f"Couette deviation {c.value:.3%}, Poiseuille deviation {p.value:.3%}, {secs:.1f} s")


def test_criterion_05_mapping(verdict):
    rng = np.random.default_rng(5)
    S = relaxation_diagonal(default_schedule(0.01))
    ident = rescale.build_mapping(S, S, 1.0)
    f = random_states(rng, 200)
    id_err = fix_err = trip_err = 0.0
    for k in range(f.shape[1]):
        rho = f[:, k].sum()
        u = C.T @ f[:, k] / rho
        id_err = max(id_err, np.abs(rescale.map_distribution(f[:, k], rho, u, ident) - f[:, k]).max())
        for alpha in (0.5, 1.4, 2.0, 3.7):
            src, dst = default_schedule(0.01), default_schedule(0.01 * alpha)
            fwd = rescale.mapping_between(src, dst, alpha, 1.0)
            back = rescale.mapping_between(dst, src, 1.0, alpha)
            feq = moments.equilibrium(rho, u)[:, 0]
            fix_err = max(fix_err, np.abs(rescale.map_distribution(feq, rho, u, fwd) - feq).max())
            g = rescale.map_distribution(rescale.map_distribution(f[:, k], rho, u, fwd), rho, u, back)
            trip_err = max(trip_err, np.abs(g - f[:, k]).max())
    s1, s2 = np.zeros(27), np.zeros(27)
    s1[4:] = 1.9
    s2[4:] = 1.8
    k4 = rescale.build_mapping(rescale.RelaxationDiagonal(s1), rescale.RelaxationDiagonal(s2), 2.0).K[4]
    ok = id_err < 1e-12 and fix_err < 1e-12 and abs(k4 - 0.527778) < 1e-6 and trip_err < 1e-10
    verdict(5, ok, f"identity {id_err:.1e}, equilibrium {fix_err:.1e}, K_4 {k4:.6f}, round trip {trip_err:.1e}")


def test_criterion_06a_coincident_scales(verdict):
    r = dg.two_scale_benchmark(alpha=1.0, n=32, steps=500)
    verdict("6a", r.passed, f"alpha=1 overlap max difference {r.value:g} over 500 steps, {r.seconds:.1f} s")


def test_criterion_06b_fine_block_energy(verdict):
    r = dg.two_scale_benchmark(alpha=1.4, n=32, steps=500, tolerance=0.05)
    ok = r.passed and r.seconds < 300
    verdict("6b", ok, f"alpha=1.4 max energy deviation {r.value:.2%} (limit 5%), {r.seconds:.1f} s")


def test_criterion_07_temporal(verdict):
    q = lambda t: 1.0 + 0.1 * t + 0.05 * t * t  # noqa: E731
    lin = lambda t: 1.0 + 0.2 * t  # noqa: E731
    import types

    def manufactured(blk, fn):
        def step(self, boundary_hook=None):
            self.f[:] = fn(self.time + self.dt) * W[:, None, None, None]
            if boundary_hook is not None:
                boundary_hook(self)
            self.time += self.dt
        blk.step = types.MethodType(step, blk)

    errs = []
    for ratio in (2.5, 2.0, 1.4, 3.0):
        ref = ScaleBlock((0, 0, 0), 1.0, (16,) * 3, default_schedule(0.01), name="reference")
        ref.initialize()
        g = sch.single_block_graph(ref)
        fine = g.make_block(sch.BlockSpec((4.0,) * 3, 1.0 / ratio, (int(6 * ratio) + 1,) * 3), name="fine")
        g.add_block(fine)
        fine.f[:] = q(0.0) * W[:, None, None, None]
        snaps = {id(b): b.snapshot() for b in g.blocks}
        manufactured(fine, q)
        l = sch.fine_substep(g, fine, 0.0, snaps)
        assert l == sch.substep_count(1.0, 1.0 / ratio)
        inner = fine.flags == CellFlag.OVERLAP_INTERIOR
        errs.append(np.abs(fine.f[:, inner] - q(1.0) * W[:, None]).max())
    ref = ScaleBlock((0, 0, 0), 1.0, (8,) * 3, default_schedule(0.01), name="reference")
    ref.initialize()
    g = sch.single_block_graph(ref)
    ffd = g.make_block(sch.BlockSpec((-3.0,) * 3, 1.5, (11,) * 3, role=sch.ROLE_FFD), name="ffd")
    g.add_block(ffd)
    ffd.f[:] = lin(0.0) * W[:, None, None, None]
    snap = ffd.snapshot()
    manufactured(ffd, lin)
    sch.coarse_substep(g, ffd, 0.0, snap)
    out = ~ref.contains(ffd.positions(), interior=True)
    lin_err = np.abs(ffd.f[:, out] - lin(1.0) * W[:, None]).max()
    ok = max(errs) < 1e-12 and lin_err < 1e-12
    verdict(7, ok, f"quadratic fine substep error {max(errs):.1e}, linear coarse substep error {lin_err:.1e}")


def test_criterion_08_adaptive(verdict):
    spec = default_schedule()
    g = np.linspace(0, 0.5, 501)
    fac = adaptive_factor(g, spec)
    rule = (adaptive_factor(0.0, spec) == 5.0 and adaptive_factor(spec.g_max, spec) == 1.0
            and np.all(np.diff(fac) <= 0) and fac.min() >= 1.0)
    stab = dg.shear_layer_run(dims=(64, 32, 32), nu=1e-4, steps=2000, adaptive=True)
    pure = dg.shear_layer_run(dims=(64, 32, 32), nu=1e-4, steps=2000, pure=True)
    ok = rule and stab["finite"] and stab["steps"] == 2000
    outcome = "blew up at step %d" % (pure["steps"] + 1) if not pure["finite"] else "stayed finite"
    verdict(8, ok, f"factor rule {rule}; adaptive run {stab['steps']} steps finite={stab['finite']} "
                   f"({stab['seconds']:.0f} s); pure CMR {outcome}")


def test_criterion_09_scale_construction(verdict):
    import itertools

    rng = np.random.default_rng(9)
    solid = rng.random((12, 10, 9)) < 0.02
    solid[5, 5, 5] = True
    d = sg.distance_map(solid.shape, 1.0, solid, domain_boundary=False)
    pts = np.argwhere(solid).astype(float)
    dist_err = max(abs(d[p] - np.sqrt(((pts - np.array(p)) ** 2).sum(axis=1)).min())
                   for p in itertools.product(*(range(s) for s in solid.shape)))
    th = [1.0, 2.5, 4.0]
    lv = sg.quantize(d, th)
    brute_lv = np.vectorize(lambda x: 3 - sum(x >= t for t in th))(d)
    quant_ok = np.array_equal(lv, brute_lv)
    # umbra / penumbra against an independent ray oracle
    box = np.zeros((16, 16, 16), dtype=bool)
    box[5:7, 5:11, 5:11] = True
    wake = sg.WakeSpec((-0.5, 7.5, 7.5), 2.0, (1, 0, 0), 16)
    lights = sg.disk_points(wake.center, wake.radius, wake.normal, wake.ray_count)
    probe = np.array([[12.0, y, z] for y in range(0, 16, 3) for z in range(0, 16, 3)], dtype=float)
    frac = sg.occlusion_fraction(box, (0, 0, 0), 1.0, probe, wake)

    def oracle(a, b):
        t = np.linspace(0, 1, 4000)[:, None]
        idx = np.floor(a + t * (b - a) + 0.5).astype(int)
        ok = np.all((idx >= 0) & (idx < 16), axis=1)
        return box[tuple(idx[ok].T)].any()

    ref_frac = np.array([np.mean([oracle(p, l) for l in lights]) for p in probe])
    occ_ok = np.abs(frac - ref_frac).max() <= 1 / 16 + 1e-12
    centre = sg.occlusion_fraction(box, (0, 0, 0), 1.0, np.array([[12.0, 7.5, 7.5]]), wake)[0]
    levels_ok = sg.wake_levels(np.array([1.0, 0.0]), 4).tolist() == [4, 0]
    # dynamic thresholding, cadence and determinism
    u = 0.05 * rng.standard_normal((3, 8, 8, 8))
    m = sg.dynamic_mask(u, 0.05, 0.04, (True,) * 3)
    gn = np.sqrt(sum((0.5 * (np.roll(u[a], -1, b) - np.roll(u[a], 1, b))) ** 2
                     for a in range(3) for b in range(3)))
    dyn_ok = np.array_equal(m, (gn >= 0.05) & (np.linalg.norm(u, axis=0) >= 0.04))

    def jet():
        ref = ScaleBlock((0, 0, 0), 3.0, (16,) * 3, default_schedule(0.01), name="reference")
        x, y, z = np.meshgrid(*(np.arange(16.0),) * 3, indexing="ij")
        v = np.zeros((3, 16, 16, 16))
        v[0] = 0.1 * np.exp(-((y - 8) ** 2 + (z - 8) ** 2) / 4.0)
        ref.initialize(1.0, v)
        return sch.single_block_graph(ref)

    spec = sg.DynamicSpec([0.005, 0.01], [0.02, 0.04], [1.8, 1.1])
    det_ok = ([(s.origin, s.dims) for s in sg.dynamic_scales(jet(), spec)]
              == [(s.origin, s.dims) for s in sg.dynamic_scales(jet(), spec)])
    g = jet()
    rb = sg.DynamicRebuilder(spec)
    g.rebuild, g.rebuild_interval = rb, 40
    for _ in range(81):
        if g.iteration % 40 == 0:
            sch.advance(g)
        else:
            g.iteration += 1
            g.time += g.dt0
            for b in g.blocks:
                b.time = g.time
    cadence_ok = rb.history == [40, 80]
    ok = (dist_err < 1e-12 and quant_ok and occ_ok and centre == 1.0 and levels_ok and dyn_ok
          and det_ok and cadence_ok)
    verdict(9, ok, f"distance error {dist_err:.1e}, quantization {quant_ok}, occlusion {occ_ok} "
                   f"(umbra {centre:g}), dynamic mask {dyn_ok}, deterministic {det_ok}, rebuilds at {rb.history}")


def test_criterion_10_tracers(verdict):
    def rot(q):
        return np.stack([-q[:, 1], q[:, 0], np.zeros(len(q))], axis=1)

    def single(p, dt):
        t = TracerSet()
        t.positions = p.copy()
        t.ages = np.zeros(len(p), dtype=np.int64)
        t.ids = np.arange(len(p))
        advect_rk3(t, rot, dt)
        return t.positions

    p = np.array([[1.0, 0.0, 0.0]])
    exact = lambda dt: np.array([[np.cos(dt), np.sin(dt), 0.0]])  # noqa: E731
    e1 = np.linalg.norm(single(p, 0.1) - exact(0.1))
    e2 = np.linalg.norm(single(p, 0.05) - exact(0.05))
    t = TracerSet()
    t.positions, t.ages, t.ids = p.copy(), np.zeros(1, dtype=np.int64), np.zeros(1, dtype=np.int64)
    for _ in range(1000):
        advect_rk3(t, rot, 0.01)
    drift = abs(np.hypot(*t.positions[0, :2]) - 1.0)
    ok = e1 / e2 >= 7 and drift < 1e-5
    verdict(10, ok, f"convergence ratio {e1 / e2:.2f}, radius drift {drift:.1e}")


SCENE = """
[domain]
lo = [-8.0, -8.0, -8.0]
hi = [40.0, 24.0, 24.0]
doi_lo = [0.0, 0.0, 0.0]
doi_hi = [32.0, 16.0, 16.0]
faces = { "x+" = "outflow" }

[inlet]
face = "x-"
speed = 0.1

[[solids]]
type = "sphere"
center = [8.0, 8.0, 8.0]
radius = 3.0

[fluid]
nu0 = 0.005

[scales]
level_spacings = [2.0, 1.0]
ffd_spacings = [3.0]
quantization = [4.0]

[run]
iterations = 6
output_every = 3
seed = 11

[run.tracers]
enabled = true
inject_rate = 500
"""


def test_criterion_11_determinism(verdict, tmp_path):
    cfg = tmp_path / "scene.toml"
    cfg.write_text(SCENE)
    env = dict(os.environ, NUMBA_NUM_THREADS="4")
    outs = []
    for threads in (1, 4, 2):
        out = tmp_path / f"t{threads}"
        cmd = [sys.executable, "-m", "cskf.cli", "--threads", str(threads), "run", str(cfg),
               "--output-dir", str(out)]
        subprocess.run(cmd, check=True, env=env)
        outs.append(out)
    names = sorted(p.name for p in (outs[0] / "fields").iterdir())
    names += [f"particles/{p.name}" for p in sorted((outs[0] / "particles").iterdir())]
    same = all((o / "fields" / n if not n.startswith("particles") else o / n).read_bytes()
               == (outs[0] / "fields" / n if not n.startswith("particles") else outs[0] / n).read_bytes()
               for o in outs[1:] for n in names)
    verdict(11, same and len(names) > 2,
            f"{len(names)} dump and particle files byte-identical at 1, 2 and 4 threads: {same}")
