import filecmp
import json
from pathlib import Path

import numpy as np
import pytest

from cskf import cli, io
from cskf import config as cfgmod
from cskf import scheduler as sch
from cskf.block import ScaleBlock
from cskf.collision import default_schedule
from cskf.diagnostics import taylor_green_init
from cskf.scalegen import DynamicRebuilder
from cskf.scenario import build_graph
from cskf.tracers import BoxRegion, TracerSet, inject

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def tg_graph(n=8):
    b = ScaleBlock((0, 0, 0), 1.0, (n,) * 3, default_schedule(0.01), periodic=(True,) * 3, name="reference")
    taylor_green_init(b, 0.02)
    return sch.single_block_graph(b)


def test_dump_size(tmp_path):
    b = ScaleBlock((1, 2, 3), 0.5, (4, 4, 4), default_schedule(0.01))
    b.initialize(1.0, (0.01, 0.02, 0.03))
    io.write_block(b, tmp_path / "b.cskf", 1.5)
    assert io.HEADER.size == 64
    assert (tmp_path / "b.cskf").stat().st_size == 64 + 64 * 4 * 4


def test_dump_round_trip(tmp_path):
    g = tg_graph()
    io.write_block(g.ref, tmp_path / "b.cskf", 2.0)
    head, rho, u = io.read_block(tmp_path / "b.cskf")
    assert head["dims"] == (8, 8, 8) and head["time"] == 2.0 and head["spacing"] == 1.0
    assert np.array_equal(rho, g.ref.rho.astype(np.float32))
    assert np.array_equal(u, g.ref.u.astype(np.float32))


def test_dump_layout_x_fastest(tmp_path):
    b = ScaleBlock((0, 0, 0), 1.0, (3, 2, 2), default_schedule(0.01))
    b.initialize()
    b.rho[:] = np.arange(12).reshape(3, 2, 2)
    io.write_block(b, tmp_path / "b.cskf", 0.0)
    body = np.frombuffer((tmp_path / "b.cskf").read_bytes(), "<f4", offset=64)
    assert list(body[:3]) == [b.rho[0, 0, 0], b.rho[1, 0, 0], b.rho[2, 0, 0]]


def test_manifest_sorted(tmp_path):
    g = tg_graph(16)
    fine = g.make_block(sch.BlockSpec((4.0,) * 3, 0.5, (9,) * 3), name="fine")
    fine.initialize()
    g.add_block(fine)
    files = io.dump_fields(g, tmp_path, 3)
    rows = [l.split() for l in files[-1].read_text().splitlines() if not l.startswith("#")]
    spacings = [float(r[1]) for r in rows]
    assert spacings == sorted(spacings, reverse=True) and len(rows) == 2


def test_checkpoint_restore_continues_identically(tmp_path):
    a = tg_graph()
    for _ in range(5):
        sch.advance(a)
    tr = TracerSet(BoxRegion((1, 1, 1), (6, 6, 6)), rng=np.random.default_rng(5))
    inject(tr, 10)
    io.checkpoint(a, tmp_path / "c.npz", tr, "x = 1\n")
    b, tr2, text = io.restore(tmp_path / "c.npz", tracers=TracerSet(BoxRegion((1, 1, 1), (6, 6, 6))))
    assert text == "x = 1\n"
    assert np.array_equal(tr2.positions, tr.positions)
    for _ in range(5):
        sch.advance(a)
        sch.advance(b)
    assert np.array_equal(a.ref.f, b.ref.f)
    assert b.iteration == 10
    inject(tr, 3)
    inject(tr2, 3)
    assert np.array_equal(tr.positions, tr2.positions)


def test_lattice_mismatch(tmp_path):
    io.checkpoint(tg_graph(), tmp_path / "c.npz")
    data = dict(np.load(tmp_path / "c.npz"))
    data["lattice"] = data["lattice"][::-1].copy()
    np.savez(tmp_path / "bad.npz", **data)
    with pytest.raises(io.VersionMismatchError):
        io.restore(tmp_path / "bad.npz")


def test_empty_tracers_round_trip(tmp_path):
    io.checkpoint(tg_graph(), tmp_path / "c.npz", TracerSet())
    _, tr, _ = io.restore(tmp_path / "c.npz")
    assert len(tr) == 0


def test_not_a_checkpoint(tmp_path):
    (tmp_path / "x.npz").write_text("junk")
    with pytest.raises(io.CheckpointError):
        io.restore(tmp_path / "x.npz")


@pytest.mark.parametrize("name", ["minimal.toml", "sphere_static.toml", "jet_dynamic.toml"])
def test_config_round_trip(name):
    cfg = cfgmod.load(CONFIGS / name)
    text = cfgmod.dumps(cfg)
    again = cfgmod.parse(text, cfg.base_dir)
    assert cfgmod.to_dict(again) == cfgmod.to_dict(cfg)
    assert "g_max" in text and "rebuild_interval" in text


@pytest.mark.parametrize("text", [
    "[domain]\nbogus = 1\n",
    "[inlet]\nface = \"x-\"\nspeed = 0.2\n",
    "[[solids]]\ntype = \"mesh\"\npath = \"missing.stl\"\n",
    "[scales]\nffd_spacings = [3.0]\n[domain]\nfaces = { \"x-\" = \"periodic\", \"x+\" = \"periodic\" }\n",
    "[scales.dynamic]\nspacings = [1.0]\n",
    "not toml [",
])
def test_config_errors(text):
    with pytest.raises(cfgmod.ConfigError):
        cfgmod.parse(text)


def test_sphere_schema_builds_seven_levels():
    g = build_graph(cfgmod.load(CONFIGS / "sphere_static.toml"))
    spacings = sorted((b.spacing for b in g.blocks), reverse=True)
    assert spacings == [4.5, 3.0, 2.0, 1.1, 1.0, 0.8, 0.5]
    assert g.dx0 == 2.0


def test_jet_schema_builds_dynamic_levels():
    cfg = cfgmod.load(CONFIGS / "jet_dynamic.toml")
    g = build_graph(cfg)
    assert len(g.blocks) == 1 and g.dx0 == 3.0
    assert isinstance(g.rebuild, DynamicRebuilder) and g.rebuild_interval == 40
    ref = g.ref
    p = ref.positions()
    r2 = (p[..., 1] - 24) ** 2 + (p[..., 2] - 24) ** 2
    u = np.zeros((3,) + ref.dims)
    u[0] = 0.1 * np.exp(-r2 / 36.0) * (p[..., 0] < 40)
    ref.initialize(1.0, u)
    g.rebuild(g, {id(ref): ref.snapshot()})
    dyn = [b for b in g.blocks if b.dynamic]
    assert 1 <= len(dyn) <= 2
    assert {b.spacing for b in dyn} <= {1.8, 1.1}


def run_cli(args):
    return cli.main([str(a) for a in args])


def test_cli_minimal_run(tmp_path):
    assert run_cli(["run", CONFIGS / "minimal.toml", "--output-dir", tmp_path]) == 0
    lines = [json.loads(l) for l in (tmp_path / "diagnostics.jsonl").read_text().splitlines()]
    assert len(lines) == 10
    masses = [l["total_mass"]["reference"] for l in lines]
    assert max(masses) - min(masses) < 1e-9
    assert (tmp_path / "fields" / "manifest_it000010.txt").exists()
    assert (tmp_path / "checkpoint_final.npz").exists()
    assert cfgmod.parse((tmp_path / "config.toml").read_text()).run.iterations == 10


def test_cli_resume_matches(tmp_path):
    cfg = cfgmod.load(CONFIGS / "minimal.toml")
    cfg.run.checkpoint_every = 5
    cfg.domain.initial_velocity = [0.01, 0.0, 0.0]
    (tmp_path / "c.toml").write_text(cfgmod.dumps(cfg))
    assert run_cli(["run", tmp_path / "c.toml", "--output-dir", tmp_path / "a"]) == 0
    assert run_cli(["resume", tmp_path / "a" / "checkpoint_it000005.npz", "--output-dir", tmp_path / "b"]) == 0
    name = "block00_it000010.cskf"
    assert filecmp.cmp(tmp_path / "a" / "fields" / name, tmp_path / "b" / "fields" / name, shallow=False)


def test_cli_config_error(tmp_path, capsys):
    (tmp_path / "bad.toml").write_text("[inlet]\nface = \"x-\"\nspeed = 0.5\n")
    assert run_cli(["run", tmp_path / "bad.toml", "--output-dir", tmp_path]) == 2
    assert "config error" in capsys.readouterr().err


def test_cli_blowup_exit(tmp_path, monkeypatch):
    from cskf import diagnostics

    monkeypatch.setattr(diagnostics, "has_nan", lambda g: "reference")
    assert run_cli(["run", CONFIGS / "minimal.toml", "--output-dir", tmp_path]) == 3


def test_cli_bench(capsys):
    assert run_cli(["--threads", "1", "bench", "two-scale-consistency", "n=16", "steps=3"]) == 0
    assert capsys.readouterr().out.startswith("PASS")
    assert run_cli(["bench", "couette", "steps=5"]) == 1
    assert run_cli(["bench", "couette", "bogus=1"]) == 2
