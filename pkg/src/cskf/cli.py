"""Command line entry point: ``cskf run|bench|resume``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

THREADS_ENV = "CSKF_THREADS"
EXIT_OK, EXIT_CONFIG, EXIT_BLOWUP, EXIT_BENCH_FAIL = 0, 2, 3, 1

log = logging.getLogger("cskf")

BENCHMARKS = ("taylor-green", "poiseuille", "couette", "two-scale-consistency")


def set_threads(n: Optional[int]) -> None:
    import numba

    if n is None:
        env = os.environ.get(THREADS_ENV)
        n = int(env) if env else None
    if n is not None:
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))


def _parse_params(items: Sequence[str]) -> dict:
    out = {}
    for item in items:
        if "=" not in item:
            raise ValueError(f"benchmark parameter {item!r} is not key=value")
        k, v = item.split("=", 1)
        try:
            out[k.replace("-", "_")] = int(v)
        except ValueError:
            out[k.replace("-", "_")] = float(v)
    return out


def run_benchmark(name: str, params: Optional[dict] = None):
    from . import diagnostics as dg

    params = dict(params or {})
    if name == "taylor-green":
        return dg.taylor_green_benchmark(**params)
    if name == "couette":
        return dg.couette_benchmark(**params)
    if name == "poiseuille":
        if "nx" in params or "ny" in params or "nz" in params:
            params["dims"] = (params.pop("nx", 16), params.pop("ny", 16), params.pop("nz", 64))
        return dg.poiseuille_benchmark(**params)
    if name == "two-scale-consistency":
        params.setdefault("alpha", 1.0)
        return dg.two_scale_benchmark(**params)
    raise ValueError(f"unknown benchmark {name!r}; choose from {', '.join(BENCHMARKS)}")


class BlowupError(RuntimeError):
    pass


def run_loop(graph, cfg, config_text: str, out: Path, tracers=None, log_mode: str = "w") -> None:
    """Advance to ``cfg.run.iterations`` emitting diagnostics, dumps, particles and checkpoints."""
    from . import diagnostics, io
    from . import scheduler as sch
    from .block import NonPositiveDensityError
    from .tracers import advect_rk3, inject, write_particles

    out.mkdir(parents=True, exist_ok=True)
    r = cfg.run
    with open(out / "diagnostics.jsonl", log_mode) as diag:
        while graph.iteration < r.iterations:
            try:
                sch.advance(graph)
            except NonPositiveDensityError as exc:
                raise BlowupError(f"iteration {graph.iteration + 1}: {exc}") from exc
            bad = diagnostics.has_nan(graph)
            if bad is not None:
                raise BlowupError(f"non-finite populations in block {bad!r} at iteration {graph.iteration}")
            if tracers is not None:
                inject(tracers, tracers.inject_rate)
                advect_rk3(tracers, graph, graph.dt0)
            diag.write(diagnostics.report(graph).to_line() + "\n")
            it = graph.iteration
            if r.output_every and it % r.output_every == 0:
                io.dump_fields(graph, out / "fields", it)
                if tracers is not None:
                    (out / "particles").mkdir(exist_ok=True)
                    write_particles(tracers, out / "particles" / f"particles_it{it:06d}.txt")
            if r.checkpoint_every and it % r.checkpoint_every == 0:
                io.checkpoint(graph, out / f"checkpoint_it{it:06d}.npz", tracers, config_text)
    io.checkpoint(graph, out / "checkpoint_final.npz", tracers, config_text)


def _attach_rebuild(graph, cfg) -> None:
    from .scalegen import DynamicRebuilder
    from .scenario import scale_plan

    plan = scale_plan(cfg)
    if plan.dynamic is not None:
        graph.rebuild = DynamicRebuilder(plan.dynamic)
        graph.rebuild_interval = plan.dynamic.rebuild_interval


def run_simulation(cfg, config_text: str, out: Path) -> int:
    from .scenario import build_graph, build_tracers

    graph = build_graph(cfg)
    tracers = build_tracers(cfg)
    log.info("graph: %s", ", ".join(f"{b.name}({b.spacing:g}, {b.dims})" for b in graph.blocks))
    run_loop(graph, cfg, config_text, out, tracers)
    return EXIT_OK


def _cmd_run(args) -> int:
    from . import config as cfgmod

    try:
        cfg = cfgmod.load(args.config)
    except (cfgmod.ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        cfg.run.seed = args.seed
    if args.iterations is not None:
        cfg.run.iterations = args.iterations
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    text = cfgmod.dumps(cfg)
    (out / "config.toml").write_text(text)
    try:
        return run_simulation(cfg, text, out)
    except BlowupError as exc:
        print(f"numerical blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP


def _cmd_resume(args) -> int:
    from . import config as cfgmod
    from . import io
    from .scenario import build_solids, build_tracers

    try:
        _g, _t, text = io.restore(args.checkpoint)
        cfg = cfgmod.parse(text)
    except (io.CheckpointError, cfgmod.ConfigError) as exc:
        print(f"cannot resume: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.iterations is not None:
        cfg.run.iterations = args.iterations
    graph, tracers, _ = io.restore(args.checkpoint, build_solids(cfg), build_tracers(cfg))
    _attach_rebuild(graph, cfg)
    out = Path(args.output_dir)
    try:
        run_loop(graph, cfg, text, out, tracers, log_mode="a")
    except BlowupError as exc:
        print(f"numerical blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    return EXIT_OK


def _cmd_bench(args) -> int:
    try:
        res = run_benchmark(args.name, _parse_params(args.params))
    except (ValueError, TypeError) as exc:
        print(f"benchmark error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(res.line())
    return EXIT_OK if res.passed else EXIT_BENCH_FAIL


def build_parser() -> argparse.ArgumentParser:
    def common(parser, suppress: bool) -> None:
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        parser.add_argument("--threads", type=int, default=d(None),
                            help=f"worker threads (default: ${THREADS_ENV} or all cores)")
        parser.add_argument("--output-dir", default=d("output"),
                            help="directory for dumps, particles and checkpoints")
        parser.add_argument("--seed", type=int, default=d(None), help="override the config's RNG seed")
        parser.add_argument("-v", "--verbose", action="store_true", default=d(False))

    p = argparse.ArgumentParser(prog="cskf", description="Continuous-scale D3Q27 lattice Boltzmann solver")
    common(p, False)
    sub = p.add_subparsers(dest="command", required=True)
    shared = argparse.ArgumentParser(add_help=False)
    common(shared, True)
    r = sub.add_parser("run", parents=[shared], help="run a simulation from a TOML config")
    r.add_argument("config")
    r.add_argument("--iterations", type=int, default=None)
    r.set_defaults(func=_cmd_run)
    b = sub.add_parser("bench", parents=[shared], help="run a verification benchmark")
    b.add_argument("name", choices=BENCHMARKS)
    b.add_argument("params", nargs="*", help="key=value overrides")
    b.set_defaults(func=_cmd_bench)
    s = sub.add_parser("resume", parents=[shared], help="continue from a checkpoint")
    s.add_argument("checkpoint")
    s.add_argument("--iterations", type=int, default=None, help="new total iteration count")
    s.set_defaults(func=_cmd_resume)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    set_threads(args.threads)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
