"""Command-line surface.

Subcommands map one-to-one onto tasks; flags override config fields
(precedence flag > config > default).  On failure a machine-readable error
record is printed to stderr as JSON and the exit code encodes the error
class: 2 config, 3 solver, 4 io, 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .config import ConfigError, RunConfig, load_config, spec_to_dict, TASKS
from .export import write_json
from .lindblad import SolverError
from .sweep import run_sweep
from . import tasks

EXIT_CODES = {"config": 2, "solver": 3, "io": 4, "other": 1}


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    system = cfg.system
    if args.fock_cutoff is not None:
        system = system.with_fock_cutoff(args.fock_cutoff)
    return replace(
        cfg,
        system=system,
        output=args.out if args.out else cfg.output,
        workers=args.workers if args.workers else cfg.workers,
    )


def _out_path(cfg: RunConfig, suffix: str) -> str:
    return cfg.output if cfg.output.endswith(suffix) else cfg.output + suffix


def _run(cfg: RunConfig, args: argparse.Namespace) -> str:
    spec = cfg.system
    if cfg.task == "steady":
        payload = tasks.run_steady_task(spec, cfg.solver)
        path = _out_path(cfg, ".json")
        write_json(payload, path, spec_to_dict(spec))
        print(f"steady: nbar={payload['nbar']:.4f} sz_h={payload['sz_h']:.4f} "
              f"residual={payload['residual']:.2e} -> {path}")
        return path
    if cfg.task == "evolve":
        payload = tasks.run_evolve_task(spec, cfg.evolve, cfg.solver)
        path = _out_path(cfg, ".json")
        write_json(payload, path, spec_to_dict(spec))
        print(f"evolve: nbar(T)={payload['nbar'][-1]:.4f} -> {path}")
        return path
    if cfg.task == "sweep":
        records = run_sweep(cfg, resume=args.resume)
        path = _out_path(cfg, ".csv")
        print(f"sweep -> {path}")
        return path
    if cfg.task == "charfun":
        payload = tasks.run_charfun_task(spec, cfg.charfun, cfg.solver)
        path = _out_path(cfg, ".json")
        write_json(payload, path, spec_to_dict(spec))
        print(f"charfun: nbar={payload['nbar']:.4f} axes={len(payload['axes'])} -> {path}")
        return path
    if cfg.task == "diffusion":
        payload = tasks.run_diffusion_task(spec, cfg.diffusion, cfg.solver)
        path = _out_path(cfg, ".json")
        write_json(payload, path, spec_to_dict(spec))
        print(f"diffusion: rate={payload['rate_rad2_per_ms']:.4f} rad^2/ms -> {path}")
        return path
    if cfg.task == "calibrate-decay":
        payload = tasks.run_calibrate_decay_task(spec)
        path = _out_path(cfg, ".json")
        write_json(payload, path, spec_to_dict(spec))
        print(f"calibrate-decay: gamma_h = 1/{1.0 / payload['effective_gamma_h_per_us']:.2f} us "
              f"-> {path}")
        return path
    if cfg.task == "carrier":
        payload = tasks.run_carrier_task(spec, cfg.carrier, cfg.solver)
        path = _out_path(cfg, ".json")
        write_json(payload, path, spec_to_dict(spec))
        print(f"carrier: {len(payload['traces'])} traces -> {path}")
        return path
    raise ConfigError(f"unhandled task {cfg.task!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phononlaser",
        description="Two-species trapped-ion phonon laser simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for task in TASKS:
        p = sub.add_parser(task, help=f"run the {task} task")
        p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--out", default=None, help="output path (overrides config)")
        p.add_argument("--workers", type=int, default=None, help="worker processes")
        p.add_argument("--fock-cutoff", type=int, default=None, help="motional truncation")
        p.add_argument("--resume", action="store_true", help="resume a checkpointed sweep")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if cfg.task != args.command:
            cfg = replace(cfg, task=args.command)
        if cfg.task == "sweep" and cfg.sweep is None:
            raise ConfigError("task 'sweep' requires a sweep block in the config")
        cfg = _apply_overrides(cfg, args)
        _run(cfg, args)
        return 0
    except ConfigError as exc:
        _emit_error("config", exc)
        return EXIT_CODES["config"]
    except SolverError as exc:
        _emit_error("solver", exc)
        return EXIT_CODES["solver"]
    except OSError as exc:
        _emit_error("io", exc)
        return EXIT_CODES["io"]
    except Exception as exc:  # pragma: no cover - defensive
        _emit_error("other", exc)
        return EXIT_CODES["other"]


def _emit_error(klass: str, exc: Exception):
    print(json.dumps({"error_class": klass, "type": type(exc).__name__, "message": str(exc)}),
          file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
