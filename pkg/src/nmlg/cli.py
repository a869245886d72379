"""Command-line entry point.

Usage::

    nmlg <command> [--config FILE] [--key value ...]

Commands: simulate, witness, tomo, nonmarkov, pulse, sweep. Settings come from
defaults, then the config file, then ``--key value`` overrides.

Exit status: 0 success (singular samples only produce a warning), 2 usage
error, 3 invalid configuration, 4 unreadable or malformed input file.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io, model, nonmarkov, pulse, qcore, tomo, witness
from .errors import ConfigError, NmlgError, ScheduleError

log = logging.getLogger("nmlg")

COMMANDS = ("simulate", "witness", "tomo", "nonmarkov", "pulse", "sweep")
EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_INPUT = 0, 2, 3, 4


def _out_dir(cfg: io.RunConfig) -> Path:
    return Path(os.environ.get(io.OUT_DIR_ENV) or cfg.out_dir or ".")


def _out_path(cfg: io.RunConfig, default: str) -> Path:
    p = Path(cfg.out or default)
    return p if p.is_absolute() else _out_dir(cfg) / p


def _svg_path(cfg: io.RunConfig, csv_path: Path) -> Path | None:
    if cfg.svg == "none":
        return None
    if cfg.svg == "auto":
        return csv_path.with_suffix(".svg")
    p = Path(cfg.svg)
    return p if p.is_absolute() else _out_dir(cfg) / p


def _plot(bundle_fn, obj, cfg, csv_path):
    svg = _svg_path(cfg, csv_path)
    if svg is not None:
        from . import plotting

        plotting.emit_svg(getattr(plotting, bundle_fn)(obj), svg)


def cmd_simulate(cfg: io.RunConfig) -> int:
    trace = tomo.simulate_trace(cfg.params, cfg.grid, cfg.prep)
    path = io.write_trace_csv(trace, _out_path(cfg, "trace.csv"))
    _plot("trace_bundle", trace, cfg, path)
    return EXIT_OK


def cmd_witness(cfg: io.RunConfig) -> int:
    report = witness.witness_report(cfg.params, cfg.grid)
    path = io.write_witness_csv(report, _out_path(cfg, "witness.csv"))
    _plot("witness_bundle", report, cfg, path)
    return EXIT_OK


def cmd_tomo(cfg: io.RunConfig) -> int:
    if not cfg.trace:
        raise ConfigError("tomo needs trace=<path to trace CSV>")
    trace = io.parse_trace_csv(cfg.trace)
    series = tomo.infer_fg(trace)
    path = io.write_generator_csv(series, _out_path(cfg, "generator.csv"))
    n_sing = int(np.sum(series.singular))
    if n_sing:
        log.warning("%d singular samples flagged (coherence below threshold)", n_sing)
    _plot("generator_bundle", series, cfg, path)
    return EXIT_OK


def cmd_nonmarkov(cfg: io.RunConfig) -> int:
    report = nonmarkov.divisibility_witness(cfg.params, cfg.grid)
    path = io.write_nm_csv(report, _out_path(cfg, "nonmarkov.csv"))
    print(report.summary())
    if report.note:
        log.info(report.note)
    _plot("nonmarkov_bundle", report, cfg, path)
    return EXIT_OK


def cmd_pulse(cfg: io.RunConfig) -> int:
    try:
        plan = pulse.EffectiveCouplingPlan(cfg.J_hz, cfg.J_eff_hz, cfg.t_s, cfg.n_rep)
        schedule = pulse.xy8_schedule(plan, cfg.pulse_spacing_s or None)
    except ScheduleError as exc:
        raise ConfigError(str(exc)) from None
    path = io.atomic_write_text(_out_path(cfg, "schedule.txt"), schedule.to_text())
    sign = "+" if cfg.prep == "plus" else "-"
    rho0 = pulse.prepare_inputs(sign, cfg.theta_rad)
    final = pulse.simulate_schedule(rho0, schedule)
    direct = pulse.direct_evolution(rho0, cfg.J_eff_hz, cfg.t_s)
    dev = float(np.max(np.abs(final.data - qcore.as_array(direct))))
    print(
        f"schedule={path} events={len(schedule)} pulses={len(schedule.pulses())} "
        f"fidelity={io.fmt(qcore.fidelity(final, direct))} max_abs_diff={dev:.3e}"
    )
    return EXIT_OK


SINGLE = {
    "simulate": cmd_simulate,
    "witness": cmd_witness,
    "tomo": cmd_tomo,
    "nonmarkov": cmd_nonmarkov,
    "pulse": cmd_pulse,
}


def _sweep_point(args: tuple[str, io.RunConfig]) -> int:
    command, cfg = args
    return SINGLE[command](cfg)


def cmd_sweep(cfg: io.RunConfig) -> int:
    if cfg.sweep_command not in SINGLE or cfg.sweep_command == "tomo":
        raise ConfigError(f"cannot sweep command {cfg.sweep_command!r}")
    values = [v.strip() for v in cfg.sweep_values.split(",") if v.strip()]
    if not values:
        raise ConfigError("sweep needs sweep_values=v1,v2,...")
    base = _out_path(cfg, f"{cfg.sweep_command}.csv")
    jobs = []
    for idx, v in enumerate(values):
        point = cfg.with_updates({cfg.sweep_key: v}).validate()
        target = base.with_name(f"{base.stem}_{idx}{base.suffix or '.csv'}")
        jobs.append((cfg.sweep_command, replace(point, out=str(target.resolve()))))
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            codes = list(ex.map(_sweep_point, jobs))
    else:
        codes = [_sweep_point(j) for j in jobs]
    return max(codes)


def _parse_overrides(rest: list[str]) -> dict[str, str]:
    out = {}
    i = 0
    while i < len(rest):
        tok = rest[i]
        if not tok.startswith("--") or len(tok) == 2:
            raise ConfigError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, value = key.split("=", 1)
            i += 1
        elif i + 1 < len(rest):
            value = rest[i + 1]
            i += 2
        else:
            raise ConfigError(f"missing value for --{key}")
        out[key if key in io.CONFIG_KEYS else key.replace("-", "_")] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nmlg", description=__doc__.split("\n\n")[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="flat key=value configuration file")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args, rest = parser.parse_known_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = io.load_config(args.config, _parse_overrides(rest))
    except ConfigError as exc:
        print(f"nmlg: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    handler = cmd_sweep if args.command == "sweep" else SINGLE[args.command]
    try:
        return handler(cfg)
    except ConfigError as exc:
        print(f"nmlg: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NmlgError, OSError) as exc:
        print(f"nmlg: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
