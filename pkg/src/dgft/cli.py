"""Command line entry point: ``dgft run|sweep|scenario|indicators``.

Exit codes: 0 success, 2 configuration error, 3 numerical blowup (partial
outputs are still written).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import RunConfig
from .errors import ConfigurationError
from .harness import (
    TAU_RULES,
    convergence_study,
    emit_outputs,
    emit_table,
    parse_length,
    run_anti_smoothing_scenario,
    sec6_config,
)
from .timestepper import run

log = logging.getLogger("dgft")

EXIT_OK, EXIT_CONFIG, EXIT_BLOWUP = 0, 2, 3


def _load_config(args) -> RunConfig:
    if args.config and args.preset:
        raise ConfigurationError("give either --config or --preset, not both")
    if args.config:
        return RunConfig.load(args.config)
    h = parse_length(args.h)
    tau = parse_length(args.tau) if args.tau else h / 20.0
    return sec6_config(h, tau, args.T)


def _cmd_run(args, force_indicators: bool = False) -> int:
    cfg = _load_config(args)
    if force_indicators:
        cfg.indicator_stride = cfg.indicator_stride or 1
        cfg.temporal_stride = cfg.temporal_stride or 1
    rec = run(cfg)
    out = args.out or cfg.output_dir or "out"
    emit_outputs(rec, out)
    log.info("status=%s steps=%d x_sc=%.17g transitions=%d -> %s", rec.status,
             rec.steps[-1].step, rec.final_x_sc, len(rec.events), out)
    if rec.status == "blowup":
        log.error("numerical blowup at step %s: %s", rec.failed_step, rec.message)
        return EXIT_BLOWUP
    return EXIT_OK


def _cmd_sweep(args) -> int:
    hmax, hmin = parse_length(args.hmax), parse_length(args.hmin)
    if not 0 < hmin <= hmax:
        raise ConfigurationError(f"need 0 < hmin <= hmax, got {hmin}, {hmax}")
    hs = []
    h = hmax
    while h >= hmin * (1 - 1e-12):
        hs.append(h)
        h /= 2.0
    table = convergence_study(hs, args.rule, args.T, workers=args.workers)
    path = emit_table(table, args.out or "out")
    for r, d, q in zip(table.rows, table.differences, table.ratios):
        log.info("h=%-10.6g tau=%-12.6g x_sc=%-22s diff=%-12s ratio=%s", r.h, r.tau,
                 "" if r.x_sc is None else f"{r.x_sc:.16f}",
                 "" if d is None else f"{d:.5e}", "" if q is None else f"{q:.4f}")
    log.info("wrote %s", path)
    return EXIT_BLOWUP if any(r.status == "blowup" for r in table.rows) else EXIT_OK


def _cmd_scenario(args) -> int:
    rep = run_anti_smoothing_scenario()
    out = Path(args.out or "out")
    for name, rec in rep.records.items():
        emit_outputs(rec, out / name)
    summary = {
        "first_flag_step": rep.first_flag_step,
        "first_flag_boundary_x": None if rep.first_flag is None else rep.first_flag.boundary_x,
        "first_flag_order": None if rep.first_flag is None else rep.first_flag.order,
        "amplitude_D0": rep.amplitude,
        "unstable_status": rep.unstable_status,
        "unstable_failed_step": rep.unstable_failed_step,
        "stable_max_D0": rep.stable_max_D0,
        "stable_flags": rep.stable_flags,
        "recovery_status": rep.recovery_status,
        "recovery_final_t": rep.recovery_final_t,
        "recovery_flags_after_switch": rep.recovery_flags_after_switch,
    }
    (out / "scenario.json").write_text(json.dumps(summary, indent=2) + "\n")
    log.info("first flag at step %s; D0 amplitude at n=24: %.6g (stable max %.6g); "
             "recovery %s", rep.first_flag_step, rep.amplitude_at(24), rep.stable_max_D0,
             "ok" if rep.recovered else "FAILED")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dgft", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def run_args(p):
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--preset", choices=["sec6"], help="built-in Burgers' shock example")
        p.add_argument("--h", default="1/32", help="mesh size for --preset (default 1/32)")
        p.add_argument("--tau", help="time step for --preset (default h/20)")
        p.add_argument("--T", type=float, default=4.0, help="end time for --preset")
        p.add_argument("--out", help="output directory")

    run_args(sub.add_parser("run", help="run one configuration"))
    run_args(sub.add_parser("indicators", help="run with indicators every step"))

    sw = sub.add_parser("sweep", help="convergence study of the shock position")
    sw.add_argument("--rule", choices=sorted(TAU_RULES), default="T1")
    sw.add_argument("--hmin", default="1/64")
    sw.add_argument("--hmax", default="1/2")
    sw.add_argument("--T", type=float, default=4.0)
    sw.add_argument("--workers", type=int)
    sw.add_argument("--preset", choices=["sec6"], default="sec6")
    sw.add_argument("--out")

    sc = sub.add_parser("scenario", help="anti-smoothing scenario")
    sc.add_argument("--out")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s")
    logging.captureWarnings(True)
    try:
        if args.command in ("run", "indicators"):
            if not (args.config or args.preset):
                raise ConfigurationError("give --config PATH or --preset sec6")
            return _cmd_run(args, force_indicators=args.command == "indicators")
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_scenario(args)
    except ConfigurationError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
