"""Command-line front end: single runs and sweeps to CSV."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import mobility
from .config import ConfigError
from .experiment import FIGURES, SweepSpec, emit_plotdata, parse_config, run_one, run_sweep, to_csv


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mwsnsim", description=__doc__)
    ap.add_argument("--config", type=Path, help="key = value scenario or sweep file")
    ap.add_argument("--protocol")
    ap.add_argument("--mobility")
    ap.add_argument("--speed", type=float)
    ap.add_argument("--nodes", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--duration", type=float)
    ap.add_argument("--out", type=Path, help="CSV output (default: stdout)")
    ap.add_argument("--sweep", action="store_true", help="run the protocol x mobility x speed x seed sweep")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--trace-events", type=Path, metavar="FILE", help="dump dispatched events (single run)")
    ap.add_argument("--trace-mobility", type=Path, metavar="FILE", help="dump sampled positions (single run)")
    ap.add_argument("--clusters", type=Path, metavar="FILE", help="dump per-round cluster snapshots (single run)")
    ap.add_argument("--plotdata", type=Path, metavar="DIR", help="write the six figure tables (sweep)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    overrides = {"protocol": args.protocol, "mobility": args.mobility, "speed": args.speed,
                 "nodes": args.nodes, "seed": args.seed, "duration": args.duration}
    text = args.config.read_text() if args.config else ""
    try:
        cfg = parse_config(text, overrides, sweep=args.sweep)
    except ConfigError as exc:
        print(f"mwsnsim: config error: {exc}", file=sys.stderr)
        return 2

    if isinstance(cfg, SweepSpec):
        csv_text = run_sweep(cfg, jobs=args.jobs)
        if args.plotdata:
            args.plotdata.mkdir(parents=True, exist_ok=True)
            for metric, model in FIGURES:
                table = emit_plotdata(csv_text, metric, model, cfg.protocols)
                (args.plotdata / f"{metric}_{model}.csv").write_text(table.to_csv())
                for proto, speeds in table.missing.items():
                    logging.warning("%s/%s: %s missing speeds %s", metric, model, proto, speeds)
    else:
        worlds = []
        res = run_one(cfg, record_events=bool(args.trace_events),
                      trace_mobility=bool(args.trace_mobility), world_out=worlds)
        world = worlds[0]
        csv_text = to_csv([res])
        if args.trace_events:
            args.trace_events.write_text("".join(line + "\n" for line in world.kernel.trace_lines()))
        if args.trace_mobility:
            lines = mobility.trace_lines(world.mobility_trace)
            args.trace_mobility.write_text("".join(line + "\n" for line in lines))
        if args.clusters:
            args.clusters.write_text("".join(f"{r}\t{p}\t{h}\t{m}\n" for r, p, h, m in world.snapshots))
    if args.out:
        args.out.write_text(csv_text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(csv_text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
