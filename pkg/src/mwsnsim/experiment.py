"""Scenario parsing, single runs, protocol x mobility x speed x seed sweeps and plot tables."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import Optional, Sequence, Union

from .config import ConfigError, ScenarioConfig
from .kernel import RNG_ALGORITHM
from .metrics import MetricsRecord, Summary, summarize
from .mobility import MODELS
from .protocols.model import PROTOCOLS
from .simulation import World

log = logging.getLogger(__name__)

CSV_COLUMNS = ("protocol", "mobility", "speed_mps", "seed", "nodes", "sent", "delivered_unique",
               "duplicates", "dropped", "in_flight", "loss_pct", "pdr_as_defined", "pdr_unique",
               "config_hash")
AGGREGATE_SEED = "mean"
FAILED = "FAILED"

DEFAULT_SPEEDS = (1.0, 5.0, 10.0, 15.0, 20.0)
DEFAULT_REPLICATIONS = 20

MODEL_ALIASES = {"rwp": "random-waypoint", "random-waypoint": "random-waypoint",
                 "mass": "mass", "linear": "linear"}


@dataclass(frozen=True)
class SweepSpec:
    base: ScenarioConfig = field(default_factory=ScenarioConfig)
    protocols: tuple[str, ...] = PROTOCOLS
    mobility_models: tuple[str, ...] = MODELS
    speeds: tuple[float, ...] = DEFAULT_SPEEDS
    seeds: tuple[int, ...] = tuple(range(1, DEFAULT_REPLICATIONS + 1))

    def __post_init__(self):
        for name in ("protocols", "mobility_models", "speeds", "seeds"):
            if not getattr(self, name):
                raise ConfigError(f"{name}: sweep axis must not be empty")
        bad = [p for p in self.protocols if p not in PROTOCOLS]
        if bad:
            raise ConfigError(f"protocols: unknown {bad}")
        bad = [m for m in self.mobility_models if m not in MODELS]
        if bad:
            raise ConfigError(f"mobility_models: unknown {bad}")
        if any(s < 0 for s in self.speeds):
            raise ConfigError("speeds: must be >= 0")

    def cells(self) -> list[ScenarioConfig]:
        """Run configurations in canonical (protocol, mobility, speed, seed) order."""
        return [replace(self.base, protocol=p, mobility=m, speed=float(v), seed=int(s))
                for p in self.protocols for m in self.mobility_models
                for v in self.speeds for s in self.seeds]


# -- config files -------------------------------------------------------------

_SWEEP_KEYS = {"protocols", "mobility_models", "speeds", "seeds", "base_seed", "replications"}


def _coerce(key: str, raw: str, kind: str):
    if kind == "bool":
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    if kind == "Optional[float]":
        return None if raw.lower() in ("none", "center", "centre") else float(raw)
    if key == "mobility":
        return MODEL_ALIASES.get(raw, raw)
    return raw


def _split(raw: str) -> list[str]:
    return [part.strip() for part in raw.replace(",", " ").split() if part.strip()]


def _sweep_value(key: str, raw: str):
    if key == "protocols":
        return tuple(_split(raw))
    if key == "mobility_models":
        return tuple(MODEL_ALIASES.get(m, m) for m in _split(raw))
    if key == "speeds":
        return tuple(float(v) for v in _split(raw))
    if key == "seeds":
        return tuple(int(v) for v in _split(raw))
    return int(raw)


def parse_config(text: str = "", overrides: Optional[dict] = None,
                 sweep: bool = False) -> Union[ScenarioConfig, SweepSpec]:
    """Parse ``key = value`` lines (``#`` comments); ``overrides`` win over the file.

    Returns a :class:`SweepSpec` when the file uses any sweep key or ``sweep``
    is set, otherwise a :class:`ScenarioConfig`.
    """
    kinds = ScenarioConfig.keys()
    values: dict = {}
    sweep_vals: dict = {}
    where: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: malformed line, expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        if not key or not raw:
            raise ConfigError(f"line {lineno}: malformed line, expected 'key = value'")
        try:
            if key in kinds:
                values[key] = _coerce(key, raw, kinds[key])
            elif key in _SWEEP_KEYS:
                sweep_vals[key] = _sweep_value(key, raw)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: {key}: {exc}") from None
        where[key] = lineno
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        if key in kinds:
            values[key] = _coerce(key, str(val), kinds[key]) if isinstance(val, str) else val
        elif key in _SWEEP_KEYS:
            sweep_vals[key] = val
        else:
            raise ConfigError(f"override: unknown key {key!r}")
        where.pop(key, None)
    try:
        base = ScenarioConfig(**values)
    except ConfigError as exc:
        key = str(exc).split(":", 1)[0]
        if key in where:
            raise ConfigError(f"line {where[key]}: {exc}") from None
        raise
    if not (sweep or sweep_vals):
        return base
    kw = {}
    for key in ("protocols", "mobility_models", "speeds", "seeds"):
        if key in sweep_vals:
            kw[key] = tuple(sweep_vals[key])
    if "seeds" not in kw and ("base_seed" in sweep_vals or "replications" in sweep_vals):
        start = sweep_vals.get("base_seed", 1)
        kw["seeds"] = tuple(range(start, start + sweep_vals.get("replications", DEFAULT_REPLICATIONS)))
    return SweepSpec(base=base, **kw)


# -- runs -----------------------------------------------------------------------

@dataclass(frozen=True)
class RunResult:
    config: ScenarioConfig
    record: Optional[MetricsRecord]
    config_hash: str
    meta: dict
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.record is None


def run_one(cfg: ScenarioConfig, record_events: bool = False, trace_mobility: bool = False,
            world_out: Optional[list] = None) -> RunResult:
    """Run one scenario to completion. Deterministic for a given config."""
    world = World(cfg, record=record_events, trace_mobility=trace_mobility)
    rec = world.run()
    if world_out is not None:
        world_out.append(world)
    meta = {"rng": RNG_ALGORITHM, "events": world.kernel.dispatched,
            "drops": dict(sorted(world.drop_reasons.items())),
            "control": dict(sorted(world.control_messages().items()))}
    return RunResult(cfg, rec, cfg.config_hash(), meta)


def _run_cell(cfg: ScenarioConfig) -> RunResult:
    try:
        return run_one(cfg)
    except Exception as exc:  # a failed cell must not abort the sweep
        return RunResult(cfg, None, cfg.config_hash(), {"rng": RNG_ALGORITHM}, error=repr(exc))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def run_row(res: RunResult) -> list[str]:
    c = res.config
    head = [c.protocol, c.mobility, _fmt(float(c.speed)), str(c.seed), str(c.nodes)]
    r = res.record
    if r is None:
        return head + [FAILED] + [""] * 7 + [res.config_hash]
    return head + [_fmt(x) for x in (r.sent, r.delivered_unique, r.duplicates, r.dropped,
                                     r.in_flight_at_end, r.loss_pct, r.pdr_as_defined,
                                     r.pdr_unique)] + [res.config_hash]


def cell_hash(cfg: ScenarioConfig) -> str:
    echo = cfg.echo()
    echo.pop("seed")
    blob = json.dumps(echo, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


_NUMERIC = ("sent", "delivered_unique", "duplicates", "dropped", "in_flight_at_end",
            "loss_pct", "pdr_as_defined", "pdr_unique")


def aggregate_row(results: Sequence[RunResult]) -> list[str]:
    c = results[0].config
    ok = [r.record for r in results if r.record is not None]
    head = [c.protocol, c.mobility, _fmt(float(c.speed)), AGGREGATE_SEED, str(c.nodes)]
    cols = []
    for name in _NUMERIC:
        vals = [float(getattr(r, name)) for r in ok if getattr(r, name) is not None]
        cols.append(_fmt(summarize(vals).mean) if vals else "")
    return head + cols + [cell_hash(c)]


def to_csv(results: Sequence[RunResult], spec: Optional[SweepSpec] = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    if spec is None:
        for res in results:
            w.writerow(run_row(res))
        return buf.getvalue()
    per_cell = len(spec.seeds)
    for i in range(0, len(results), per_cell):
        group = results[i:i + per_cell]
        for res in group:
            w.writerow(run_row(res))
        w.writerow(aggregate_row(group))
    return buf.getvalue()


def run_sweep(spec: SweepSpec, jobs: int = 1, progress=None) -> str:
    """Run every cell of the sweep and return the CSV text.

    Rows come out in canonical order whatever ``jobs`` is; each run is an
    isolated simulation.
    """
    cells = spec.cells()
    if jobs <= 1:
        results = []
        for i, cfg in enumerate(cells):
            results.append(_run_cell(cfg))
            if progress:
                progress(i + 1, len(cells))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, cells, chunksize=max(1, len(cells) // (4 * jobs))))
    for res in results:
        if res.failed:
            log.warning("cell %s/%s/%s seed %s failed: %s", res.config.protocol, res.config.mobility,
                        res.config.speed, res.config.seed, res.error)
    return to_csv(results, spec)


# -- plot tables ------------------------------------------------------------------

FIGURE_METRIC = {"loss": "loss_pct", "pdr": "pdr_as_defined"}


@dataclass
class PlotTable:
    metric: str
    mobility: str
    speeds: list[float]
    series: dict[str, list[Optional[Summary]]]
    missing: dict[str, list[float]]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["speed_mps"]
        for p in self.series:
            header += [p, f"{p}_ci_low", f"{p}_ci_high"]
        w.writerow(header)
        for k, v in enumerate(self.speeds):
            row = [_fmt(v)]
            for p, vals in self.series.items():
                s = vals[k]
                row += ["", "", ""] if s is None else [_fmt(s.mean), _fmt(s.ci_low), _fmt(s.ci_high)]
            w.writerow(row)
        return buf.getvalue()


def read_rows(csv_text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(csv_text)))


def emit_plotdata(csv_text: str, metric: str, mobility: str,
                  protocols: Sequence[str] = PROTOCOLS) -> PlotTable:
    """Plot-ready table for one figure: x = speed, one series per protocol.

    ``metric`` is ``loss`` or ``pdr``; ``mobility`` accepts ``rwp`` for random
    waypoint. Means and CIs are recomputed from the per-seed rows.
    """
    if metric not in FIGURE_METRIC:
        raise ValueError(f"metric must be one of {sorted(FIGURE_METRIC)}")
    model = MODEL_ALIASES.get(mobility)
    if model is None:
        raise ValueError(f"unknown mobility model {mobility!r}")
    column = FIGURE_METRIC[metric]
    rows = [r for r in read_rows(csv_text)
            if r["mobility"] == model and r["seed"] != AGGREGATE_SEED and r["sent"] != FAILED]
    speeds = sorted({float(r["speed_mps"]) for r in rows})
    series, missing = {}, {}
    for p in protocols:
        vals = []
        for v in speeds:
            cell = [float(r[column]) for r in rows
                    if r["protocol"] == p and float(r["speed_mps"]) == v and r[column] != ""]
            if cell:
                vals.append(summarize(cell))
            else:
                vals.append(None)
                missing.setdefault(p, []).append(v)
        series[p] = vals
    return PlotTable(metric, model, speeds, series, missing)


FIGURES = [(metric, model) for model in ("rwp", "mass", "linear") for metric in ("loss", "pdr")]
