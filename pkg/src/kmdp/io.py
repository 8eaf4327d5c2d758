"""CSV/JSON ingestion and emission: datasets, configs, result tables, plot data."""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path

import numpy as np

from .metrics import ConfidenceBand, MetricReport
from .survival import KMCurve, ProbMass, SurvivalData, TimeGrid, build_grid

logger = logging.getLogger(__name__)

# Tuned default bin sizes per (method, dataset name); k_fraction default is
# global. Unknown datasets must set bin_size explicitly.
DEFAULT_BIN_SIZES = {
    "dp-surv": {"gbsg": 1.0, "metabric": 6.0, "support": 2.0},
    "dp-prob": {"gbsg": 2.0, "metabric": 4.0, "support": 6.0},
    "dp-matrix": {"gbsg": 2.0, "metabric": 6.0, "support": 6.0},
}
DEFAULT_K_FRACTION = 0.10
CENTRALIZED_PATHS = {"dp-surv": "A", "dp-prob": "D", "dp-matrix": "M"}
METHOD_FOR_PATH = {
    "A": "dp-surv", "B": "dp-surv", "C": "dp-surv",
    "D": "dp-prob", "E": "dp-prob", "F": "dp-prob",
    "M": "dp-matrix",
}


class ParseError(ValueError):
    """Malformed dataset file; message carries the offending line number."""


def _parse_number(cell: str, line_no: int, what: str) -> float:
    try:
        return float(cell)
    except ValueError:
        raise ParseError(f"line {line_no}: {what} {cell!r} is not a number") from None


def read_survival_csv(path, uncensored_only: bool = True) -> SurvivalData:
    """Load a (duration, event) CSV into a SurvivalData.

    The file may carry a header naming ``duration`` and ``event`` columns
    (extra columns are ignored); without a header the first two columns are
    used. Rows with missing or negative durations, or event flags outside
    {0, 1}, are rejected with their line number.
    """
    path = Path(path)
    durations: list[float] = []
    events: list[int] = []
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        t_col, e_col = 0, 1
        header_seen = False
        for line_no, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if not header_seen:
                header_seen = True
                cells = [c.strip().lower() for c in row]
                if not _is_numeric_row(cells):
                    if "duration" not in cells or "event" not in cells:
                        raise ParseError(
                            f"line {line_no}: header must name 'duration' and 'event' columns"
                        )
                    t_col, e_col = cells.index("duration"), cells.index("event")
                    continue
                if len(row) < 2:
                    raise ParseError(f"line {line_no}: expected duration,event columns")
            if len(row) <= max(t_col, e_col) or not row[t_col].strip() or not row[e_col].strip():
                raise ParseError(f"line {line_no}: missing duration or event value")
            t = _parse_number(row[t_col], line_no, "duration")
            if t < 0:
                raise ParseError(f"line {line_no}: negative duration {t}")
            e = _parse_number(row[e_col], line_no, "event")
            if e not in (0.0, 1.0):
                raise ParseError(f"line {line_no}: event flag must be 0 or 1, got {row[e_col]!r}")
            durations.append(t)
            events.append(int(e))
    n_total = len(durations)
    n_censored = events.count(0)
    logger.info("%s: %d records, %d censored", path.name, n_total, n_censored)
    if uncensored_only:
        durations = [t for t, e in zip(durations, events) if e == 1]
        events = [1] * len(durations)
        logger.info("%s: keeping %d uncensored records", path.name, len(durations))
    if not durations:
        raise ParseError(f"{path}: no usable records")
    return SurvivalData(times=np.array(durations), event_observed=np.array(events))


def _is_numeric_row(cells) -> bool:
    try:
        [float(c) for c in cells if c]
    except ValueError:
        return False
    return True


def write_survival_csv(data: SurvivalData, path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["duration", "event"])
        for t, e in zip(data.times, data.event_observed):
            writer.writerow([_fmt(t), int(e)])


def _fmt(x) -> str:
    return format(float(x), ".12g")


def emit_plotdata(curve: KMCurve, path, band: ConfidenceBand | None = None) -> None:
    """Write step-function vertices: two rows per grid point.

    Row pair for point j is (t_j, value before the drop) then (t_j, value
    after), so plotting the rows in order draws the exact step function.
    Band columns appear only when a band is supplied.
    """
    points = curve.grid.points
    columns = ["time", "survival"] + (["lower", "upper"] if band is not None else [])

    def series(values):
        prev = np.concatenate(([values[0]], values[:-1]))
        return np.stack([prev, values], axis=1).ravel()

    t_rows = np.repeat(points, 2)
    s_rows = series(curve.values)
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        if band is None:
            for t, s in zip(t_rows, s_rows):
                writer.writerow([_fmt(t), _fmt(s)])
        else:
            lo, hi = series(band.lower), series(band.upper)
            for t, s, l, u in zip(t_rows, s_rows, lo, hi):
                writer.writerow([_fmt(t), _fmt(s), _fmt(l), _fmt(u)])


def curve_to_json(curve: KMCurve) -> dict:
    return {
        "kind": "km-curve",
        "bin_size": curve.grid.bin_size,
        "t_max": curve.grid.t_max,
        "values": curve.values.tolist(),
    }


def prob_to_json(prob: ProbMass) -> dict:
    return {
        "kind": "prob-mass",
        "bin_size": prob.grid.bin_size,
        "t_max": prob.grid.t_max,
        "values": prob.values.tolist(),
    }


def counts_to_json(counts) -> dict:
    return {
        "kind": "count-matrix",
        "bin_size": counts.grid.bin_size,
        "t_max": counts.grid.t_max,
        "n_initial": counts.n_initial,
        "events": counts.events.tolist(),
        "censored": counts.censored.tolist(),
    }


def _grid_from_json(obj: dict) -> TimeGrid:
    return build_grid(obj["t_max"], obj["bin_size"])


def prob_from_json(obj: dict) -> ProbMass:
    if obj.get("kind") != "prob-mass":
        raise ValueError(f"expected a prob-mass artifact, got kind={obj.get('kind')!r}")
    return ProbMass(grid=_grid_from_json(obj), values=np.asarray(obj["values"], dtype=float))


def write_json(obj, path) -> None:
    with Path(path).open("w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path) -> dict:
    with Path(path).open() as fh:
        return json.load(fh)


_CONFIG_KEYS = {
    "dataset": (str, None),
    "dataset_name": (str, ""),
    "uncensored_only": (bool, True),
    "method": (str, None),
    "path": (str, "centralized"),
    "epsilons": (list, None),
    "bin_size": ((int, float), 0.0),
    "t_max": ((int, float), 0.0),
    "k_fraction": ((int, float), DEFAULT_K_FRACTION),
    "prob_sensitivity_factor": ((int, float), 2.0),
    "n_clients": (int, 10),
    "split": (str, "even"),
    "minority_fraction": ((int, float), 0.0),
    "surrogate_size": (int, 0),
    "resplit_per_run": (bool, False),
    "runs": (int, None),
    "master_seed": (int, None),
    "n_resamples": (int, 10000),
    "alpha": ((int, float), 0.05),
    "output_dir": (str, ""),
}
_REQUIRED_KEYS = ("dataset", "method", "epsilons", "runs", "master_seed")


def resolve_experiment_config(raw: dict) -> dict:
    """Validate a raw experiment config and fill defaults.

    Unknown keys are errors (silent typos would corrupt golden comparisons).
    The returned dict has every key populated, so it can be embedded in
    result files and replayed verbatim.
    """
    unknown = set(raw) - set(_CONFIG_KEYS)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    missing = [k for k in _REQUIRED_KEYS if raw.get(k) is None]
    if missing:
        raise ValueError(f"missing required config keys: {missing}")
    cfg = {}
    for key, (types, default) in _CONFIG_KEYS.items():
        value = raw.get(key, default)
        if value is None and key not in _REQUIRED_KEYS:
            value = default
        if key in raw and not isinstance(raw[key], types) and raw[key] is not None:
            raise ValueError(f"config key {key!r} has wrong type {type(raw[key]).__name__}")
        cfg[key] = value
    if cfg["method"] not in DEFAULT_BIN_SIZES:
        raise ValueError(f"method must be one of {sorted(DEFAULT_BIN_SIZES)}, got {cfg['method']!r}")
    path = cfg["path"]
    if path != "centralized":
        if path not in METHOD_FOR_PATH:
            raise ValueError(f"path must be centralized or one of {sorted(METHOD_FOR_PATH)}")
        if METHOD_FOR_PATH[path] != cfg["method"]:
            raise ValueError(f"path {path} belongs to {METHOD_FOR_PATH[path]}, not {cfg['method']}")
    if not cfg["epsilons"] or not all(
        isinstance(e, (int, float)) and e > 0 for e in cfg["epsilons"]
    ):
        raise ValueError("epsilons must be a nonempty list of positive numbers")
    if not cfg["bin_size"]:
        name = cfg["dataset_name"].lower()
        table = DEFAULT_BIN_SIZES[cfg["method"]]
        if name not in table:
            raise ValueError(
                "bin_size not given and dataset_name has no default; "
                f"known names: {sorted(table)}"
            )
        cfg["bin_size"] = table[name]
    return cfg


_METRIC_COLUMNS = ["p", "median", "s25", "s50", "s75"]


def results_csv_rows(results: dict) -> list:
    """Flatten a results dict into CSV rows (header first). Deterministic."""
    header = ["path", "epsilon"]
    for m in _METRIC_COLUMNS:
        header += [f"{m}_mean", f"{m}_lo", f"{m}_hi"]
    rows = [header]
    ref = results.get("reference")
    if ref is not None:
        row = ["non-private", "", "", "", ""]
        for m in _METRIC_COLUMNS[1:]:
            entry = ref[m]
            row += [_cell(entry["value"]), _cell(entry["ci"][0]), _cell(entry["ci"][1])]
        rows.append(row)
    for entry in results["rows"]:
        row = [entry["path"], _cell(entry["epsilon"])]
        for m in _METRIC_COLUMNS:
            s = entry["metrics"][m]
            row += [_cell(s["mean"]), _cell(s["lower"]), _cell(s["upper"])]
        rows.append(row)
    return rows


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float) and np.isnan(x):
        return "nan"
    return _fmt(x) if isinstance(x, (int, float)) else str(x)


def write_results_csv(results: dict, path) -> None:
    with Path(path).open("w", newline="") as fh:
        csv.writer(fh).writerows(results_csv_rows(results))


def report_to_json(report: MetricReport) -> dict:
    def pair(ci):
        return [None, None] if ci is None else [ci[0], ci[1]]

    return {
        "p": {"value": report.p_value, "ci": [None, None]},
        "median": {"value": report.median, "ci": pair(report.median_ci)},
        "s25": {"value": report.survival[0.25], "ci": pair(report.survival_ci[0.25])},
        "s50": {"value": report.survival[0.5], "ci": pair(report.survival_ci[0.5])},
        "s75": {"value": report.survival[0.75], "ci": pair(report.survival_ci[0.75])},
    }
