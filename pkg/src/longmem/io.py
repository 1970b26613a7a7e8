"""Config parsing, series ingestion and result files."""
from __future__ import annotations

import csv
import json
import math
import platform
from pathlib import Path

import numpy as np

from . import __version__, _backend
from .distributions import DistributionSpec, ParameterError
from .harness import RNG_NAME, CellResult, ConfigError, ExperimentConfig, SummaryRow
from .processes import ProcessSpec, increments_from_levels

__all__ = ["SeriesFormatError", "load_series", "parse_config", "config_from_dict", "write_outputs"]

_TOP_KEYS = {
    "seed", "distributions", "processes", "lengths", "replications", "methods",
    "min-power", "baseline", "common-random-numbers", "variance-ddof",
}

SUMMARY_COLUMNS = ("method", "distribution", "process", "length", "statistic", "value", "reference")
ESTIMATE_COLUMNS = ("method", "distribution", "process", "length", "replication", "hurst")


class SeriesFormatError(ValueError):
    pass


def config_from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    unknown = sorted(set(data) - _TOP_KEYS)
    if unknown:
        raise ConfigError(unknown[0], f"unknown key; valid keys: {', '.join(sorted(_TOP_KEYS))}")
    if "seed" not in data:
        raise ConfigError("seed", "required")
    kwargs: dict = {"master_seed": data["seed"]}
    for key, cls, attr in (("distributions", DistributionSpec, "distributions"),
                           ("processes", ProcessSpec, "processes")):
        if key in data:
            entries = data[key]
            if not isinstance(entries, list):
                raise ConfigError(key, "must be a list")
            try:
                kwargs[attr] = tuple(cls.from_dict(e) for e in entries)
            except (ParameterError, TypeError) as exc:
                raise ConfigError(key, str(exc)) from None
    simple = {"lengths": "lengths", "replications": "replications", "methods": "methods",
              "min-power": "p_min", "common-random-numbers": "common_random_numbers",
              "variance-ddof": "ddof"}
    for key, attr in simple.items():
        if key in data:
            value = data[key]
            if key in ("lengths", "methods"):
                if not isinstance(value, list):
                    raise ConfigError(key, "must be a list")
                value = tuple(value)
            kwargs[attr] = value
    if "baseline" in data:
        base = data["baseline"]
        if isinstance(base, str):
            base = {"formula": base}
        if not isinstance(base, dict) or set(base) - {"formula", "summand"}:
            raise ConfigError("baseline", "expected a formula name or {'formula': ..., 'summand': ...}")
        if "formula" in base:
            kwargs["baseline"] = base["formula"]
        if "summand" in base:
            kwargs["summand"] = base["summand"]
    if "methods" in kwargs and not all(isinstance(m, str) for m in kwargs["methods"]):
        raise ConfigError("methods", "entries must be strings")
    return ExperimentConfig(**kwargs)


def parse_config(path) -> ExperimentConfig:
    """Read an experiment config (JSON) and fill defaults."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise FileNotFoundError(f"config file not found: {path}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<syntax>", f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return config_from_dict(data)


def _parse_number(token: str) -> float | None:
    token = token.strip().strip('"').strip("'")
    try:
        value = float(token)
    except ValueError:
        return None
    return value


def load_series(path, kind: str = "increments") -> np.ndarray:
    """Read one number per line (blank lines ignored, optional header line).

    ``kind='levels'`` differences the values into increments.
    """
    if kind not in ("levels", "increments"):
        raise ValueError(f"kind must be 'levels' or 'increments', got {kind!r}")
    values = []
    seen_content = False
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            fields = text.split(",")
            if len(fields) > 1 and any(f.strip() for f in fields[1:]):
                raise SeriesFormatError(f"{path}: line {lineno}: expected a single column")
            number = _parse_number(fields[0])
            if number is None:
                if not seen_content:
                    seen_content = True  # header
                    continue
                raise SeriesFormatError(f"{path}: line {lineno}: not a number: {fields[0].strip()!r}")
            if not math.isfinite(number):
                raise SeriesFormatError(f"{path}: line {lineno}: non-finite value {fields[0].strip()!r}")
            seen_content = True
            values.append(number)
    arr = np.array(values, dtype=np.float64)
    if kind == "levels":
        if arr.shape[0] < 2:
            raise SeriesFormatError(f"{path}: need at least two levels, found {arr.shape[0]}")
        return increments_from_levels(arr)
    if arr.shape[0] < 1:
        raise SeriesFormatError(f"{path}: no values found")
    return arr


def _fmt(value: float, paper_format: bool) -> str:
    return f"{value:.4f}" if paper_format else repr(float(value))


def summary_records(rows, paper_format: bool = False) -> list[tuple]:
    out = []
    for row in rows:
        method, dist, proc, length = row.cell.labels
        for stat in ("bias", "variance", "mse"):
            out.append((method, dist, proc, str(length), stat, _fmt(getattr(row, stat), paper_format),
                        _fmt(row.reference, paper_format)))
    return out


def write_outputs(rows: list[SummaryRow], out_dir, config: ExperimentConfig | None = None,
                  results: list[CellResult] | None = None, dump_estimates: bool = False,
                  paper_format: bool = False,
                  wall_time: float | None = None, extra: dict | None = None) -> dict:
    """Write ``summary.csv``, optional ``estimates.csv`` and ``run.json``; return the paths."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out_dir}: {exc}") from exc
    paths = {"summary": out_dir / "summary.csv", "run": out_dir / "run.json"}
    with open(paths["summary"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        writer.writerows(summary_records(rows, paper_format))
    if dump_estimates:
        if results is None:
            raise ValueError("dump_estimates needs the per-cell results")
        paths["estimates"] = out_dir / "estimates.csv"
        with open(paths["estimates"], "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(ESTIMATE_COLUMNS)
            for res in results:
                method, dist, proc, length = res.cell.labels
                for idx, h in zip(res.indices.tolist(), res.estimates.tolist()):
                    writer.writerow((method, dist, proc, length, idx, repr(h)))
    meta = {
        "version": __version__,
        "rng": RNG_NAME,
        "backend": _backend.get_backend(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "config": config.to_dict() if config is not None else None,
        "wall_time_seconds": wall_time,
    }
    if results is not None:
        meta["failures"] = [
            {"cell": list(r.cell.labels), "count": len(r.failures), "cell_failed": r.failed,
             "first": [list(f) for f in r.failures[:5]]}
            for r in results if r.failures
        ]
        meta["skipped_windows"] = sum(r.skipped_windows for r in results)
        meta["capped_lags"] = sum(r.capped_windows for r in results)
    if extra:
        meta.update(extra)
    with open(paths["run"], "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths
