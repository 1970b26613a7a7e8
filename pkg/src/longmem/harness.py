"""Monte Carlo grid runner and bias/variance/MSE reduction.

Every (cell, replication) pair owns an independent Philox stream derived
from ``(master_seed, cell_id, replication)`` through ``numpy.random.SeedSequence``,
so results do not depend on how work is split across processes.
"""
from __future__ import annotations

import concurrent.futures as cf
import hashlib
import json
import logging
import math
import multiprocessing as mp
import os
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _backend
from .baselines import DEFAULT_FORMULA, DEFAULT_SUMMAND, FORMULAS, SUMMANDS, expected_hurst
from .distributions import KINDS, DistributionSpec, sample
from .estimators import DEFAULT_DDOF, METHODS, EstimationError, build_grid, fit_hurst, rs_curve
from .processes import ProcessSpec, generate_increments

__all__ = [
    "RNG_NAME",
    "Cell",
    "CellResult",
    "ConfigError",
    "ExperimentConfig",
    "SummaryRow",
    "derive_stream",
    "run_experiment",
    "summarize",
]

log = logging.getLogger(__name__)

RNG_NAME = "numpy.random.Philox(SeedSequence(master_seed, spawn_key=(cell_id, replication)))"
DEFAULT_LENGTHS = tuple(2**p for p in range(9, 15))
FAILURE_LIMIT = 0.01


class ConfigError(ValueError):
    """Invalid experiment configuration; ``key`` names the offending field."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def _default_distributions() -> tuple:
    return tuple(DistributionSpec(k) for k in KINDS)


def _default_processes() -> tuple:
    return (ProcessSpec("iid"), ProcessSpec("arfima"), ProcessSpec("ar1"))


@dataclass(frozen=True)
class ExperimentConfig:
    master_seed: int
    distributions: tuple = field(default_factory=_default_distributions)
    processes: tuple = field(default_factory=_default_processes)
    lengths: tuple = DEFAULT_LENGTHS
    replications: int = 1000
    methods: tuple = METHODS
    p_min: int = 5
    baseline: str = DEFAULT_FORMULA
    summand: str = DEFAULT_SUMMAND
    common_random_numbers: bool = False
    ddof: int = DEFAULT_DDOF

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        if isinstance(self.master_seed, bool) or not isinstance(self.master_seed, (int, np.integer)) \
                or not 0 <= self.master_seed < 2**64:
            raise ConfigError("seed", f"must be an integer in [0, 2**64), got {self.master_seed!r}")
        set_("master_seed", int(self.master_seed))
        set_("distributions", tuple(self.distributions))
        set_("processes", tuple(self.processes))
        set_("methods", tuple(m.lower() for m in self.methods))
        if not self.distributions:
            raise ConfigError("distributions", "at least one distribution is required")
        if not self.processes:
            raise ConfigError("processes", "at least one process is required")
        if not self.methods or any(m not in METHODS for m in self.methods):
            raise ConfigError("methods", f"choose from {METHODS}, got {list(self.methods)}")
        if not isinstance(self.p_min, int) or self.p_min < 1:
            raise ConfigError("min-power", f"must be a positive integer, got {self.p_min!r}")
        lengths = tuple(self.lengths)
        if not lengths:
            raise ConfigError("lengths", "at least one length is required")
        for n in lengths:
            if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 2 ** (self.p_min + 1):
                raise ConfigError("lengths", f"every length must be an integer >= {2 ** (self.p_min + 1)}, got {n!r}")
            if n & (n - 1):
                raise ConfigError("lengths", f"simulated lengths must be powers of two, got {n}")
        set_("lengths", tuple(int(n) for n in lengths))
        if isinstance(self.replications, bool) or not isinstance(self.replications, int) or self.replications < 2:
            raise ConfigError("replications", f"must be an integer >= 2, got {self.replications!r}")
        if self.ddof not in (0, 1) or isinstance(self.ddof, bool):
            raise ConfigError("variance-ddof", f"must be 0 or 1, got {self.ddof!r}")
        if not isinstance(self.common_random_numbers, bool):
            raise ConfigError("common-random-numbers", "must be true or false")
        if self.baseline not in FORMULAS:
            raise ConfigError("baseline", f"formula must be one of {FORMULAS}, got {self.baseline!r}")
        if self.summand not in SUMMANDS:
            raise ConfigError("baseline", f"summand must be one of {SUMMANDS}, got {self.summand!r}")
        for key, specs in (("distributions", self.distributions), ("processes", self.processes)):
            labels = [s.label for s in specs]
            if len(set(labels)) != len(labels):
                raise ConfigError(key, f"duplicate entries {labels}")

    def cells(self) -> list["Cell"]:
        """Cells in canonical order: method, process, distribution, length (config order)."""
        return [Cell(m, d, p, n) for m in self.methods for p in self.processes
                for d in self.distributions for n in self.lengths]

    def to_dict(self) -> dict:
        return {
            "seed": self.master_seed,
            "distributions": [d.to_dict() for d in self.distributions],
            "processes": [p.to_dict() for p in self.processes],
            "lengths": list(self.lengths),
            "replications": self.replications,
            "methods": list(self.methods),
            "min-power": self.p_min,
            "baseline": {"formula": self.baseline, "summand": self.summand},
            "common-random-numbers": self.common_random_numbers,
            "variance-ddof": self.ddof,
        }


@dataclass(frozen=True)
class Cell:
    method: str
    distribution: DistributionSpec
    process: ProcessSpec
    length: int

    def key(self, with_method: bool = True) -> str:
        parts = {
            "distribution": self.distribution.to_dict(),
            "process": self.process.to_dict(),
            "length": self.length,
        }
        if with_method:
            parts["method"] = self.method
        return json.dumps(parts, sort_keys=True, separators=(",", ":"))

    def stream_id(self, with_method: bool = True) -> int:
        digest = hashlib.blake2b(self.key(with_method).encode(), digest_size=8).digest()
        return int.from_bytes(digest, "little")

    @property
    def labels(self) -> tuple[str, str, str, int]:
        return (self.method, self.distribution.label, self.process.label, self.length)


def derive_stream(master_seed: int, cell_id: int, replication: int) -> np.random.Generator:
    """Independent generator for one replication of one cell."""
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(cell_id), int(replication)))
    return np.random.Generator(np.random.Philox(seq))


@dataclass
class CellResult:
    cell: Cell
    replications: int
    estimates: np.ndarray
    indices: np.ndarray
    failures: list = field(default_factory=list)
    skipped_windows: int = 0
    capped_windows: int = 0

    @property
    def failed(self) -> bool:
        return len(self.failures) > FAILURE_LIMIT * self.replications


def simulate_replication(cell: Cell, p_min: int, rng: np.random.Generator,
                         ddof: int = DEFAULT_DDOF) -> tuple[float, int, int]:
    """One simulated series -> (H estimate, skipped windows, capped windows)."""
    eps = sample(cell.distribution, cell.length + cell.process.burn_in, rng)
    x = generate_increments(cell.process, eps, cell.length)
    if not np.all(np.isfinite(x)):
        raise EstimationError("simulated series overflowed")
    curve = rs_curve(x, build_grid(cell.length, p_min), cell.method, ddof=ddof)
    return fit_hurst(curve).hurst, sum(curve.skipped.values()), sum(curve.capped.values())


def _run_chunk(task):
    cell_pos, cell, p_min, ddof, seed, stream_id, start, stop, backend = task
    if _backend.get_backend() != backend:
        _backend.set_backend(backend)
    out = np.full(stop - start, np.nan)
    failures = []
    skipped = capped = 0
    for r in range(start, stop):
        rng = derive_stream(seed, stream_id, r)
        try:
            h, s, c = simulate_replication(cell, p_min, rng, ddof)
        except (EstimationError, FloatingPointError) as exc:
            failures.append((r, str(exc)))
            continue
        if not math.isfinite(h):
            failures.append((r, "non-finite estimate"))
            continue
        out[r - start] = h
        skipped += s
        capped += c
    return cell_pos, start, out, failures, skipped, capped


def _warm_up() -> None:
    from . import _kernels

    x = np.linspace(-1.0, 1.0, 64) ** 3
    _kernels.ar_filter(x, np.array([0.1, 0.05]))
    _kernels.window_statistics(x, 32, True)
    _kernels.window_statistics(x, 32, False)


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        env = os.environ.get("LONGMEM_WORKERS", "").strip()
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(workers))


def run_experiment(config: ExperimentConfig, workers: int | None = None, chunk: int = 50,
                   progress: Callable[[int, int], None] | None = None,
                   cells: Sequence[Cell] | None = None) -> list[CellResult]:
    """Simulate every cell of ``config`` (or the given subset) and collect H estimates."""
    cells = list(config.cells() if cells is None else cells)
    workers = resolve_workers(workers)
    backend = _backend.get_backend()
    reps = config.replications
    tasks = []
    for pos, cell in enumerate(cells):
        sid = cell.stream_id(with_method=not config.common_random_numbers)
        for start in range(0, reps, chunk):
            tasks.append((pos, cell, config.p_min, config.ddof, config.master_seed, sid,
                          start, min(start + chunk, reps), backend))

    est = [np.full(reps, np.nan) for _ in cells]
    fails: list[list] = [[] for _ in cells]
    skipped = [0] * len(cells)
    capped = [0] * len(cells)

    def collect(results: Iterable):
        done = 0
        for pos, start, out, f, s, c in results:
            est[pos][start:start + out.shape[0]] = out
            fails[pos].extend(f)
            skipped[pos] += s
            capped[pos] += c
            done += 1
            if progress is not None:
                progress(done, len(tasks))

    _warm_up()
    if workers == 1 or len(tasks) == 1:
        collect(map(_run_chunk, tasks))
    else:
        ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else None
        with cf.ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            collect(pool.map(_run_chunk, tasks, chunksize=1))

    results = []
    for pos, cell in enumerate(cells):
        ok = np.isfinite(est[pos])
        res = CellResult(cell, reps, est[pos][ok], np.flatnonzero(ok), sorted(fails[pos]),
                         skipped[pos], capped[pos])
        if res.failures:
            log.warning("%s: %d failed replications", cell.labels, len(res.failures))
        results.append(res)
    return results


@dataclass(frozen=True)
class SummaryRow:
    cell: Cell
    bias: float
    variance: float
    mse: float
    reference: float
    n: int


def reference_hurst(cell: Cell, p_min: int = 5, formula: str = DEFAULT_FORMULA,
                    summand: str = DEFAULT_SUMMAND) -> float:
    """Expected H used as the bias reference for a cell."""
    if cell.process.kind == "arfima":
        return cell.process.hurst
    return expected_hurst(cell.length, p_min, formula, summand)


def summary_stats(estimates: np.ndarray, reference: float) -> tuple[float, float, float]:
    """(bias, population variance, mse) with exactly rounded sums."""
    h = np.asarray(estimates, dtype=float)
    n = h.shape[0]
    if n < 1:
        raise ValueError("no estimates to summarise")
    mean = math.fsum(h) / n
    variance = math.fsum((h - mean) ** 2) / n
    bias = mean - reference
    return bias, variance, bias * bias + variance


def summarize(results: Iterable[CellResult], p_min: int = 5, formula: str = DEFAULT_FORMULA,
              summand: str = DEFAULT_SUMMAND) -> list[SummaryRow]:
    """Bias, variance and MSE per cell; failed cells are left out."""
    rows = []
    for res in results:
        if res.failed:
            log.warning("%s excluded from summary: %d failures", res.cell.labels, len(res.failures))
            continue
        if res.estimates.shape[0] < 2:
            raise ValueError(f"cell {res.cell.labels} has fewer than two successful replications")
        ref = reference_hurst(res.cell, p_min, formula, summand)
        bias, var, mse = summary_stats(res.estimates, ref)
        rows.append(SummaryRow(res.cell, bias, var, mse, ref, int(res.estimates.shape[0])))
    return rows
