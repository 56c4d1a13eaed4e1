"""Density sweeps over ER / PA parameters, written as long-format CSV."""
from __future__ import annotations

import csv
import io
import multiprocessing as mp
import os
import statistics
import time
from dataclasses import dataclass, replace
from pathlib import Path
from queue import Empty
from typing import Iterable, Iterator, Sequence

import numpy as np

from .criterion import EvaluateOptions, evaluate, verdict_for
from .generators import GenSpec, generate

SCHEMA_LINE = "# commstruct sweep schema v1"
COLUMNS = ("model", "n", "param", "seed", "tau", "sigma", "theta", "verdict",
           "mean_degree", "status", "wall_time_seconds")
AGG_COLUMNS = ("model", "n", "param", "seeds", "tau", "sigma", "theta", "verdict", "mean_degree")

ER_DEFAULT_GRID = tuple(float(x) for x in np.geomspace(1e-4, 5e-3, 15))
PA_DEFAULT_GRID = tuple(range(1, 13))


@dataclass(frozen=True)
class SweepSpec:
    model: str
    n: int
    grid: tuple
    seeds_per_cell: int = 3
    base_seed: int = 0
    options: EvaluateOptions = EvaluateOptions()

    def __post_init__(self):
        object.__setattr__(self, "model", self.model.upper())
        if self.model not in ("ER", "PA"):
            raise ValueError(f"unknown model {self.model!r}")
        if not self.grid:
            raise ValueError("grid must be non-empty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("grid must be strictly increasing")
        if self.seeds_per_cell < 1:
            raise ValueError("seeds_per_cell must be at least 1")

    def gen_specs(self) -> list[GenSpec]:
        out = []
        for value in self.grid:
            for s in range(self.seeds_per_cell):
                seed = self.base_seed + s
                if self.model == "ER":
                    out.append(GenSpec("ER", self.n, p=float(value), seed=seed))
                else:
                    out.append(GenSpec("PA", self.n, d=int(value), seed=seed))
        return out


@dataclass(frozen=True)
class SweepRow:
    model: str
    n: int
    param: float
    seed: int
    tau: float | None
    sigma: float | None
    theta: float | None
    verdict: str
    mean_degree: float
    status: str = "ok"
    wall_time_seconds: float | None = None

    @property
    def key(self) -> tuple:
        return (self.model, self.n, float(self.param), self.seed)

    def cells(self) -> list[str]:
        def num(x):
            return "" if x is None else repr(float(x))
        param = str(int(self.param)) if self.model == "PA" else repr(float(self.param))
        return [self.model, str(self.n), param, str(self.seed), num(self.tau), num(self.sigma),
                num(self.theta), self.verdict, repr(float(self.mean_degree)), self.status,
                num(self.wall_time_seconds)]

    @classmethod
    def from_cells(cls, cells: dict) -> "SweepRow":
        def num(x):
            return None if x in ("", None) else float(x)
        return cls(cells["model"], int(cells["n"]), float(cells["param"]), int(cells["seed"]),
                   num(cells["tau"]), num(cells["sigma"]), num(cells["theta"]), cells["verdict"],
                   float(cells["mean_degree"]), cells["status"], num(cells["wall_time_seconds"]))


def run_cell(spec: GenSpec, opts: EvaluateOptions) -> SweepRow:
    t0 = time.perf_counter()
    G = generate(spec)
    report = evaluate(G, replace(opts, seed=spec.seed),
                      provenance={"model": spec.model, "param": spec.parameter, "seed": spec.seed})
    elapsed = time.perf_counter() - t0
    return SweepRow(spec.model, spec.n, float(spec.parameter), spec.seed, report.tau, report.sigma,
                    report.theta, report.verdict, 2.0 * G.m / G.n, "ok",
                    round(elapsed, 3) if opts.record_times else None)


def _timeout_row(spec: GenSpec, status: str = "timeout") -> SweepRow:
    # mean degree is known without generating: E[2m/n]
    if spec.model == "ER":
        mean_deg = spec.p * (spec.n - 1)
    else:
        d = spec.d
        mean_deg = 2.0 * (d * (d + 1) // 2 + d * (spec.n - d - 1)) / spec.n
    return SweepRow(spec.model, spec.n, float(spec.parameter), spec.seed, None, None, None,
                    "indeterminate", mean_deg, status, None)


def _worker(spec, opts, queue):
    try:
        queue.put((spec, run_cell(spec, opts)))
    except Exception:  # the parent records a failed cell
        queue.put((spec, None))


def run_jobs(specs: Sequence[GenSpec], opts: EvaluateOptions, workers: int = 1,
             cell_timeout: float | None = None) -> Iterator[SweepRow]:
    """Yield one row per spec, in completion order.

    Runs in-process when ``workers == 1`` and no timeout is set; otherwise
    every cell gets its own process so a slow cell can be terminated.
    """
    if workers <= 1 and cell_timeout is None:
        for spec in specs:
            yield run_cell(spec, opts)
        return
    ctx = mp.get_context("fork")
    queue = ctx.Queue()
    pending = list(specs)
    running: dict = {}
    while pending or running:
        while pending and len(running) < max(1, workers):
            spec = pending.pop(0)
            proc = ctx.Process(target=_worker, args=(spec, opts, queue), daemon=True)
            proc.start()
            running[spec] = (proc, time.monotonic())
        try:
            spec, row = queue.get(timeout=0.2)
        except Empty:
            now = time.monotonic()
            for spec, (proc, started) in list(running.items()):
                if cell_timeout is not None and now - started > cell_timeout:
                    proc.terminate()
                    proc.join()
                    del running[spec]
                    yield _timeout_row(spec)
                elif not proc.is_alive() and proc.exitcode not in (0, None) and queue.empty():
                    del running[spec]
                    yield _timeout_row(spec, "failed")
            continue
        proc, _ = running.pop(spec)
        proc.join()
        yield row if row is not None else _timeout_row(spec, "failed")


def read_rows(path: str | os.PathLike) -> list[SweepRow]:
    with open(path, encoding="utf-8", newline="") as fh:
        first = fh.readline().rstrip("\r\n")
        if first != SCHEMA_LINE:
            raise ValueError(f"{path}: not a sweep file of schema v1")
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != COLUMNS:
            raise ValueError(f"{path}: unexpected columns {reader.fieldnames}")
        return [SweepRow.from_cells(r) for r in reader]


def format_rows(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    buf.write(SCHEMA_LINE + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in sorted(rows, key=lambda r: r.key):
        writer.writerow(row.cells())
    return buf.getvalue()


def run_sweep(spec: SweepSpec, out: str | os.PathLike, workers: int = 1,
              cell_timeout: float | None = None, progress=None) -> list[SweepRow]:
    """Evaluate every (grid value, seed) cell not already present in ``out``.

    Finished rows are appended as they arrive, then the file is rewritten in
    sorted order; re-running a complete sweep leaves the file untouched.
    """
    out = Path(out)
    rows: dict[tuple, SweepRow] = {}
    if out.exists() and out.stat().st_size > 0:
        rows = {r.key: r for r in read_rows(out)}
    todo = [s for s in spec.gen_specs()
            if (s.model, s.n, float(s.parameter), s.seed) not in rows]
    if not todo:
        return sorted(rows.values(), key=lambda r: r.key)
    if not out.exists() or out.stat().st_size == 0:
        out.write_text(format_rows(()), encoding="utf-8")
    with open(out, "a", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in run_jobs(todo, spec.options, workers, cell_timeout):
            rows[row.key] = row
            writer.writerow(row.cells())
            fh.flush()
            if progress is not None:
                progress(row)
    out.write_text(format_rows(rows.values()), encoding="utf-8")
    return sorted(rows.values(), key=lambda r: r.key)


def aggregate_rows(rows: Iterable[SweepRow], stat: str = "mean",
                   thresholds=(0.0, 0.3, 0.3)) -> list[dict]:
    """Per-cell seed aggregate (``mean`` or ``median``) of the ok rows."""
    fn = {"mean": statistics.fmean, "median": statistics.median}[stat]
    cells: dict[tuple, list[SweepRow]] = {}
    for r in rows:
        if r.status == "ok":
            cells.setdefault((r.model, r.n, r.param), []).append(r)
    out = []
    for (model, n, param), group in sorted(cells.items()):
        tau = fn([r.tau for r in group])
        sigma = fn([r.sigma for r in group])
        thetas = [r.theta for r in group if r.theta is not None]
        theta = fn(thetas) if len(thetas) == len(group) else None
        out.append({"model": model, "n": n, "param": param, "seeds": len(group),
                    "tau": tau, "sigma": sigma, "theta": theta,
                    "verdict": verdict_for(tau, sigma, theta, thresholds),
                    "mean_degree": fn([r.mean_degree for r in group])})
    return out


def format_aggregate(agg: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(AGG_COLUMNS)
    for a in agg:
        param = str(int(a["param"])) if a["model"] == "PA" else repr(float(a["param"]))
        writer.writerow([a["model"], a["n"], param, a["seeds"], repr(a["tau"]), repr(a["sigma"]),
                         "" if a["theta"] is None else repr(a["theta"]), a["verdict"],
                         repr(a["mean_degree"])])
    return buf.getvalue()
