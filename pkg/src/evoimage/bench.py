"""Batch benchmark runner: evolve a directory of images, report before/after.

Per-image seeds are derived as config.seed XOR splitmix64(index over the
filename-sorted listing), so a partial or parallel run reproduces the
exact rows of a full sequential one.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from ._filters import splitmix64
from .degrade import degrade
from .errors import EmptyDirError, EvoImageError
from .evolve import EvolveConfig, evolve
from .image import load_image
from .trace import save_trace

__all__ = ["BenchRow", "BenchReport", "run_bench", "write_report"]

_IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}

_NUMERIC_COLUMNS = (
    "score_before",
    "score_after",
    "noise_sigma_before",
    "noise_sigma_after",
    "ssim_final",
    "steps_count",
    "wall_time_s",
)


@dataclass(frozen=True)
class BenchRow:
    filename: str
    score_before: float = float("nan")
    score_after: float = float("nan")
    noise_sigma_before: float = float("nan")
    noise_sigma_after: float = float("nan")
    ssim_final: float = float("nan")
    steps_count: int = 0
    wall_time_s: float = float("nan")
    error: str | None = None


@dataclass(frozen=True)
class BenchReport:
    rows: tuple[BenchRow, ...]
    summary: dict[str, float]


def _summarize(rows) -> dict[str, float]:
    ok = [r for r in rows if r.error is None]
    summary = {}
    for col in _NUMERIC_COLUMNS:
        values = [float(getattr(r, col)) for r in ok]
        summary[col] = sum(values) / len(values) if values else float("nan")
    return summary


def _bench_one(path: Path, index: int, config: EvolveConfig, degrade_spec, trace_dir):
    seed_i = config.seed ^ splitmix64(index)
    start = time.perf_counter()
    try:
        img = load_image(path)
        if degrade_spec is not None:
            kind, strength = degrade_spec
            img = degrade(img, kind, strength, seed=seed_i)
        best, trace = evolve(img, replace(config, seed=seed_i))
        wall = time.perf_counter() - start
        if trace_dir is not None:
            save_trace(trace, Path(trace_dir) / f"{path.stem}.trace.json")
        return BenchRow(
            filename=path.name,
            score_before=trace.scores.raw_before,
            score_after=trace.scores.raw_after,
            noise_sigma_before=trace.scores.noise_sigma_before,
            noise_sigma_after=trace.scores.noise_sigma_after,
            ssim_final=trace.scores.ssim_final,
            steps_count=len(trace.steps),
            wall_time_s=wall,
        )
    except EvoImageError as exc:
        return BenchRow(filename=path.name, error=f"{type(exc).__name__}: {exc}")


def run_bench(
    input_dir,
    config: EvolveConfig,
    degrade_spec: tuple[str, float] | None = None,
    trace_dir=None,
    workers: int = 1,
) -> BenchReport:
    """Evolve every image under input_dir and assemble a BenchReport.

    degrade_spec, when given, is a (kind, strength) pair applied before the
    search. Per-image failures become error rows; the run continues.
    """
    config.validate()
    root = Path(input_dir)
    paths = sorted(
        p for p in root.iterdir()
        if p.is_file() and p.suffix.lower() in _IMAGE_SUFFIXES
    ) if root.is_dir() else []
    if not paths:
        raise EmptyDirError(f"no images found under {input_dir}")
    if trace_dir is not None:
        Path(trace_dir).mkdir(parents=True, exist_ok=True)

    if workers <= 1:
        rows = [
            _bench_one(p, i, config, degrade_spec, trace_dir)
            for i, p in enumerate(paths)
        ]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_bench_one, p, i, config, degrade_spec, trace_dir)
                for i, p in enumerate(paths)
            ]
            rows = [f.result() for f in futures]
    rows.sort(key=lambda r: r.filename)
    return BenchReport(tuple(rows), _summarize(rows))


_CSV_FIELDS = ("filename",) + _NUMERIC_COLUMNS + ("error",)


def write_report(report: BenchReport, path) -> None:
    """Write the report as CSV plus an aligned Markdown table alongside.

    The Markdown file shares the CSV's stem with a .md suffix. Both end
    with a MEAN row of the per-column arithmetic means.
    """
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_FIELDS)
        for r in report.rows:
            writer.writerow(_row_cells(r))
        writer.writerow(_mean_cells(report))

    lines = []
    header = list(_CSV_FIELDS)
    table = [_row_cells(r) for r in report.rows] + [_mean_cells(report)]
    widths = [
        max(len(header[i]), *(len(row[i]) for row in table)) for i in range(len(header))
    ]
    lines.append("| " + " | ".join(h.ljust(widths[i]) for i, h in enumerate(header)) + " |")
    lines.append("|" + "|".join("-" * (w + 2) for w in widths) + "|")
    for row in table:
        lines.append(
            "| " + " | ".join(c.ljust(widths[i]) for i, c in enumerate(row)) + " |"
        )
    path.with_suffix(".md").write_text("\n".join(lines) + "\n")


def _fmt(v) -> str:
    if isinstance(v, int):
        return str(v)
    return f"{v:.6f}"


def _row_cells(r: BenchRow) -> list[str]:
    if r.error is not None:
        return [r.filename] + [""] * len(_NUMERIC_COLUMNS) + [r.error]
    return [r.filename] + [_fmt(getattr(r, c)) for c in _NUMERIC_COLUMNS] + [""]


def _mean_cells(report: BenchReport) -> list[str]:
    return ["MEAN"] + [_fmt(report.summary[c]) for c in _NUMERIC_COLUMNS] + [""]
