"""CSV and fixed-width text reports of evaluation results."""
import csv
import logging
from pathlib import Path
from typing import List, NamedTuple, Sequence, Tuple

from src.grasp_evalbench.evaluate import SPLITS, EvalReport

CSV_COLUMNS = [
    "sampler_id",
    "steps",
    "split",
    "n",
    "successes",
    "rate",
    "harmonic",
    "latency_median_s",
    "latency_p95_s",
    "seed",
    "config_hash",
]
LATENCY_BOUNDARY = (
    "latency covers the sampler call only; "
    "condition encoding and I/O are excluded"
)

logger = logging.getLogger("EVALBENCH")


class ReportRow(NamedTuple):
    sampler_id: str
    steps: int
    split: str
    n: int
    successes: int
    rate: float
    harmonic: float
    latency_median_s: float
    latency_p95_s: float
    seed: int
    config_hash: str


def sort_reports(reports: Sequence[EvalReport]) -> List[EvalReport]:
    return sorted(reports, key=lambda r: (r.sampler_id, r.steps))


def report_rows(reports: Sequence[EvalReport]) -> List[ReportRow]:
    rows = []
    for r in sort_reports(reports):
        for name in SPLITS:
            split = r.split(name)
            rows.append(
                ReportRow(
                    r.sampler_id,
                    r.steps,
                    name,
                    split.n,
                    split.successes,
                    split.rate,
                    r.harmonic,
                    r.latency_median,
                    r.latency_p95,
                    r.seed,
                    r.config_hash,
                )
            )
    return rows


def _cell(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def read_report_csv(path) -> List[ReportRow]:
    types = ReportRow.__annotations__
    try:
        with Path(path).open("r", newline="", encoding="utf-8") as f_obj:
            reader = csv.DictReader(f_obj)
            return [
                ReportRow(**{k: types[k](row[k]) for k in CSV_COLUMNS})
                for row in reader
            ]
    except OSError as err:
        raise OSError(f"{__name__} ERROR: cannot read report {path}: {err}")


def _seeds(reports: Sequence[EvalReport]) -> str:
    return ", ".join(str(s) for s in sorted({r.seed for r in reports}))


def _hashes(reports: Sequence[EvalReport]) -> str:
    return ", ".join(sorted({r.config_hash for r in reports}))


def render_table(reports: Sequence[EvalReport]) -> str:
    reports = sort_reports(reports)
    header = (
        f"{'sampler':<12} {'steps':>6} {'seen':>7} {'unseen':>7} "
        f"{'H':>7} {'median_s':>11} {'p95_s':>11} "
        f"{'n_seen':>7} {'n_unseen':>8}"
    )
    lines = [
        f"# {LATENCY_BOUNDARY}",
        f"# config_hash: {_hashes(reports)}",
        f"# seeds: {_seeds(reports)}",
        header,
        "-" * len(header),
    ]
    for r in reports:
        lines.append(
            f"{r.sampler_id:<12} {r.steps:>6d} {r.seen_rate:>7.3f} "
            f"{r.unseen_rate:>7.3f} {r.harmonic:>7.3f} "
            f"{r.latency_median:>11.6f} {r.latency_p95:>11.6f} "
            f"{r.seen.n:>7d} {r.unseen.n:>8d}"
        )
    lines += [
        "",
        "single / cluttered scenes",
        f"{'sampler':<12} {'steps':>6} {'split':<7} "
        f"{'single':>14} {'cluttered':>14}",
    ]
    for r in reports:
        for name in SPLITS:
            s = r.split(name)
            lines.append(
                f"{r.sampler_id:<12} {r.steps:>6d} {name:<7} "
                f"{f'{s.single_successes}/{s.single_n}':>14} "
                f"{f'{s.cluttered_successes}/{s.cluttered_n}':>14}"
            )
    return "\n".join(lines) + "\n"


def emit_report(
    reports: Sequence[EvalReport], out_dir, stem: str = "report"
) -> Tuple[Path, Path]:
    """Write ``<stem>.csv`` and ``<stem>.txt`` into ``out_dir``."""
    if not reports:
        raise ValueError(f"{__name__} ERROR: no reports to emit")
    out_dir = Path(out_dir)
    csv_path, txt_path = out_dir / f"{stem}.csv", out_dir / f"{stem}.txt"
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        with csv_path.open("w", newline="", encoding="utf-8") as f_obj:
            writer = csv.writer(f_obj)
            writer.writerow(CSV_COLUMNS)
            for row in report_rows(reports):
                writer.writerow([_cell(v) for v in row])
        txt_path.write_text(render_table(reports), encoding="utf-8")
    except OSError as err:
        raise OSError(
            f"{__name__} ERROR: cannot write report to {out_dir}: {err}"
        )
    logger.info(f"Wrote {csv_path} and {txt_path}")
    return csv_path, txt_path
