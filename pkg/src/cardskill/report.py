"""Machine-readable report emission: verdict.json plus per-figure CSVs.

All writes go through a temp-file-plus-rename so a failed run never
leaves a partial report behind. verdict.json is fully deterministic for
a given input and seed: the embedded manifest timestamps are the data's
own time range, never the wall clock.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from . import __version__
from .records import format_timestamp
from .stattests import VerdictReport

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class RunManifest:
    command_line: List[str]
    config: Dict
    input_digests: Dict[str, str]
    seed: int
    tool_version: str
    data_start: Optional[int]  # ms; first/last outcome in the analyzed data
    data_end: Optional[int]

    def as_dict(self) -> dict:
        return {
            "command_line": list(self.command_line),
            "config": dict(sorted(self.config.items())),
            "input_digests": dict(sorted(self.input_digests.items())),
            "seed": self.seed,
            "tool_version": self.tool_version,
            "data_start": format_timestamp(self.data_start)
            if self.data_start is not None else None,
            "data_end": format_timestamp(self.data_end)
            if self.data_end is not None else None,
        }


def file_digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def build_manifest(
    command_line: Sequence[str],
    config: Dict,
    input_paths: Sequence[str],
    seed: int,
    data_start: Optional[int],
    data_end: Optional[int],
) -> RunManifest:
    return RunManifest(
        command_line=list(command_line),
        config=config,
        input_digests={p: file_digest(p) for p in input_paths},
        seed=seed,
        tool_version=__version__,
        data_start=data_start,
        data_end=data_end,
    )


def atomic_write(path: str, data: bytes) -> None:
    tmp = path + ".tmp"
    with open(tmp, "wb") as f:
        f.write(data)
        f.flush()
        os.fsync(f.fileno())
    os.replace(tmp, path)


def render_verdict_json(report: VerdictReport, manifest: RunManifest) -> bytes:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "manifest": manifest.as_dict(),
        **report.as_dict(),
    }
    return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode("utf-8")


def _csv_bytes(header: Sequence[str], rows) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue().encode("utf-8")


def write_reports(out_dir: str, report: VerdictReport,
                  manifest: RunManifest) -> Dict[str, str]:
    """Write verdict.json and the four figure/table CSVs; returns paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {}

    paths["verdict"] = os.path.join(out_dir, "verdict.json")
    atomic_write(paths["verdict"], render_verdict_json(report, manifest))

    paths["persistence"] = os.path.join(out_dir, "persistence.csv")
    atomic_write(paths["persistence"], _csv_bytes(
        ["user_id", "metric_period_a", "metric_period_b"],
        [(u, repr(a), repr(b)) for u, a, b in report.persistence.pairs],
    ))

    paths["learning"] = os.path.join(out_dir, "learning.csv")
    rows = []
    for x, y in report.learning.binned.points:
        rows.append((x, repr(y)))
    atomic_write(paths["learning"], _csv_bytes(["bin", "mean_metric"], rows))

    paths["qq"] = os.path.join(out_dir, "qq.csv")
    atomic_write(paths["qq"], _csv_bytes(
        ["rank", "percentile", "theoretical_q", "observed_q"],
        [(repr(p.rank), repr(p.percentile), repr(p.theoretical_q),
          repr(p.observed_q)) for p in report.normality.points],
    ))

    paths["quantiles"] = os.path.join(out_dir, "quantiles.csv")
    qrows = []
    if report.quantiles is not None:
        for j, (n, mean, std) in enumerate(report.quantiles.groups, start=1):
            qrows.append((j, n, repr(mean), repr(std)))
    atomic_write(paths["quantiles"], _csv_bytes(
        ["group", "cumulative_players", "mean_win_rate", "std_win_rate"],
        qrows,
    ))
    return paths
