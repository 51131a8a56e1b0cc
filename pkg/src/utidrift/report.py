"""Machine-readable session reports and manifest emission.

A session report is one JSON document carrying matrices, statistics,
change points and every parameter value used, plus one CSV file per
matrix (header row/column of utterance ids, diagonal as the literal token
``NaN``).  Floats are serialized with Python's shortest round-tripping
repr, so reloaded matrices compare bit-for-bit; inside JSON the NaN
diagonal is stored as ``null`` to stay standard-compliant.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis import (ChangePointReport, SessionStats, SimilarityMatrix)
from .ingest import Session

REPORT_NAME = "report.json"


@dataclass
class MetricResult:
    """Everything computed for one measure over a session."""

    matrix: SimilarityMatrix
    stats: SessionStats | None
    change_points: ChangePointReport | None
    params: dict


@dataclass
class SessionReport:
    """Full analysis record for one session, ready for serialization."""

    speaker_id: str
    session_id: str
    utterance_ids: list[str]
    results: dict[str, MetricResult]
    parameters: dict
    artifacts: dict[str, dict[str, str]] = field(default_factory=dict)

    @property
    def n_utterances(self) -> int:
        return len(self.utterance_ids)


def format_stats_line(stats: SessionStats) -> str:
    """One descriptive-statistics line: integers for MSE, 0.xx otherwise."""
    if stats.metric_name == "MSE":
        return f"{stats.metric_name} {stats.mean:.0f} ({stats.std:.0f})"
    return f"{stats.metric_name} {stats.mean:.2f} ({stats.std:.2f})"


# --------------------------------------------------------------------------
# matrix CSV
# --------------------------------------------------------------------------

def _matrix_to_csv(m: SimilarityMatrix) -> str:
    lines = ["id," + ",".join(m.utterance_ids)]
    for i, uid in enumerate(m.utterance_ids):
        cells = [
            "NaN" if np.isnan(x) else repr(float(x)) for x in m.values[i]
        ]
        lines.append(uid + "," + ",".join(cells))
    return "\n".join(lines) + "\n"


def matrix_from_csv(text: str) -> tuple[list[str], np.ndarray]:
    """Parse a matrix CSV back into (utterance_ids, values)."""
    rows = [line.split(",") for line in text.strip().splitlines()]
    ids = rows[0][1:]
    n = len(ids)
    values = np.full((n, n), np.nan)
    for i, row in enumerate(rows[1:]):
        for j, cell in enumerate(row[1:]):
            values[i, j] = float("nan") if cell == "NaN" else float(cell)
    return ids, values


# --------------------------------------------------------------------------
# report JSON
# --------------------------------------------------------------------------

def _matrix_to_jsonable(values: np.ndarray) -> list[list[float | None]]:
    return [[None if np.isnan(x) else float(x) for x in row] for row in values]


def _matrix_from_jsonable(rows: list[list[float | None]]) -> np.ndarray:
    n = len(rows)
    values = np.full((n, n), np.nan)
    for i, row in enumerate(rows):
        for j, x in enumerate(row):
            if x is not None:
                values[i, j] = x
    return values


def _float_or_nan(x) -> float:
    return float("nan") if x is None else float(x)


def report_to_dict(r: SessionReport) -> dict:
    metrics_doc = {}
    for name, res in r.results.items():
        doc: dict = {
            "params": res.params,
            "params_fingerprint": res.matrix.params_fingerprint,
            "matrix": _matrix_to_jsonable(res.matrix.values),
        }
        if res.stats is not None:
            doc["stats"] = {
                "mean": res.stats.mean,
                "std": res.stats.std,
                "n_pairs": res.stats.n_pairs,
            }
        if res.change_points is not None:
            cp = res.change_points
            doc["change_points"] = {
                "boundaries": list(cp.boundaries),
                "block_means": [None if np.isnan(b) else b
                                for b in cp.block_means],
                "threshold_used": cp.threshold_used,
            }
        metrics_doc[name] = doc
    return {
        "speaker_id": r.speaker_id,
        "session_id": r.session_id,
        "n_utterances": r.n_utterances,
        "utterance_ids": r.utterance_ids,
        "metrics": metrics_doc,
        "parameters": r.parameters,
        "artifacts": r.artifacts,
    }


def report_from_dict(doc: dict) -> SessionReport:
    results = {}
    for name, mdoc in doc["metrics"].items():
        matrix = SimilarityMatrix(
            metric_name=name,
            utterance_ids=list(doc["utterance_ids"]),
            values=_matrix_from_jsonable(mdoc["matrix"]),
            params_fingerprint=mdoc["params_fingerprint"],
        )
        stats = None
        if "stats" in mdoc:
            stats = SessionStats(
                metric_name=name,
                mean=mdoc["stats"]["mean"],
                std=mdoc["stats"]["std"],
                n_pairs=mdoc["stats"]["n_pairs"],
            )
        change_points = None
        if "change_points" in mdoc:
            cp = mdoc["change_points"]
            change_points = ChangePointReport(
                metric_name=name,
                boundaries=tuple(cp["boundaries"]),
                block_means=tuple(_float_or_nan(b) for b in cp["block_means"]),
                threshold_used=cp["threshold_used"],
            )
        results[name] = MetricResult(matrix=matrix, stats=stats,
                                     change_points=change_points,
                                     params=mdoc["params"])
    return SessionReport(
        speaker_id=doc["speaker_id"],
        session_id=doc["session_id"],
        utterance_ids=list(doc["utterance_ids"]),
        results=results,
        parameters=doc["parameters"],
        artifacts=doc.get("artifacts", {}),
    )


def write_report(r: SessionReport, out_dir: str | os.PathLike) -> Path:
    """Emit report.json plus one matrix CSV per measure; returns report path.

    CSV paths are recorded in the report's artifacts (relative to the
    output directory, keeping reports location-independent).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_paths = {}
    for name, res in r.results.items():
        fname = f"matrix_{name.lower().replace('-', '')}.csv"
        (out / fname).write_text(_matrix_to_csv(res.matrix))
        csv_paths[name] = fname
    r.artifacts.setdefault("matrices_csv", {}).update(csv_paths)

    path = out / REPORT_NAME
    path.write_text(json.dumps(report_to_dict(r), indent=2, allow_nan=False)
                    + "\n")
    return path


def read_report(path: str | os.PathLike) -> SessionReport:
    """Load a report written by ``write_report``."""
    return report_from_dict(json.loads(Path(path).read_text()))


def write_stats_table(r: SessionReport, out_path: str | os.PathLike) -> Path:
    """Write the per-measure descriptive statistics lines to a text file."""
    path = Path(out_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [format_stats_line(res.stats)
             for res in r.results.values() if res.stats is not None]
    path.write_text("\n".join(lines) + "\n")
    return path


# --------------------------------------------------------------------------
# manifest emission
# --------------------------------------------------------------------------

def write_manifest_session(s: Session, out_dir: str | os.PathLike) -> Path:
    """Write a session as manifest.json plus one raw frame file per utterance.

    The layout round-trips through ``load_manifest_session``: raw uint8
    frames, frame after frame, row-major.  Returns the manifest path.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for u in s.utterances:
        fname = f"{u.id}.raw"
        (out / fname).write_bytes(u.frames.tobytes())
        entries.append({
            "id": u.id,
            "timestamp": u.timestamp,
            "file": fname,
            "width": u.width,
            "height": u.height,
        })
    doc = {
        "speaker_id": s.speaker_id,
        "session_id": s.session_id,
        "utterances": entries,
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path
