"""End-to-end session analysis: measures, statistics, flags, artifacts.

``analyze_session`` runs the full procedure on a loaded session: one mean
image per utterance, an all-pairs matrix per requested measure, descriptive
statistics, change-point flags, and (optionally) heatmap/wedge images and
the machine-readable report on disk.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, asdict
from pathlib import Path

from . import analysis, render, report
from .analysis import (DEFAULT_CONTRAST_FACTOR, DEFAULT_MAX_DEPTH,
                       METRIC_NAMES)
from .ingest import Session
from .metrics import CwSsimParams, SsimParams
from .render import HeatmapSpec, WedgeSpec
from .report import MetricResult, SessionReport

EMIT_CHOICES = ("heatmaps", "wedges", "report", "stats")

# Per the published figures: perceptual palette for the error measure and
# SSIM, grayscale for CW-SSIM.
_METRIC_COLORMAPS = {"MSE": "viridis", "SSIM": "viridis", "CW-SSIM": "gray"}


@dataclass
class AnalysisConfig:
    """Knobs for ``analyze_session``; defaults reproduce the standard run."""

    metrics: tuple[str, ...] = METRIC_NAMES
    ssim_params: SsimParams = field(default_factory=SsimParams)
    cwssim_params: CwSsimParams = field(default_factory=CwSsimParams)
    changepoint_factor: float = DEFAULT_CONTRAST_FACTOR
    changepoint_max_depth: int = DEFAULT_MAX_DEPTH
    jobs: int = 1
    emit: tuple[str, ...] = ()
    out_dir: Path | None = None
    heatmap: HeatmapSpec = field(default_factory=HeatmapSpec)
    wedge: WedgeSpec = field(default_factory=WedgeSpec)

    def validate(self) -> None:
        for m in self.metrics:
            if m not in METRIC_NAMES:
                raise ValueError(f"unknown metric {m!r}; expected subset of "
                                 f"{METRIC_NAMES}")
        for e in self.emit:
            if e not in EMIT_CHOICES:
                raise ValueError(f"unknown artifact {e!r}; expected subset of "
                                 f"{EMIT_CHOICES}")
        if self.emit and self.out_dir is None:
            raise ValueError("emitting artifacts requires an output directory")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")


def _params_for(config: AnalysisConfig, metric_name: str):
    if metric_name == "SSIM":
        return config.ssim_params
    if metric_name == "CW-SSIM":
        return config.cwssim_params
    return None


def analyze_session(s: Session, config: AnalysisConfig = AnalysisConfig()) -> SessionReport:
    """Run the misalignment analysis and emit requested artifacts.

    Returns a report carrying, per measure: the similarity matrix,
    off-diagonal statistics (n >= 2), change-point flags (n >= 4), and all
    parameter values used.  Artifact paths in the report are relative to
    ``config.out_dir``.
    """
    config.validate()
    s.validate()

    results: dict[str, MetricResult] = {}
    for name in config.metrics:
        params = _params_for(config, name)
        matrix = analysis.similarity_matrix(s, name, params, jobs=config.jobs)
        stats = analysis.session_stats(matrix) if matrix.n >= 2 else None
        change_points = (
            analysis.detect_change_points(
                matrix,
                threshold_factor=config.changepoint_factor,
                max_depth=config.changepoint_max_depth,
            )
            if matrix.n >= 4
            else None
        )
        results[name] = MetricResult(
            matrix=matrix,
            stats=stats,
            change_points=change_points,
            params={} if params is None else asdict(params),
        )

    rep = SessionReport(
        speaker_id=s.speaker_id,
        session_id=s.session_id,
        utterance_ids=[u.id for u in s.utterances],
        results=results,
        parameters={
            "changepoint": {
                "threshold_factor": config.changepoint_factor,
                "max_depth": config.changepoint_max_depth,
            },
            "heatmap": {k: list(v) if isinstance(v, tuple) else v
                        for k, v in asdict(config.heatmap).items()},
            "wedge": asdict(config.wedge),
            "jobs": config.jobs,
        },
    )

    if config.emit:
        emit_artifacts(s, rep, config)
    return rep


def emit_artifacts(s: Session, rep: SessionReport, config: AnalysisConfig) -> None:
    """Write the artifacts selected in ``config.emit`` under ``out_dir``."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    if "heatmaps" in config.emit:
        paths = {}
        for name, res in rep.results.items():
            cmap = _METRIC_COLORMAPS.get(name, config.heatmap.colormap)
            spec = dataclasses.replace(config.heatmap, colormap=cmap)
            fname = f"heatmap_{name.lower().replace('-', '')}.png"
            render.render_heatmap(res.matrix, spec, out / fname)
            paths[name] = fname
        rep.artifacts["heatmaps"] = paths

    if "wedges" in config.emit:
        wedge_dir = out / "wedges"
        paths = {}
        for u in s.utterances:
            fname = f"wedges/{u.id}.png"
            render.render_wedge(analysis.mean_image(u), config.wedge,
                                out / fname)
            paths[u.id] = fname
        rep.artifacts["wedges"] = paths

    if "stats" in config.emit:
        report.write_stats_table(rep, out / "stats.txt")
        rep.artifacts["stats"] = {"table": "stats.txt"}

    # Written last so the report captures every artifact path above.
    if "report" in config.emit:
        report.write_report(rep, out)
