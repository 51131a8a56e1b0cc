"""Command-line interface: analyze one session, synthesize test data, or
batch-process a directory tree of speakers.

Exit codes: 0 success, 1 ingestion failure, 2 analysis failure, 3 emission
failure, 4 batch with at least one failed speaker.  Diagnostics go to
stderr; per-measure summary lines ("MSE 178 (91)" style) go to stdout.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from . import __version__
from .analysis import DEFAULT_CONTRAST_FACTOR, DEFAULT_MAX_DEPTH
from .ingest import (Session, SessionFormatError, SyntheticSpec,
                     generate_synthetic_session, load_manifest_session,
                     load_ultrasuite_session)
from .metrics import CwSsimParams, SsimParams
from .pipeline import (EMIT_CHOICES, AnalysisConfig, analyze_session,
                       emit_artifacts)
from .report import format_stats_line, write_manifest_session

_METRIC_TOKENS = {"mse": "MSE", "ssim": "SSIM", "cwssim": "CW-SSIM"}

EXIT_OK = 0
EXIT_INGEST = 1
EXIT_ANALYSIS = 2
EXIT_EMIT = 3
EXIT_BATCH_PARTIAL = 4


def _err(msg: str) -> None:
    print(f"utidrift: {msg}", file=sys.stderr)


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict):
        raise ValueError("config file must contain a JSON object")
    return doc


def _merge_option(args_value, config: dict, key: str, default):
    # Command line wins over config file, config file over defaults.
    if args_value is not None:
        return args_value
    return config.get(key, default)


def _parse_metrics(tokens: str) -> tuple[str, ...]:
    names = []
    for tok in tokens.split(","):
        tok = tok.strip().lower()
        if not tok:
            continue
        if tok not in _METRIC_TOKENS:
            raise ValueError(f"unknown metric {tok!r}; choose from "
                             f"{', '.join(_METRIC_TOKENS)}")
        names.append(_METRIC_TOKENS[tok])
    if not names:
        raise ValueError("no metrics selected")
    return tuple(names)


def _parse_emit(tokens: str) -> tuple[str, ...]:
    items = []
    for tok in tokens.split(","):
        tok = tok.strip().lower()
        if not tok:
            continue
        if tok == "stats_table":
            tok = "stats"
        if tok not in EMIT_CHOICES:
            raise ValueError(f"unknown artifact {tok!r}; choose from "
                             f"{', '.join(EMIT_CHOICES)}")
        items.append(tok)
    return tuple(items)


def _build_analysis_config(args, config: dict) -> AnalysisConfig:
    metrics = _parse_metrics(_merge_option(args.metrics, config, "metrics",
                                           "mse,ssim,cwssim"))
    emit = _parse_emit(_merge_option(args.emit, config, "emit",
                                     "heatmaps,report,stats"))
    jobs = int(_merge_option(args.jobs, config, "jobs", os.cpu_count() or 1))
    cp = config.get("changepoint", {})
    return AnalysisConfig(
        metrics=metrics,
        ssim_params=SsimParams(**config.get("ssim_params", {})),
        cwssim_params=CwSsimParams(**config.get("cwssim_params", {})),
        changepoint_factor=float(cp.get("threshold_factor",
                                        DEFAULT_CONTRAST_FACTOR)),
        changepoint_max_depth=int(cp.get("max_depth", DEFAULT_MAX_DEPTH)),
        jobs=jobs,
        emit=emit,
        out_dir=None,
    )


def _load_input_session(args, config: dict) -> Session:
    input_dir = _merge_option(args.input, config, "input", None)
    manifest = _merge_option(args.manifest, config, "manifest", None)
    spec_file = _merge_option(args.spec, config, "spec", None)
    modes = [m for m in (input_dir, manifest, spec_file) if m is not None]
    if len(modes) != 1:
        raise SessionFormatError(
            "exactly one of --input, --manifest, --spec must be given"
        )
    if input_dir is not None:
        return load_ultrasuite_session(input_dir)
    if manifest is not None:
        return load_manifest_session(manifest)
    spec_doc = json.loads(Path(spec_file).read_text())
    if args.seed is not None:
        spec_doc["texture_seed"] = args.seed
    return generate_synthetic_session(SyntheticSpec.from_dict(spec_doc))


def _print_summary(rep) -> None:
    for res in rep.results.values():
        if res.stats is not None:
            print(format_stats_line(res.stats))


def cmd_analyze(args) -> int:
    try:
        config = _load_config_file(args.config)
        session = _load_input_session(args, config)
    except (SessionFormatError, OSError, ValueError) as e:
        _err(f"ingestion failed: {e}")
        return EXIT_INGEST

    out_dir = Path(_merge_option(args.out, config, "out", "utidrift_out"))
    try:
        full = _build_analysis_config(args, config)
        compute_only = dataclasses.replace(full, emit=(), out_dir=None)
        rep = analyze_session(session, compute_only)
    except Exception as e:
        _err(f"analysis failed: {e}")
        return EXIT_ANALYSIS

    if full.emit:
        try:
            emit_config = dataclasses.replace(full, out_dir=out_dir)
            emit_config.validate()
            emit_artifacts(session, rep, emit_config)
        except Exception as e:
            _err(f"emission failed: {e}")
            return EXIT_EMIT

    _print_summary(rep)
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        spec_doc = json.loads(Path(args.spec).read_text())
        if args.seed is not None:
            spec_doc["texture_seed"] = args.seed
        spec = SyntheticSpec.from_dict(spec_doc)
        session = generate_synthetic_session(spec)
    except (OSError, ValueError) as e:
        _err(f"bad synthetic spec: {e}")
        return EXIT_INGEST
    manifest = write_manifest_session(session, args.out)
    print(f"wrote {session.n_utterances} utterances to {manifest}")
    return EXIT_OK


def _batch_table(rows: list[tuple[str, dict]]) -> str:
    header = ["speaker"]
    for name in ("MSE", "SSIM", "CW-SSIM"):
        header += [f"{name}_mean", f"{name}_std"]
    lines = [",".join(header)]
    for speaker, stats in rows:
        cells = [speaker]
        for name in ("MSE", "SSIM", "CW-SSIM"):
            if name in stats:
                cells += [repr(stats[name].mean), repr(stats[name].std)]
            else:
                cells += ["", ""]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def cmd_batch(args) -> int:
    root = Path(args.input)
    if not root.is_dir():
        _err(f"batch root is not a directory: {root}")
        return EXIT_INGEST
    speakers = sorted(p for p in root.iterdir() if p.is_dir())
    if not speakers:
        _err(f"no speaker directories under {root}")
        return EXIT_INGEST

    try:
        config = _load_config_file(args.config)
        base = _build_analysis_config(args, config)
    except (OSError, ValueError, TypeError) as e:
        _err(f"bad configuration: {e}")
        return EXIT_INGEST
    out_root = Path(_merge_option(args.out, config, "out", "utidrift_out"))

    rows = []
    failures = []
    for speaker in speakers:
        try:
            manifest = speaker / "manifest.json"
            if manifest.exists():
                session = load_manifest_session(manifest)
            else:
                session = load_ultrasuite_session(speaker)
            speaker_config = dataclasses.replace(
                base, out_dir=out_root / speaker.name)
            rep = analyze_session(session, speaker_config)
        except Exception as e:
            failures.append(speaker.name)
            _err(f"speaker {speaker.name} failed: {e}")
            continue
        stats = {name: res.stats for name, res in rep.results.items()
                 if res.stats is not None}
        rows.append((speaker.name, stats))
        print(f"{speaker.name} | " + " | ".join(
            format_stats_line(st) for st in stats.values()))

    if rows:
        out_root.mkdir(parents=True, exist_ok=True)
        (out_root / "stats_table.csv").write_text(_batch_table(rows))

    if failures:
        _err(f"{len(failures)} speaker(s) failed: " + ", ".join(failures))
        return EXIT_BATCH_PARTIAL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="utidrift",
        description="Quantify ultrasound transducer misalignment across a "
                    "recording session.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory")
    common.add_argument("--metrics",
                        help="comma list of mse,ssim,cwssim (default all)")
    common.add_argument("--emit",
                        help="comma list of heatmaps,wedges,report,stats")
    common.add_argument("--seed", type=int, help="override synthetic RNG seed")
    common.add_argument("--jobs", type=int,
                        help="worker processes for pairwise evaluation")
    common.add_argument("--config", help="JSON config file (flags win)")

    p_an = sub.add_parser("analyze", parents=[common],
                          help="analyze one session")
    p_an.add_argument("--input", help="directory of .ult/.param pairs")
    p_an.add_argument("--manifest", help="manifest.json of a session")
    p_an.add_argument("--spec", help="synthetic session spec (JSON)")
    p_an.set_defaults(func=cmd_analyze)

    p_sy = sub.add_parser("synth", parents=[common],
                          help="write a synthetic session to disk")
    p_sy.add_argument("--spec", required=True,
                      help="synthetic session spec (JSON)")
    p_sy.set_defaults(func=cmd_synth)

    p_ba = sub.add_parser("batch", parents=[common],
                          help="analyze every speaker directory under a root")
    p_ba.add_argument("--input", required=True,
                      help="root with one sub-directory per speaker")
    p_ba.set_defaults(func=cmd_batch)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "synth" and args.out is None:
        _err("synth requires --out")
        return EXIT_INGEST
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
