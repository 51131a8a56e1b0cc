"""Analyze a real recording session from .ult/.param files.

Usage::

    python demos/04_real_session.py /path/to/speaker_dir [out_dir]

The directory must hold ``<name>.ult`` raw byte streams with ``<name>.param``
sidecars (NumVectors / PixPerVector etc.), e.g. one speaker of a public
child-speech ultrasound corpus.  Writes heatmaps, wedge renders of every
utterance mean image, and the JSON report; prints the summary statistics
and any flagged block boundaries.
"""

import os
import sys
from pathlib import Path

from utidrift import AnalysisConfig, analyze_session, load_ultrasuite_session
from utidrift.report import format_stats_line


def main(argv):
    if len(argv) < 1:
        print(__doc__)
        return 2
    speaker_dir = Path(argv[0])
    out_dir = Path(argv[1]) if len(argv) > 1 else Path("demo_out") / speaker_dir.name

    session = load_ultrasuite_session(speaker_dir)
    print(f"loaded {session.n_utterances} utterances "
          f"({session.frame_shape[0]}x{session.frame_shape[1]}) "
          f"from {speaker_dir}")

    config = AnalysisConfig(emit=("heatmaps", "wedges", "report", "stats"),
                            out_dir=out_dir, jobs=os.cpu_count() or 1)
    report = analyze_session(session, config)

    for res in report.results.values():
        print(format_stats_line(res.stats))
        if res.change_points and res.change_points.boundaries:
            print(f"  block boundaries at utterances "
                  f"{list(res.change_points.boundaries)}")
    print(f"artifacts in {out_dir}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main(sys.argv[1:]))
