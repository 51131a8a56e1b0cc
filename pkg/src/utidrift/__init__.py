"""Quantify ultrasound transducer misalignment across recording sessions.

The library loads raw scanline sessions (or generates synthetic ones),
averages each utterance's frames into a mean image, compares all mean-image
pairs with MSE / SSIM / CW-SSIM, and turns the resulting matrices into
heatmaps, descriptive statistics and change-point flags.
"""

from .analysis import (ChangePointReport, SessionStats, SimilarityMatrix,
                       detect_change_points, mean_image, session_stats,
                       similarity_matrix)
from .ingest import (Session, SessionFormatError, SyntheticSpec, Utterance,
                     generate_synthetic_session, load_manifest_session,
                     load_ultrasuite_session)
from .metrics import (CwSsimParams, SsimParams, complex_wavelet_decompose,
                      cw_ssim, mse, ssim)
from .pipeline import AnalysisConfig, analyze_session
from .pyramid import SubbandCoefficients
from .render import (HeatmapSpec, WedgeSpec, render_heatmap, render_wedge,
                     wedge_pixels)
from .report import (SessionReport, read_report, write_manifest_session,
                     write_report)

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig",
    "ChangePointReport",
    "CwSsimParams",
    "HeatmapSpec",
    "Session",
    "SessionFormatError",
    "SessionReport",
    "SessionStats",
    "SimilarityMatrix",
    "SsimParams",
    "SubbandCoefficients",
    "SyntheticSpec",
    "Utterance",
    "WedgeSpec",
    "analyze_session",
    "complex_wavelet_decompose",
    "cw_ssim",
    "detect_change_points",
    "generate_synthetic_session",
    "load_manifest_session",
    "load_ultrasuite_session",
    "mean_image",
    "mse",
    "read_report",
    "render_heatmap",
    "render_wedge",
    "session_stats",
    "similarity_matrix",
    "ssim",
    "wedge_pixels",
    "write_manifest_session",
    "write_report",
    "__version__",
]
