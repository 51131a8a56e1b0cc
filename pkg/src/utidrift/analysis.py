"""Session-level misalignment analysis.

For a session of n utterances this module computes the per-utterance mean
image (pixel-wise temporal average over all frames, silences included) and
the n x n matrix of a pairwise measure over all mean-image pairs.  The
diagonal is NaN; off-diagonal entries are mirrored from a single
evaluation per unordered pair, so the matrix is exactly symmetric.

Descriptive statistics summarize the off-diagonal entries, and a greedy
block segmentation flags utterance indices where the matrix block
structure changes -- the signature of the transducer shifting or losing
gel mid-session.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict

import numpy as np

from . import metrics
from .ingest import Session, Utterance
from .metrics import CwSsimParams, SsimParams

METRIC_NAMES = ("MSE", "SSIM", "CW-SSIM")

# Metrics where larger values mean more similar; converted to 1-value
# dissimilarities for block analysis.
_SIMILARITY_METRICS = frozenset({"SSIM", "CW-SSIM"})


@dataclass
class SimilarityMatrix:
    """Pairwise measure over all utterance pairs of one session."""

    metric_name: str
    utterance_ids: list[str]
    values: np.ndarray
    params_fingerprint: str

    @property
    def n(self) -> int:
        return len(self.utterance_ids)

    def validate(self) -> None:
        v = self.values
        n = self.n
        if v.shape != (n, n):
            raise ValueError(f"matrix shape {v.shape} does not match {n} ids")
        if not np.isnan(np.diag(v)).all():
            raise ValueError("diagonal must be NaN")
        off = ~np.eye(n, dtype=bool)
        if n > 1 and not np.isfinite(v[off]).all():
            raise ValueError("off-diagonal entries must be finite")
        if not np.array_equal(v[off], v.T[off]):
            raise ValueError("matrix must be exactly symmetric")

    def off_diagonal(self) -> np.ndarray:
        """Upper-triangle off-diagonal entries (== all off-diagonal by symmetry)."""
        iu = np.triu_indices(self.n, k=1)
        return self.values[iu]


@dataclass(frozen=True)
class SessionStats:
    """Mean and population standard deviation of one measure's matrix."""

    metric_name: str
    mean: float
    std: float
    n_pairs: int


@dataclass(frozen=True)
class ChangePointReport:
    """Flagged block boundaries for one measure.

    ``boundaries`` are utterance indices b where [.., b) and [b, ..) fall
    in different blocks.  ``block_means`` are the within-block means of the
    raw measure for the resulting segments (NaN for singleton blocks).
    """

    metric_name: str
    boundaries: tuple[int, ...]
    block_means: tuple[float, ...]
    threshold_used: float


def params_fingerprint(metric_name: str, params) -> str:
    """Stable short hash of a metric's parameter set."""
    doc = {"metric": metric_name}
    if params is not None:
        doc.update(asdict(params))
    blob = json.dumps(doc, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


# --------------------------------------------------------------------------
# mean images
# --------------------------------------------------------------------------

def mean_image(u: Utterance) -> np.ndarray:
    """Pixel-wise mean over all frames of the utterance, no frame excluded.

    Frames are summed as integers before the single division, so the
    result is exactly invariant to frame order.
    """
    total = u.frames.sum(axis=0, dtype=np.int64)
    return total / u.n_frames


def session_mean_images(s: Session) -> np.ndarray:
    """Stack of mean images, one per utterance, shape (n, height, width)."""
    s.validate()
    return np.stack([mean_image(u) for u in s.utterances])


# --------------------------------------------------------------------------
# pairwise engines
# --------------------------------------------------------------------------

class _MseEngine:
    def __init__(self, images: np.ndarray, params):
        self.images = images

    def compare(self, i: int, j: int) -> float:
        return metrics.mse(self.images[i], self.images[j])


class _SsimEngine:
    def __init__(self, images: np.ndarray, params: SsimParams):
        self.images = images
        self.params = params

    def compare(self, i: int, j: int) -> float:
        return metrics.ssim(self.images[i], self.images[j], self.params)


class _CwSsimEngine:
    # Decompose each mean image once and cache the denominator window sums;
    # per-pair work is then one windowed cross-term per orientation.
    def __init__(self, images: np.ndarray, params: CwSsimParams):
        self.params = params
        self.prepared = [
            metrics.prepare_subbands(metrics.comparison_subbands(img, params),
                                     params)
            for img in images
        ]

    def compare(self, i: int, j: int) -> float:
        return metrics._cw_ssim_prepared(self.prepared[i], self.prepared[j],
                                         self.params)


_ENGINES = {"MSE": _MseEngine, "SSIM": _SsimEngine, "CW-SSIM": _CwSsimEngine}

# Worker-side state for process pools: (engine, ) keyed by metric.
_worker_state: dict = {}


def _init_worker(images: np.ndarray, metric_name: str, params) -> None:
    _worker_state["engine"] = _ENGINES[metric_name](images, params)


def _eval_chunk(pairs: list[tuple[int, int]]) -> list[float]:
    engine = _worker_state["engine"]
    return [engine.compare(i, j) for i, j in pairs]


def default_params(metric_name: str):
    if metric_name == "SSIM":
        return SsimParams()
    if metric_name == "CW-SSIM":
        return CwSsimParams()
    if metric_name == "MSE":
        return None
    raise ValueError(f"unknown metric {metric_name!r}; expected one of "
                     f"{METRIC_NAMES}")


def similarity_matrix(
    s: Session,
    metric_name: str,
    params=None,
    jobs: int = 1,
) -> SimilarityMatrix:
    """All-pairs matrix of one measure over the session's mean images.

    Mean images are computed once per utterance and reused; each unordered
    pair is evaluated once and mirrored, the diagonal is NaN.  ``jobs`` > 1
    distributes pair evaluation over worker processes (results are
    identical to the serial path).
    """
    if metric_name not in _ENGINES:
        raise ValueError(f"unknown metric {metric_name!r}; expected one of "
                         f"{METRIC_NAMES}")
    if params is None:
        params = default_params(metric_name)
    images = session_mean_images(s)
    n = len(s.utterances)
    values = np.full((n, n), np.nan)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    if jobs <= 1 or len(pairs) < 2:
        engine = _ENGINES[metric_name](images, params)
        results = [engine.compare(i, j) for i, j in pairs]
    else:
        chunk = max(1, len(pairs) // (jobs * 8))
        chunks = [pairs[k:k + chunk] for k in range(0, len(pairs), chunk)]
        with ProcessPoolExecutor(
            max_workers=jobs,
            initializer=_init_worker,
            initargs=(images, metric_name, params),
        ) as pool:
            results = [v for part in pool.map(_eval_chunk, chunks) for v in part]

    for (i, j), v in zip(pairs, results):
        values[i, j] = v
        values[j, i] = v

    m = SimilarityMatrix(
        metric_name=metric_name,
        utterance_ids=[u.id for u in s.utterances],
        values=values,
        params_fingerprint=params_fingerprint(metric_name, params),
    )
    m.validate()
    return m


# --------------------------------------------------------------------------
# descriptive statistics
# --------------------------------------------------------------------------

def session_stats(m: SimilarityMatrix) -> SessionStats:
    """Mean and population std over the upper-triangle off-diagonal entries."""
    if m.n < 2:
        raise ValueError("session statistics need at least 2 utterances")
    tri = m.off_diagonal()
    return SessionStats(
        metric_name=m.metric_name,
        mean=float(tri.mean()),
        std=float(tri.std()),
        n_pairs=tri.size,
    )


# --------------------------------------------------------------------------
# change-point flagging
# --------------------------------------------------------------------------

DEFAULT_CONTRAST_FACTOR = 1.5
DEFAULT_MAX_DEPTH = 4
# Small-sample inflation of the per-segment threshold: with only a handful
# of pairs, both the contrast and the spread estimate fluctuate enough to
# produce spurious splits inside short segments.
_SMALL_SAMPLE_PAIRS = 3.0


def _block_pair_sum(d: np.ndarray, lo: int, hi: int) -> tuple[float, int]:
    # Sum and count of off-diagonal pairs inside [lo, hi).
    size = hi - lo
    if size < 2:
        return 0.0, 0
    sub = d[lo:hi, lo:hi]
    iu = np.triu_indices(size, k=1)
    vals = sub[iu]
    return float(vals.sum()), vals.size


def _best_split(d: np.ndarray, lo: int, hi: int) -> tuple[int, float]:
    best_k, best_contrast = -1, -np.inf
    for k in range(lo + 1, hi):
        within_sum_a, n_a = _block_pair_sum(d, lo, k)
        within_sum_b, n_b = _block_pair_sum(d, k, hi)
        n_within = n_a + n_b
        within = (within_sum_a + within_sum_b) / n_within if n_within else 0.0
        cross = float(d[lo:k, k:hi].mean())
        contrast = cross - within
        if contrast > best_contrast:
            best_k, best_contrast = k, contrast
    return best_k, best_contrast


def _segment_std(d: np.ndarray, lo: int, hi: int) -> float:
    sub = d[lo:hi, lo:hi]
    iu = np.triu_indices(hi - lo, k=1)
    return float(sub[iu].std())


def detect_change_points(
    m: SimilarityMatrix,
    threshold_factor: float = DEFAULT_CONTRAST_FACTOR,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> ChangePointReport:
    """Greedy binary block segmentation of the similarity matrix.

    The matrix is converted to dissimilarities (1-value for similarity
    measures, raw values for error measures).  Each segment is split at
    the index maximizing cross-block minus within-block mean dissimilarity;
    a split is accepted only when that contrast exceeds
    ``threshold_factor`` x the segment's own off-diagonal dissimilarity
    standard deviation (inflated for segments with few pairs), so nested
    shifts stay detectable after a dominant split is removed.  Recursion
    stops at ``max_depth`` and ties break to the smallest index.
    ``threshold_used`` reports the top-level (whole-matrix) threshold.
    """
    if m.n < 4:
        raise ValueError("change-point detection needs at least 4 utterances")
    d = m.values.copy()
    if m.metric_name in _SIMILARITY_METRICS:
        d = 1.0 - d

    def segment_threshold(lo: int, hi: int) -> float:
        n_pairs = (hi - lo) * (hi - lo - 1) / 2
        return (threshold_factor * _segment_std(d, lo, hi)
                * (1.0 + _SMALL_SAMPLE_PAIRS / n_pairs))

    threshold = segment_threshold(0, m.n)
    boundaries: list[int] = []

    def split(lo: int, hi: int, depth: int) -> None:
        if depth >= max_depth or hi - lo < 4:
            return
        k, contrast = _best_split(d, lo, hi)
        if k < 0 or contrast <= segment_threshold(lo, hi):
            return
        boundaries.append(k)
        split(lo, k, depth + 1)
        split(k, hi, depth + 1)

    split(0, m.n, 0)
    boundaries.sort()

    edges = [0, *boundaries, m.n]
    block_means = []
    for lo, hi in zip(edges, edges[1:]):
        total, count = _block_pair_sum(m.values, lo, hi)
        block_means.append(total / count if count else float("nan"))

    return ChangePointReport(
        metric_name=m.metric_name,
        boundaries=tuple(boundaries),
        block_means=tuple(block_means),
        threshold_used=threshold,
    )
