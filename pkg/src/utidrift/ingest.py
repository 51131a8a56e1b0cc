"""Loading and generating ultrasound tongue imaging recording sessions.

A session is an ordered collection of utterances; each utterance is a stack
of raw scanline frames (beam vectors x samples-per-vector, uint8).  Two
on-disk layouts are supported:

* raw ``<name>.ult`` byte streams with a ``<name>.param`` sidecar of
  ``Key=Value`` lines (the layout used by public child-speech ultrasound
  corpora), and
* a generic JSON manifest pointing at raw frame files.

A synthetic generator produces sessions with controlled probe-shift
boundaries, used as ground truth when exercising misalignment detection.
"""

from __future__ import annotations

import os
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter


class SessionFormatError(ValueError):
    """Raised when on-disk session data is malformed or inconsistent."""


# --------------------------------------------------------------------------
# domain types
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Utterance:
    """One recorded utterance: an ordered stack of equally sized frames.

    ``frames`` has shape (n_frames, height, width) and dtype uint8, where
    height is the number of scanline vectors and width the samples per
    vector.  Silences before and after speech are retained; nothing is
    trimmed or rescaled.  The array is marked read-only so utterances can be
    shared across threads.
    """

    id: str
    timestamp: float
    frames: np.ndarray
    frame_rate: float | None = None

    def __post_init__(self):
        f = np.asarray(self.frames)
        if f.ndim != 3 or f.shape[0] < 1 or f.shape[1] < 1 or f.shape[2] < 1:
            raise ValueError(
                f"utterance {self.id!r}: frames must be a non-empty "
                f"(n_frames, height, width) stack, got shape {f.shape}"
            )
        if f.dtype != np.uint8:
            raise ValueError(
                f"utterance {self.id!r}: frames must be uint8, got {f.dtype}"
            )
        f = np.ascontiguousarray(f)
        f.setflags(write=False)
        object.__setattr__(self, "frames", f)

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]

    def __eq__(self, other):
        if not isinstance(other, Utterance):
            return NotImplemented
        return (
            self.id == other.id
            and self.timestamp == other.timestamp
            and self.frame_rate == other.frame_rate
            and self.frames.shape == other.frames.shape
            and np.array_equal(self.frames, other.frames)
        )


@dataclass(eq=False)
class Session:
    """All utterances of one recording session, ordered by timestamp."""

    speaker_id: str
    session_id: str
    utterances: list[Utterance] = field(default_factory=list)

    def validate(self) -> None:
        """Check session invariants, aggregating offenders into one error."""
        if not self.utterances:
            raise SessionFormatError(
                f"session {self.speaker_id}/{self.session_id}: empty session"
            )
        ts = [u.timestamp for u in self.utterances]
        if any(b < a for a, b in zip(ts, ts[1:])):
            raise SessionFormatError(
                f"session {self.speaker_id}/{self.session_id}: utterances "
                "not sorted by timestamp"
            )
        dims = (self.utterances[0].height, self.utterances[0].width)
        bad = [
            f"{u.id} ({u.height}x{u.width})"
            for u in self.utterances
            if (u.height, u.width) != dims
        ]
        if bad:
            raise SessionFormatError(
                f"session {self.speaker_id}/{self.session_id}: frame "
                f"dimensions differ from first utterance {dims[0]}x{dims[1]}: "
                + ", ".join(bad)
            )

    @property
    def n_utterances(self) -> int:
        return len(self.utterances)

    @property
    def frame_shape(self) -> tuple[int, int]:
        u = self.utterances[0]
        return (u.height, u.width)

    def __eq__(self, other):
        if not isinstance(other, Session):
            return NotImplemented
        return (
            self.speaker_id == other.speaker_id
            and self.session_id == other.session_id
            and self.utterances == other.utterances
        )


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a synthetic session with known misalignment boundaries.

    ``shift_boundaries`` is a sequence of (utterance_index, row_shift,
    col_shift) triples; from each boundary index onward the base texture is
    circularly shifted by the cumulative offsets.  Per-frame Gaussian noise
    of ``noise_sigma`` grayscale units is added and clamped to [0, 255].
    """

    n_utterances: int
    frames_per_utterance: int
    width: int
    height: int
    shift_boundaries: tuple[tuple[int, int, int], ...] = ()
    noise_sigma: float = 0.0
    texture_seed: int = 0

    def validate(self) -> None:
        if self.n_utterances < 1:
            raise ValueError("n_utterances must be >= 1")
        if self.frames_per_utterance < 1:
            raise ValueError("frames_per_utterance must be >= 1")
        if self.width < 1 or self.height < 1:
            raise ValueError("width and height must be >= 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        half_min = min(self.width, self.height) / 2
        for idx, dv, dh in self.shift_boundaries:
            if not 1 <= idx <= self.n_utterances - 1:
                raise ValueError(
                    f"shift_boundaries: index {idx} outside "
                    f"[1, {self.n_utterances - 1}]"
                )
            if abs(dv) >= half_min or abs(dh) >= half_min:
                raise ValueError(
                    f"shift_boundaries: shift ({dv}, {dh}) at index {idx} "
                    f"must be smaller than min(width, height)/2 = {half_min}"
                )

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticSpec":
        try:
            spec = cls(
                n_utterances=int(d["n_utterances"]),
                frames_per_utterance=int(d["frames_per_utterance"]),
                width=int(d["width"]),
                height=int(d["height"]),
                shift_boundaries=tuple(
                    (int(i), int(dv), int(dh))
                    for i, dv, dh in d.get("shift_boundaries", ())
                ),
                noise_sigma=float(d.get("noise_sigma", 0.0)),
                texture_seed=int(d.get("texture_seed", 0)),
            )
        except KeyError as e:
            raise ValueError(f"synthetic spec: missing field {e.args[0]!r}") from e
        except (TypeError, ValueError) as e:
            raise ValueError(f"synthetic spec: {e}") from e
        spec.validate()
        return spec

    def to_dict(self) -> dict:
        return {
            "n_utterances": self.n_utterances,
            "frames_per_utterance": self.frames_per_utterance,
            "width": self.width,
            "height": self.height,
            "shift_boundaries": [list(b) for b in self.shift_boundaries],
            "noise_sigma": self.noise_sigma,
            "texture_seed": self.texture_seed,
        }


# --------------------------------------------------------------------------
# raw .ult / .param loading
# --------------------------------------------------------------------------

def _parse_param_file(path: Path) -> dict[str, str]:
    params: dict[str, str] = {}
    try:
        text = path.read_text()
    except OSError as e:
        raise SessionFormatError(f"cannot read parameter file {path}: {e}") from e
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SessionFormatError(
                f"parameter file {path}: malformed line {line!r}"
            )
        key, value = line.split("=", 1)
        params[key.strip()] = value.strip()
    return params


def _frames_from_bytes(raw: bytes, height: int, width: int, name: str) -> np.ndarray:
    frame_size = height * width
    n_frames, remainder = divmod(len(raw), frame_size)
    if remainder != 0:
        raise SessionFormatError(
            f"{name}: byte stream length {len(raw)} is not a multiple of the "
            f"frame size {height}x{width}={frame_size} "
            f"(remainder {remainder} bytes)"
        )
    if n_frames == 0:
        raise SessionFormatError(f"{name}: file contains no complete frame")
    return np.frombuffer(raw, dtype=np.uint8).reshape(n_frames, height, width)


def load_ultrasuite_session(
    dir_path: str | os.PathLike,
    speaker_id: str | None = None,
    session_id: str | None = None,
) -> Session:
    """Load a directory of ``.ult`` raw frame streams with ``.param`` sidecars.

    Each ``<name>.ult`` holds unsigned 8-bit samples, frame after frame,
    vector-major (NumVectors rows of PixPerVector columns).  The sidecar
    must declare ``NumVectors`` and ``PixPerVector``; ``FramesPerSec`` is
    kept as metadata and unknown keys are ignored.  Utterances are ordered
    by filename, which is the recording order in these corpora, and receive
    ordinal timestamps 0, 1, 2, ...
    """
    root = Path(dir_path)
    if not root.is_dir():
        raise SessionFormatError(f"not a directory: {root}")
    ult_files = sorted(root.glob("*.ult"))
    if not ult_files:
        raise SessionFormatError(f"no utterances found in {root} (no .ult files)")

    utterances = []
    for ordinal, ult in enumerate(ult_files):
        param_path = ult.with_suffix(".param")
        if not param_path.exists():
            raise SessionFormatError(f"missing parameter file for {ult.name}: "
                                     f"expected {param_path.name}")
        params = _parse_param_file(param_path)
        try:
            height = int(params["NumVectors"])
            width = int(params["PixPerVector"])
        except KeyError as e:
            raise SessionFormatError(
                f"parameter file {param_path}: missing required key {e.args[0]}"
            ) from e
        except ValueError as e:
            raise SessionFormatError(
                f"parameter file {param_path}: non-integer dimension ({e})"
            ) from e
        frame_rate = None
        if "FramesPerSec" in params:
            try:
                frame_rate = float(params["FramesPerSec"])
            except ValueError as e:
                raise SessionFormatError(
                    f"parameter file {param_path}: bad FramesPerSec ({e})"
                ) from e
        frames = _frames_from_bytes(ult.read_bytes(), height, width, str(ult))
        utterances.append(
            Utterance(id=ult.stem, timestamp=float(ordinal), frames=frames,
                      frame_rate=frame_rate)
        )

    session = Session(
        speaker_id=speaker_id if speaker_id is not None else root.name,
        session_id=session_id if session_id is not None else root.name,
        utterances=utterances,
    )
    session.validate()
    return session


# --------------------------------------------------------------------------
# generic manifest loading
# --------------------------------------------------------------------------

MANIFEST_NAME = "manifest.json"


def load_manifest_session(manifest_path: str | os.PathLike) -> Session:
    """Load a session described by a JSON manifest.

    Schema::

        {"speaker_id": str, "session_id": str,
         "utterances": [{"id": str, "timestamp": number, "file": str,
                         "width": int, "height": int}, ...]}

    ``file`` is resolved relative to the manifest and holds raw uint8
    frames, frame after frame, row-major (height x width each).  Entries
    may appear in any order; the session is sorted by timestamp, ties
    broken by id.
    """
    path = Path(manifest_path)
    try:
        doc = json.loads(path.read_text())
    except OSError as e:
        raise SessionFormatError(f"cannot read manifest {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise SessionFormatError(f"manifest {path}: invalid JSON ({e})") from e

    if not isinstance(doc, dict):
        raise SessionFormatError(f"manifest {path}: top level must be an object")
    for key in ("speaker_id", "session_id", "utterances"):
        if key not in doc:
            raise SessionFormatError(f"manifest {path}: missing field {key!r}")
    entries = doc["utterances"]
    if not isinstance(entries, list):
        raise SessionFormatError(f"manifest {path}: 'utterances' must be a list")
    if not entries:
        raise SessionFormatError(f"manifest {path}: empty session")

    utterances = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise SessionFormatError(f"manifest {path}: entry {i} must be an object")
        missing = [k for k in ("id", "timestamp", "file", "width", "height")
                   if k not in entry]
        if missing:
            raise SessionFormatError(
                f"manifest {path}: entry {i} missing fields {missing}"
            )
        frame_file = path.parent / entry["file"]
        if not frame_file.exists():
            raise SessionFormatError(
                f"manifest {path}: entry {entry['id']!r} references missing "
                f"file {frame_file}"
            )
        width = int(entry["width"])
        height = int(entry["height"])
        frames = _frames_from_bytes(frame_file.read_bytes(), height, width,
                                    str(frame_file))
        utterances.append(
            Utterance(id=str(entry["id"]), timestamp=float(entry["timestamp"]),
                      frames=frames)
        )

    utterances.sort(key=lambda u: (u.timestamp, u.id))
    session = Session(
        speaker_id=str(doc["speaker_id"]),
        session_id=str(doc["session_id"]),
        utterances=utterances,
    )
    session.validate()
    return session


# --------------------------------------------------------------------------
# synthetic sessions
# --------------------------------------------------------------------------

def _base_texture(spec: SyntheticSpec, rng: np.random.Generator) -> np.ndarray:
    # Band-limited texture: low-pass filtered uniform noise rescaled into
    # [20, 235].  The margin keeps additive noise away from clamping, and
    # wrap-mode filtering keeps circular shifts statistically uniform.
    raw = rng.uniform(0.0, 255.0, size=(spec.height, spec.width))
    smooth = gaussian_filter(raw, sigma=2.0, mode="wrap")
    lo, hi = smooth.min(), smooth.max()
    if hi - lo < 1e-12:
        return np.full_like(smooth, 127.5)
    return 20.0 + (smooth - lo) * (215.0 / (hi - lo))


def generate_synthetic_session(spec: SyntheticSpec) -> Session:
    """Generate a deterministic session with known shift boundaries.

    All utterances share one band-limited base texture; from each boundary
    index onward the texture is circularly shifted by the cumulative
    offsets.  Every frame gets independent Gaussian noise (``noise_sigma``),
    is rounded and clamped to [0, 255].  The output is a pure function of
    the spec: the same seed always yields byte-identical sessions.
    """
    spec.validate()
    rng = np.random.default_rng(spec.texture_seed)
    base = _base_texture(spec, rng)

    shifts = {idx: (dv, dh) for idx, dv, dh in spec.shift_boundaries}
    cum_v = cum_h = 0
    utterances = []
    for i in range(spec.n_utterances):
        if i in shifts:
            cum_v += shifts[i][0]
            cum_h += shifts[i][1]
        img = np.roll(base, (cum_v, cum_h), axis=(0, 1))
        stack = np.broadcast_to(
            img, (spec.frames_per_utterance, spec.height, spec.width)
        ).astype(np.float64)
        if spec.noise_sigma > 0:
            stack = stack + rng.normal(0.0, spec.noise_sigma, size=stack.shape)
        frames = np.clip(np.rint(stack), 0, 255).astype(np.uint8)
        utterances.append(
            Utterance(id=f"utt{i:04d}", timestamp=float(i), frames=frames)
        )

    session = Session(speaker_id="synthetic", session_id=f"seed{spec.texture_seed}",
                      utterances=utterances)
    session.validate()
    return session
