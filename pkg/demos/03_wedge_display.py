"""Scan conversion: raw scanline grids versus wedge (fan) display.

Raw ultrasound frames are stored as beam-vector rows by radial-sample
columns; anatomy only looks right after mapping each row to its beam angle.
This script renders a mean image both ways so the difference is obvious,
using a synthetic session (or point it at real data and adapt).
"""

from pathlib import Path

import numpy as np

from utidrift import (SyntheticSpec, WedgeSpec, generate_synthetic_session,
                      mean_image, render_wedge)
from utidrift.render import save_png

OUT = Path("demo_out/wedge")


def main():
    spec = SyntheticSpec(n_utterances=1, frames_per_utterance=6,
                         width=412, height=63, noise_sigma=3.0,
                         texture_seed=42)
    session = generate_synthetic_session(spec)
    img = mean_image(session.utterances[0])

    gray = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    raw_path = OUT / "raw_scanlines.png"
    save_png(np.stack([gray] * 3, axis=-1), raw_path)

    for interp in ("nearest", "bilinear"):
        spec_w = WedgeSpec(output_size=600, interpolation=interp)
        render_wedge(img, spec_w, OUT / f"wedge_{interp}.png")

    print(f"wrote {raw_path} (63x412 beam grid) and wedge_*.png (fan view)")
    print("rows become beams across a 92 degree span; columns become depth")


if __name__ == "__main__":
    main()
