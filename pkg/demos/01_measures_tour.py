"""Tour of the three pairwise measures on controlled image pairs.

Shows how MSE, SSIM and CW-SSIM respond to noise, brightness offsets and
small translations of a band-limited texture -- the distortion families a
moving ultrasound transducer produces.  CW-SSIM barely reacts to 1-2 pixel
shifts that already cut SSIM in half; that tolerance is the reason it is
part of the misalignment toolkit.
"""

import numpy as np
from scipy.ndimage import gaussian_filter

from utidrift import cw_ssim, mse, ssim


def texture(seed, shape=(64, 64)):
    rng = np.random.default_rng(seed)
    raw = gaussian_filter(rng.uniform(0, 255, shape), 2.0, mode="wrap")
    return 20.0 + (raw - raw.min()) * (215.0 / (raw.max() - raw.min()))


def row(label, a, b):
    print(f"{label:<28} mse={mse(a, b):8.1f}   ssim={ssim(a, b):.4f}   "
          f"cw_ssim={cw_ssim(a, b):.4f}")


def main():
    base = texture(0)
    rng = np.random.default_rng(1)

    print("distortion                        MSE       SSIM        CW-SSIM")
    row("identity", base, base)
    row("gaussian noise sigma=2", base,
        np.clip(base + rng.normal(0, 2, base.shape), 0, 255))
    row("brightness +15", base, np.clip(base + 15, 0, 255))
    row("shift 1 px", base, np.roll(base, 1, axis=0))
    row("shift 2 px", base, np.roll(base, 2, axis=0))
    row("shift 4 px", base, np.roll(base, 4, axis=0))
    row("unrelated texture", base, texture(99))

    print()
    print("Note how the 1-2 px shifts crush SSIM while CW-SSIM stays close")
    print("to 1: coefficient magnitudes are nearly shift-invariant and only")
    print("the phases move.")


if __name__ == "__main__":
    main()
