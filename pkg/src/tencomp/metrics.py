"""Quality metrics: PSNR and SSIM (slice means) and relative error.

Data is assumed [0, 1]-scaled with peak 1.0.  Both image metrics are
computed per frontal slice and averaged, matching per-band reporting for
multi-channel data.
"""

import numpy as np
from scipy.ndimage import correlate

from .core import as_tensor3
from .errors import DimensionMismatch, SliceTooSmall, ZeroReference

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01**2
SSIM_C2 = 0.03**2


def _check_pair(x, ref):
    x = as_tensor3(x, "x")
    ref = as_tensor3(ref, "ref")
    if x.shape != ref.shape:
        raise DimensionMismatch(f"shapes disagree: {x.shape} vs {ref.shape}")
    return x, ref


def psnr(x: np.ndarray, ref: np.ndarray) -> float:
    """Mean over slices of ``10*log10(1/MSE)``; +inf if any slice is exact."""
    x, ref = _check_pair(x, ref)
    mse = ((x - ref) ** 2).mean(axis=(0, 1))
    if (mse == 0.0).any():
        return float("inf")
    return float(np.mean(10.0 * np.log10(1.0 / mse)))


def _gaussian_window():
    r = SSIM_WINDOW // 2
    g = np.exp(-0.5 * (np.arange(-r, r + 1) / SSIM_SIGMA) ** 2)
    w = np.outer(g, g)
    return w / w.sum()


def _ssim_slice(a, b, window):
    filt = lambda m: correlate(m, window, mode="reflect")
    mu_a = filt(a)
    mu_b = filt(b)
    var_a = filt(a * a) - mu_a * mu_a
    var_b = filt(b * b) - mu_b * mu_b
    cov = filt(a * b) - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + SSIM_C1) * (2.0 * cov + SSIM_C2)
    den = (mu_a * mu_a + mu_b * mu_b + SSIM_C1) * (var_a + var_b + SSIM_C2)
    return float((num / den).mean())


def ssim(x: np.ndarray, ref: np.ndarray) -> float:
    """Mean over slices of the SSIM index.

    Local statistics use an 11x11 Gaussian window (std 1.5), stabilizers
    ``C1 = 0.01^2`` and ``C2 = 0.03^2``, and symmetric boundary handling.
    """
    x, ref = _check_pair(x, ref)
    if min(x.shape[0], x.shape[1]) < SSIM_WINDOW:
        raise SliceTooSmall(
            f"slices of shape {x.shape[:2]} are smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window"
        )
    window = _gaussian_window()
    values = [_ssim_slice(x[:, :, k], ref[:, :, k], window) for k in range(x.shape[2])]
    return float(np.mean(values))


def rel_error(x: np.ndarray, ref: np.ndarray) -> float:
    """Relative Frobenius error ``||x - ref|| / ||ref||``."""
    x, ref = _check_pair(x, ref)
    denom = np.linalg.norm(ref)
    if denom == 0.0:
        raise ZeroReference("reference tensor is all zeros")
    return float(np.linalg.norm(x - ref) / denom)
