"""Image quality metrics for 8-bit grayscale: PSNR and mean SSIM."""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

PEAK = 255.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _check_pair(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a.astype(np.float64), b.astype(np.float64)


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """10*log10(255^2 / MSE); identical images give +inf."""
    a, b = _check_pair(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / mse)


def _gaussian_window(n: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    x = np.arange(n, dtype=np.float64) - (n - 1) / 2.0
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return g / g.sum()


def _windowed_mean(img: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Separable Gaussian filtering, cropped to fully-interior windows."""
    out = ndimage.correlate1d(img, g, axis=0, mode="constant")
    out = ndimage.correlate1d(out, g, axis=1, mode="constant")
    m = len(g) // 2
    return out[m:-m, m:-m]


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean structural similarity with the standard 11x11 Gaussian window.

    sigma=1.5, K1=0.01, K2=0.03, dynamic range 255; only windows fully inside
    the image contribute, so inputs must be at least 11x11.
    """
    a, b = _check_pair(a, b)
    if min(a.shape) < SSIM_WINDOW:
        raise ValueError(f"ssim needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}")
    c1 = (SSIM_K1 * PEAK) ** 2
    c2 = (SSIM_K2 * PEAK) ** 2
    g = _gaussian_window()

    mu_a = _windowed_mean(a, g)
    mu_b = _windowed_mean(b, g)
    # population moments per window
    var_a = _windowed_mean(a * a, g) - mu_a * mu_a
    var_b = _windowed_mean(b * b, g) - mu_b * mu_b
    cov = _windowed_mean(a * b, g) - mu_a * mu_b

    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))
