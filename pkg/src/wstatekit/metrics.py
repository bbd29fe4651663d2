"""Image agreement metrics: SSIM, normalized cross-correlation, fringe
visibility, and a least-squares estimate of the coherent fraction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .optics import ImageGrid


@dataclass(frozen=True)
class SsimParams:
    """Structural-similarity settings: odd uniform window side, the two
    stabilizing constants' coefficients, and the dynamic range ``L``
    (None means the maximum value over both images)."""

    window: int = 11
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = None

    def __post_init__(self):
        if not isinstance(self.window, (int, np.integer)) or self.window < 3 or self.window % 2 == 0:
            raise ValueError(f"window must be an odd integer >= 3, got {self.window!r}")
        if not (math.isfinite(self.k1) and self.k1 > 0 and math.isfinite(self.k2) and self.k2 > 0):
            raise ValueError("k1 and k2 must be positive")
        if self.dynamic_range is not None and not (
            math.isfinite(self.dynamic_range) and self.dynamic_range > 0
        ):
            raise ValueError("dynamic_range must be positive when given")


def _window_mean(arr: np.ndarray, window: int) -> np.ndarray:
    return sliding_window_view(arr, (window, window)).mean(axis=(-2, -1))


def ssim(a: ImageGrid, b: ImageGrid, params: SsimParams = SsimParams()) -> float:
    """Mean structural similarity over all full uniform windows.

    Window statistics use population variance.  ``ssim(a, a)`` is exactly
    1, the measure is symmetric, and scaling both images by a common
    factor leaves it unchanged when the dynamic range is derived from
    the images.
    """
    va, vb = a.values, b.values
    if va.shape != vb.shape:
        raise ValueError(f"image shape mismatch: {va.shape} vs {vb.shape}")
    if params.window > min(va.shape):
        raise ValueError(
            f"window {params.window} exceeds image extent {min(va.shape)}"
        )
    dynamic_range = params.dynamic_range
    if dynamic_range is None:
        dynamic_range = max(float(va.max()), float(vb.max()))
        if dynamic_range <= 0:
            raise ValueError("both images are zero; dynamic range is undefined")
    c1 = (params.k1 * dynamic_range) ** 2
    c2 = (params.k2 * dynamic_range) ** 2
    mu_a = _window_mean(va, params.window)
    mu_b = _window_mean(vb, params.window)
    var_a = _window_mean(va * va, params.window) - mu_a * mu_a
    var_b = _window_mean(vb * vb, params.window) - mu_b * mu_b
    cov = _window_mean(va * vb, params.window) - mu_a * mu_b
    numerator = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    denominator = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(numerator / denominator))


def ncc_overlap(a: ImageGrid, b: ImageGrid) -> float:
    """Pearson correlation between the flattened images.

    Raises ValueError when either image has zero variance (the
    correlation is undefined on a constant image).
    """
    va, vb = a.values, b.values
    if va.shape != vb.shape:
        raise ValueError(f"image shape mismatch: {va.shape} vs {vb.shape}")
    da = va - np.mean(va)
    db = vb - np.mean(vb)
    ssa = float(np.sum(da * da))
    ssb = float(np.sum(db * db))
    if ssa <= 0 or ssb <= 0:
        raise ValueError("correlation is undefined for a constant image")
    return float(np.sum(da * db) / math.sqrt(ssa * ssb))


def fringe_visibility(img: ImageGrid, region_halfwidth: int, envelope: ImageGrid) -> float:
    """Michelson visibility of the central-row fringes.

    The central row of ``img`` is divided by the central row of
    ``envelope`` (the fully incoherent image, which supplies the
    single-spot envelope) over the window of ``region_halfwidth`` pixels
    either side of the center column; visibility is (max - min) /
    (max + min) of that ratio, clamped to [0, 1].  The half-width should
    cover at least 1.5 fringe periods, i.e. 1.5 * width / spacing pixels.

    Raises ValueError when the envelope has a zero inside the window.
    """
    if not isinstance(region_halfwidth, (int, np.integer)) or region_halfwidth < 1:
        raise ValueError(f"region_halfwidth must be a positive integer, got {region_halfwidth!r}")
    if img.values.shape != envelope.values.shape:
        raise ValueError("image and envelope shapes differ")
    height, width = img.values.shape
    row = height // 2
    center = width // 2
    lo, hi = center - region_halfwidth, center + region_halfwidth + 1
    if lo < 0 or hi > width:
        raise ValueError(f"half-width {region_halfwidth} leaves the image")
    signal = img.values[row, lo:hi]
    env = envelope.values[row, lo:hi]
    if np.any(env <= 0):
        raise ValueError("envelope contains zeros inside the visibility window")
    ratio = signal / env
    peak, trough = float(np.max(ratio)), float(np.min(ratio))
    if peak + trough == 0:
        return 0.0
    return min(1.0, max(0.0, (peak - trough) / (peak + trough)))


def _normalized(values: np.ndarray, label: str) -> np.ndarray:
    total = float(np.sum(values))
    if total <= 0:
        raise ValueError(f"{label} image has zero total intensity")
    return values / total


def estimate_p(measured: ImageGrid, coherent: ImageGrid, incoherent: ImageGrid) -> float:
    """Coherent fraction that best explains the measured image.

    All three images are normalized to unit total intensity; the
    estimate minimizes the squared L2 distance between the measurement
    and the normalized blend ``p * coherent + (1 - p) * incoherent``
    over p in [0, 1] by golden-section search to an interval of 1e-6.
    """
    if measured.values.shape != coherent.values.shape or measured.values.shape != incoherent.values.shape:
        raise ValueError("image shape mismatch")
    m = _normalized(measured.values, "measured")
    c = _normalized(coherent.values, "coherent template")
    i = _normalized(incoherent.values, "incoherent template")
    span = float(np.max(np.abs(c - i)))
    if span <= 1e-15 * max(float(np.max(c)), float(np.max(i))):
        raise ValueError("templates are indistinguishable; the fit is ill-posed")

    def objective(p: float) -> float:
        blend = p * c + (1.0 - p) * i
        blend = blend / float(np.sum(blend))
        return float(np.sum((m - blend) ** 2))

    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    lo, hi = 0.0, 1.0
    left = hi - inv_phi * (hi - lo)
    right = lo + inv_phi * (hi - lo)
    f_left, f_right = objective(left), objective(right)
    while hi - lo > 1e-6:
        if f_left < f_right:
            hi, right, f_right = right, left, f_left
            left = hi - inv_phi * (hi - lo)
            f_left = objective(left)
        else:
            lo, left, f_left = left, right, f_right
            right = lo + inv_phi * (hi - lo)
            f_right = objective(right)
    return 0.5 * (lo + hi)
