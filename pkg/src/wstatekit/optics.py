"""Facet imaging: Gaussian spot rendering, centered unitary DFT, and
closed-form diffraction patterns.

Real-space images place one Gaussian spot per waveguide mode on a pixel
grid; Fourier-space images are the squared modulus of the centered
unitary 2-D DFT of the complex field.  Coherence is modeled by blending
the coherent Fourier image with the incoherent (per-mode) sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_GRID = 256
DEFAULT_SPACING = 16.0
DEFAULT_WAIST = 4.0

from .state import ModeState


@dataclass(frozen=True, eq=False)
class ImageGrid:
    """Non-negative intensity image with a physical pixel pitch.

    ``values`` is a 2-D float array indexed [row, column] = [y, x];
    ``pitch`` is the pixel size in arbitrary physical units (default 1,
    i.e. pixel units).  Values are locked read-only after construction.
    """

    values: np.ndarray
    pitch: float = 1.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).copy()
        if vals.ndim != 2:
            raise ValueError("an image must be two-dimensional")
        if not np.all(np.isfinite(vals)):
            raise ValueError("image values must be finite")
        if np.any(vals < 0):
            raise ValueError("image values must be non-negative")
        if not (math.isfinite(self.pitch) and self.pitch > 0):
            raise ValueError(f"pitch must be positive, got {self.pitch!r}")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def total(self) -> float:
        """Sum of all pixel values."""
        return float(np.sum(self.values))


@dataclass(frozen=True, eq=False)
class Field:
    """Complex field sampled on a pixel grid (same indexing as ImageGrid)."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex).copy()
        if vals.ndim != 2:
            raise ValueError("a field must be two-dimensional")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def energy(self) -> float:
        """Sum of |values|**2 over the grid."""
        return float(np.sum(np.abs(self.values) ** 2))


@dataclass(frozen=True, eq=False)
class SpotLayout:
    """Spot centers (x, y) in pixels plus the shared waist and spacing.

    ``spacing`` records the nominal center-to-center distance; it also
    sets the side of the square windows used when integrating per-mode
    amplitudes back out of a retrieved field.
    """

    centers: np.ndarray
    waist: float
    spacing: float

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float).copy()
        if centers.ndim != 2 or centers.shape[1] != 2 or centers.shape[0] < 1:
            raise ValueError("centers must be an (n, 2) array of x, y pairs")
        if not np.all(np.isfinite(centers)):
            raise ValueError("spot centers must be finite")
        if not (math.isfinite(self.waist) and self.waist > 0):
            raise ValueError(f"waist must be positive, got {self.waist!r}")
        if not (math.isfinite(self.spacing) and self.spacing > 0):
            raise ValueError(f"spacing must be positive, got {self.spacing!r}")
        centers.flags.writeable = False
        object.__setattr__(self, "centers", centers)

    @property
    def n_spots(self) -> int:
        return self.centers.shape[0]

    @classmethod
    def linear(
        cls,
        n_modes: int,
        width: int = DEFAULT_GRID,
        height: int = DEFAULT_GRID,
        spacing: float = DEFAULT_SPACING,
        waist: float = DEFAULT_WAIST,
    ) -> "SpotLayout":
        """Equally spaced spots on the horizontal midline, centered on the
        grid center used by the DFT convention (index width // 2)."""
        if n_modes < 1:
            raise ValueError("need at least one mode")
        cx = float(width // 2)
        cy = float(height // 2)
        offsets = (np.arange(n_modes) - (n_modes - 1) / 2.0) * float(spacing)
        centers = np.column_stack([cx + offsets, np.full(n_modes, cy)])
        return cls(centers, float(waist), float(spacing))


@dataclass(frozen=True)
class LensSpec:
    """Fourier-transforming lens: focal length and wavelength, in meters."""

    focal_length: float
    wavelength: float

    def __post_init__(self):
        if not (math.isfinite(self.focal_length) and self.focal_length > 0):
            raise ValueError("focal_length must be positive")
        if not (math.isfinite(self.wavelength) and self.wavelength > 0):
            raise ValueError("wavelength must be positive")


@dataclass(frozen=True)
class NoiseModel:
    """Coherence and contamination parameters of a prepared state.

    ``p`` is the coherent fraction of the single-photon part; ``q`` is
    the weight of the two-excitation contamination.  Neither affects the
    real-space image; ``p`` blends the Fourier image and ``q`` only
    enters the certification stage.
    """

    p: float = 1.0
    q: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.p) and 0.0 <= self.p <= 1.0):
            raise ValueError(f"p must be in [0, 1], got {self.p!r}")
        if not (math.isfinite(self.q) and 0.0 <= self.q <= 1.0):
            raise ValueError(f"q must be in [0, 1], got {self.q!r}")


def _spot(center, waist: float, width: int, height: int) -> np.ndarray:
    """L2-normalized Gaussian spot sampled on the pixel grid."""
    cx, cy = float(center[0]), float(center[1])
    x = np.arange(width, dtype=float)[None, :]
    y = np.arange(height, dtype=float)[:, None]
    g = np.exp(-(((x - cx) ** 2) + ((y - cy) ** 2)) / (waist * waist))
    return g / math.sqrt(float(np.sum(g * g)))


def _check_margins(layout: SpotLayout, width: int, height: int) -> None:
    margin = 3.0 * layout.waist
    for cx, cy in layout.centers:
        if not (margin <= cx <= (width - 1) - margin and margin <= cy <= (height - 1) - margin):
            raise ValueError(
                f"spot center ({cx}, {cy}) closer than 3 waists "
                f"({margin} px) to the edge of a {width}x{height} grid"
            )


def render_field(
    state: ModeState,
    layout: SpotLayout,
    width: int = DEFAULT_GRID,
    height: int = DEFAULT_GRID,
) -> Field:
    """Superpose one normalized Gaussian spot per mode.

    Each spot ``exp(-((x-x0)**2 + (y-y0)**2) / waist**2)`` is normalized
    to unit energy on the grid and scaled by the mode's complex
    coefficient.  Total field energy is 1 up to the (exponentially
    small) overlap between neighboring spots; it is exactly 1 for well
    separated spots.

    Raises
    ------
    ValueError
        If the spot count disagrees with the mode count, or any center
        sits closer than 3 waists to an edge.
    """
    if layout.n_spots != state.n_modes:
        raise ValueError(
            f"layout has {layout.n_spots} spots but the state has {state.n_modes} modes"
        )
    _check_margins(layout, width, height)
    field = np.zeros((height, width), dtype=complex)
    for coeff, center in zip(state.coefficients(), layout.centers):
        field += coeff * _spot(center, layout.waist, width, height)
    return Field(field)


def dft2_array(values: np.ndarray, direction: str = "forward") -> np.ndarray:
    """Centered unitary 2-D DFT on a raw array.

    Both domains index frequencies/positions relative to the grid center
    (index size // 2 on each axis); the transform is unitary, so energy
    is preserved exactly and forward/inverse compose to the identity.
    """
    if direction == "forward":
        return np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(values), norm="ortho"))
    if direction == "inverse":
        return np.fft.fftshift(np.fft.ifft2(np.fft.ifftshift(values), norm="ortho"))
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def dft2_unitary(field: Field, direction: str = "forward") -> Field:
    """Centered unitary 2-D DFT of a Field (see dft2_array)."""
    return Field(dft2_array(field.values, direction))


def intensity(field: Field) -> ImageGrid:
    """Squared modulus of the field."""
    return ImageGrid(np.abs(field.values) ** 2)


def render_pair(
    state: ModeState,
    noise: NoiseModel,
    layout: SpotLayout,
    width: int = DEFAULT_GRID,
    height: int = DEFAULT_GRID,
):
    """Render the real-space image and the partially coherent Fourier image.

    The real-space image is the intensity of the superposed field and
    does not depend on the coherent fraction.  The Fourier image blends
    the fully coherent pattern with the incoherent per-mode sum:
    ``p * |DFT(field)|**2 + (1 - p) * sum_n w_n |DFT(spot_n)|**2`` with
    ``w_n`` the squared mode amplitudes.

    Returns
    -------
    (ImageGrid, ImageGrid)
        Real-space image, Fourier-space image.
    """
    field = render_field(state, layout, width, height)
    coherent = np.abs(dft2_array(field.values, "forward")) ** 2
    incoherent = np.zeros_like(coherent)
    for amp, center in zip(state.amplitudes, layout.centers):
        spot = _spot(center, layout.waist, width, height)
        incoherent += (amp * amp) * np.abs(dft2_array(spot, "forward")) ** 2
    blended = noise.p * coherent + (1.0 - noise.p) * incoherent
    return intensity(field), ImageGrid(blended)


def analytic_pattern(f_x, n_modes: int, d: float, waist: float):
    """Closed-form 1-D Fourier intensity of n equally spaced spots.

    Gaussian envelope times a multi-slit grating factor:
    ``exp(-2 pi**2 waist**2 f_x**2) * sin(n pi f_x d)**2 / sin(pi f_x d)**2``
    with the removable singularities filled by their limit n**2 (so a
    single mode reduces to the bare envelope and the pattern peaks at
    n**2 times the envelope at integer multiples of 1/d).

    Parameters
    ----------
    f_x : float or array
        Spatial frequency in cycles per pixel.
    n_modes : int
        Number of spots.
    d : float
        Center-to-center spot spacing in pixels.
    waist : float
        Gaussian spot waist in pixels.
    """
    if n_modes < 1:
        raise ValueError("need at least one mode")
    if not (math.isfinite(d) and d > 0):
        raise ValueError(f"spacing must be positive, got {d!r}")
    if not (math.isfinite(waist) and waist > 0):
        raise ValueError(f"waist must be positive, got {waist!r}")
    fx = np.asarray(f_x, dtype=float)
    envelope = np.exp(-2.0 * math.pi**2 * waist**2 * fx * fx)
    if n_modes == 1:
        result = envelope
    else:
        # np.sinc(y) = sin(pi y)/(pi y) with the y = 0 limit built in, so
        # the ratio below hits exactly n**2 at integer f_x * d.
        y = fx * d
        y = y - np.round(y)
        ratio = n_modes * np.sinc(n_modes * y) / np.sinc(y)
        result = envelope * ratio * ratio
    if np.isscalar(f_x) or np.ndim(f_x) == 0:
        return float(result)
    return result


def lens_map(x_f, lens: LensSpec):
    """Map focal-plane position to spatial frequency: x_f / (wavelength * f)."""
    return x_f / (lens.wavelength * lens.focal_length)


def add_detection_noise(
    img: ImageGrid,
    background: float,
    seed: int,
    fluctuation: float = 1.0,
) -> ImageGrid:
    """Add a constant background and Poisson-like per-pixel fluctuation.

    The noisy value is ``v + background + fluctuation * sqrt(v + background) * eta``
    with ``eta`` standard normal per pixel, clipped at zero.  A zero
    fluctuation scale with zero background is the identity.  The PRNG is
    PCG64 seeded with ``seed``, so outputs are bit-reproducible.
    """
    if not (math.isfinite(background) and background >= 0):
        raise ValueError(f"background must be non-negative, got {background!r}")
    if not (math.isfinite(fluctuation) and fluctuation >= 0):
        raise ValueError(f"fluctuation must be non-negative, got {fluctuation!r}")
    level = img.values + background
    if fluctuation == 0.0:
        return ImageGrid(level, img.pitch)
    rng = np.random.Generator(np.random.PCG64(seed))
    eta = rng.standard_normal(level.shape)
    noisy = level + fluctuation * np.sqrt(level) * eta
    return ImageGrid(np.clip(noisy, 0.0, None), img.pitch)
