"""Iterative phase retrieval from a real-space / Fourier-space image pair
and extraction of per-mode amplitudes and phases from the result.

The retrieval loop alternates between the two planes, replacing the
modulus by the measured one in each and keeping the phase.  Its
real-space residual is non-increasing, so the trace both monitors
convergence and guards against implementation regressions.  The
transform relation leaves two fields consistent with any image pair:
the retrieved one and its twin (mirrored modes, negated phases), so
callers comparing against a reference should check both orientations.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .optics import Field, ImageGrid, SpotLayout

# Fourier-plane energy may differ from the real-plane energy through
# measurement scaling; it is always rescaled to match, with a warning
# past this relative mismatch.
ENERGY_WARN_REL = 0.01


def wrap_phase(x):
    """Wrap angles to the interval (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(x, dtype=float), 2.0 * np.pi)


@dataclass(frozen=True)
class GSConfig:
    """Retrieval loop settings.

    ``max_iters`` caps each restart, ``tol`` is the relative real-space
    residual that counts as converged, ``seed`` feeds the PCG64 streams
    for the random initial phases (one child stream per restart via
    SeedSequence.spawn), and ``restarts`` is how many independent starts
    to run; the result with the smallest final residual wins, earlier
    restarts winning ties.
    """

    max_iters: int = 5000
    tol: float = 1e-4
    seed: int = 0
    restarts: int = 5

    def __post_init__(self):
        if not isinstance(self.max_iters, (int, np.integer)) or self.max_iters < 1:
            raise ValueError(f"max_iters must be a positive integer, got {self.max_iters!r}")
        if not (math.isfinite(self.tol) and self.tol > 0):
            raise ValueError(f"tol must be positive, got {self.tol!r}")
        if not isinstance(self.restarts, (int, np.integer)) or self.restarts < 1:
            raise ValueError(f"restarts must be a positive integer, got {self.restarts!r}")


@dataclass(frozen=True, eq=False)
class GSResult:
    """Outcome of one retrieval: the complex field with the measured
    real-space modulus and the final phase estimate, the per-iteration
    residual trace, and whether the tolerance was reached."""

    field: Field
    error_trace: np.ndarray
    iterations: int
    converged: bool


def sqrt_image(img: ImageGrid) -> Field:
    """Pixel-wise square root of an intensity image, as a zero-phase field."""
    return Field(np.sqrt(img.values).astype(complex))


def gerchberg_saxton(u0: Field, U0: Field, config: GSConfig = GSConfig()) -> GSResult:
    """Retrieve the phase linking a real-space and a Fourier-space modulus.

    Parameters
    ----------
    u0, U0 : Field
        Measured amplitude grids (square roots of the intensity images)
        in the real and Fourier planes; shapes must match.  U0 is
        rescaled to u0's energy before iterating.
    config : GSConfig
        Loop settings; see GSConfig.

    Returns
    -------
    GSResult
        Best restart by final residual.  ``field`` carries modulus u0
        with the retrieved phase.

    Raises
    ------
    ValueError
        On shape mismatch or an all-zero u0.
    FloatingPointError
        If the residual turns non-finite mid-iteration.
    """
    amp_real = np.abs(np.asarray(u0.values))
    amp_fourier = np.abs(np.asarray(U0.values))
    if amp_real.shape != amp_fourier.shape:
        raise ValueError(
            f"plane shape mismatch: {amp_real.shape} vs {amp_fourier.shape}"
        )
    energy_real = float(np.sum(amp_real * amp_real))
    energy_fourier = float(np.sum(amp_fourier * amp_fourier))
    if energy_real <= 0:
        raise ValueError("real-space amplitudes are all zero")
    if energy_fourier <= 0:
        raise ValueError("Fourier-space amplitudes are all zero")
    if abs(energy_fourier / energy_real - 1.0) > ENERGY_WARN_REL:
        warnings.warn(
            f"plane energies disagree by {energy_fourier / energy_real - 1.0:+.3%}; "
            "rescaling the Fourier modulus",
            stacklevel=2,
        )
    amp_fourier = amp_fourier * math.sqrt(energy_real / energy_fourier)
    norm_real = math.sqrt(energy_real)

    # Both constraints act pixel-wise, so the loop runs in the raw FFT
    # layout (no per-iteration shifts) and carries phases as unit
    # phasors; angle/exp round trips cost more than the transforms.
    # Zero-modulus pixels take phasor 1.
    real_u = np.fft.ifftshift(amp_real)
    fourier_u = np.fft.ifftshift(amp_fourier)

    best = None
    for stream in np.random.SeedSequence(config.seed).spawn(config.restarts):
        rng = np.random.Generator(np.random.PCG64(stream))
        phasor = np.exp(1j * rng.uniform(0.0, 2.0 * math.pi, amp_real.shape))
        errors = []
        converged = False
        for _ in range(config.max_iters):
            spectrum = np.fft.fft2(real_u * phasor, norm="ortho")
            mag = np.abs(spectrum)
            unit = np.divide(spectrum, mag, out=np.ones_like(spectrum), where=mag > 0.0)
            back = np.fft.ifft2(fourier_u * unit, norm="ortho")
            mag = np.abs(back)
            err = float(np.linalg.norm(mag - real_u)) / norm_real
            if not math.isfinite(err):
                raise FloatingPointError("non-finite residual during retrieval")
            phasor = np.divide(back, mag, out=np.ones_like(back), where=mag > 0.0)
            errors.append(err)
            if err <= config.tol:
                converged = True
                break
        candidate = (errors[-1], phasor, errors, converged)
        if best is None or candidate[0] < best[0]:
            best = candidate
    _, phasor, errors, converged = best
    field = Field(amp_real * np.fft.fftshift(phasor))
    return GSResult(field, np.asarray(errors), len(errors), converged)


@dataclass(frozen=True, eq=False)
class ModeEstimate:
    """Per-mode amplitudes and phases in canonical form: amplitudes are
    non-negative with unit total power (within 1e-9) and the first
    phase is pinned to exactly zero, the rest wrapped to (-pi, pi]."""

    amplitudes: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        amps = np.atleast_1d(np.asarray(self.amplitudes, dtype=float)).copy()
        phases = np.atleast_1d(np.asarray(self.phases, dtype=float)).copy()
        if amps.ndim != 1 or phases.ndim != 1 or amps.size != phases.size:
            raise ValueError("amplitudes and phases must be 1-D and equally long")
        if amps.size == 0:
            raise ValueError("an estimate needs at least one mode")
        if not (np.all(np.isfinite(amps)) and np.all(np.isfinite(phases))):
            raise ValueError("estimate entries must be finite")
        if np.any(amps < 0):
            raise ValueError("estimate amplitudes must be non-negative")
        norm = float(np.sum(amps * amps))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"estimate power is {norm:.17g}, not 1 within 1e-9")
        if phases[0] != 0.0:
            raise ValueError("estimate phases must be pinned to phases[0] == 0")
        amps.flags.writeable = False
        phases.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "phases", phases)

    @property
    def n_modes(self) -> int:
        return self.amplitudes.size


def _pinned(amplitudes, phases) -> ModeEstimate:
    """Normalize, subtract the first phase, wrap, and build the estimate."""
    amps = np.asarray(amplitudes, dtype=float)
    norm = float(np.sum(amps * amps))
    if norm <= 0:
        raise ValueError("cannot normalize zero amplitudes")
    phases = np.asarray(phases, dtype=float)
    rel = wrap_phase(phases - phases[0])
    rel[0] = 0.0
    return ModeEstimate(amps / math.sqrt(norm), rel)


def extract_modes(field: Field, layout: SpotLayout) -> ModeEstimate:
    """Integrate the field over one square window per spot.

    Each window is ``spacing``-sided and centered on its spot.  The mode
    amplitude is the square root of the window energy; the mode phase is
    the energy-weighted mean phase (angle of sum(|f| * f)).  Windows must
    stay inside the grid and must not overlap.
    """
    vals = field.values
    height, width = vals.shape
    side = int(round(layout.spacing))
    if side < 1:
        raise ValueError("window side rounds to zero pixels")
    boxes = []
    for cx, cy in layout.centers:
        x0 = int(round(cx - layout.spacing / 2.0))
        y0 = int(round(cy - layout.spacing / 2.0))
        x1, y1 = x0 + side, y0 + side
        if x0 < 0 or y0 < 0 or x1 > width or y1 > height:
            raise ValueError(
                f"window [{x0}:{x1}, {y0}:{y1}] for spot ({cx}, {cy}) "
                f"leaves the {width}x{height} grid"
            )
        boxes.append((x0, x1, y0, y1))
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            a, b = boxes[i], boxes[j]
            if a[0] < b[1] and b[0] < a[1] and a[2] < b[3] and b[2] < a[3]:
                raise ValueError(f"windows for spots {i} and {j} overlap")
    amps = np.empty(len(boxes))
    phases = np.empty(len(boxes))
    for n, (x0, x1, y0, y1) in enumerate(boxes):
        window = vals[y0:y1, x0:x1]
        amps[n] = math.sqrt(float(np.sum(np.abs(window) ** 2)))
        phases[n] = float(np.angle(np.sum(np.abs(window) * window)))
    return _pinned(amps, phases)


def canonicalize(estimate: ModeEstimate, remove_ramp: bool = False) -> ModeEstimate:
    """Re-pin the phase reference; optionally remove a linear phase ramp.

    Ramp removal fits a straight line to the unwrapped phases over the
    mode index (least squares) and subtracts it, which absorbs a
    registration offset between the two imaging planes.  Off by default
    so synthetic, registration-free data is untouched.  Idempotent to
    float precision.
    """
    phases = estimate.phases
    if remove_ramp and estimate.n_modes > 1:
        unwrapped = np.unwrap(phases)
        index = np.arange(estimate.n_modes, dtype=float)
        slope, intercept = np.polyfit(index, unwrapped, 1)
        phases = unwrapped - (slope * index + intercept)
    return _pinned(estimate.amplitudes, phases)


def twin_estimate(estimate: ModeEstimate) -> ModeEstimate:
    """The conjugate-mirror solution: reversed mode order, negated phases.

    Both orientations produce identical image pairs, so retrieval alone
    cannot tell them apart.
    """
    return _pinned(estimate.amplitudes[::-1], -estimate.phases[::-1])


def _reference_phases(reference) -> np.ndarray:
    phases = np.asarray(reference.phases, dtype=float)
    rel = wrap_phase(phases - phases[0])
    rel[0] = 0.0
    return rel


def phase_rms(estimate: ModeEstimate, reference) -> float:
    """RMS of the wrapped phase difference against a reference state
    or estimate, both taken relative to their first mode."""
    ref = _reference_phases(reference)
    if ref.size != estimate.n_modes:
        raise ValueError("mode count mismatch")
    diff = wrap_phase(estimate.phases - ref)
    return float(np.sqrt(np.mean(diff * diff)))


def best_match(estimate: ModeEstimate, reference):
    """Pick the estimate orientation (as-is or twin) closer in phase RMS
    to the reference.

    Returns
    -------
    (ModeEstimate, bool)
        The chosen orientation and whether the twin was used.
    """
    twin = twin_estimate(estimate)
    if phase_rms(twin, reference) < phase_rms(estimate, reference):
        return twin, True
    return estimate, False


@dataclass(frozen=True)
class AmplitudeStats:
    """Population statistics of the mode amplitudes: their mean, the
    spread about that mean, and (optionally) the spread about an ideal
    reference value."""

    mean: float
    std: float
    std_about_reference: float = None


def amplitude_stats(amplitudes, reference: float = None) -> AmplitudeStats:
    """Mean and population standard deviation of mode amplitudes.

    ``amplitudes`` may be an array or anything exposing ``.amplitudes``
    (ModeState, ModeEstimate).  With ``reference`` given, also reports
    the RMS deviation about that value instead of the mean.
    """
    amps = np.asarray(getattr(amplitudes, "amplitudes", amplitudes), dtype=float)
    mean = float(np.mean(amps))
    std = float(np.sqrt(np.mean((amps - mean) ** 2)))
    about_ref = None
    if reference is not None:
        about_ref = float(np.sqrt(np.mean((amps - float(reference)) ** 2)))
    return AmplitudeStats(mean, std, about_ref)
