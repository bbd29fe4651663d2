"""Figure and CSV emission for human-readable run summaries.

Everything here is presentation only: the functions take already
computed states, estimates, and images, write delimited tables next to
rendered PNG figures, and return the written paths.
"""

from __future__ import annotations

import csv
import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .optics import ImageGrid, analytic_pattern

FIG_DPI = 150


def _ensure_dir(directory) -> str:
    directory = os.fspath(directory)
    os.makedirs(directory, exist_ok=True)
    return directory


def write_mode_table(path, amplitudes, phases) -> str:
    """CSV of per-mode amplitude and phase."""
    path = os.fspath(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mode", "amplitude", "phase_rad"])
        for n, (amp, phase) in enumerate(zip(amplitudes, phases), start=1):
            writer.writerow([n, repr(float(amp)), repr(float(phase))])
    return path


def plot_modes(path, amplitudes, phases, reference_amplitude: float = None) -> str:
    """Bar charts of mode amplitudes and phases, with an optional dashed
    line at the ideal uniform amplitude."""
    amplitudes = np.asarray(amplitudes, dtype=float)
    phases = np.asarray(phases, dtype=float)
    modes = np.arange(1, amplitudes.size + 1)
    fig, (ax_amp, ax_phase) = plt.subplots(1, 2, figsize=(8.0, 3.2))
    ax_amp.bar(modes, amplitudes, color="#4878b0")
    if reference_amplitude is not None:
        ax_amp.axhline(reference_amplitude, color="k", linestyle="--", linewidth=1)
    ax_amp.set_xlabel("mode")
    ax_amp.set_ylabel("amplitude")
    ax_phase.bar(modes, phases, color="#b04848")
    ax_phase.axhline(0.0, color="k", linewidth=0.8)
    ax_phase.set_xlabel("mode")
    ax_phase.set_ylabel("phase (rad)")
    ax_phase.set_ylim(-math.pi, math.pi)
    fig.tight_layout()
    fig.savefig(os.fspath(path), dpi=FIG_DPI)
    plt.close(fig)
    return os.fspath(path)


def plot_image_pair(path, real_img: ImageGrid, fourier_img: ImageGrid) -> str:
    """Side-by-side panels of the two planes, shown in amplitude (square
    root) scaling so the faint fringes stay visible."""
    fig, axes = plt.subplots(1, 2, figsize=(8.0, 4.0))
    for ax, img, title in (
        (axes[0], real_img, "real space"),
        (axes[1], fourier_img, "Fourier space"),
    ):
        ax.imshow(np.sqrt(img.values), cmap="inferno", origin="lower")
        ax.set_title(title)
        ax.set_xticks([])
        ax.set_yticks([])
    fig.tight_layout()
    fig.savefig(os.fspath(path), dpi=FIG_DPI)
    plt.close(fig)
    return os.fspath(path)


def central_row_profile(fourier_img: ImageGrid, n_modes: int, spacing: float, waist: float):
    """Measured central row of a Fourier image against the closed-form
    pattern, both peak-normalized.

    Returns
    -------
    (f_x, measured, analytic)
        Spatial frequency axis in cycles per pixel and the two profiles.
    """
    height, width = fourier_img.values.shape
    row = fourier_img.values[height // 2]
    f_x = (np.arange(width) - width // 2) / float(width)
    reference = analytic_pattern(f_x, n_modes, spacing, waist)
    peak_row = float(np.max(row))
    peak_ref = float(np.max(reference))
    if peak_row <= 0 or peak_ref <= 0:
        raise ValueError("profile is identically zero")
    return f_x, row / peak_row, reference / peak_ref


def write_profile_table(path, f_x, measured, analytic) -> str:
    path = os.fspath(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["f_x_cycles_per_px", "measured", "analytic"])
        for fx, m, a in zip(f_x, measured, analytic):
            writer.writerow([repr(float(fx)), repr(float(m)), repr(float(a))])
    return path


def plot_profile(path, f_x, measured, analytic) -> str:
    fig, ax = plt.subplots(figsize=(6.4, 3.2))
    ax.plot(f_x, measured, label="measured", linewidth=1.2)
    ax.plot(f_x, analytic, label="closed form", linestyle="--", linewidth=1.0)
    ax.set_xlabel("spatial frequency (cycles / px)")
    ax.set_ylabel("normalized intensity")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(os.fspath(path), dpi=FIG_DPI)
    plt.close(fig)
    return os.fspath(path)


def render_report(
    out_dir,
    amplitudes=None,
    phases=None,
    real_img: ImageGrid = None,
    fourier_img: ImageGrid = None,
    n_modes: int = None,
    spacing: float = None,
    waist: float = None,
    reference_amplitude: float = None,
) -> list:
    """Write every table and figure that the provided inputs allow.

    Returns the list of written paths (empty inputs produce nothing).
    """
    out_dir = _ensure_dir(out_dir)
    written = []
    if amplitudes is not None and phases is not None:
        written.append(write_mode_table(os.path.join(out_dir, "modes.csv"), amplitudes, phases))
        written.append(
            plot_modes(
                os.path.join(out_dir, "modes.png"), amplitudes, phases, reference_amplitude
            )
        )
    if real_img is not None and fourier_img is not None:
        written.append(plot_image_pair(os.path.join(out_dir, "images.png"), real_img, fourier_img))
    if fourier_img is not None and n_modes and spacing and waist:
        f_x, measured, reference = central_row_profile(fourier_img, n_modes, spacing, waist)
        written.append(
            write_profile_table(os.path.join(out_dir, "profile.csv"), f_x, measured, reference)
        )
        written.append(plot_profile(os.path.join(out_dir, "profile.png"), f_x, measured, reference))
    return written
