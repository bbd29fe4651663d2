"""Single-photon mode states and Y-splitter cascade simulation.

A photon distributed over n waveguide modes is stored in polar form:
non-negative amplitudes plus phases in radians.  Balanced binary trees
of Y-splitters prepare W-like states; each splitter node carries a power
ratio for its upper branch and static phase offsets for both branches.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .fileio import atomic_write_text

# Constructor tolerance on sum(amplitudes**2); file loads get a looser
# gate (see load_state) and are renormalized when they pass it.
NORM_TOL = 1e-12
FILE_NORM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ModeState:
    """Pure single-photon state over n modes, in polar form.

    Amplitudes are non-negative (any sign is absorbed into the phase on
    construction) and satisfy ``sum(amplitudes**2) == 1`` within 1e-12.
    Phases are radians and otherwise unconstrained.  Arrays are locked
    read-only after construction.
    """

    amplitudes: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        amps = np.atleast_1d(np.asarray(self.amplitudes, dtype=float)).copy()
        phases = np.atleast_1d(np.asarray(self.phases, dtype=float)).copy()
        if amps.ndim != 1 or phases.ndim != 1:
            raise ValueError("amplitudes and phases must be one-dimensional")
        if amps.size != phases.size:
            raise ValueError(
                f"length mismatch: {amps.size} amplitudes vs {phases.size} phases"
            )
        if amps.size == 0:
            raise ValueError("a state needs at least one mode")
        if not (np.all(np.isfinite(amps)) and np.all(np.isfinite(phases))):
            raise ValueError("amplitudes and phases must be finite")
        negative = amps < 0
        if np.any(negative):
            amps = np.where(negative, -amps, amps)
            phases = np.where(negative, phases + math.pi, phases)
        norm = float(np.sum(amps * amps))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(
                f"sum of squared amplitudes is {norm:.17g}, not 1 within {NORM_TOL:g}"
            )
        amps.flags.writeable = False
        phases.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "phases", phases)

    @classmethod
    def normalized(cls, amplitudes, phases) -> "ModeState":
        """Construct after rescaling the amplitudes to unit total power."""
        amps = np.atleast_1d(np.asarray(amplitudes, dtype=float))
        norm = float(np.sum(amps * amps))
        if not (np.isfinite(norm) and norm > 0.0):
            raise ValueError("cannot normalize a zero or non-finite amplitude vector")
        return cls(amps / math.sqrt(norm), phases)

    @property
    def n_modes(self) -> int:
        return self.amplitudes.size

    def coefficients(self) -> np.ndarray:
        """Complex mode coefficients ``amplitudes * exp(i * phases)``."""
        return self.amplitudes * np.exp(1j * self.phases)

    def with_global_phase(self, shift: float) -> "ModeState":
        """Same state with ``shift`` radians added to every phase."""
        return ModeState(self.amplitudes, self.phases + float(shift))


def ideal_w(n_modes: int) -> ModeState:
    """Uniform-amplitude, zero-phase state over ``n_modes`` modes."""
    if not isinstance(n_modes, (int, np.integer)) or n_modes < 1:
        raise ValueError(f"n_modes must be a positive integer, got {n_modes!r}")
    amps = np.full(n_modes, 1.0 / math.sqrt(n_modes))
    return ModeState(amps, np.zeros(n_modes))


@dataclass(frozen=True)
class SplitterSpec:
    """One Y-splitter node: upper-branch power ratio plus static phases.

    ``ratio`` is the fraction of power sent to the upper branch and must
    lie strictly inside (0, 1).  ``phase_upper``/``phase_lower`` are
    static phase offsets (radians) picked up on each branch; they default
    to 0 for an ideal device.
    """

    ratio: float = 0.5
    phase_upper: float = 0.0
    phase_lower: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.ratio) and 0.0 < self.ratio < 1.0):
            raise ValueError(f"splitter ratio must be in (0, 1), got {self.ratio!r}")
        if not (math.isfinite(self.phase_upper) and math.isfinite(self.phase_lower)):
            raise ValueError("splitter phases must be finite")


@dataclass(frozen=True, eq=False)
class CircuitSpec:
    """Balanced binary splitter tree of the given depth.

    ``splitters`` maps (level, position) to a SplitterSpec for every node:
    level runs 0..depth-1 and position runs 0..2**level - 1.  A tree of
    depth D fans one input out to 2**D output modes.
    """

    depth: int
    splitters: Mapping[tuple, SplitterSpec] = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.depth, (int, np.integer)) or self.depth < 0:
            raise ValueError(f"depth must be a non-negative integer, got {self.depth!r}")
        expected = {
            (level, pos) for level in range(self.depth) for pos in range(2**level)
        }
        got = set(self.splitters.keys())
        if got != expected:
            missing = sorted(expected - got)
            extra = sorted(got - expected)
            raise ValueError(
                f"malformed splitter tree for depth {self.depth}: "
                f"missing nodes {missing}, unexpected nodes {extra}"
            )
        for key, spec in self.splitters.items():
            if not isinstance(spec, SplitterSpec):
                raise ValueError(f"node {key} is not a SplitterSpec")
        object.__setattr__(self, "splitters", MappingProxyType(dict(self.splitters)))

    @classmethod
    def ideal(cls, depth: int) -> "CircuitSpec":
        """Tree of 50:50 splitters with zero static phases."""
        nodes = {
            (level, pos): SplitterSpec()
            for level in range(depth)
            for pos in range(2**level)
        }
        return cls(depth, nodes)


def propagate(circuit: CircuitSpec) -> ModeState:
    """Propagate one photon through the splitter tree.

    Each output mode accumulates the product of branch amplitudes along
    its root-to-leaf path: sqrt(ratio) with phase_upper on the upper
    branch, sqrt(1 - ratio) with phase_lower on the lower.  Mode index
    bits read the path from the root (bit set = lower branch), so the
    first half of the outputs sits behind the root's upper branch.

    Returns
    -------
    ModeState
        State over 2**depth modes; unit norm holds to float precision.
    """
    d = circuit.depth
    n = 2**d
    amps = np.empty(n)
    phases = np.empty(n)
    for mode in range(n):
        amp = 1.0
        phase = 0.0
        for level in range(d):
            pos = mode >> (d - level)
            branch_lower = (mode >> (d - 1 - level)) & 1
            node = circuit.splitters[(level, pos)]
            if branch_lower:
                amp *= math.sqrt(1.0 - node.ratio)
                phase += node.phase_lower
            else:
                amp *= math.sqrt(node.ratio)
                phase += node.phase_upper
        amps[mode] = amp
        phases[mode] = phase
    return ModeState(amps, phases)


def fidelity(a: ModeState, b: ModeState) -> float:
    """Squared magnitude of the overlap between two states.

    Insensitive to a global phase on either argument; 1 iff the states
    agree up to a global phase.
    """
    if a.n_modes != b.n_modes:
        raise ValueError(f"mode count mismatch: {a.n_modes} vs {b.n_modes}")
    overlap = np.sum(np.conj(a.coefficients()) * b.coefficients())
    return float(abs(overlap) ** 2)


def save_state(state: ModeState, path) -> None:
    """Write a state to JSON (atomic replace).

    The layout is ``{"n_modes", "amplitudes", "phases_rad"}`` with floats
    serialized at full round-trip precision.
    """
    payload = {
        "n_modes": state.n_modes,
        "amplitudes": [float(v) for v in state.amplitudes],
        "phases_rad": [float(v) for v in state.phases],
    }
    atomic_write_text(path, json.dumps(payload, indent=2) + "\n")


def load_state(path) -> ModeState:
    """Read a state JSON written by save_state.

    The squared amplitudes must sum to 1 within 1e-9 or the file is
    rejected; a sum inside that gate but outside the constructor
    tolerance is renormalized.  Values within constructor tolerance are
    passed through untouched, so a save/load round trip is bit-exact.
    """
    with open(path, "r", encoding="ascii") as fh:
        payload = json.load(fh)
    try:
        n_modes = int(payload["n_modes"])
        amps = np.asarray(payload["amplitudes"], dtype=float)
        phases = np.asarray(payload["phases_rad"], dtype=float)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed state file {os.fspath(path)!r}: {exc}") from exc
    if amps.ndim != 1 or amps.size != n_modes or phases.size != n_modes:
        raise ValueError(
            f"state file {os.fspath(path)!r} has inconsistent lengths: "
            f"n_modes={n_modes}, {amps.size} amplitudes, {phases.size} phases"
        )
    norm = float(np.sum(amps * amps))
    if abs(norm - 1.0) > FILE_NORM_TOL:
        raise ValueError(
            f"state file {os.fspath(path)!r} is not normalized: "
            f"sum of squared amplitudes is {norm:.17g}"
        )
    if abs(norm - 1.0) > NORM_TOL:
        return ModeState.normalized(amps, phases)
    return ModeState(amps, phases)
