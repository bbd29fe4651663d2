"""Atomic file writes shared by the persistence helpers and the CLI."""

from __future__ import annotations

import json
import os
import tempfile


def atomic_write_bytes(path, data: bytes) -> None:
    """Write bytes via a temp file in the same directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("ascii"))


def write_json(path, payload) -> None:
    """Serialize ``payload`` as indented JSON and write it atomically."""
    atomic_write_text(path, json.dumps(payload, indent=2) + "\n")


def derive_seeds(seed: int, count: int) -> list:
    """Derive ``count`` independent integer seeds from one master seed."""
    import numpy as np

    return [int(word) for word in np.random.SeedSequence(seed).generate_state(count)]
