"""Checkpoint files.

Layout: a magic/version line, one JSON header line (layer manifest, config
snapshot, seed, payload size), then the flat weights as little-endian
float64.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import CheckpointError
from .network import PolicyParams, manifest

MAGIC = b"MRTA-CKPT"
VERSION = 1
_DTYPE = np.dtype("<f8")


def save_checkpoint(params: PolicyParams, path, config: dict | None = None, seed: int | None = None) -> None:
    flat = params.flat().astype(_DTYPE)
    header = {
        "manifest": [[name, list(shape)] for name, shape in manifest()],
        "dtype": _DTYPE.str,
        "payload_bytes": flat.nbytes,
        "config": config or {},
        "seed": seed,
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(MAGIC + b" " + str(VERSION).encode() + b"\n")
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        fh.write(flat.tobytes())


def load_checkpoint(path) -> tuple[PolicyParams, dict]:
    """Return (params, header). ``header["config"]`` is the saved config snapshot."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    try:
        first, rest = data.split(b"\n", 1)
        header_line, payload = rest.split(b"\n", 1)
    except ValueError:
        raise CheckpointError("checkpoint header is incomplete") from None
    parts = first.split(b" ")
    if len(parts) != 2 or parts[0] != MAGIC:
        raise CheckpointError("not a checkpoint file")
    if parts[1] != str(VERSION).encode():
        raise CheckpointError(f"unsupported checkpoint version {parts[1].decode(errors='replace')}")
    try:
        header = json.loads(header_line)
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"corrupt checkpoint header: {exc}") from exc

    expected = [[name, list(shape)] for name, shape in manifest()]
    if header.get("manifest") != expected:
        raise CheckpointError("layer manifest does not match this network")
    if header.get("dtype") != _DTYPE.str:
        raise CheckpointError(f"unsupported payload dtype {header.get('dtype')}")
    n_bytes = sum(int(np.prod(shape)) for _, shape in expected) * _DTYPE.itemsize
    if header.get("payload_bytes") != n_bytes or len(payload) != n_bytes:
        raise CheckpointError(f"payload has {len(payload)} bytes, expected {n_bytes}")
    flat = np.frombuffer(payload, dtype=_DTYPE).astype(np.float64)
    if not np.all(np.isfinite(flat)):
        raise CheckpointError("checkpoint contains non-finite weights")
    return PolicyParams.from_flat(flat), header
