"""Versioned binary checkpoints with a JSON header and raw float64 payload.

Layout: 4-byte magic, little-endian uint32 format version, uint64 header
length, the UTF-8 JSON header (echoed experiment config, dimension header,
array manifest, RNG states), then each parameter array's C-order bytes in
manifest order. Every field is deterministic, so saving the same state twice
yields identical bytes.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .policy import PARAM_FIELDS, PolicyParams

MAGIC = b"BBCP"
FORMAT_VERSION = 1


class CheckpointError(Exception):
    pass


@dataclass
class Checkpoint:
    version: int
    config: dict
    dims: dict
    params: PolicyParams
    rng_states: dict


def save_checkpoint(path, params: PolicyParams, config: dict, rng_states: dict | None = None):
    # asarray keeps zero-dim arrays zero-dim (ascontiguousarray would not)
    arrays = [np.asarray(a, dtype="<f8", order="C") for a in params.arrays()]
    header = {
        "arrays": [
            {"name": name, "shape": list(arr.shape)}
            for name, arr in zip(PARAM_FIELDS, arrays)
        ],
        "config": config,
        "dims": {
            "input_dim": params.input_dim,
            "hidden_width": params.hidden_width,
            "num_actions": params.num_actions,
        },
        "rng_states": rng_states or {},
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    with Path(path).open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IQ", FORMAT_VERSION, len(header_bytes)))
        fh.write(header_bytes)
        for arr in arrays:
            fh.write(arr.tobytes())


def load_checkpoint(path) -> Checkpoint:
    raw = Path(path).read_bytes()
    prefix_len = 4 + struct.calcsize("<IQ")
    if len(raw) < prefix_len:
        raise CheckpointError(f"truncated checkpoint (only {len(raw)} bytes)")
    if raw[:4] != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    version, header_len = struct.unpack_from("<IQ", raw, 4)
    if version != FORMAT_VERSION:
        raise CheckpointError(
            f"unsupported checkpoint version {version} (supported version: {FORMAT_VERSION})"
        )
    if len(raw) < prefix_len + header_len:
        raise CheckpointError("truncated checkpoint (incomplete header)")
    try:
        header = json.loads(raw[prefix_len : prefix_len + header_len].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"corrupt checkpoint header: {exc}") from exc

    manifest = header.get("arrays")
    if not isinstance(manifest, list) or [e.get("name") for e in manifest] != list(PARAM_FIELDS):
        raise CheckpointError("corrupt checkpoint header: bad array manifest")
    offset = prefix_len + header_len
    arrays = {}
    for entry in manifest:
        shape = tuple(entry["shape"])
        nbytes = int(np.prod(shape, dtype=np.int64)) * 8 if shape else 8
        chunk = raw[offset : offset + nbytes]
        if len(chunk) != nbytes:
            raise CheckpointError(f"truncated checkpoint (array {entry['name']!r})")
        arrays[entry["name"]] = np.frombuffer(chunk, dtype="<f8").reshape(shape).copy()
        offset += nbytes
    if offset != len(raw):
        raise CheckpointError(f"trailing bytes after checkpoint payload ({len(raw) - offset})")

    params = PolicyParams(**arrays)
    dims = header.get("dims", {})
    declared = (dims.get("hidden_width"), dims.get("input_dim"), dims.get("num_actions"))
    actual = (params.hidden_width, params.input_dim, params.num_actions)
    if declared != actual:
        raise CheckpointError(
            f"dimension header mismatch: header says {declared}, arrays are {actual}"
        )
    return Checkpoint(
        version=version,
        config=header.get("config", {}),
        dims=dims,
        params=params,
        rng_states=header.get("rng_states", {}),
    )
