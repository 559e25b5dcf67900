"""Versioned binary checkpoints plus a JSON debug export.

Layout: magic string, little-endian uint32 schema version, uint32 JSON
length, the architecture descriptor (JSON, includes the init seed), then
the parameter tensors as little-endian float32 in declaration order
(w1, b1, w2, b2).
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .network import Architecture, PolicyParams

MAGIC = b"CFADAPT-POLICY\n"
VERSION = 1


class CheckpointError(ValueError):
    pass


def save(params: PolicyParams, path) -> None:
    meta = {"arch": params.arch.to_json(), "seed": params.seed}
    blob = json.dumps(meta).encode()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<II", VERSION, len(blob)))
        f.write(blob)
        for t in params.tensors():
            f.write(np.ascontiguousarray(t, dtype="<f4").tobytes())


def load(path) -> PolicyParams:
    with open(path, "rb") as f:
        if f.read(len(MAGIC)) != MAGIC:
            raise CheckpointError(f"{path}: bad magic")
        version, meta_len = struct.unpack("<II", f.read(8))
        if version != VERSION:
            raise CheckpointError(f"{path}: unsupported version {version}")
        meta = json.loads(f.read(meta_len))
        arch = Architecture.from_json(meta["arch"])
        shapes = [
            (arch.input_dim, arch.hidden_dim),
            (arch.hidden_dim,),
            (arch.hidden_dim, arch.output_dim),
            (arch.output_dim,),
        ]
        tensors = []
        for shape in shapes:
            count = int(np.prod(shape))
            raw = f.read(count * 4)
            if len(raw) != count * 4:
                raise CheckpointError(f"{path}: truncated tensor data")
            tensors.append(
                np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape(shape)
            )
        if f.read(1):
            raise CheckpointError(f"{path}: trailing bytes")
    return PolicyParams(arch, *tensors, seed=meta["seed"])


def export_json(params: PolicyParams, path) -> None:
    doc = {
        "arch": params.arch.to_json(),
        "seed": params.seed,
        "tensors": {
            name: t.tolist()
            for name, t in zip(("w1", "b1", "w2", "b2"), params.tensors())
        },
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f)
