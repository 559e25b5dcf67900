"""Fixed-horizon trajectories and their JSONL wire format."""

from __future__ import annotations

import base64
import hashlib
import io
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .. import constants as C

PROVENANCES = ("rollout", "human_demo", "counterfactual", "augmented")

# nav2d actions are (dx, dy) tuples; doorkey actions are token indices.
DOORKEY_ACTIONS = ("up", "down", "left", "right", "pickup", "use")


def horizon_for(domain: str) -> int:
    return C.NAV2D_HORIZON if domain == "nav2d" else C.DOORKEY_HORIZON


@dataclass(frozen=True, eq=False)
class Trajectory:
    provenance: str
    scene: "SceneDescriptor"  # initial scene
    states: tuple            # length horizon + 1, per-step world states
    observations: tuple      # length horizon + 1, renders of the states
    actions: tuple           # length horizon

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        T = horizon_for(self.scene.domain)
        if len(self.actions) != T:
            raise ValueError(f"expected {T} actions, got {len(self.actions)}")
        if len(self.states) != T + 1 or len(self.observations) != T + 1:
            raise ValueError("states/observations must have horizon + 1 entries")

    @property
    def domain(self) -> str:
        return self.scene.domain

    @property
    def horizon(self) -> int:
        return len(self.actions)

    def steps(self) -> Iterable[tuple]:
        """(observation, action) pairs, one per timestep."""
        return zip(self.observations[:-1], self.actions)

    def actions_equal(self, other: "Trajectory") -> bool:
        return self.actions == other.actions

    def digest(self) -> str:
        """Stable content hash over scene, actions, and state digests."""
        h = hashlib.sha256()
        h.update(self.scene.canonical_json().encode())
        h.update(json.dumps([_action_json(a) for a in self.actions]).encode())
        for s in self.states:
            h.update(repr(s).encode())
        return h.hexdigest()


def _action_json(action):
    if isinstance(action, tuple):
        return list(action)
    return int(action)


def _action_from_json(domain: str, a):
    return tuple(a) if domain == "nav2d" else int(a)


def encode_observation(obs: np.ndarray, encoding: str = "raw") -> dict:
    """Serialize an observation as base64 raw bytes or a PNG."""
    raster = np.clip(np.round(obs * 255.0), 0, 255).astype(np.uint8)
    if encoding == "raw":
        return {
            "encoding": "raw",
            "shape": list(raster.shape),
            "data": base64.b64encode(raster.tobytes()).decode(),
        }
    if encoding == "png":
        from PIL import Image

        buf = io.BytesIO()
        Image.fromarray(raster).save(buf, format="PNG")
        return {"encoding": "png", "data": base64.b64encode(buf.getvalue()).decode()}
    raise ValueError(f"unknown observation encoding {encoding!r}")


def decode_observation(d: dict) -> np.ndarray:
    raw = base64.b64decode(d["data"])
    if d["encoding"] == "raw":
        raster = np.frombuffer(raw, dtype=np.uint8).reshape(d["shape"])
    elif d["encoding"] == "png":
        from PIL import Image

        raster = np.asarray(Image.open(io.BytesIO(raw)).convert("RGB"))
    else:
        raise ValueError(f"unknown observation encoding {d['encoding']!r}")
    return raster.astype(np.float64) / 255.0


def write_jsonl(traj: Trajectory, path, encoding: str = "raw") -> None:
    """One header line, then one line per step (t, state digest, action, obs)."""
    with open(path, "w", encoding="utf-8") as f:
        header = {
            "provenance": traj.provenance,
            "scene": traj.scene.to_json(),
            "horizon": traj.horizon,
        }
        f.write(json.dumps(header) + "\n")
        for t, (obs, action) in enumerate(traj.steps()):
            line = {
                "t": t,
                "state": hashlib.sha256(repr(traj.states[t]).encode()).hexdigest(),
                "action": _action_json(action),
                "observation": encode_observation(obs, encoding),
            }
            f.write(json.dumps(line) + "\n")


def read_jsonl(path) -> dict:
    """Parse a trajectory file into header + decoded steps (no replay)."""
    with open(path, encoding="utf-8") as f:
        lines = [json.loads(line) for line in f if line.strip()]
    header, steps = lines[0], lines[1:]
    domain = header["scene"]["domain"]
    return {
        "header": header,
        "actions": [_action_from_json(domain, s["action"]) for s in steps],
        "observations": [decode_observation(s["observation"]) for s in steps],
    }
