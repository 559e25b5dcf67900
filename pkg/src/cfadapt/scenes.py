"""Ground-truth parametric scene descriptions and the concept schemas.

A :class:`SceneDescriptor` is the simulator's source of truth: which
objects exist, their concept instantiations (colors), and where they sit.
Rendering consumes scenes; concept abstraction projects them onto concept
vectors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Optional

from . import constants as C


class SchemaError(ValueError):
    """An object / concept / instantiation name not covered by the schema."""


class SceneError(ValueError):
    """A scene violating its schema or geometry invariants."""


@dataclass(frozen=True)
class ConceptSpec:
    name: str
    instantiations: tuple[str, ...]

    def __post_init__(self):
        if len(self.instantiations) < 2:
            raise SchemaError(f"concept {self.name!r} needs >= 2 instantiations")
        if len(set(self.instantiations)) != len(self.instantiations):
            raise SchemaError(f"duplicate instantiations in {self.name!r}")


@dataclass(frozen=True)
class ObjectSpec:
    name: str
    concepts: tuple[ConceptSpec, ...]
    removable: bool = False
    spawnable: bool = False

    def concept(self, name: str) -> ConceptSpec:
        for c in self.concepts:
            if c.name == name:
                return c
        raise SchemaError(f"object {self.name!r} has no concept {name!r}")


@dataclass(frozen=True)
class ConceptSchema:
    domain: str
    objects: tuple[ObjectSpec, ...]

    def __post_init__(self):
        names = [o.name for o in self.objects]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate object names in schema")
        for o in self.objects:
            cnames = [c.name for c in o.concepts]
            if len(set(cnames)) != len(cnames):
                raise SchemaError(f"duplicate concept names on {o.name!r}")

    def object(self, name: str) -> ObjectSpec:
        for o in self.objects:
            if o.name == name:
                return o
        raise SchemaError(f"unknown object {name!r}")

    def object_index(self, name: str) -> int:
        for i, o in enumerate(self.objects):
            if o.name == name:
                return i
        raise SchemaError(f"unknown object {name!r}")

    def to_json(self) -> dict:
        return {
            "domain": self.domain,
            "objects": [
                {
                    "name": o.name,
                    "concepts": [
                        {"name": c.name, "instantiations": list(c.instantiations)}
                        for c in o.concepts
                    ],
                    "removable": o.removable,
                    "spawnable": o.spawnable,
                }
                for o in self.objects
            ],
        }

    @staticmethod
    def from_json(d: dict) -> "ConceptSchema":
        return ConceptSchema(
            domain=d["domain"],
            objects=tuple(
                ObjectSpec(
                    name=o["name"],
                    concepts=tuple(
                        ConceptSpec(c["name"], tuple(c["instantiations"]))
                        for c in o["concepts"]
                    ),
                    removable=o["removable"],
                    spawnable=o["spawnable"],
                )
                for o in d["objects"]
            ),
        )


COLOR = "color"

NAV2D_SCHEMA = ConceptSchema(
    domain="nav2d",
    objects=(
        ObjectSpec("agent", ()),
        ObjectSpec("goal", (ConceptSpec(COLOR, C.OBJECT_COLORS),), removable=True),
        ObjectSpec(
            "distractor",
            (ConceptSpec(COLOR, C.OBJECT_COLORS),),
            removable=True,
            spawnable=True,
        ),
    ),
)

DOORKEY_SCHEMA = ConceptSchema(
    domain="doorkey",
    objects=(
        ObjectSpec("agent", ()),
        ObjectSpec("key", (ConceptSpec(COLOR, C.OBJECT_COLORS),)),
        ObjectSpec("door", (ConceptSpec(COLOR, C.OBJECT_COLORS),)),
        ObjectSpec("goal", (ConceptSpec(COLOR, C.OBJECT_COLORS),)),
        ObjectSpec(
            "lava",
            (ConceptSpec(COLOR, C.LAVA_COLORS),),
            removable=True,
            spawnable=True,
        ),
    ),
)

SCHEMAS = {"nav2d": NAV2D_SCHEMA, "doorkey": DOORKEY_SCHEMA}


@dataclass(frozen=True)
class SceneObject:
    """One non-agent object: presence, concept values, and position."""

    name: str
    present: bool
    values: tuple[str, ...]  # aligned with the object's schema concept order
    position: Optional[tuple]  # (float, float) for nav2d, (int, int) for doorkey

    def value(self, schema_obj: ObjectSpec, concept: str) -> str:
        for spec, v in zip(schema_obj.concepts, self.values):
            if spec.name == concept:
                return v
        raise SchemaError(f"{self.name!r} has no concept {concept!r}")


@dataclass(frozen=True)
class SceneDescriptor:
    domain: str
    objects: tuple[SceneObject, ...]
    agent_pos: tuple
    door_open: bool = False
    key_held: bool = False

    def object(self, name: str) -> SceneObject:
        for o in self.objects:
            if o.name == name:
                return o
        raise SchemaError(f"scene has no object {name!r}")

    def with_object(self, obj: SceneObject) -> "SceneDescriptor":
        objs = tuple(obj if o.name == obj.name else o for o in self.objects)
        return replace(self, objects=objs)

    def to_json(self) -> dict:
        return {
            "domain": self.domain,
            "objects": [
                {
                    "name": o.name,
                    "present": o.present,
                    "values": list(o.values),
                    "position": list(o.position) if o.position is not None else None,
                }
                for o in self.objects
            ],
            "agent_pos": list(self.agent_pos),
            "door_open": self.door_open,
            "key_held": self.key_held,
        }

    @staticmethod
    def from_json(d: dict) -> "SceneDescriptor":
        return SceneDescriptor(
            domain=d["domain"],
            objects=tuple(
                SceneObject(
                    name=o["name"],
                    present=o["present"],
                    values=tuple(o["values"]),
                    position=tuple(o["position"]) if o["position"] is not None else None,
                )
                for o in d["objects"]
            ),
            agent_pos=tuple(d["agent_pos"]),
            door_open=d["door_open"],
            key_held=d["key_held"],
        )

    def canonical_json(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))


def schema_for(scene: SceneDescriptor) -> ConceptSchema:
    try:
        return SCHEMAS[scene.domain]
    except KeyError:
        raise SceneError(f"unknown domain {scene.domain!r}") from None


def validate_scene(scene: SceneDescriptor, schema: Optional[ConceptSchema] = None) -> None:
    """Raise SceneError / SchemaError if the scene breaks its contract."""
    schema = schema or schema_for(scene)
    if scene.domain != schema.domain:
        raise SceneError(f"scene domain {scene.domain!r} != schema {schema.domain!r}")
    names = [o.name for o in scene.objects]
    expected = [o.name for o in schema.objects if o.name != "agent"]
    if names != expected:
        raise SceneError(f"scene objects {names} != schema objects {expected}")
    for obj in scene.objects:
        spec = schema.object(obj.name)
        if obj.present:
            if len(obj.values) != len(spec.concepts):
                raise SceneError(f"{obj.name!r}: wrong number of concept values")
            for cspec, v in zip(spec.concepts, obj.values):
                if v not in cspec.instantiations:
                    raise SchemaError(
                        f"{obj.name}.{cspec.name}: {v!r} not in {cspec.instantiations}"
                    )
            if obj.position is None:
                raise SceneError(f"{obj.name!r} present without a position")
            _check_position(scene.domain, obj.position)
    _check_position(scene.domain, scene.agent_pos)
    _check_footprints(scene)


def _check_position(domain: str, pos: tuple) -> None:
    if domain == "nav2d":
        x, y = pos
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            raise SceneError(f"nav2d position {pos} out of [0,1]^2")
    else:
        x, y = pos
        n = C.DOORKEY_GRID
        if not (0 <= x < n and 0 <= y < n):
            raise SceneError(f"doorkey cell {pos} out of {n}x{n} grid")


def _check_footprints(scene: SceneDescriptor) -> None:
    present = [o for o in scene.objects if o.present]
    if scene.domain == "doorkey":
        cells = [o.position for o in present]
        if len(set(cells)) != len(cells):
            raise SceneError("two doorkey objects share a cell")
        for o in present:
            if o.position[0] == C.DOORKEY_WALL_X and o.name != "door":
                raise SceneError(f"{o.name!r} placed inside the wall column")
    else:
        min_sep = (C.NAV2D_GOAL_FOOTPRINT + 1) / C.IMAGE_SIZE
        for i, a in enumerate(present):
            for b in present[i + 1 :]:
                if _dist(a.position, b.position) < min_sep:
                    raise SceneError(f"{a.name!r} and {b.name!r} footprints collide")


def _dist(a: tuple, b: tuple) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def position_is_free(scene: SceneDescriptor, pos: tuple) -> bool:
    """True if an object can be placed at pos without colliding."""
    if scene.domain == "doorkey":
        if pos[0] == C.DOORKEY_WALL_X:
            return False
        if tuple(pos) == tuple(scene.agent_pos):
            return False
        return all(
            not o.present or tuple(o.position) != tuple(pos) for o in scene.objects
        )
    min_sep = (C.NAV2D_GOAL_FOOTPRINT + 1) / C.IMAGE_SIZE
    if _dist(pos, scene.agent_pos) < min_sep:
        return False
    return all(
        not o.present or _dist(o.position, pos) >= min_sep for o in scene.objects
    )


def default_spawn_position(scene: SceneDescriptor, obj_name: str) -> tuple:
    """First free entry of the documented candidate list for this domain."""
    candidates = (
        C.NAV2D_SPAWN_CANDIDATES if scene.domain == "nav2d" else C.DOORKEY_SPAWN_CANDIDATES
    )
    for pos in candidates:
        if position_is_free(scene, pos):
            return pos
    raise SceneError(f"no free spawn position for {obj_name!r}")
