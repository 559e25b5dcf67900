"""Concept abstraction and the edit machinery over it.

The abstraction maps a scene onto per-object presence flags plus one-hot
concept blocks; edits change, remove, or spawn objects at that level and
are realized back into scenes by re-rendering concept values onto the
retained geometry of a base scene.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Union

from .scenes import (
    ConceptSchema,
    SceneDescriptor,
    SceneObject,
    SchemaError,
    default_spawn_position,
    position_is_free,
    schema_for,
    validate_scene,
)


class EditError(ValueError):
    """An edit directive illegal for the vector it targets."""


@dataclass(frozen=True)
class ConceptVector:
    """Presence flags plus one instantiation index per (object, concept).

    ``values[i][j]`` is the index into the schema's instantiation list for
    object i's concept j, or -1 when the object is absent (the all-zero
    block). The explicit presence flag disambiguates absence from any
    particular instantiation.
    """

    schema: ConceptSchema
    presence: tuple[bool, ...]
    values: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.schema.objects)
        if len(self.presence) != n or len(self.values) != n:
            raise SchemaError("vector arity does not match schema")
        for spec, pres, vals in zip(self.schema.objects, self.presence, self.values):
            if len(vals) != len(spec.concepts):
                raise SchemaError(f"{spec.name!r}: wrong concept arity")
            for cspec, v in zip(spec.concepts, vals):
                if pres:
                    if not (0 <= v < len(cspec.instantiations)):
                        raise SchemaError(f"{spec.name}.{cspec.name}: bad index {v}")
                elif v != -1:
                    raise SchemaError(f"{spec.name!r} absent but block nonzero")

    def one_hot(self, obj: str, concept: str) -> tuple[int, ...]:
        i = self.schema.object_index(obj)
        spec = self.schema.objects[i]
        j = [c.name for c in spec.concepts].index(concept)
        m = len(spec.concepts[j].instantiations)
        v = self.values[i][j]
        return tuple(1 if k == v else 0 for k in range(m))

    def is_present(self, obj: str) -> bool:
        return self.presence[self.schema.object_index(obj)]

    def instantiation(self, obj: str, concept: str) -> Optional[str]:
        i = self.schema.object_index(obj)
        spec = self.schema.objects[i]
        for j, c in enumerate(spec.concepts):
            if c.name == concept:
                v = self.values[i][j]
                return None if v < 0 else c.instantiations[v]
        raise SchemaError(f"{obj!r} has no concept {concept!r}")

    def to_json(self) -> dict:
        return {
            "domain": self.schema.domain,
            "presence": list(self.presence),
            "values": [list(v) for v in self.values],
        }


@dataclass(frozen=True)
class SetInstantiation:
    obj: str
    concept: str
    value: str


@dataclass(frozen=True)
class RemoveObject:
    obj: str


@dataclass(frozen=True)
class SpawnObject:
    obj: str
    values: tuple[str, ...]  # full assignment in schema concept order
    placement: Optional[tuple] = None


Directive = Union[SetInstantiation, RemoveObject, SpawnObject]


def _directive_json(d: Directive) -> dict:
    if isinstance(d, SetInstantiation):
        return {"kind": "set", "obj": d.obj, "concept": d.concept, "value": d.value}
    if isinstance(d, RemoveObject):
        return {"kind": "remove", "obj": d.obj}
    return {
        "kind": "spawn",
        "obj": d.obj,
        "values": list(d.values),
        "placement": list(d.placement) if d.placement else None,
    }


def _directive_from_json(d: dict) -> Directive:
    if d["kind"] == "set":
        return SetInstantiation(d["obj"], d["concept"], d["value"])
    if d["kind"] == "remove":
        return RemoveObject(d["obj"])
    return SpawnObject(
        d["obj"], tuple(d["values"]), tuple(d["placement"]) if d["placement"] else None
    )


@dataclass(frozen=True)
class ConceptEdit:
    """A set of directives, at most one per object."""

    directives: tuple[Directive, ...]

    def __post_init__(self):
        objs = [d.obj for d in self.directives]
        if len(set(objs)) != len(objs):
            raise EditError("multiple directives target one object")

    def __len__(self) -> int:
        return len(self.directives)

    def targets(self) -> tuple[tuple[str, str], ...]:
        """(object, concept) per directive; presence changes map to 'presence'."""
        out = []
        for d in self.directives:
            if isinstance(d, SetInstantiation):
                out.append((d.obj, d.concept))
            else:
                out.append((d.obj, "presence"))
        return tuple(out)

    def to_json(self) -> dict:
        return {"directives": [_directive_json(d) for d in self.directives]}

    @staticmethod
    def from_json(d: dict) -> "ConceptEdit":
        return ConceptEdit(tuple(_directive_from_json(x) for x in d["directives"]))

    def describe(self, base: ConceptVector) -> str:
        """Plain-language rendering, e.g. 'goal color yellow -> red'."""
        parts = []
        for d in self.directives:
            if isinstance(d, SetInstantiation):
                old = base.instantiation(d.obj, d.concept)
                parts.append(f"{d.obj} {d.concept} {old} -> {d.value}")
            elif isinstance(d, RemoveObject):
                parts.append(f"remove {d.obj}")
            else:
                spec = base.schema.object(d.obj)
                vals = ", ".join(
                    f"{c.name}={v}" for c, v in zip(spec.concepts, d.values)
                )
                parts.append(f"add {d.obj} ({vals})")
        return "; ".join(parts)


EMPTY_EDIT = ConceptEdit(())


def abstract(scene: SceneDescriptor, schema: Optional[ConceptSchema] = None) -> ConceptVector:
    """Project a scene onto its concept vector."""
    schema = schema or schema_for(scene)
    validate_scene(scene, schema)
    presence = []
    values = []
    for spec in schema.objects:
        if spec.name == "agent":
            presence.append(True)
            values.append(())
            continue
        obj = scene.object(spec.name)
        presence.append(obj.present)
        if obj.present:
            vals = []
            for cspec, v in zip(spec.concepts, obj.values):
                vals.append(cspec.instantiations.index(v))
            values.append(tuple(vals))
        else:
            values.append(tuple(-1 for _ in spec.concepts))
    return ConceptVector(schema, tuple(presence), tuple(values))


def apply_edit(cv: ConceptVector, edit: ConceptEdit) -> ConceptVector:
    """Apply directives to a vector; untouched objects are bit-identical."""
    presence = list(cv.presence)
    values = [list(v) for v in cv.values]
    schema = cv.schema
    for d in edit.directives:
        i = schema.object_index(d.obj)
        spec = schema.objects[i]
        if isinstance(d, SetInstantiation):
            if not presence[i]:
                raise EditError(f"cannot recolor absent object {d.obj!r}")
            j = [c.name for c in spec.concepts].index(d.concept)
            if d.value not in spec.concepts[j].instantiations:
                raise SchemaError(f"{d.obj}.{d.concept}: unknown value {d.value!r}")
            values[i][j] = spec.concepts[j].instantiations.index(d.value)
        elif isinstance(d, RemoveObject):
            if not presence[i]:
                raise EditError(f"cannot remove absent object {d.obj!r}")
            if not spec.removable:
                raise EditError(f"object {d.obj!r} is not removable")
            presence[i] = False
            values[i] = [-1] * len(spec.concepts)
        else:
            if presence[i]:
                raise EditError(f"cannot spawn present object {d.obj!r}")
            if not spec.spawnable:
                raise EditError(f"object {d.obj!r} is not spawnable")
            if len(d.values) != len(spec.concepts):
                raise EditError(f"spawn of {d.obj!r} needs a full assignment")
            presence[i] = True
            values[i] = [
                c.instantiations.index(v) for c, v in zip(spec.concepts, d.values)
            ]
    return ConceptVector(schema, tuple(presence), tuple(tuple(v) for v in values))


def realize(
    cv: ConceptVector,
    base: SceneDescriptor,
    placements: Optional[dict[str, tuple]] = None,
) -> SceneDescriptor:
    """Inverse of :func:`abstract`, conditioned on a base scene.

    Concept values come from ``cv``; positions and agent pose come from
    ``base``. Objects absent from ``base`` get their placement hint or the
    documented default spawn position.
    """
    schema = cv.schema
    validate_scene(base, schema)
    placements = placements or {}
    scene = base
    # Removals first so spawn positions see the final occupancy.
    for spec, pres in zip(schema.objects, cv.presence):
        if spec.name == "agent":
            continue
        if not pres and base.object(spec.name).present:
            scene = scene.with_object(
                SceneObject(spec.name, False, (), None)
            )
    for i, spec in enumerate(schema.objects):
        if spec.name == "agent" or not cv.presence[i]:
            continue
        vals = tuple(
            c.instantiations[v] for c, v in zip(spec.concepts, cv.values[i])
        )
        base_obj = base.object(spec.name)
        if base_obj.present:
            pos = base_obj.position
        else:
            pos = placements.get(spec.name) or default_spawn_position(scene, spec.name)
            if not position_is_free(scene, pos):
                raise EditError(f"placement {pos} for {spec.name!r} collides")
        scene = scene.with_object(SceneObject(spec.name, True, vals, tuple(pos)))
    validate_scene(scene, schema)
    return scene


def realize_edit(edit: ConceptEdit, base: SceneDescriptor) -> SceneDescriptor:
    """Apply an edit to a scene's abstraction and realize the result."""
    cv = apply_edit(abstract(base), edit)
    placements = {
        d.obj: d.placement
        for d in edit.directives
        if isinstance(d, SpawnObject) and d.placement is not None
    }
    return realize(cv, base, placements)


def edit_distance(cv1: ConceptVector, cv2: ConceptVector) -> int:
    """Number of (object, concept) blocks whose one-hot encodings differ."""
    if cv1.schema != cv2.schema:
        raise SchemaError("edit_distance across different schemas")
    count = 0
    for p1, p2, v1, v2 in zip(cv1.presence, cv2.presence, cv1.values, cv2.values):
        for a, b in zip(v1, v2):
            # Blocks are equal iff same presence and same instantiation index;
            # an absent block (-1) differs from every one-hot block.
            if (p1, a) != (p2, b):
                count += 1
    return count


def _single_directives(
    cv: ConceptVector, schema: ConceptSchema
) -> list[tuple[bool, Directive]]:
    """All legal single directives as (is_presence_edit, directive), in
    schema declaration order within each object."""
    singles: list[tuple[bool, Directive]] = []
    for i, spec in enumerate(schema.objects):
        if not spec.concepts and not (spec.removable or spec.spawnable):
            continue
        if cv.presence[i]:
            if spec.removable:
                singles.append((True, RemoveObject(spec.name)))
        elif spec.spawnable:
            for combo in itertools.product(
                *(c.instantiations for c in spec.concepts)
            ):
                singles.append((True, SpawnObject(spec.name, tuple(combo))))
        if cv.presence[i]:
            for j, cspec in enumerate(spec.concepts):
                current = cv.values[i][j]
                for k, value in enumerate(cspec.instantiations):
                    if k != current:
                        singles.append(
                            (False, SetInstantiation(spec.name, cspec.name, value))
                        )
    return singles


def enumerate_edits(
    cv: ConceptVector,
    schema: Optional[ConceptSchema] = None,
    max_edits: int = 1,
    presence_first: bool = True,
) -> list[ConceptEdit]:
    """All edits of cardinality 1..max_edits in deterministic search order.

    Cardinality ascends; within a cardinality, presence edits (remove or
    spawn) come before instantiation edits when ``presence_first`` is on,
    then schema declaration order breaks ties.
    """
    schema = schema or cv.schema
    if max_edits < 1:
        raise ValueError("max_edits must be >= 1")
    singles = _single_directives(cv, schema)
    if presence_first:
        order = [d for p, d in singles if p] + [d for p, d in singles if not p]
    else:
        order = [d for _, d in singles]
    index = {id(d): i for i, d in enumerate(order)}
    edits: list[ConceptEdit] = []
    for card in range(1, max_edits + 1):
        combos = [
            combo
            for combo in itertools.combinations(order, card)
            if len({d.obj for d in combo}) == card
        ]
        combos.sort(key=lambda combo: tuple(index[id(d)] for d in combo))
        edits.extend(ConceptEdit(tuple(combo)) for combo in combos)
    return edits


def augmentation_targets(
    scene: SceneDescriptor, schema: Optional[ConceptSchema] = None
) -> list[tuple[str, str]]:
    """(object, concept) pairs a user could declare invariant and augment.

    Covers each object's named concepts (when present or spawnable) plus a
    'presence' pseudo-concept for removable/spawnable objects.
    """
    schema = schema or schema_for(scene)
    cv = abstract(scene, schema)
    targets: list[tuple[str, str]] = []
    for i, spec in enumerate(schema.objects):
        if spec.name == "agent":
            continue
        if cv.presence[i] or spec.spawnable:
            for c in spec.concepts:
                targets.append((spec.name, c.name))
        if spec.removable or spec.spawnable:
            targets.append((spec.name, "presence"))
    return targets


def target_variants(
    scene: SceneDescriptor, target: tuple[str, str], schema: Optional[ConceptSchema] = None
) -> list[ConceptVector]:
    """Concept vectors covering every instantiation of an augmentation target.

    A named concept yields one vector per instantiation (spawning the object
    first if absent). The 'presence' pseudo-concept varies presence alone:
    for a present object the scene as-is plus the removed variant; for an
    absent object the scene as-is plus one spawned variant per instantiation
    combination (there is no current instantiation to hold fixed).
    """
    schema = schema or schema_for(scene)
    cv = abstract(scene, schema)
    obj, concept = target
    spec = schema.object(obj)
    i = schema.object_index(obj)
    out: list[ConceptVector] = []
    if concept == "presence":
        out.append(cv)
        if cv.presence[i]:
            if spec.removable:
                out.append(apply_edit(cv, ConceptEdit((RemoveObject(obj),))))
        elif spec.spawnable:
            for combo in itertools.product(*(c.instantiations for c in spec.concepts)):
                out.append(_with_assignment(cv, obj, tuple(combo)))
        return out
    cspec = spec.concept(concept)
    for value in cspec.instantiations:
        if cv.presence[i]:
            if cv.instantiation(obj, concept) == value:
                out.append(cv)
            else:
                out.append(apply_edit(cv, ConceptEdit((SetInstantiation(obj, concept, value),))))
        else:
            vals = tuple(
                value if c.name == concept else c.instantiations[0]
                for c in spec.concepts
            )
            out.append(_with_assignment(cv, obj, vals))
    return out


def _with_assignment(cv: ConceptVector, obj: str, values: tuple[str, ...]) -> ConceptVector:
    i = cv.schema.object_index(obj)
    if cv.presence[i]:
        edit = ConceptEdit(
            tuple(
                SetInstantiation(obj, c.name, v)
                for c, v in zip(cv.schema.objects[i].concepts, values)
                if cv.instantiation(obj, c.name) != v
            )
        )
        return apply_edit(cv, edit) if edit.directives else cv
    return apply_edit(cv, ConceptEdit((SpawnObject(obj, values),)))
