import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfadapt.concept import (
    ConceptEdit,
    RemoveObject,
    SetInstantiation,
    SpawnObject,
    abstract,
    apply_edit,
    augmentation_targets,
    edit_distance,
    enumerate_edits,
    realize,
    realize_edit,
    target_variants,
)
from cfadapt.scenes import NAV2D_SCHEMA, schema_for, validate_scene


def test_abstract_realize_round_trip(nav2d_train_task, doorkey_train_task):
    for scene in (nav2d_train_task.scene, doorkey_train_task.scene):
        cv = abstract(scene)
        again = realize(cv, scene)
        assert again == scene


def test_edit_distance_zero_iff_equal(nav2d_train_task):
    cv = abstract(nav2d_train_task.scene)
    assert edit_distance(cv, cv) == 0


def test_apply_edit_soundness(nav2d_train_task, doorkey_train_task):
    # Block distance after applying an edit equals the number of
    # (object, concept) blocks the edit changes.
    for scene in (nav2d_train_task.scene, doorkey_train_task.scene):
        schema = schema_for(scene)
        cv = abstract(scene, schema)
        for edit in enumerate_edits(cv, schema, max_edits=2):
            cv2 = apply_edit(cv, edit)
            changed = set()
            for i, name in enumerate(o.name for o in schema.objects):
                if cv.presence[i] != cv2.presence[i]:
                    for c in schema.objects[i].concepts:
                        changed.add((name, c.name))
                elif cv.presence[i]:
                    for c in schema.objects[i].concepts:
                        if cv.instantiation(name, c.name) != cv2.instantiation(name, c.name):
                            changed.add((name, c.name))
            assert edit_distance(cv, cv2) == len(changed)
            assert len(changed) >= len(edit)  # a directive changes >= 1 block


def test_enumeration_count_nav2d_goal_present_distractor_absent(nav2d_train_task):
    # goal present with 4 colors, distractor absent and spawnable:
    # 3 recolorings + 1 removal + 4 spawns = 8 single edits.
    scene = nav2d_train_task.scene
    assert not scene.object("distractor").present
    cv = abstract(scene)
    edits = enumerate_edits(cv, NAV2D_SCHEMA, max_edits=1)
    assert len(edits) == 8
    kinds = [type(e.directives[0]) for e in edits]
    n_presence = sum(k in (RemoveObject, SpawnObject) for k in kinds)
    assert n_presence == 5
    # presence edits come before instantiation edits within cardinality 1
    first_set = kinds.index(SetInstantiation)
    assert all(k is SetInstantiation for k in kinds[first_set:])


def test_enumeration_cardinality_ordering(nav2d_train_task):
    cv = abstract(nav2d_train_task.scene)
    edits = enumerate_edits(cv, NAV2D_SCHEMA, max_edits=2)
    sizes = [len(e) for e in edits]
    assert sizes == sorted(sizes)
    assert 1 in sizes and 2 in sizes


def test_enumeration_completeness_distance_one(nav2d_train_task, doorkey_train_task):
    # Every vector at block distance >= 1 reachable by one directive appears
    # exactly once among the single edits.
    for scene in (nav2d_train_task.scene, doorkey_train_task.scene):
        schema = schema_for(scene)
        cv = abstract(scene, schema)
        edits = enumerate_edits(cv, schema, max_edits=1)
        results = [apply_edit(cv, e) for e in edits]
        keys = [(r.presence, r.values) for r in results]
        assert len(set(keys)) == len(keys)
        for r in results:
            assert edit_distance(cv, r) >= 1


def test_enumeration_deterministic(nav2d_train_task):
    cv = abstract(nav2d_train_task.scene)
    a = enumerate_edits(cv, NAV2D_SCHEMA, max_edits=2)
    b = enumerate_edits(cv, NAV2D_SCHEMA, max_edits=2)
    assert [e.to_json() for e in a] == [e.to_json() for e in b]


def test_edit_json_round_trip(nav2d_train_task):
    cv = abstract(nav2d_train_task.scene)
    for edit in enumerate_edits(cv, NAV2D_SCHEMA, max_edits=2):
        assert ConceptEdit.from_json(edit.to_json()) == edit


def test_realize_edit_produces_valid_scene(nav2d_train_task, doorkey_train_task):
    for scene in (nav2d_train_task.scene, doorkey_train_task.scene):
        schema = schema_for(scene)
        cv = abstract(scene, schema)
        for edit in enumerate_edits(cv, schema, max_edits=2):
            edited = realize_edit(edit, scene)
            validate_scene(edited, schema)
            assert abstract(edited, schema) == apply_edit(cv, edit)


def test_targets_maps_presence(nav2d_train_task):
    edit = ConceptEdit((RemoveObject("goal"),))
    assert edit.targets() == (("goal", "presence"),)
    edit = ConceptEdit((SetInstantiation("goal", "color", "red"),))
    assert edit.targets() == (("goal", "color"),)


def test_augmentation_targets_pool(nav2d_train_task, doorkey_train_task):
    nav_pool = augmentation_targets(nav2d_train_task.scene)
    assert ("goal", "color") in nav_pool
    assert ("goal", "presence") in nav_pool
    assert len(nav_pool) >= 4
    dk_pool = augmentation_targets(doorkey_train_task.scene)
    assert ("key", "color") in dk_pool and ("door", "color") in dk_pool
    assert len(dk_pool) >= 5


def test_target_variants_color(nav2d_train_task):
    scene = nav2d_train_task.scene
    variants = target_variants(scene, ("goal", "color"))
    assert len(variants) == 4  # one per instantiation, own value included
    colors = [v.instantiation("goal", "color") for v in variants]
    assert scene.object("goal").values[0] in colors
    assert len(set(colors)) == 4


def test_target_variants_presence_present_object(nav2d_train_task):
    variants = target_variants(nav2d_train_task.scene, ("goal", "presence"))
    assert len(variants) == 2
    assert variants[0].is_present("goal")
    assert not variants[1].is_present("goal")


def test_target_variants_presence_absent_object(nav2d_train_task):
    scene = nav2d_train_task.scene
    assert not scene.object("distractor").present
    variants = target_variants(scene, ("distractor", "presence"))
    assert not variants[0].is_present("distractor")
    assert all(v.is_present("distractor") for v in variants[1:])
    assert len(variants) == 1 + 4


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 200))
def test_spawn_then_remove_restores(seed):
    # Spawning then removing the spawnable distractor is the identity on
    # the concept vector.
    from cfadapt.harness import gen_train_task

    colors = NAV2D_SCHEMA.object("distractor").concept("color").instantiations
    scene = gen_train_task("nav2d", seed % 5).scene
    cv = abstract(scene)
    assert not cv.is_present("distractor")
    spawned = apply_edit(
        cv, ConceptEdit((SpawnObject("distractor", (colors[seed % len(colors)],)),))
    )
    removed = apply_edit(spawned, ConceptEdit((RemoveObject("distractor"),)))
    assert removed.presence == cv.presence
    assert removed.values == cv.values


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_edit_distance_symmetry(seed):
    from cfadapt.harness import gen_train_task

    scene = gen_train_task("doorkey", seed % 7).scene
    schema = schema_for(scene)
    cv = abstract(scene, schema)
    edits = enumerate_edits(cv, schema, max_edits=1)
    pick = edits[seed % len(edits)]
    cv2 = apply_edit(cv, pick)
    assert edit_distance(cv, cv2) == edit_distance(cv2, cv)
