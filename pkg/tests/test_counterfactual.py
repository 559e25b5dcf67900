import numpy as np
import pytest

from cfadapt import envs
from cfadapt.counterfactual import (
    SearchConfig,
    action_distance,
    brute_force_oracle,
    matches,
    search_min_edit,
)
from cfadapt.harness import gen_shift_task, gen_train_task
from cfadapt.oracle import UserModel
from cfadapt.policy import predict_fn
from cfadapt.scenes import schema_for


def _demo_for(task):
    user = UserModel(task.reward, task.shifted, seed=[0, 1])
    return user.provide_demo(task.test_scene)


def test_search_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(action_tolerance=0.0)
    with pytest.raises(ValueError):
        SearchConfig(max_edits=0)
    with pytest.raises(ValueError):
        SearchConfig(parallelism=0)


def test_action_distance_nav2d():
    d = action_distance([(0.1, -0.1)], [(0.08, -0.05)], "nav2d")
    assert d == pytest.approx([0.02 + 0.05])


def test_action_distance_doorkey():
    assert action_distance([3, 2], [3, 4], "doorkey") == [0.0, 1.0]
    with pytest.raises(ValueError):
        action_distance([3], [3, 4], "doorkey")


def test_matches_strict_boundary(nav2d_train_task):
    # per-step distance exactly at the tolerance must NOT match
    demo = nav2d_train_task.demos[0]
    cfg = SearchConfig(action_tolerance=0.05)
    # perturb downward so the env's action clipping cannot shrink the gap
    shifted = [
        (float(a[0]) - 0.05, float(a[1])) if t == 0 else (float(a[0]), float(a[1]))
        for t, a in enumerate(demo.actions)
    ]
    near = envs.replay(nav2d_train_task.scene, shifted, provenance="counterfactual")
    assert not matches(near, demo, cfg)
    shifted[0] = (float(demo.actions[0][0]) - 0.049, float(demo.actions[0][1]))
    near = envs.replay(nav2d_train_task.scene, shifted, provenance="counterfactual")
    assert matches(near, demo, cfg)


def test_matches_doorkey_requires_exact(doorkey_train_task):
    demo = doorkey_train_task.demos[0]
    cfg = SearchConfig()
    assert matches(demo, demo, cfg)
    altered = list(demo.actions)
    altered[0] = (altered[0] + 1) % 6
    other = envs.replay(doorkey_train_task.scene, altered, provenance="counterfactual")
    assert not matches(other, demo, cfg)


def test_concept_shift_found_with_one_edit(nav2d_policy, nav2d_train_task):
    task = gen_shift_task(nav2d_train_task, "ConceptTI", 0)
    demo = _demo_for(task)
    res = search_min_edit(
        predict_fn(nav2d_policy), task.test_scene, demo, schema_for(task.test_scene)
    )
    assert res.found
    assert res.edit_count == 1
    assert task.shifted in res.edit.targets()
    # constraint re-validates on replay
    replayed = envs.replay(res.scene, res.trajectory.actions, provenance="counterfactual")
    assert matches(replayed, demo, SearchConfig())


def test_other_shift_returns_none(nav2d_policy, nav2d_train_task):
    task = gen_shift_task(nav2d_train_task, "Other", 0)
    demo = _demo_for(task)
    res = search_min_edit(
        predict_fn(nav2d_policy), task.test_scene, demo, schema_for(task.test_scene)
    )
    assert res.status == "none"
    assert res.edit is None


def test_search_agrees_with_oracle_sample(nav2d_policy, nav2d_train_task):
    for shift in ("ConceptTI", "DistractorTI", "Other"):
        for seed in range(3):
            task = gen_shift_task(nav2d_train_task, shift, seed)
            demo = _demo_for(task)
            schema = schema_for(task.test_scene)
            fn = predict_fn(nav2d_policy)
            res = search_min_edit(fn, task.test_scene, demo, schema)
            ora = brute_force_oracle(fn, task.test_scene, demo, schema)
            assert res.status == ora.status
            if res.found:
                assert res.edit_count == ora.edit_count


def test_parallel_search_matches_serial(nav2d_policy, nav2d_train_task):
    task = gen_shift_task(nav2d_train_task, "ConceptTI", 1)
    demo = _demo_for(task)
    schema = schema_for(task.test_scene)
    fn = predict_fn(nav2d_policy)
    serial = search_min_edit(fn, task.test_scene, demo, schema, SearchConfig(parallelism=1))
    wide = search_min_edit(fn, task.test_scene, demo, schema, SearchConfig(parallelism=4))
    assert serial.status == wide.status
    assert serial.edit == wide.edit


def test_result_json_shape(nav2d_policy, nav2d_train_task):
    task = gen_shift_task(nav2d_train_task, "ConceptTI", 0)
    demo = _demo_for(task)
    res = search_min_edit(
        predict_fn(nav2d_policy), task.test_scene, demo, schema_for(task.test_scene)
    )
    d = res.to_json()
    assert d["status"] == "found"
    assert d["edit_count"] == 1
    assert d["candidates_evaluated"] >= 1


def test_block_distance_reported(nav2d_policy, nav2d_train_task):
    task = gen_shift_task(nav2d_train_task, "DistractorTI", 0)
    demo = _demo_for(task)
    res = search_min_edit(
        predict_fn(nav2d_policy), task.test_scene, demo, schema_for(task.test_scene)
    )
    if res.found:
        assert res.block_distance >= res.edit_count
