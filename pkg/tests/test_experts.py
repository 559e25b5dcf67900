import numpy as np
import pytest

from cfadapt import envs
from cfadapt.experts import ExpertError, expert_demo
from cfadapt.harness import SHIFT_TYPES, gen_shift_task, gen_train_task


def test_expert_succeeds_on_train_scenes(nav2d_train_task, doorkey_train_task):
    for task in (nav2d_train_task, doorkey_train_task):
        demo = expert_demo(task.scene, task.reward)
        assert demo.provenance == "human_demo"
        assert envs.success(demo, task.reward)


@pytest.mark.parametrize("domain", ["nav2d", "doorkey"])
@pytest.mark.parametrize("shift", SHIFT_TYPES)
def test_expert_succeeds_on_every_shift(domain, shift):
    train = gen_train_task(domain, 0)
    for seed in range(5):
        task = gen_shift_task(train, shift, seed)
        demo = expert_demo(task.test_scene, task.reward)
        assert envs.success(demo, task.reward), f"{domain}/{shift}/{seed}"


def test_nav2d_diagonal_plan(nav2d_train_task):
    # agent (0.1,0.1) -> goal (0.9,0.9): equal steps along the diagonal,
    # then zero-action padding once the goal is reached.
    demo = nav2d_train_task.demos[0]
    first = np.asarray(demo.actions[0], dtype=float)
    assert first[0] == pytest.approx(first[1])
    assert 0.05 < first[0] <= 0.1
    tail = np.asarray(demo.actions[-1], dtype=float)
    assert np.allclose(tail, 0.0)
    final = np.asarray(demo.states[-1].agent_pos)
    goal = np.asarray(nav2d_train_task.scene.object("goal").position)
    assert np.linalg.norm(final - goal) < nav2d_train_task.reward.goal_radius


def test_nav2d_detour_avoids_on_path_distractor(nav2d_train_task):
    # A distractor sitting on the straight segment (TR placement) forces
    # the expert off the direct line.
    train = nav2d_train_task
    task = gen_shift_task(train, "DistractorTR", 0)
    straight = expert_demo(train.scene, train.reward)
    detour = expert_demo(task.test_scene, task.reward)
    assert not np.allclose(
        np.asarray(straight.actions, dtype=float), np.asarray(detour.actions, dtype=float)
    )
    assert envs.success(detour, task.reward)


def test_doorkey_plan_is_padded_to_horizon(doorkey_train_task):
    demo = doorkey_train_task.demos[0]
    assert len(demo.actions) == 35
    # key pickup and door use both occur
    states = demo.states
    assert any(s.key_held for s in states)
    assert any(s.door_open for s in states)


def test_expert_error_when_goal_missing(nav2d_train_task):
    from cfadapt.concept import ConceptEdit, RemoveObject, realize_edit

    scene = realize_edit(ConceptEdit((RemoveObject("goal"),)), nav2d_train_task.scene)
    with pytest.raises(ExpertError):
        expert_demo(scene, nav2d_train_task.reward)
