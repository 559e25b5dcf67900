import numpy as np
import pytest

from cfadapt import envs
from cfadapt.concept import ConceptEdit, SetInstantiation, augmentation_targets
from cfadapt.harness import gen_shift_task
from cfadapt.oracle import TI, TR, UserModel


def _task(nav2d_train_task):
    return gen_shift_task(nav2d_train_task, "ConceptTI", 0)


def test_accuracy_validation(nav2d_train_task):
    task = _task(nav2d_train_task)
    with pytest.raises(ValueError):
        UserModel(task.reward, p=1.5)
    with pytest.raises(ValueError):
        UserModel(task.reward, q=-0.1)


def test_judge_success_noiseless(nav2d_train_task, nav2d_policy):
    from cfadapt.policy import predict_fn

    task = _task(nav2d_train_task)
    user = UserModel(task.reward, task.shifted, p=0.0, seed=1)  # worst-case noise
    demo = user.provide_demo(task.test_scene)
    assert user.judge_success(demo)  # success judgments never flip
    traj = envs.rollout(predict_fn(nav2d_policy), task.test_scene)
    assert user.judge_success(traj) == envs.success(traj, task.reward)


def test_provide_demo_succeeds(nav2d_train_task):
    task = _task(nav2d_train_task)
    user = UserModel(task.reward, task.shifted, seed=3)
    demo = user.provide_demo(task.test_scene)
    assert demo.provenance == "human_demo"
    assert envs.success(demo, task.reward)


def test_verification_requires_truth_and_success(nav2d_train_task):
    task = _task(nav2d_train_task)
    user = UserModel(task.reward, task.shifted, p=1.0, seed=0)
    demo = user.provide_demo(task.test_scene)
    true_edit = ConceptEdit((SetInstantiation(*task.shifted, "red"),))
    wrong_edit = ConceptEdit((SetInstantiation("distractor", "color", "red"),))
    assert user.verify_counterfactual(true_edit, demo)
    assert not user.verify_counterfactual(wrong_edit, demo)


def test_relevance_labels_noiseless(nav2d_train_task):
    from cfadapt.rewards import RewardSpec

    task = _task(nav2d_train_task)
    # a reward naming the goal color makes ("goal", "color") task-relevant
    reward = RewardSpec("nav2d", goal_color="red")
    user = UserModel(reward, task.shifted, p=1.0, seed=0)
    tr_edit = ConceptEdit((SetInstantiation("goal", "color", "blue"),))
    assert user.label_relevance(tr_edit) == TR
    ti_edit = ConceptEdit((SetInstantiation("distractor", "color", "blue"),))
    assert user.label_relevance(ti_edit) == TI


def test_flip_frequency_matches_one_minus_p(nav2d_train_task):
    # over 10k draws, flips occur with frequency 1-p to within 0.02
    task = _task(nav2d_train_task)
    edit = ConceptEdit((SetInstantiation("goal", "color", "red"),))
    for p in (0.7, 0.9):
        user = UserModel(task.reward, task.shifted, p=p, seed=11)
        truth = task.reward.relevance("goal", "color")
        flips = sum(user.label_relevance(edit) != truth for _ in range(10_000))
        assert abs(flips / 10_000 - (1 - p)) < 0.02


def test_behaviour_only_guess_frequency(nav2d_train_task):
    task = _task(nav2d_train_task)
    for q in (0.0, 0.5, 1.0):
        user = UserModel(task.reward, task.shifted, q=q, seed=17)
        hits = sum(
            user.behaviour_only_guess(task.test_scene) == task.shifted
            for _ in range(4_000)
        )
        assert abs(hits / 4_000 - q) < 0.03


def test_behaviour_only_guess_in_pool(nav2d_train_task):
    task = _task(nav2d_train_task)
    pool = set(augmentation_targets(task.test_scene))
    user = UserModel(task.reward, task.shifted, q=0.3, seed=5)
    for _ in range(100):
        assert user.behaviour_only_guess(task.test_scene) in pool


def test_seeded_reproducibility(nav2d_train_task):
    task = _task(nav2d_train_task)
    a = UserModel(task.reward, task.shifted, p=0.5, q=0.5, seed=[4, 2])
    b = UserModel(task.reward, task.shifted, p=0.5, q=0.5, seed=[4, 2])
    edit = ConceptEdit((SetInstantiation("goal", "color", "red"),))
    seq_a = [(a.label_relevance(edit), a.behaviour_only_guess(task.test_scene)) for _ in range(50)]
    seq_b = [(b.label_relevance(edit), b.behaviour_only_guess(task.test_scene)) for _ in range(50)]
    assert seq_a == seq_b
