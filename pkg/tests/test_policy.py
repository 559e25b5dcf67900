import numpy as np
import pytest

from cfadapt import envs
from cfadapt.policy import (
    TrainConfig,
    TrainingDiverged,
    architecture_for,
    checkpoint,
    finetune,
    init,
    predict_fn,
    train_bc,
)
from cfadapt.policy import kernels
from cfadapt.policy.network import (
    CATEGORICAL,
    REGRESSION,
    flatten_observation,
    forward,
    grad_check,
    loss_and_grads,
)
from cfadapt.policy.training import dataset_from_demos


def test_architecture_dims():
    arch = architecture_for("nav2d")
    assert arch.input_dim == 36 * 36 * 3
    assert arch.output_dim == 2 and arch.head == REGRESSION
    arch = architecture_for("doorkey")
    assert arch.output_dim == 6 and arch.head == CATEGORICAL


def test_init_deterministic():
    a = init(architecture_for("nav2d"), 7)
    b = init(architecture_for("nav2d"), 7)
    assert a.allclose(b)
    c = init(architecture_for("nav2d"), 8)
    assert not a.allclose(c)


def test_forward_shapes(nav2d_policy):
    x = np.zeros((3, nav2d_policy.arch.input_dim))
    out = forward(nav2d_policy, x)
    assert out.shape == (3, 2)


def test_gradient_check_regression(nav2d_train_task):
    params = init(architecture_for("nav2d"), 1)
    x, y, _ = dataset_from_demos(nav2d_train_task.demos[:1])
    assert grad_check(params, x[:8], y[:8]) < 1e-4


def test_gradient_check_categorical(doorkey_train_task):
    params = init(architecture_for("doorkey"), 1)
    x, y, _ = dataset_from_demos(doorkey_train_task.demos[:1])
    assert grad_check(params, x[:8], y[:8]) < 1e-4


def test_training_deterministic(nav2d_train_task):
    cfg = TrainConfig(epochs=5, seed=3)
    p0 = init(architecture_for("nav2d"), 0)
    a, la = train_bc(p0, nav2d_train_task.demos, cfg)
    b, lb = train_bc(p0, nav2d_train_task.demos, cfg)
    assert la == lb
    assert all(np.array_equal(x, y) for x, y in zip(a.tensors(), b.tensors()))


def test_training_loss_decreases(nav2d_train_task):
    p0 = init(architecture_for("nav2d"), 0)
    _, losses = train_bc(p0, nav2d_train_task.demos, TrainConfig(epochs=30, seed=0))
    assert losses[-1] < losses[0]


def test_single_demo_overfit(nav2d_train_task):
    p0 = init(architecture_for("nav2d"), 0)
    _, losses = train_bc(p0, nav2d_train_task.demos[:1], TrainConfig(epochs=300, seed=0))
    assert losses[-1] < 1e-3


def test_mixed_domain_demos_rejected(nav2d_train_task, doorkey_train_task):
    p0 = init(architecture_for("nav2d"), 0)
    with pytest.raises(ValueError):
        train_bc(
            p0,
            [nav2d_train_task.demos[0], doorkey_train_task.demos[0]],
            TrainConfig(epochs=1),
        )


def test_head_mismatch_rejected(doorkey_train_task):
    p0 = init(architecture_for("nav2d"), 0)
    with pytest.raises(ValueError):
        train_bc(p0, doorkey_train_task.demos, TrainConfig(epochs=1))


def test_finetune_zero_epochs_unchanged(nav2d_policy, nav2d_train_task):
    tuned, losses = finetune(
        nav2d_policy, nav2d_train_task.demos, TrainConfig(epochs=0, finetune=True)
    )
    assert losses == []
    assert tuned is not nav2d_policy
    assert all(np.array_equal(a, b) for a, b in zip(tuned.tensors(), nav2d_policy.tensors()))


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=0.0)
    with pytest.raises(ValueError):
        TrainConfig(epochs=0)
    with pytest.raises(ValueError):
        TrainConfig(batch_size=0)
    TrainConfig(epochs=0, finetune=True)  # allowed for finetuning


def test_divergence_raises(nav2d_train_task):
    p0 = init(architecture_for("nav2d"), 0)
    with pytest.raises(TrainingDiverged):
        train_bc(p0, nav2d_train_task.demos, TrainConfig(epochs=50, learning_rate=500.0))


def test_predict_clips_continuous(nav2d_policy, nav2d_train_task):
    obs = envs.reset(nav2d_train_task.scene)[1]
    a = predict_fn(nav2d_policy)(obs)
    assert abs(a[0]) <= 0.1 + 1e-12 and abs(a[1]) <= 0.1 + 1e-12


def test_predict_argmax_discrete(doorkey_policy, doorkey_train_task):
    obs = envs.reset(doorkey_train_task.scene)[1]
    a = predict_fn(doorkey_policy)(obs)
    assert isinstance(a, int) and 0 <= a < 6


def test_backend_selection_env(monkeypatch):
    from cfadapt.policy.kernels import _select_backend

    monkeypatch.setenv("CFADAPT_BACKEND", "numpy")
    assert _select_backend() == "numpy"
    monkeypatch.setenv("CFADAPT_BACKEND", "bogus")
    with pytest.raises(ValueError):
        _select_backend()


def test_backend_parity(nav2d_train_task, doorkey_train_task):
    # numpy fallback and numba kernels produce matching trained weights
    for task, domain in ((nav2d_train_task, "nav2d"), (doorkey_train_task, "doorkey")):
        x, y, _ = dataset_from_demos(task.demos[:2])
        p0 = init(architecture_for(domain), 0)
        perms = np.stack([np.random.default_rng(5).permutation(x.shape[0]) for _ in range(4)])
        perms = np.ascontiguousarray(perms.astype(np.int64))
        results = {}
        for backend in ("numpy", "numba"):
            tensors = tuple(np.ascontiguousarray(t.copy()) for t in p0.tensors())
            losses = kernels.run_epochs(
                p0.arch.head, x, y, tensors, perms, 32, 0.02, backend=backend
            )
            results[backend] = (tensors, losses)
        for a, b in zip(results["numpy"][0], results["numba"][0]):
            assert np.allclose(a, b, rtol=1e-10, atol=1e-12)
        assert np.allclose(results["numpy"][1], results["numba"][1])


def test_loss_and_grads_heads(nav2d_train_task, doorkey_train_task):
    for task, domain in ((nav2d_train_task, "nav2d"), (doorkey_train_task, "doorkey")):
        p = init(architecture_for(domain), 2)
        x, y, _ = dataset_from_demos(task.demos[:1])
        loss, grads = loss_and_grads(list(p.tensors()), x, y, p.arch.head)
        assert np.isfinite(loss)
        assert [g.shape for g in grads] == [t.shape for t in p.tensors()]


def test_flatten_observation_validates():
    with pytest.raises(ValueError):
        flatten_observation(np.zeros((10, 10, 3)))


def test_checkpoint_round_trip(tmp_path, nav2d_policy, nav2d_train_task):
    path = tmp_path / "policy.ckpt"
    checkpoint.save(nav2d_policy, path)
    again = checkpoint.load(path)
    assert again.arch == nav2d_policy.arch
    # float32 storage: behavior must survive the rounding
    obs = envs.reset(nav2d_train_task.scene)[1]
    a = predict_fn(nav2d_policy)(obs)
    b = predict_fn(again)(obs)
    assert np.allclose(a, b, atol=1e-4)


def test_checkpoint_rejects_garbage(tmp_path):
    path = tmp_path / "bad.ckpt"
    path.write_bytes(b"not a checkpoint")
    with pytest.raises(checkpoint.CheckpointError):
        checkpoint.load(path)


def test_checkpointed_policy_still_succeeds(tmp_path, nav2d_policy, nav2d_train_task):
    path = tmp_path / "p.ckpt"
    checkpoint.save(nav2d_policy, path)
    again = checkpoint.load(path)
    traj = envs.rollout(predict_fn(again), nav2d_train_task.scene)
    assert envs.success(traj, nav2d_train_task.reward)
