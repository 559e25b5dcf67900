import pytest

from cfadapt.harness import gen_train_task
from cfadapt.policy import TrainConfig, architecture_for, init, train_bc


@pytest.fixture(scope="session")
def nav2d_train_task():
    return gen_train_task("nav2d", 0)


@pytest.fixture(scope="session")
def doorkey_train_task():
    return gen_train_task("doorkey", 0)


@pytest.fixture(scope="session")
def nav2d_policy(nav2d_train_task):
    params = init(architecture_for("nav2d"), 0)
    params, _ = train_bc(params, nav2d_train_task.demos, TrainConfig(epochs=300, seed=0))
    return params


@pytest.fixture(scope="session")
def doorkey_policy(doorkey_train_task):
    params = init(architecture_for("doorkey"), 0)
    params, _ = train_bc(params, doorkey_train_task.demos, TrainConfig(epochs=300, seed=0))
    return params
