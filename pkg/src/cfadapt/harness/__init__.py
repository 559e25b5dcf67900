from .conditions import ConditionKind, ResultRecord, RunConfig, run_condition
from .tasks import (
    SHIFT_TYPES,
    TI_SHIFTS,
    TaskSpec,
    TrainTask,
    eval_scenes_for,
    gen_shift_task,
    gen_train_task,
    validate_task,
)

__all__ = [
    "ConditionKind",
    "ResultRecord",
    "RunConfig",
    "SHIFT_TYPES",
    "TI_SHIFTS",
    "TaskSpec",
    "TrainTask",
    "eval_scenes_for",
    "gen_shift_task",
    "gen_train_task",
    "run_condition",
    "validate_task",
]
