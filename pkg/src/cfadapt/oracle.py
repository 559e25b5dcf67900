"""Simulated user: success judgments, demos, verification, relevance labels.

Success judgments are noiseless. Verification and relevance answers flip
with probability 1-p; behaviour-only concept guesses are correct with
probability q. All draws come from the model's own seeded stream, so a
session is fully reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import envs
from .concept import ConceptEdit, augmentation_targets
from .envs.trajectory import Trajectory
from .experts import expert_demo
from .rewards import RewardSpec
from .scenes import ConceptSchema, SceneDescriptor

TI = "TI"
TR = "TR"


@dataclass
class UserModel:
    reward: RewardSpec
    # Ground truth about the task's shift, used for the perfect-knowledge
    # half of verification and for behaviour-only emulation.
    true_shift: Optional[tuple[str, str]] = None
    p: float = 1.0  # relevance/verification answer accuracy
    q: float = 1.0  # concept-identification accuracy (behaviour-only)
    seed: int = 0
    _rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0 and 0.0 <= self.q <= 1.0):
            raise ValueError("accuracies must lie in [0, 1]")
        self._rng = np.random.default_rng(self.seed)

    def _maybe_flip(self, answer: bool) -> bool:
        return answer if self._rng.random() < self.p else not answer

    def judge_success(self, traj: Trajectory) -> bool:
        """Noiseless: the user reliably recognizes success on their reward."""
        return envs.success(traj, self.reward)

    def provide_demo(self, scene: SceneDescriptor) -> Trajectory:
        return expert_demo(scene, self.reward)

    def verify_counterfactual(self, edit: ConceptEdit, traj_cf: Trajectory) -> bool:
        """True iff the counterfactual succeeds on the user's reward and the
        edit names the actually-shifted concept; flipped with prob 1-p."""
        truth = (
            self.true_shift is not None
            and self.true_shift in edit.targets()
            and envs.success(traj_cf, self.reward)
        )
        return self._maybe_flip(truth)

    def label_relevance(self, edit: ConceptEdit) -> str:
        """TI/TR for the edit's primary concept; flipped with prob 1-p.
        Concepts absent from the reward phrasing are TI."""
        obj, concept = edit.targets()[0]
        truth = self.reward.relevance(obj, concept)
        flipped = TR if truth == TI else TI
        return truth if self._rng.random() < self.p else flipped

    def behaviour_only_guess(
        self, test_scene: SceneDescriptor, schema: Optional[ConceptSchema] = None
    ) -> Optional[tuple[str, str]]:
        """Emulates identifying the shifted concept from behaviour alone:
        the true concept with probability q, otherwise a uniformly random
        different candidate."""
        pool = augmentation_targets(test_scene, schema)
        correct = self._rng.random() < self.q
        if correct and self.true_shift is not None:
            return self.true_shift
        others = [t for t in pool if t != self.true_shift]
        if not others:
            return None
        return others[int(self._rng.integers(len(others)))]
