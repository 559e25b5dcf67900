"""User-intended reward specifications.

A reward is a concept-conditioned success predicate plus the set of
concepts its phrasing names. Concepts named by the reward are task-relevant
(TR); everything else is task-irrelevant (TI) and safe to augment over.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import constants as C


@dataclass(frozen=True)
class RewardSpec:
    domain: str
    # None means "go to any goal"; a color restricts success to goals of
    # that color.
    goal_color: str | None = None
    # (object, concept) pairs named in the reward phrasing, e.g.
    # ("distractor", "presence") for "ignore the red distractor".
    tr_concepts: frozenset = field(default_factory=frozenset)
    goal_radius: float = C.NAV2D_GOAL_RADIUS

    def goal_satisfies(self, color: str) -> bool:
        return self.goal_color is None or color == self.goal_color

    def relevance(self, obj: str, concept: str) -> str:
        """'TR' if the concept appears in the reward phrasing, else 'TI'."""
        if obj == "goal" and concept == "color" and self.goal_color is not None:
            return "TR"
        return "TR" if (obj, concept) in self.tr_concepts else "TI"

    def to_json(self) -> dict:
        return {
            "domain": self.domain,
            "goal_color": self.goal_color,
            "tr_concepts": sorted(list(t) for t in self.tr_concepts),
            "goal_radius": self.goal_radius,
        }

    @staticmethod
    def from_json(d: dict) -> "RewardSpec":
        return RewardSpec(
            domain=d["domain"],
            goal_color=d["goal_color"],
            tr_concepts=frozenset(tuple(t) for t in d["tr_concepts"]),
            goal_radius=d["goal_radius"],
        )
