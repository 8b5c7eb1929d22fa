"""Behavior configuration values and the decision-tree structure."""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass

from ..core import Conjunction

RANDOM = "random"
DECISION_TREE = "decision_tree"
QLEARNING = "qlearning"
BEHAVIOR_KINDS = (RANDOM, DECISION_TREE, QLEARNING)


@dataclass(frozen=True)
class DTLeaf:
    # None is the Pass leaf: the agent plays the scenario's no-op action.
    action: str | None = None


@dataclass(frozen=True)
class DTBranch:
    condition: tuple[Conjunction, ...]
    then: DTLeaf | DTBranch
    otherwise: DTLeaf | DTBranch

    def __post_init__(self):
        object.__setattr__(self, "condition", tuple(tuple(c) for c in self.condition))


DTNode = DTLeaf | DTBranch


def iter_leaves(node: DTNode) -> Iterator[DTLeaf]:
    stack = [node]
    while stack:
        n = stack.pop()
        if isinstance(n, DTLeaf):
            yield n
        else:
            stack.extend((n.otherwise, n.then))


def iter_conditions(node: DTNode) -> Iterator[tuple[str, DTBranch]]:
    """Yield (json-pointer suffix, branch) for every internal node."""
    stack = [("", node)]
    while stack:
        path, n = stack.pop()
        if isinstance(n, DTBranch):
            yield path, n
            stack.append((path + "/else", n.otherwise))
            stack.append((path + "/then", n.then))


@dataclass(frozen=True)
class BehaviorConfig:
    kind: str = RANDOM
    tree: DTNode | None = None
    alpha: float = 0.1
    gamma: float = 0.95
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    # None: decay over 80% of each training phase.
    epsilon_decay_episodes: int | None = None
    # Subtracted from the reward of a turn whose action did not apply.
    invalid_action_penalty: float = 1.0

    def hyperparameter_errors(self) -> list[str]:
        if self.kind != QLEARNING:
            return []
        errors = []
        if not 0.0 < self.alpha <= 1.0:
            errors.append(f"alpha={self.alpha} must lie in (0, 1]")
        if not 0.0 <= self.gamma < 1.0:
            errors.append(f"gamma={self.gamma} must lie in [0, 1)")
        for name in ("epsilon_start", "epsilon_end"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                errors.append(f"{name}={v} must lie in [0, 1]")
        if self.epsilon_end > self.epsilon_start:
            errors.append("epsilon_end must not exceed epsilon_start")
        if self.invalid_action_penalty < 0:
            errors.append("invalid_action_penalty must be non-negative")
        if self.epsilon_decay_episodes is not None and self.epsilon_decay_episodes < 0:
            errors.append("epsilon_decay_episodes must be non-negative")
        return errors
