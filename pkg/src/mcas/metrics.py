"""Metric vectors and the affine reward evaluation (reward = eval(metrics))."""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass

from .core import NOOP_ACTION, MCASError, Property, node_of, satisfied_count

ACTIVE_SUFFIX = ".active"
COMPROMISE_SEGMENT = "compromised_by"


class UnknownMetric(MCASError, KeyError):
    pass


class DimensionMismatch(MCASError, ValueError):
    pass


@dataclass(frozen=True)
class MetricVector:
    names: tuple[str, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.names) != len(self.values):
            raise DimensionMismatch("metric names and values differ in length")

    def __len__(self):
        return len(self.values)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values))


@dataclass(frozen=True)
class RewardPair:
    attacker: float = 0.0
    defender: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.attacker) and math.isfinite(self.defender)):
            raise ValueError(f"non-finite reward pair ({self.attacker}, {self.defender})")

    def for_team(self, team: str) -> float:
        return self.attacker if team == "attacker" else self.defender


@dataclass(frozen=True)
class EvalConfig:
    weights: tuple[tuple[float, ...], tuple[float, ...]]
    bias: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(tuple(float(w) for w in row) for row in self.weights))
        object.__setattr__(self, "bias", tuple(float(b) for b in self.bias))
        if len(self.weights) != 2 or len(self.bias) != 2:
            raise DimensionMismatch("eval needs exactly two weight rows and a 2-vector bias")
        if len(self.weights[0]) != len(self.weights[1]):
            raise DimensionMismatch("eval weight rows differ in length")

    @property
    def dimension(self) -> int:
        return len(self.weights[0])


def _nodes(state: Mapping[str, str]) -> set[str]:
    return {node_of(pid) for pid in state if not pid.startswith("agents.")}


def active_node_count(state, joint_action=(), goal=()) -> float:
    nodes = _nodes(state)
    return float(sum(1 for n in nodes if state.get(n + ACTIVE_SUFFIX) != "false"))


def _compromise_ids(state):
    for pid in state:
        parts = pid.split(".")
        if len(parts) >= 3 and parts[1] == COMPROMISE_SEGMENT and parts[0] != "agents":
            yield parts[0], pid


def lateral_move_count(state, joint_action=(), goal=()) -> float:
    return float(sum(1 for _ in _compromise_ids(state)))


def compromised_node_count(state, joint_action=(), goal=()) -> float:
    return float(len({node for node, _ in _compromise_ids(state)}))


def attacker_goal_progress(state, joint_action=(), goal=()) -> float:
    return float(satisfied_count(state, goal))


def action_count(state, joint_action=(), goal=()) -> float:
    """Actions in the joint action other than the no-op."""
    return float(sum(1 for a in joint_action if a != NOOP_ACTION))


BUILTIN_METRICS: dict[str, Callable] = {
    "active_node_count": active_node_count,
    "lateral_move_count": lateral_move_count,
    "attacker_goal_progress": attacker_goal_progress,
    "compromised_node_count": compromised_node_count,
    "action_count": action_count,
}


def compute_metrics(
    state: Mapping[str, str],
    joint_action: Sequence[str],
    names: Iterable[str],
    attacker_goal: Sequence[Sequence[Property]] = (),
) -> MetricVector:
    """Evaluate the configured metrics on a post-cycle state and the
    actions chosen during that cycle."""
    names = tuple(names)
    values = []
    for name in names:
        try:
            fn = BUILTIN_METRICS[name]
        except KeyError:
            raise UnknownMetric(name) from None
        values.append(fn(state, joint_action, attacker_goal))
    return MetricVector(names, tuple(values))


def eval_rewards(metrics: MetricVector | Sequence[float], config: EvalConfig) -> RewardPair:
    values = metrics.values if isinstance(metrics, MetricVector) else tuple(metrics)
    if len(values) != config.dimension:
        raise DimensionMismatch(f"metric vector has {len(values)} entries, eval expects {config.dimension}")
    att = config.bias[0] + math.fsum(w * m for w, m in zip(config.weights[0], values))
    dfd = config.bias[1] + math.fsum(w * m for w, m in zip(config.weights[1], values))
    return RewardPair(att, dfd)
