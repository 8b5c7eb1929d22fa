from __future__ import annotations

import random
from collections.abc import Mapping, Sequence
from typing import TYPE_CHECKING

from ..core import NOOP_ACTION, any_matches
from .config import DECISION_TREE, QLEARNING, RANDOM, BehaviorConfig, DTBranch, DTNode
from .qlearning import QTable, encode_observation, q_update

if TYPE_CHECKING:
    from ..scenario import ScenarioSpec


class PassBehavior:
    """Inactive agent: always plays the no-op action."""

    def choose(self, observation, reward, rng) -> str:
        return NOOP_ACTION


class RandomBehavior:
    def __init__(self, actions: Sequence[str]):
        if not actions:
            raise ValueError("random behavior needs at least one action")
        self.actions = tuple(actions)

    def choose(self, observation, reward, rng: random.Random) -> str:
        return self.actions[rng.randrange(len(self.actions))]


def evaluate_tree(tree: DTNode, observation: Mapping[str, str]) -> str:
    node = tree
    while isinstance(node, DTBranch):
        node = node.then if any_matches(observation, node.condition) else node.otherwise
    return NOOP_ACTION if node.action is None else node.action


class DecisionTreeBehavior:
    def __init__(self, tree: DTNode):
        self.tree = tree

    def choose(self, observation, reward, rng) -> str:
        return evaluate_tree(self.tree, observation)


def epsilon_greedy(table: QTable, key: str, epsilon: float, rng: random.Random) -> str:
    # One uniform draw per decision keeps the rng stream independent of epsilon.
    if rng.random() < epsilon:
        return table.actions[rng.randrange(len(table.actions))]
    return table.greedy(key)


class QLearningBehavior:
    """Epsilon-greedy learner updating online from the rewards it receives.

    The reward handed to ``choose`` at turn t belongs to the action taken at
    turn t-1; the observation is the one returned right after that action.
    """

    def __init__(self, actions: Sequence[str], config: BehaviorConfig, table: QTable | None = None):
        if not actions:
            raise ValueError("q-learning behavior needs at least one action")
        self.config = config
        self.table = table if table is not None else QTable(actions)
        if not self.table.actions:
            self.table.actions = tuple(actions)
        self.epsilon = config.epsilon_start
        self.learning = True
        self._prev: tuple[str, str] | None = None
        self._penalty = 0.0

    def begin_episode(self) -> None:
        self._prev = None
        self._penalty = 0.0

    def choose(self, observation, reward, rng) -> str:
        key = encode_observation(observation)
        if self.learning and self._prev is not None:
            q_update(self.table, *self._prev, reward - self._penalty, key, self.config.alpha, self.config.gamma)
        action = epsilon_greedy(self.table, key, self.epsilon, rng)
        self._prev = (key, action)
        self._penalty = 0.0
        return action

    def after_step(self, outcome) -> None:
        """Charge the configured penalty when the chosen action was a no-op."""
        if not outcome.applied:
            self._penalty = self.config.invalid_action_penalty

    def end_episode(self, observation, reward, terminal: bool) -> None:
        if self.learning and self._prev is not None:
            s_next = None if terminal else encode_observation(observation)
            q_update(self.table, *self._prev, reward - self._penalty, s_next, self.config.alpha, self.config.gamma)
        self._prev = None
        self._penalty = 0.0


def make_behavior(spec: ScenarioSpec, agent_id: str, table: QTable | None = None):
    agent = spec.agent(agent_id)
    actions = spec.action_ids(agent_id)
    cfg: BehaviorConfig = agent.behavior
    if cfg.kind == RANDOM:
        return RandomBehavior(actions)
    if cfg.kind == DECISION_TREE:
        return DecisionTreeBehavior(cfg.tree)
    if cfg.kind == QLEARNING:
        return QLearningBehavior(actions, cfg, table)
    raise ValueError(f"unknown behavior kind {cfg.kind!r}")


def build_behaviors(spec: ScenarioSpec, passive_teams=(), tables: Mapping[str, QTable] | None = None,
                    greedy: bool = False) -> dict:
    """Behavior objects for every agent; agents of ``passive_teams`` pass.

    With ``greedy`` set, learners play their table with epsilon 0 and do
    not update it.
    """
    out = {}
    for agent in spec.agents:
        if agent.team in passive_teams:
            out[agent.id] = PassBehavior()
            continue
        table = None if tables is None else tables.get(agent.id)
        b = make_behavior(spec, agent.id, table)
        if greedy and isinstance(b, QLearningBehavior):
            b.epsilon = 0.0
            b.learning = False
        out[agent.id] = b
    return out


def choose_action(config: BehaviorConfig, behavior_state, observation, last_reward: float, rng) -> str:
    """Functional entry point: delegate to a behavior object built from ``config``."""
    if config.kind == DECISION_TREE:
        return evaluate_tree(config.tree, observation)
    return behavior_state.choose(observation, last_reward, rng)
