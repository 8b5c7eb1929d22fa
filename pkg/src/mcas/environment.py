"""Agent Environment Cycle: agents act one at a time in a fixed cyclic order.

Rewards are computed once per cycle, after the last agent has played,
from the metrics of the resulting state, and every agent receives its
team's value at its next turn.
"""

from __future__ import annotations

import json
import logging
import random
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from enum import Enum

from .core import ATTACKER, NOOP_ACTION, EnvState, MCASError, apply_action, precondition_satisfied
from .metrics import RewardPair, compute_metrics, eval_rewards
from .scenario import AgentSpec, ScenarioSpec, ValidationError, validate

log = logging.getLogger(__name__)


class OutOfTurn(MCASError):
    pass


class UnknownAction(MCASError, KeyError):
    pass


class ActionNotAllowedForAgent(MCASError):
    pass


class EpisodeOver(MCASError):
    pass


class TerminationStatus(str, Enum):
    RUNNING = "running"
    ATTACKER_GOAL_REACHED = "attacker_goal_reached"
    MAX_CYCLES_REACHED = "max_cycles_reached"

    @property
    def done(self) -> bool:
        return self is not TerminationStatus.RUNNING


class Observation(EnvState):
    """The subset of the state one agent can see."""

    __slots__ = ()

    def __repr__(self):
        return f"Observation({dict(sorted(self._entries.items()))!r})"


def pattern_matcher(patterns: Iterable[str]):
    exact = set()
    prefixes = []
    everything = False
    for pat in patterns:
        if pat == "*":
            everything = True
        elif pat.endswith(".*"):
            prefixes.append(pat[:-1])
        else:
            exact.add(pat)
    prefixes = tuple(prefixes)
    seen: dict[str, bool] = {}

    def match(pid: str) -> bool:
        hit = seen.get(pid)
        if hit is None:
            hit = seen[pid] = everything or pid in exact or (bool(prefixes) and pid.startswith(prefixes))
        return hit

    return match


def observe(state: Mapping[str, str], agent: AgentSpec) -> Observation:
    """Entries of ``state`` whose id matches one of the agent's patterns.

    A pattern is an exact id or ``prefix.*`` (every id below ``prefix``).
    """
    match = pattern_matcher(agent.observable_patterns)
    return Observation._trusted({k: v for k, v in state.items() if match(k)})


@dataclass(frozen=True)
class StepOutcome:
    agent: str
    action: str
    applied: bool
    state: EnvState = field(repr=False)
    observation: Observation
    cycle_rewards: RewardPair | None
    terminal: TerminationStatus

    @property
    def new_state_digest(self) -> str:
        return self.state.digest()


class Environment:
    """One simulation instance. Not thread-safe; use one per worker."""

    def __init__(self, scenario: ScenarioSpec, check: bool = True):
        if check:
            diagnostics = validate(scenario)
            if any(d.severity == "error" for d in diagnostics):
                raise ValidationError(diagnostics)
        self.scenario = scenario
        self.agents = scenario.agents
        self._actions = scenario.actions_by_name()
        self._allowed = {a.id: frozenset(scenario.action_ids(a.id)) for a in scenario.agents}
        self._matchers = {a.id: pattern_matcher(a.observable_patterns) for a in scenario.agents}
        # Agents whose observation an applied action can change.
        self._touches = {
            name: tuple(a for a in scenario.agents if any(self._matchers[a.id](p.id) for p in act.post))
            for name, act in self._actions.items()
        }
        self._observations: dict[str, Observation] = {}
        self.state: EnvState = scenario.initial_state()
        self.cursor = 0
        self.cycle = 0
        self.status = TerminationStatus.RUNNING
        self.last_rewards = RewardPair()
        self._joint: list[str] = []
        self._rng = random.Random(0)
        self._metric_cache: dict[tuple[EnvState, tuple[str, ...]], RewardPair] = {}

    def reset(self, seed: int = 0) -> tuple[EnvState, dict[str, Observation]]:
        self.state = self.scenario.initial_state()
        self.cursor = 0
        self.cycle = 0
        self.last_rewards = RewardPair()
        self._joint = []
        self._rng = random.Random(seed)
        self.status = self._termination()
        self._observations = {a.id: self._filter(a) for a in self.agents}
        return self.state, dict(self._observations)

    @property
    def current_agent(self) -> AgentSpec:
        return self.agents[self.cursor]

    def observe(self, agent: AgentSpec) -> Observation:
        obs = self._observations.get(agent.id)
        if obs is None:
            obs = self._observations[agent.id] = self._filter(agent)
        return obs

    def _filter(self, agent: AgentSpec) -> Observation:
        match = self._matchers[agent.id]
        return Observation._trusted({k: v for k, v in self.state._entries.items() if match(k)})

    def reward_for(self, agent: AgentSpec | str) -> float:
        """Team reward of the last completed cycle (zero before the first)."""
        if isinstance(agent, str):
            agent = self.scenario.agent(agent)
        return self.last_rewards.for_team(agent.team)

    def _termination(self) -> TerminationStatus:
        if self.scenario.goal_reached(self.state):
            return TerminationStatus.ATTACKER_GOAL_REACHED
        if self.cycle >= self.scenario.max_cycles:
            return TerminationStatus.MAX_CYCLES_REACHED
        return TerminationStatus.RUNNING

    def _cycle_rewards(self) -> RewardPair:
        # Rewards depend only on (state, joint action); episodes revisit both often.
        key = (self.state, tuple(self._joint))
        rewards = self._metric_cache.get(key)
        if rewards is None:
            metrics = compute_metrics(self.state, self._joint, self.scenario.metrics, self.scenario.attacker_goal)
            rewards = eval_rewards(metrics, self.scenario.eval)
            if len(self._metric_cache) >= 100_000:
                self._metric_cache.clear()
            self._metric_cache[key] = rewards
            log.debug("cycle %d: %s -> %s", self.cycle, metrics.as_dict(), rewards)
        return rewards

    def step(self, agent_cursor: int, chosen_action: str) -> StepOutcome:
        if self.status.done:
            raise EpisodeOver(f"episode already ended: {self.status.value}")
        if agent_cursor != self.cursor:
            raise OutOfTurn(f"agent #{agent_cursor} played but it is agent #{self.cursor}'s turn")
        agent = self.agents[agent_cursor]
        try:
            action = self._actions[chosen_action]
        except KeyError:
            raise UnknownAction(chosen_action) from None
        if chosen_action not in self._allowed[agent.id]:
            raise ActionNotAllowedForAgent(f"{agent.id} may not play {chosen_action}")

        applied = precondition_satisfied(self.state, action)
        if applied and action.success_prob < 1.0:
            applied = self._rng.random() < action.success_prob
        if applied:
            self.state = apply_action(self.state, action)
            for other in self._touches[chosen_action]:
                self._observations[other.id] = self._filter(other)
        self._joint.append(chosen_action)
        observation = self.observe(agent)

        rewards = None
        if agent_cursor == len(self.agents) - 1:
            self.cycle += 1
            rewards = self._cycle_rewards()
            self.last_rewards = rewards
            self._joint = []
            self.status = self._termination()
        self.cursor = (agent_cursor + 1) % len(self.agents)
        return StepOutcome(agent.id, chosen_action, applied, self.state, observation, rewards, self.status)


# -- episodes -------------------------------------------------------------

LOG_FIELDS = ("episode", "cycle", "agent", "action", "applied", "att_reward", "def_reward", "terminal")


@dataclass(frozen=True)
class LogRecord:
    episode: int
    cycle: int
    agent: str
    action: str
    applied: bool
    att_reward: float | None
    def_reward: float | None
    terminal: str

    def to_json(self) -> str:
        return json.dumps({f: getattr(self, f) for f in LOG_FIELDS}, ensure_ascii=False)


@dataclass
class EpisodeLog:
    episode: int
    seed: int
    agents: tuple[AgentSpec, ...]
    records: list[LogRecord] = field(default_factory=list)
    status: TerminationStatus = TerminationStatus.RUNNING
    cycles: int = 0

    @property
    def attacker_success(self) -> bool:
        return self.status is TerminationStatus.ATTACKER_GOAL_REACHED

    def to_jsonl(self) -> str:
        return "".join(r.to_json() + "\n" for r in self.records)

    def team_return(self, team: str) -> float:
        key = "att_reward" if team == ATTACKER else "def_reward"
        return sum(getattr(r, key) for r in self.records if getattr(r, key) is not None)

    def path_length(self, agent_id: str | None = None, team: str | None = None) -> int:
        """Applied actions other than the no-op, for one agent or a whole team."""
        ids = {a.id for a in self.agents if (agent_id is None or a.id == agent_id) and (team is None or a.team == team)}
        return sum(1 for r in self.records if r.agent in ids and r.applied and r.action != NOOP_ACTION)

    def agent_summary(self) -> list[dict]:
        rows = []
        for a in self.agents:
            won = self.attacker_success if a.team == ATTACKER else not self.attacker_success
            rows.append(
                {
                    "episode": self.episode,
                    "agent": a.id,
                    "return": self.team_return(a.team),
                    "path_length": self.path_length(agent_id=a.id),
                    "success": int(won),
                }
            )
        return rows


def behavior_seed(seed: int, agent_id: str) -> str:
    return f"{seed}:{agent_id}"


def run_episode(scenario: ScenarioSpec, behaviors: Mapping[str, object], seed: int = 0, episode: int = 0,
                env: Environment | None = None) -> EpisodeLog:
    """Reset, then step every agent in turn until the episode ends.

    ``behaviors`` maps agent id to an object with ``choose(observation,
    reward, rng)``; optional ``begin_episode()``, ``after_step(outcome)`` and
    ``end_episode(observation, reward, terminal)`` hooks are called when
    present.
    """
    missing = [a.id for a in scenario.agents if a.id not in behaviors]
    if missing:
        raise KeyError(f"no behavior for agents {missing}")
    env = env or Environment(scenario)
    _, observations = env.reset(seed)
    rngs = {a.id: random.Random(behavior_seed(seed, a.id)) for a in scenario.agents}
    for a in scenario.agents:
        hook = getattr(behaviors[a.id], "begin_episode", None)
        if hook:
            hook()

    result = EpisodeLog(episode, seed, scenario.agents)
    records = result.records
    while not env.status.done:
        cursor = env.cursor
        agent = env.agents[cursor]
        cycle = env.cycle
        behavior = behaviors[agent.id]
        action = behavior.choose(observations[agent.id], env.reward_for(agent), rngs[agent.id])
        outcome = env.step(cursor, action)
        observations[agent.id] = outcome.observation
        hook = getattr(behavior, "after_step", None)
        if hook:
            hook(outcome)
        rw = outcome.cycle_rewards
        records.append(
            LogRecord(
                episode, cycle, agent.id, action, outcome.applied,
                None if rw is None else rw.attacker,
                None if rw is None else rw.defender,
                outcome.terminal.value,
            )
        )

    for a in scenario.agents:
        hook = getattr(behaviors[a.id], "end_episode", None)
        if hook:
            hook(observations[a.id], env.reward_for(a), env.status is TerminationStatus.ATTACKER_GOAL_REACHED)
    result.status = env.status
    result.cycles = env.cycle
    return result
