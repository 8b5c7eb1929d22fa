"""Curriculum training: attackers learn alone first, defenders join later."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

from ..environment import Environment, run_episode
from ..core import ATTACKER, DEFENDER, TEAMS
from ..scenario import ScenarioSpec
from .behaviors import PassBehavior, QLearningBehavior, make_behavior
from .config import QLEARNING, BehaviorConfig
from .qlearning import QTable

log = logging.getLogger(__name__)

CURVE_FIELDS = ("episode", "agent", "return", "path_length", "success")


@dataclass(frozen=True)
class Phase:
    active_teams: tuple[str, ...]
    episodes: int


@dataclass
class TrainingResult:
    tables: dict[str, QTable]
    curves: list[dict] = field(default_factory=list)
    phase_bounds: list[tuple[int, int]] = field(default_factory=list)
    episode_success: list[bool] = field(default_factory=list)
    attacker_path_lengths: list[int] = field(default_factory=list)
    attacker_returns: list[float] = field(default_factory=list)


def parse_phases(text: str) -> list[Phase]:
    """``attackers:1000,all:1000`` -> two phases.

    Team tokens: ``attackers``, ``defenders``, ``all``; join several with ``+``.
    """
    phases = []
    if not text.strip():
        return phases
    for chunk in text.split(","):
        teams_part, _, count = chunk.strip().partition(":")
        if not count:
            raise ValueError(f"phase {chunk!r} lacks an episode count")
        teams = set()
        for tok in teams_part.split("+"):
            tok = tok.strip()
            if tok == "all":
                teams.update(TEAMS)
            elif tok in ("attackers", ATTACKER):
                teams.add(ATTACKER)
            elif tok in ("defenders", DEFENDER):
                teams.add(DEFENDER)
            else:
                raise ValueError(f"unknown team {tok!r} in phase {chunk!r}")
        episodes = int(count)
        if episodes < 0:
            raise ValueError(f"negative episode count in phase {chunk!r}")
        phases.append(Phase(tuple(t for t in TEAMS if t in teams), episodes))
    return phases


def epsilon_at(config: BehaviorConfig, k: int, phase_episodes: int) -> float:
    """Linear decay from epsilon_start to epsilon_end, then flat."""
    decay = config.epsilon_decay_episodes
    if decay is None:
        decay = int(round(0.8 * phase_episodes))
    if decay <= 0:
        return config.epsilon_end
    frac = min(1.0, k / decay)
    return config.epsilon_start + (config.epsilon_end - config.epsilon_start) * frac


def train_curriculum(
    scenario: ScenarioSpec,
    phases: Sequence[Phase | tuple],
    seed: int = 0,
    overrides: dict | None = None,
    tables: dict[str, QTable] | None = None,
) -> TrainingResult:
    """Run the phases in order, updating each learner's table online.

    Episode ``i`` (counted across phases) uses seed ``seed + i``. Learners
    keep their table across phases; epsilon restarts with every phase.
    ``overrides`` replaces hyperparameters of every q-learning agent.
    """
    phases = [p if isinstance(p, Phase) else Phase(tuple(p[0]), int(p[1])) for p in phases]
    env = Environment(scenario)
    learners: dict[str, QLearningBehavior] = {}
    for agent in scenario.agents:
        if agent.behavior.kind != QLEARNING:
            continue
        cfg = agent.behavior
        if overrides:
            cfg = BehaviorConfig(QLEARNING, **{**_hyper(cfg), **overrides})
        table = None if tables is None else tables.get(agent.id)
        learners[agent.id] = QLearningBehavior(scenario.action_ids(agent.id), cfg, table)

    result = TrainingResult({aid: b.table for aid, b in learners.items()})
    episode = 0
    for phase in phases:
        start = episode
        behaviors = {}
        for agent in scenario.agents:
            if agent.team not in phase.active_teams:
                behaviors[agent.id] = PassBehavior()
            elif agent.id in learners:
                behaviors[agent.id] = learners[agent.id]
            else:
                behaviors[agent.id] = make_behavior(scenario, agent.id)
        for k in range(phase.episodes):
            for b in learners.values():
                b.epsilon = epsilon_at(b.config, k, phase.episodes)
            ep = run_episode(scenario, behaviors, seed=seed + episode, episode=episode, env=env)
            result.curves.extend(ep.agent_summary())
            result.episode_success.append(ep.attacker_success)
            result.attacker_path_lengths.append(ep.path_length(team=ATTACKER))
            result.attacker_returns.append(ep.team_return(ATTACKER))
            episode += 1
            if episode % 100 == 0:
                recent = result.episode_success[-100:]
                log.info("episode %d: attacker success %.2f", episode, sum(recent) / len(recent))
        result.phase_bounds.append((start, episode))
    return result


def _hyper(cfg: BehaviorConfig) -> dict:
    return {
        "alpha": cfg.alpha,
        "gamma": cfg.gamma,
        "epsilon_start": cfg.epsilon_start,
        "epsilon_end": cfg.epsilon_end,
        "epsilon_decay_episodes": cfg.epsilon_decay_episodes,
        "invalid_action_penalty": cfg.invalid_action_penalty,
    }
