"""Breadth-first search for the shortest attacker action path to the goal."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .core import EnvState, precondition_satisfied
from .core import ATTACKER
from .scenario import ScenarioSpec

DEFAULT_BUDGET = 2_000_000

FOUND = "found"
UNREACHABLE = "unreachable"
UNKNOWN = "unknown"  # budget exhausted before the frontier emptied


@dataclass(frozen=True)
class SearchResult:
    status: str
    path: tuple[tuple[str, str], ...] | None
    expansions: int
    states_seen: int


def attacker_moves(spec: ScenarioSpec) -> list[tuple[str, object]]:
    """(agent, action) pairs available to attackers, one entry per action."""
    moves = []
    seen = set()
    by_name = spec.actions_by_name()
    for agent in spec.team_agents(ATTACKER):
        for name in spec.action_ids(agent.id):
            if name not in seen:
                seen.add(name)
                moves.append((agent.id, by_name[name]))
    return moves


def search_goal_path(spec: ScenarioSpec, budget: int = DEFAULT_BUDGET) -> SearchResult:
    """Search with defenders inactive; states are memoized by content.

    Every attacker action is assumed to succeed, so the path length is the
    number of attacker actions on the best possible run.
    """
    start = spec.initial_state()
    if spec.goal_reached(start):
        return SearchResult(FOUND, (), 0, 1)

    moves = attacker_moves(spec)
    parents: dict[EnvState, tuple[EnvState, tuple[str, str]] | None] = {start: None}
    frontier = deque([start])
    expansions = 0
    while frontier:
        if expansions >= budget:
            return SearchResult(UNKNOWN, None, expansions, len(parents))
        state = frontier.popleft()
        expansions += 1
        for agent_id, action in moves:
            if not precondition_satisfied(state, action):
                continue
            nxt = state.with_properties(action.post)
            if nxt in parents:
                continue
            parents[nxt] = (state, (agent_id, action.name))
            if spec.goal_reached(nxt):
                return SearchResult(FOUND, _unwind(parents, nxt), expansions, len(parents))
            frontier.append(nxt)
    return SearchResult(UNREACHABLE, None, expansions, len(parents))


def _unwind(parents, state):
    path = []
    while parents[state] is not None:
        state, move = parents[state]
        path.append(move)
    return tuple(reversed(path))


def shortest_goal_path(spec: ScenarioSpec, budget: int = DEFAULT_BUDGET) -> list[tuple[str, str]] | None:
    result = search_goal_path(spec, budget)
    return None if result.path is None else list(result.path)
