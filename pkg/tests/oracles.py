"""Reference implementations written independently of the engine.

They work on plain Python sets and dicts so that agreement with the
package is evidence, not tautology.
"""

from __future__ import annotations

import math
from collections import deque
from fractions import Fraction

WILD = "*"


# -- transitions ----------------------------------------------------------

def as_pairs(state) -> frozenset:
    return frozenset(dict(state).items())


def oracle_holds(pairs: frozenset, conjunction) -> bool:
    """A conjunction holds iff its pairs form a subset of the state."""
    need = set()
    for pid, value in conjunction:
        if value == WILD:
            if not any(i == pid for i, _ in pairs):
                return False
        else:
            need.add((pid, value))
    return need <= pairs


def oracle_applicable(pairs: frozenset, alternatives) -> bool:
    if len(alternatives) == 0:
        return True
    return any(oracle_holds(pairs, alt) for alt in alternatives)


def oracle_apply(pairs: frozenset, post) -> frozenset:
    """(s minus every pair whose id is touched by post) union the valued post pairs."""
    touched = {pid for pid, _ in post}
    kept = {(i, v) for i, v in pairs if i not in touched}
    added = {(i, v) for i, v in post if v is not None}
    return frozenset(kept | added)


def action_tuples(action):
    alts = [[(p.id, p.value) for p in alt] for alt in action.pre_alternatives]
    post = [(p.id, p.value) for p in action.post]
    return alts, post


# -- observation ----------------------------------------------------------

def oracle_observe(state, patterns) -> dict:
    out = {}
    for pid, value in dict(state).items():
        segs = pid.split(".")
        for pat in patterns:
            if pat == WILD:
                ok = True
            elif pat.endswith(".*"):
                prefix = pat[:-2].split(".")
                ok = len(segs) > len(prefix) and segs[: len(prefix)] == prefix
            else:
                ok = pid == pat
            if ok:
                out[pid] = value
                break
    return out


# -- exact success probability for a uniform random single agent ----------

def exact_random_success(spec) -> Fraction:
    """P(goal reached within max_cycles) when the only agent picks uniformly.

    Enumerates the distribution over states cycle by cycle with exact
    rational arithmetic; goal states are absorbing.
    """
    if len(spec.agents) != 1:
        raise ValueError("the enumerator handles single-agent scenarios")
    agent = spec.agents[0].id
    moves = [a for a in spec.actions if agent in a.allowed_agents]
    goal = [[(p.id, p.value) for p in alt] for alt in spec.attacker_goal]
    start = as_pairs({p.id: p.value for n in spec.nodes for p in n.properties})

    def at_goal(pairs):
        return oracle_applicable(pairs, goal)

    if at_goal(start):
        return Fraction(1)
    dist = {start: Fraction(1)}
    won = Fraction(0)
    pick = Fraction(1, len(moves))
    for _ in range(spec.max_cycles):
        nxt: dict[frozenset, Fraction] = {}
        for pairs, mass in dist.items():
            for action in moves:
                alts, post = action_tuples(action)
                share = mass * pick
                if not oracle_applicable(pairs, alts):
                    nxt[pairs] = nxt.get(pairs, 0) + share
                    continue
                p = Fraction(action.success_prob).limit_denominator(10**9)
                after = oracle_apply(pairs, post)
                nxt[after] = nxt.get(after, 0) + share * p
                if p < 1:
                    nxt[pairs] = nxt.get(pairs, 0) + share * (1 - p)
        dist = {}
        for pairs, mass in nxt.items():
            if at_goal(pairs):
                won += mass
            else:
                dist[pairs] = mass
    return won


def binomial_ci99(p: float, n: int) -> tuple[float, float]:
    """Normal-approximation 99% interval for the mean of n Bernoulli(p) draws."""
    z = 2.5758293035489004
    half = z * math.sqrt(p * (1 - p) / n)
    return p - half, p + half


# -- shortest path --------------------------------------------------------

def oracle_shortest(spec, teams=("attacker",)) -> int | None:
    """Plain BFS on pair-sets using every action any agent of ``teams`` may play."""
    ids = {a.id for a in spec.agents if a.team in teams}
    moves = [action_tuples(a) for a in spec.actions if ids & set(a.allowed_agents)]
    goal = [[(p.id, p.value) for p in alt] for alt in spec.attacker_goal]
    start = as_pairs({p.id: p.value for n in spec.nodes for p in n.properties})
    seen = {start}
    queue = deque([(start, 0)])
    while queue:
        pairs, depth = queue.popleft()
        if oracle_applicable(pairs, goal):
            return depth
        for alts, post in moves:
            if oracle_applicable(pairs, alts):
                after = oracle_apply(pairs, post)
                if after not in seen:
                    seen.add(after)
                    queue.append((after, depth + 1))
    return None


# -- q-learning -----------------------------------------------------------

def reference_q(steps, alpha, gamma, actions):
    """Replay (s, a, r, s_next | None) steps on a dict table from zeros.

    Returns the table after every step so callers can compare histories.
    """
    q: dict[tuple[str, str], float] = {}
    history = []
    for s, a, r, s_next in steps:
        if s_next is None:
            target = r
        else:
            target = r + gamma * max(q.get((s_next, b), 0.0) for b in actions)
        old = q.get((s, a), 0.0)
        q[(s, a)] = old + alpha * (target - old)
        history.append(dict(q))
    return history


def affine(weights, bias, values):
    return tuple(b + sum(w * v for w, v in zip(row, values)) for row, b in zip(weights, bias))
