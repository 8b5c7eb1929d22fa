from collections import deque

from mcas.agents import build_behaviors
from mcas.core import ATTACKER, DEFENDER
from mcas.environment import run_episode
from mcas.gallium import SUBNETS, build_gallium, build_toy, subnet_of, topology_links
from mcas.search import shortest_goal_path
from oracles import action_tuples, as_pairs, exact_random_success, oracle_applicable, oracle_apply


def test_topology():
    assert len(SUBNETS) == 5
    nodes = [n for members in SUBNETS.values() for n in members]
    assert len(nodes) == 15 and len(set(nodes)) == 15
    spec = build_gallium()
    assert sorted(n.id for n in spec.nodes) == sorted(nodes)
    state = spec.initial_state()
    assert {state[f"{n}.net.subnet"] for n in nodes} == set(SUBNETS)


def test_dmz_bridges_outside_and_inside():
    links = {frozenset(pair) for pair in topology_links()}
    outside = SUBNETS["OUTSIDE"]
    inside = [n for s, members in SUBNETS.items() if s not in ("OUTSIDE", "DMZ") for n in members]
    for o in outside:
        for i in inside:
            assert frozenset((o, i)) not in links
    assert any(subnet_of(a) == "DMZ" and subnet_of(b) == "OUTSIDE" for a, b in map(tuple, links))
    assert any(subnet_of(a) == "DMZ" and subnet_of(b) in ("ACC", "MAR", "SRV") for a, b in map(tuple, links))


def test_agents_and_goal():
    spec = build_gallium()
    homes = {a.id: (a.team, a.home_node) for a in spec.agents}
    assert homes == {
        "attacker1": (ATTACKER, "At1"),
        "attacker2": (ATTACKER, "At2"),
        "defender1": (DEFENDER, "WS"),
        "defender2": (DEFENDER, "DB"),
    }
    goal = {(p.id, p.value) for alt in spec.attacker_goal for p in alt}
    assert goal == {("DB.data.exfiltrated", "true"), ("PS.spyware.installed", "true")}
    assert len(spec.actions) == 30
    assert spec.max_cycles == 200


def test_dt_attackers_always_win_alone():
    spec = build_gallium()
    for seed in range(50):
        log = run_episode(spec, build_behaviors(spec, passive_teams=(DEFENDER,)), seed=seed)
        assert log.attacker_success
        assert log.path_length(team=ATTACKER) == 16


def test_dt_defenders_always_hold():
    spec = build_gallium()
    for seed in range(10):
        assert not run_episode(spec, build_behaviors(spec), seed=seed).attacker_success


def test_qlearning_variant_differs_only_in_attacker_behavior():
    dt, ql = build_gallium(), build_gallium(attackers="qlearning")
    assert dt.actions == ql.actions and dt.nodes == ql.nodes
    assert [a.behavior.kind for a in ql.agents] == ["qlearning", "qlearning", "decision_tree", "decision_tree"]


def test_toy_shape():
    toy = build_toy()
    assert (len(toy.nodes), len(toy.actions), len(toy.agents)) == (2, 4, 1)
    assert len(shortest_goal_path(toy)) == 3


def test_toy_state_space_small():
    toy = build_toy()
    moves = [action_tuples(a) for a in toy.actions]
    start = as_pairs(toy.initial_state())
    seen = {start}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        for alts, post in moves:
            if oracle_applicable(s, alts):
                nxt = oracle_apply(s, post)
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
    assert len(seen) <= 64


def test_toy_exact_probability_is_plausible():
    p = exact_random_success(build_toy())
    assert 0 < p < 1
    # three specific moves out of four choices with one coin flip: at least (1/4)^3 / 2
    assert p >= 1 / 128
