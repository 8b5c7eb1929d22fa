import itertools
import random

import pytest

from generators import random_instance
from mcas.core import (
    ABSENT,
    ActionSpec,
    EnvState,
    InvalidPropertyId,
    PreconditionUnsatisfied,
    Property,
    apply_action,
    join_id,
    precondition_satisfied,
    split_id,
)
from oracles import action_tuples, as_pairs, oracle_applicable, oracle_apply


def P(pid, value="v"):
    return Property(pid, value)


# The worked two-alternative example: pre p3 or (p4 and p10); the post
# deletes the id of p4 without a value, replaces the id of p2 and adds p11.
N1 = {
    "node1.id1": "v1",   # p1
    "node1.id3": "v3",   # p3
    "node1.id4": "v4",   # p4
    "node1.id2": "v2",   # p2
    "node1.id9": "v9",   # p9
}
ACTION1 = ActionSpec(
    "action1",
    ("agent1",),
    ((P("node1.id3", "v3"),), (P("node1.id4", "v4"), P("node1.id10", "v10"))),
    (P("node1.id4", ABSENT), P("node1.id2", "v14"), P("node1.id11", "v11")),
)


def test_worked_example_precondition_first_alternative():
    assert precondition_satisfied(EnvState(N1), ACTION1)


def test_worked_example_transition():
    after = apply_action(EnvState(N1), ACTION1)
    assert dict(after) == {
        "node1.id1": "v1",
        "node1.id3": "v3",
        "node1.id9": "v9",
        "node1.id2": "v14",
        "node1.id11": "v11",
    }
    # the Absent-valued entry deletes and is never inserted
    assert "node1.id4" not in after
    assert None not in after.values()


def test_bashrc_modification():
    state = EnvState({
        "X.privilege_level": "root",
        "X.accessed_text_editor": "Vim",
        "X.bashrc_known_filepath": "/home/user/.bashrc",
        "pc.os": "linux",
    })
    action = ActionSpec(
        "modify_bashrc",
        ("X",),
        ((P("X.privilege_level", "root"), P("X.accessed_text_editor", "Vim"),
          P("X.bashrc_known_filepath", "/home/user/.bashrc")),),
        (P("pc.bashrc_file_modified_by_X_agent", "true"),),
    )
    after = apply_action(state, action)
    assert dict(after) == {**dict(state), "pc.bashrc_file_modified_by_X_agent": "true"}


def test_empty_post_is_identity():
    state = EnvState({"a.b": "1"})
    assert apply_action(state, ActionSpec("noop")) == state


@pytest.mark.parametrize("alts", [(), ((),)])
def test_empty_precondition_always_holds(alts):
    assert precondition_satisfied(EnvState(), ActionSpec("x", (), alts))
    assert precondition_satisfied(EnvState({"a.b": "c"}), ActionSpec("x", (), alts))


def test_no_alternative_matches():
    action = ActionSpec("x", (), ((P("a.b", "1"),), (P("a.c", "2"), P("a.d", "3"))))
    assert not precondition_satisfied(EnvState({"a.b": "2", "a.c": "2"}), action)
    with pytest.raises(PreconditionUnsatisfied):
        apply_action(EnvState({"a.b": "2"}), action)


def test_wildcard_tests_presence_only():
    action = ActionSpec("x", (), ((P("a.b", "*"),),))
    assert precondition_satisfied(EnvState({"a.b": "anything"}), action)
    assert not precondition_satisfied(EnvState({"a.c": "anything"}), action)


def test_absent_rejected_in_precondition():
    with pytest.raises(ValueError):
        ActionSpec("x", (), ((P("a.b", ABSENT),),))


def test_apply_does_not_mutate_input():
    state = EnvState(N1)
    snapshot = dict(state)
    apply_action(state, ACTION1)
    assert dict(state) == snapshot


def test_pure_deletion_idempotent():
    state = EnvState({"a.b": "1", "a.c": "2"})
    action = ActionSpec("del", (), (), (P("a.b", ABSENT), P("a.z", ABSENT)))
    once = apply_action(state, action)
    assert apply_action(once, action) == once
    assert dict(once) == {"a.c": "2"}


def test_id_helpers():
    assert split_id("PC1.processes.agents.agent1") == ("PC1", "processes", "agents", "agent1")
    assert join_id("a", "b") == "a.b"
    for bad in ("", "a..b", ".a", "a."):
        with pytest.raises(InvalidPropertyId):
            split_id(bad)
    with pytest.raises(InvalidPropertyId):
        join_id("a.b", "c")
    with pytest.raises(InvalidPropertyId):
        Property("a..b", "x")


def test_state_value_semantics():
    a = EnvState({"x.a": "1", "x.b": "2"})
    b = EnvState([P("x.b", "2"), P("x.a", "1")])
    assert a == b and hash(a) == hash(b)
    assert a.digest() == b.digest()
    assert a.canonical() == '[["x.a","1"],["x.b","2"]]'
    assert a.properties() == {P("x.a", "1"), P("x.b", "2")}
    with pytest.raises(ValueError):
        EnvState([P("x.a", "1"), P("x.a", "2")])
    with pytest.raises(ValueError):
        EnvState({"x.a": None})


def test_with_properties_matches_apply():
    state = EnvState(N1)
    assert state.with_properties(ACTION1.post) == apply_action(state, ACTION1)


def test_random_instances_agree_with_oracle():
    rng = random.Random(7)
    for _ in range(3000):
        state, action = random_instance(rng)
        alts, post = action_tuples(action)
        pairs = as_pairs(state)
        ok = precondition_satisfied(state, action)
        assert ok == oracle_applicable(pairs, alts)
        if ok:
            assert as_pairs(apply_action(state, action)) == oracle_apply(pairs, post)


def test_id_set_law():
    rng = random.Random(11)
    for _ in range(1000):
        state, action = random_instance(rng)
        if not precondition_satisfied(state, action):
            continue
        after = apply_action(state, action)
        post_ids = {p.id for p in action.post}
        expected = (set(state) - post_ids) | {p.id for p in action.post if p.value is not None}
        assert set(after) == expected


def test_exhaustive_small_universe():
    """Every state over 3 ids and 3 values, against a batch of random actions."""
    ids = ("n.a", "n.b", "m.c")
    values = ("0", "1", "2")
    states = []
    for combo in itertools.product((None,) + values, repeat=len(ids)):
        states.append(EnvState({i: v for i, v in zip(ids, combo) if v is not None}))
    assert len(states) == 64
    rng = random.Random(3)
    for _ in range(3):
        alts = tuple(
            tuple(P(i, rng.choice(values + ("*",))) for i in rng.sample(ids, rng.randint(0, 2)))
            for _ in range(rng.randint(0, 2))
        )
        post = tuple(P(i, rng.choice(values + (None,))) for i in rng.sample(ids, rng.randint(0, 3)))
        action = ActionSpec("a", (), alts, post)
        a_alts, a_post = action_tuples(action)
        for s in states:
            ok = precondition_satisfied(s, action)
            assert ok == oracle_applicable(as_pairs(s), a_alts)
            if ok:
                assert as_pairs(apply_action(s, action)) == oracle_apply(as_pairs(s), a_post)
