"""Properties, environment states and action semantics.

A state is a function from dotted property identifiers to text values.
Actions carry a disjunction of conjunctive preconditions and a
postcondition list; a postcondition entry whose value is ``None``
(``ABSENT``) deletes its identifier without inserting anything.
"""

from __future__ import annotations

import hashlib
import json
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass

SEPARATOR = "."
ABSENT = None
WILDCARD = "*"
NOOP_ACTION = "pass"
ATTACKER = "attacker"
DEFENDER = "defender"
TEAMS = (ATTACKER, DEFENDER)


class MCASError(Exception):
    """Base class for every error raised by this package."""


class InvalidPropertyId(MCASError, ValueError):
    pass


class PreconditionUnsatisfied(MCASError):
    pass


def split_id(pid: str) -> tuple[str, ...]:
    """Return the segments of a dotted identifier, rejecting empty ones."""
    if not isinstance(pid, str) or not pid:
        raise InvalidPropertyId(f"property id must be a non-empty string: {pid!r}")
    segments = tuple(pid.split(SEPARATOR))
    if any(not s for s in segments):
        raise InvalidPropertyId(f"empty segment in property id {pid!r}")
    return segments


def join_id(*segments: str) -> str:
    for s in segments:
        if not s or SEPARATOR in s:
            raise InvalidPropertyId(f"bad segment {s!r}")
    return SEPARATOR.join(segments)


def node_of(pid: str) -> str:
    return pid.split(SEPARATOR, 1)[0]


@dataclass(frozen=True)
class Property:
    id: str
    value: str | None

    def __post_init__(self):
        split_id(self.id)
        if self.value is not None and not isinstance(self.value, str):
            raise TypeError(f"property value must be str or None, got {type(self.value).__name__}")

    @property
    def is_absent(self) -> bool:
        return self.value is ABSENT


class EnvState(Mapping):
    """Immutable id -> value map. Absent values are never stored."""

    __slots__ = ("_entries", "_hash")

    def __init__(self, entries: Mapping[str, str] | Iterable[Property] = ()):
        if isinstance(entries, Mapping):
            items = dict(entries)
        else:
            items = {}
            for p in entries:
                if p.id in items:
                    raise ValueError(f"duplicate property id {p.id!r} in state")
                items[p.id] = p.value
        for k, v in items.items():
            split_id(k)
            if not isinstance(v, str):
                raise ValueError(f"state value for {k!r} must be a string, got {v!r}")
        self._entries = items
        self._hash = None

    @classmethod
    def _trusted(cls, entries: dict[str, str]) -> EnvState:
        state = cls.__new__(cls)
        state._entries = entries
        state._hash = None
        return state

    def __getitem__(self, pid: str) -> str:
        return self._entries[pid]

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, pid) -> bool:
        return pid in self._entries

    def get(self, pid, default=None):
        return self._entries.get(pid, default)

    def __eq__(self, other):
        if isinstance(other, EnvState):
            return self._entries == other._entries
        if isinstance(other, Mapping):
            return self._entries == dict(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._entries.items()))
        return self._hash

    def __repr__(self):
        return f"EnvState({len(self._entries)} properties)"

    def properties(self) -> frozenset[Property]:
        return frozenset(Property(k, v) for k, v in self._entries.items())

    def canonical(self) -> str:
        return json.dumps(sorted(self._entries.items()), ensure_ascii=False, separators=(",", ":"))

    def digest(self) -> str:
        """Stable sha256 hex digest of the sorted (id, value) list."""
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()

    def with_properties(self, props: Iterable[Property]) -> EnvState:
        entries = dict(self._entries)
        for p in props:
            if p.value is None:
                entries.pop(p.id, None)
            else:
                entries[p.id] = p.value
        return EnvState._trusted(entries)


Conjunction = tuple[Property, ...]


def matches(state: Mapping[str, str], conjunction: Iterable[Property]) -> bool:
    """True iff every (id, value) holds in ``state``; ``*`` only tests presence."""
    get = state._entries.get if isinstance(state, EnvState) else state.get
    for p in conjunction:
        v = get(p.id)
        if v is None or (p.value != WILDCARD and v != p.value):
            return False
    return True


def any_matches(state: Mapping[str, str], alternatives: Iterable[Iterable[Property]]) -> bool:
    alternatives = tuple(alternatives)
    if not alternatives:
        return True
    return any(matches(state, alt) for alt in alternatives)


def satisfied_count(state: Mapping[str, str], alternatives: Iterable[Iterable[Property]]) -> int:
    """Largest number of satisfied conjuncts among the alternatives."""
    get = state.get
    best = 0
    for alt in alternatives:
        n = 0
        for p in alt:
            v = get(p.id)
            if v is not None and (p.value == WILDCARD or v == p.value):
                n += 1
        best = max(best, n)
    return best


@dataclass(frozen=True)
class ActionSpec:
    name: str
    allowed_agents: tuple[str, ...] = ()
    pre_alternatives: tuple[Conjunction, ...] = ()
    post: tuple[Property, ...] = ()
    success_prob: float = 1.0
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "allowed_agents", tuple(self.allowed_agents))
        object.__setattr__(self, "pre_alternatives", tuple(tuple(a) for a in self.pre_alternatives))
        object.__setattr__(self, "post", tuple(self.post))
        for alt in self.pre_alternatives:
            for p in alt:
                if p.value is None:
                    raise ValueError(f"action {self.name!r}: Absent value in precondition {p.id!r}")


def precondition_satisfied(state: Mapping[str, str], action: ActionSpec) -> bool:
    return any_matches(state, action.pre_alternatives)


def apply_action(state: EnvState, action: ActionSpec) -> EnvState:
    """Return the successor state; ``state`` is left untouched.

    Every id named in the postcondition is removed first, then entries
    carrying a value are inserted. Absent entries are pure deletions.
    """
    if not precondition_satisfied(state, action):
        raise PreconditionUnsatisfied(f"precondition of {action.name!r} not satisfied")
    return state.with_properties(action.post)
