"""Tabular Q-learning over per-agent observations."""

from __future__ import annotations

import hashlib
import json
from collections.abc import Iterable, Mapping, Sequence

KEY_VERSION = "v1"


def encode_observation(observation: Mapping[str, str] | Iterable) -> str:
    """Stable key for an observation: sha256 of its id-sorted pairs.

    The digest is taken over compact JSON of ``[[id, value], ...]`` so it
    does not depend on insertion order, platform or hash seed.
    """
    if isinstance(observation, Mapping):
        pairs = sorted(observation.items())
    else:
        pairs = sorted((p.id, p.value) for p in observation)
    payload = json.dumps(pairs, ensure_ascii=False, separators=(",", ":"))
    digest = hashlib.sha256(f"{KEY_VERSION}\n{payload}".encode("utf-8")).hexdigest()
    return f"{KEY_VERSION}:{digest[:32]}"


EMPTY_OBSERVATION_KEY = encode_observation({})


class QTable:
    """Sparse (observation key, action) -> value table, defaulting to 0."""

    def __init__(self, actions: Sequence[str] = (), entries: Mapping[str, Mapping[str, float]] | None = None):
        self.actions = tuple(actions)
        self.rows: dict[str, dict[str, float]] = {}
        for key, row in (entries or {}).items():
            self.rows[key] = {a: float(v) for a, v in row.items()}

    def get(self, key: str, action: str) -> float:
        row = self.rows.get(key)
        return 0.0 if row is None else row.get(action, 0.0)

    def set(self, key: str, action: str, value: float) -> None:
        self.rows.setdefault(key, {})[action] = value

    def best_value(self, key: str) -> float:
        row = self.rows.get(key)
        if not row:
            return 0.0
        if self.actions:
            return max(row.get(a, 0.0) for a in self.actions)
        return max(row.values())

    def greedy(self, key: str) -> str:
        """Arg-max over ``actions``; ties go to the lowest action index."""
        row = self.rows.get(key) or {}
        best, best_value = self.actions[0], row.get(self.actions[0], 0.0)
        for a in self.actions[1:]:
            v = row.get(a, 0.0)
            if v > best_value:
                best, best_value = a, v
        return best

    def items(self):
        for key in sorted(self.rows):
            for action in sorted(self.rows[key]):
                yield (key, action), self.rows[key][action]

    def __len__(self):
        return sum(len(r) for r in self.rows.values())

    def __eq__(self, other):
        return isinstance(other, QTable) and self.actions == other.actions and self.rows == other.rows

    def copy(self) -> QTable:
        return QTable(self.actions, self.rows)

    def to_dict(self) -> dict:
        return {"actions": list(self.actions), "entries": {k: dict(v) for k, v in self.rows.items()}}

    @classmethod
    def from_dict(cls, doc: Mapping) -> QTable:
        return cls(doc.get("actions", ()), doc.get("entries", {}))


def q_update(table: QTable, s: str, a: str, r: float, s_next: str | None, alpha: float, gamma: float) -> QTable:
    """One Watkins update of Q(s, a); ``s_next=None`` marks a terminal step.

    Only the (s, a) entry is written.
    """
    bootstrap = 0.0 if s_next is None else table.best_value(s_next)
    old = table.get(s, a)
    table.set(s, a, old + alpha * (r + gamma * bootstrap - old))
    return table


def dump_tables(tables: Mapping[str, QTable]) -> str:
    doc = {"format_version": "1", "tables": {agent: t.to_dict() for agent, t in tables.items()}}
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def load_tables(text: str | bytes) -> dict[str, QTable]:
    doc = json.loads(text)
    return {agent: QTable.from_dict(t) for agent, t in doc["tables"].items()}
