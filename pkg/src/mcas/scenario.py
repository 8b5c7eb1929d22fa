"""Scenario documents: schema, parsing, canonical saving and validation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .agents.config import (
    BEHAVIOR_KINDS,
    DECISION_TREE,
    QLEARNING,
    RANDOM,
    BehaviorConfig,
    DTBranch,
    DTLeaf,
    DTNode,
)
from .core import (
    NOOP_ACTION,
    TEAMS,
    WILDCARD,
    ActionSpec,
    EnvState,
    MCASError,
    Property,
    matches,
    node_of,
)
from .metrics import BUILTIN_METRICS, EvalConfig

FORMAT_VERSION = "1"
AGENT_PREFIX = "agents"


class ParseError(MCASError):
    pass


class SchemaError(MCASError):
    pass


class ValidationError(MCASError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        errors = [d for d in self.diagnostics if d.severity == "error"]
        super().__init__("; ".join(str(d) for d in errors) or "invalid scenario")


InvalidScenario = ValidationError


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str
    location: str = ""

    def __str__(self):
        return f"{self.severity}: {self.code} at {self.location or '/'}: {self.message}"


@dataclass(frozen=True)
class AgentSpec:
    id: str
    team: str
    home_node: str
    observable_patterns: tuple[str, ...] = ()
    behavior: BehaviorConfig = field(default_factory=BehaviorConfig)

    def __post_init__(self):
        object.__setattr__(self, "observable_patterns", tuple(self.observable_patterns))


@dataclass(frozen=True)
class NodeSpec:
    id: str
    properties: tuple[Property, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "properties", tuple(self.properties))


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    nodes: tuple[NodeSpec, ...]
    actions: tuple[ActionSpec, ...]
    agents: tuple[AgentSpec, ...]
    attacker_goal: tuple[tuple[Property, ...], ...]
    max_cycles: int
    metrics: tuple[str, ...]
    eval: EvalConfig

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "agents", tuple(self.agents))
        object.__setattr__(self, "attacker_goal", tuple(tuple(a) for a in self.attacker_goal))
        object.__setattr__(self, "metrics", tuple(self.metrics))

    def initial_state(self) -> EnvState:
        return EnvState(p for node in self.nodes for p in node.properties)

    def action(self, name: str) -> ActionSpec:
        for a in self.actions:
            if a.name == name:
                return a
        raise KeyError(name)

    def actions_by_name(self) -> dict[str, ActionSpec]:
        return {a.name: a for a in self.actions}

    def agent(self, agent_id: str) -> AgentSpec:
        for a in self.agents:
            if a.id == agent_id:
                return a
        raise KeyError(agent_id)

    def action_ids(self, agent_id: str) -> tuple[str, ...]:
        """Actions an agent may play, in declaration order."""
        return tuple(a.name for a in self.actions if agent_id in a.allowed_agents)

    def team_agents(self, team: str) -> tuple[AgentSpec, ...]:
        return tuple(a for a in self.agents if a.team == team)

    def goal_reached(self, state) -> bool:
        return any(matches(state, alt) for alt in self.attacker_goal) if self.attacker_goal else True


# -- schema ---------------------------------------------------------------

_ID_PATTERN = r"^[^.]+(\.[^.]+)*$"

_PROPERTY = {
    "type": "object",
    "properties": {"id": {"type": "string", "pattern": _ID_PATTERN}, "value": {"type": "string"}},
    "required": ["id", "value"],
    "additionalProperties": False,
}
_POST_PROPERTY = {
    "type": "object",
    "properties": {
        "id": {"type": "string", "pattern": _ID_PATTERN},
        "value": {"type": ["string", "null"]},
    },
    "required": ["id", "value"],
    "additionalProperties": False,
}
_PREDICATE = {"type": "array", "items": {"type": "array", "items": _PROPERTY}}

_DT_NODE = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"action": {"type": ["string", "null"]}},
            "required": ["action"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {"if": _PREDICATE, "then": {"$ref": "#/$defs/dt"}, "else": {"$ref": "#/$defs/dt"}},
            "required": ["if", "then", "else"],
            "additionalProperties": False,
        },
    ]
}

_BEHAVIOR = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"type": {"const": RANDOM}},
            "required": ["type"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {"type": {"const": DECISION_TREE}, "tree": {"$ref": "#/$defs/dt"}},
            "required": ["type", "tree"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "type": {"const": QLEARNING},
                "alpha": {"type": "number"},
                "gamma": {"type": "number"},
                "epsilon_start": {"type": "number"},
                "epsilon_end": {"type": "number"},
                "epsilon_decay_episodes": {"type": ["integer", "null"]},
                "invalid_action_penalty": {"type": "number"},
            },
            "required": ["type"],
            "additionalProperties": False,
        },
    ]
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "scenario",
    "type": "object",
    "$defs": {"dt": _DT_NODE},
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "name": {"type": "string"},
        "max_cycles": {"type": "integer"},
        "nodes": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"id": {"type": "string", "pattern": r"^[^.]+$"}, "properties": {"type": "array", "items": _PROPERTY}},
                "required": ["id", "properties"],
                "additionalProperties": False,
            },
        },
        "actions": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "description": {"type": "string"},
                    "agents": {"type": "array", "items": {"type": "string"}},
                    "pre": _PREDICATE,
                    "post": {"type": "array", "items": _POST_PROPERTY},
                    "success_prob": {"type": "number"},
                },
                "required": ["name", "agents", "pre", "post"],
                "additionalProperties": False,
            },
        },
        "agents": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "id": {"type": "string", "pattern": r"^[^.]+$"},
                    "team": {"enum": list(TEAMS)},
                    "node": {"type": "string"},
                    "observe": {"type": "array", "items": {"type": "string", "minLength": 1}},
                    "behavior": _BEHAVIOR,
                },
                "required": ["id", "team", "node", "observe", "behavior"],
                "additionalProperties": False,
            },
        },
        "attacker_goal": _PREDICATE,
        "metrics": {"type": "array", "items": {"type": "string"}},
        "eval": {
            "type": "object",
            "properties": {
                "weights": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
                "bias": {"type": "array", "items": {"type": "number"}},
            },
            "required": ["weights", "bias"],
            "additionalProperties": False,
        },
    },
    "required": ["format_version", "name", "max_cycles", "nodes", "actions", "agents", "attacker_goal", "metrics", "eval"],
    "additionalProperties": False,
}

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


# -- document <-> spec ----------------------------------------------------


def _props(items) -> tuple[Property, ...]:
    return tuple(Property(p["id"], p["value"]) for p in items)


def _predicate(alts) -> tuple[tuple[Property, ...], ...]:
    return tuple(_props(alt) for alt in alts)


def _dt_from_doc(doc) -> DTNode:
    if "action" in doc:
        return DTLeaf(doc["action"])
    return DTBranch(_predicate(doc["if"]), _dt_from_doc(doc["then"]), _dt_from_doc(doc["else"]))


def _behavior_from_doc(doc) -> BehaviorConfig:
    kind = doc["type"]
    if kind == DECISION_TREE:
        return BehaviorConfig(kind, tree=_dt_from_doc(doc["tree"]))
    if kind == QLEARNING:
        defaults = BehaviorConfig(QLEARNING)
        return BehaviorConfig(
            QLEARNING,
            alpha=float(doc.get("alpha", defaults.alpha)),
            gamma=float(doc.get("gamma", defaults.gamma)),
            epsilon_start=float(doc.get("epsilon_start", defaults.epsilon_start)),
            epsilon_end=float(doc.get("epsilon_end", defaults.epsilon_end)),
            epsilon_decay_episodes=doc.get("epsilon_decay_episodes"),
            invalid_action_penalty=float(doc.get("invalid_action_penalty", defaults.invalid_action_penalty)),
        )
    return BehaviorConfig(kind)


def from_document(doc: dict) -> ScenarioSpec:
    """Build a spec from an already-decoded JSON object (schema checked)."""
    errors = sorted(_VALIDATOR.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        pointer = "/" + "/".join(str(p) for p in e.absolute_path)
        raise SchemaError(f"{pointer}: {e.message}")
    return ScenarioSpec(
        name=doc["name"],
        nodes=tuple(NodeSpec(n["id"], _props(n["properties"])) for n in doc["nodes"]),
        actions=tuple(
            ActionSpec(
                name=a["name"],
                allowed_agents=tuple(a["agents"]),
                pre_alternatives=_predicate(a["pre"]),
                post=_props(a["post"]),
                success_prob=float(a.get("success_prob", 1.0)),
                description=a.get("description", ""),
            )
            for a in doc["actions"]
        ),
        agents=tuple(
            AgentSpec(g["id"], g["team"], g["node"], tuple(g["observe"]), _behavior_from_doc(g["behavior"]))
            for g in doc["agents"]
        ),
        attacker_goal=_predicate(doc["attacker_goal"]),
        max_cycles=doc["max_cycles"],
        metrics=tuple(doc["metrics"]),
        eval=_eval_from_doc(doc["eval"]),
    )


def _eval_from_doc(doc) -> EvalConfig:
    try:
        return EvalConfig(tuple(tuple(r) for r in doc["weights"]), tuple(doc["bias"]))
    except ValueError as exc:
        raise SchemaError(f"/eval: {exc}") from None


def _prop_doc(p: Property) -> dict:
    return {"id": p.id, "value": p.value}


def _dt_to_doc(node: DTNode) -> dict:
    if isinstance(node, DTLeaf):
        return {"action": node.action}
    return {
        "if": [[_prop_doc(p) for p in alt] for alt in node.condition],
        "then": _dt_to_doc(node.then),
        "else": _dt_to_doc(node.otherwise),
    }


def _behavior_to_doc(b: BehaviorConfig) -> dict:
    if b.kind == DECISION_TREE:
        return {"type": DECISION_TREE, "tree": _dt_to_doc(b.tree)}
    if b.kind == QLEARNING:
        return {
            "type": QLEARNING,
            "alpha": b.alpha,
            "gamma": b.gamma,
            "epsilon_start": b.epsilon_start,
            "epsilon_end": b.epsilon_end,
            "epsilon_decay_episodes": b.epsilon_decay_episodes,
            "invalid_action_penalty": b.invalid_action_penalty,
        }
    return {"type": b.kind}


def to_document(spec: ScenarioSpec) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "name": spec.name,
        "max_cycles": spec.max_cycles,
        "nodes": [{"id": n.id, "properties": [_prop_doc(p) for p in n.properties]} for n in spec.nodes],
        "actions": [
            {
                "name": a.name,
                "description": a.description,
                "agents": list(a.allowed_agents),
                "pre": [[_prop_doc(p) for p in alt] for alt in a.pre_alternatives],
                "post": [_prop_doc(p) for p in a.post],
                "success_prob": a.success_prob,
            }
            for a in spec.actions
        ],
        "agents": [
            {
                "id": g.id,
                "team": g.team,
                "node": g.home_node,
                "observe": list(g.observable_patterns),
                "behavior": _behavior_to_doc(g.behavior),
            }
            for g in spec.agents
        ],
        "attacker_goal": [[_prop_doc(p) for p in alt] for alt in spec.attacker_goal],
        "metrics": list(spec.metrics),
        "eval": {"weights": [list(r) for r in spec.eval.weights], "bias": list(spec.eval.bias)},
    }


def parse_scenario(document: bytes | str) -> ScenarioSpec:
    """Decode and schema-check a document without semantic validation."""
    if isinstance(document, bytes):
        try:
            document = document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"document is not UTF-8: {exc}") from None
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(str(exc)) from None
    return from_document(doc)


def load_scenario(document: bytes | str) -> ScenarioSpec:
    spec = parse_scenario(document)
    diagnostics = validate(spec)
    if any(d.severity == "error" for d in diagnostics):
        raise ValidationError(diagnostics)
    return spec


def load_scenario_file(path) -> ScenarioSpec:
    return load_scenario(Path(path).read_bytes())


def save_scenario(spec: ScenarioSpec) -> bytes:
    """Canonical form: sorted keys, declaration-order arrays, trailing newline."""
    text = json.dumps(to_document(spec), sort_keys=True, ensure_ascii=False, indent=2)
    return (text + "\n").encode("utf-8")


def save_scenario_file(spec: ScenarioSpec, path) -> None:
    Path(path).write_bytes(save_scenario(spec))


# -- validation -----------------------------------------------------------


def property_closure(spec: ScenarioSpec) -> set[tuple[str, str]]:
    """Every (id, value) pair reachable if deletions are ignored.

    Any action may fire, whoever owns it, once one of its precondition
    alternatives is contained in the accumulated set. Over-approximates
    the reachable facts.
    """
    facts = {(p.id, p.value) for n in spec.nodes for p in n.properties}
    present = {pid for pid, _ in facts}

    def holds(alt):
        return all((p.id in present) if p.value == WILDCARD else ((p.id, p.value) in facts) for p in alt)

    pending = list(spec.actions)
    changed = True
    while changed:
        changed = False
        remaining = []
        for action in pending:
            if not action.pre_alternatives or any(holds(alt) for alt in action.pre_alternatives):
                for p in action.post:
                    if p.value is not None and (p.id, p.value) not in facts:
                        facts.add((p.id, p.value))
                        present.add(p.id)
                changed = True
            else:
                remaining.append(action)
        pending = remaining
    return facts


def goal_reachable_by_closure(spec: ScenarioSpec) -> bool:
    facts = property_closure(spec)
    present = {pid for pid, _ in facts}
    if not spec.attacker_goal:
        return True
    return any(
        all((p.id in present) if p.value == WILDCARD else ((p.id, p.value) in facts) for p in alt)
        for alt in spec.attacker_goal
    )


def validate(spec: ScenarioSpec) -> list[Diagnostic]:
    """Return every problem found; never raises on bad content."""
    out: list[Diagnostic] = []

    def error(code, message, location):
        out.append(Diagnostic("error", code, message, location))

    def warning(code, message, location):
        out.append(Diagnostic("warning", code, message, location))

    if not spec.nodes:
        error("no-nodes", "scenario declares no nodes", "/nodes")
    if spec.max_cycles < 0:
        error("bad-max-cycles", f"max_cycles={spec.max_cycles} is negative", "/max_cycles")

    node_ids = set()
    for i, node in enumerate(spec.nodes):
        if node.id in node_ids:
            error("duplicate-node", f"node {node.id!r} declared twice", f"/nodes/{i}/id")
        node_ids.add(node.id)
    agent_ids = set()
    for i, agent in enumerate(spec.agents):
        if agent.id in agent_ids:
            error("duplicate-agent", f"agent {agent.id!r} declared twice", f"/agents/{i}/id")
        agent_ids.add(agent.id)
    action_names = set()
    for i, action in enumerate(spec.actions):
        if action.name in action_names:
            error("duplicate-action", f"action {action.name!r} declared twice", f"/actions/{i}/name")
        action_names.add(action.name)

    def check_ref(pid, location):
        head = node_of(pid)
        if head in node_ids:
            return
        parts = pid.split(".")
        if head == AGENT_PREFIX and len(parts) >= 2 and parts[1] in agent_ids:
            return
        error("dangling-property-ref", f"id {pid!r} names no node and no agent", location)

    seen_ids = {}
    for i, node in enumerate(spec.nodes):
        for j, p in enumerate(node.properties):
            loc = f"/nodes/{i}/properties/{j}"
            check_ref(p.id, loc + "/id")
            if p.id in seen_ids:
                error("duplicate-property", f"id {p.id!r} already set at {seen_ids[p.id]}", loc)
            else:
                seen_ids[p.id] = loc
            if p.value == WILDCARD:
                warning("wildcard-value", f"initial value of {p.id!r} is the wildcard literal", loc + "/value")

    for i, action in enumerate(spec.actions):
        base = f"/actions/{i}"
        for j, agent_id in enumerate(action.allowed_agents):
            if agent_id not in agent_ids:
                error("dangling-agent-ref", f"action {action.name!r} names unknown agent {agent_id!r}", f"{base}/agents/{j}")
        for j, alt in enumerate(action.pre_alternatives):
            for k, p in enumerate(alt):
                check_ref(p.id, f"{base}/pre/{j}/{k}/id")
        seen = set()
        for j, p in enumerate(action.post):
            check_ref(p.id, f"{base}/post/{j}/id")
            if p.id in seen:
                error("duplicate-post-id", f"action {action.name!r} writes {p.id!r} twice", f"{base}/post/{j}")
            seen.add(p.id)
            if p.value == WILDCARD:
                error("wildcard-in-post", f"action {action.name!r} writes the wildcard literal", f"{base}/post/{j}/value")
        if not 0.0 <= action.success_prob <= 1.0:
            error("bad-success-prob", f"success_prob={action.success_prob} outside [0, 1]", f"{base}/success_prob")

    for j, alt in enumerate(spec.attacker_goal):
        for k, p in enumerate(alt):
            check_ref(p.id, f"/attacker_goal/{j}/{k}/id")

    for i, agent in enumerate(spec.agents):
        base = f"/agents/{i}"
        if agent.team not in TEAMS:
            error("bad-team", f"team {agent.team!r} is not attacker/defender", f"{base}/team")
        if agent.home_node not in node_ids:
            error("dangling-node-ref", f"agent {agent.id!r} lives on unknown node {agent.home_node!r}", f"{base}/node")
        allowed = spec.action_ids(agent.id)
        if not allowed:
            error("no-actions", f"agent {agent.id!r} may play no action", base)
        b = agent.behavior
        if b.kind not in BEHAVIOR_KINDS:
            error("bad-behavior", f"unknown behavior {b.kind!r}", f"{base}/behavior/type")
        for msg in b.hyperparameter_errors():
            error("bad-hyperparameter", msg, f"{base}/behavior")
        if b.kind == DECISION_TREE:
            _check_tree(b.tree, agent, allowed, action_names, f"{base}/behavior/tree", error, check_ref)

    if len(spec.eval.weights[0]) != len(spec.metrics):
        error(
            "eval-dimension",
            f"eval rows have {len(spec.eval.weights[0])} weights for {len(spec.metrics)} metrics",
            "/eval/weights",
        )
    for i, name in enumerate(spec.metrics):
        if name not in BUILTIN_METRICS:
            error("unknown-metric", f"metric {name!r} is not built in", f"/metrics/{i}")

    if not spec.attacker_goal:
        warning("trivial-goal", "empty attacker goal is satisfied by every state", "/attacker_goal")
    elif not any(d.severity == "error" for d in out) and not goal_reachable_by_closure(spec):
        warning("goal-unreachable", "no action sequence can produce the attacker goal", "/attacker_goal")
    return out


def _check_tree(tree, agent, allowed, action_names, base, error, check_ref):
    pending = [(base, tree)]
    while pending:
        loc, node = pending.pop()
        if isinstance(node, DTLeaf):
            name = NOOP_ACTION if node.action is None else node.action
            if name not in action_names:
                error("dt-unknown-action", f"tree leaf names unknown action {name!r}", loc + "/action")
            elif name not in allowed:
                error("dt-action-not-allowed", f"agent {agent.id!r} may not play {name!r}", loc + "/action")
            continue
        for j, alt in enumerate(node.condition):
            for k, p in enumerate(alt):
                check_ref(p.id, f"{loc}/if/{j}/{k}/id")
        pending.append((loc + "/else", node.otherwise))
        pending.append((loc + "/then", node.then))


__all__ = [
    "AgentSpec",
    "Diagnostic",
    "InvalidScenario",
    "NodeSpec",
    "ParseError",
    "SchemaError",
    "ScenarioSpec",
    "ValidationError",
    "load_scenario",
    "parse_scenario",
    "save_scenario",
    "validate",
]
