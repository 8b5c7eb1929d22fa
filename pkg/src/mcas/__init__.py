"""Turn-based simulation of cyber-attacker and cyber-defender agents."""

from .core import (
    ABSENT,
    ATTACKER,
    DEFENDER,
    NOOP_ACTION,
    WILDCARD,
    ActionSpec,
    EnvState,
    MCASError,
    PreconditionUnsatisfied,
    Property,
    apply_action,
    precondition_satisfied,
)
from .environment import Environment, EpisodeLog, Observation, StepOutcome, TerminationStatus, observe, run_episode
from .metrics import EvalConfig, MetricVector, RewardPair, compute_metrics, eval_rewards
from .scenario import (
    AgentSpec,
    Diagnostic,
    NodeSpec,
    ParseError,
    ScenarioSpec,
    SchemaError,
    ValidationError,
    load_scenario,
    save_scenario,
    validate,
)
from .search import shortest_goal_path

__version__ = "0.1.0"

__all__ = [
    "ABSENT",
    "ATTACKER",
    "ActionSpec",
    "AgentSpec",
    "DEFENDER",
    "Diagnostic",
    "EnvState",
    "Environment",
    "EpisodeLog",
    "EvalConfig",
    "MCASError",
    "MetricVector",
    "NOOP_ACTION",
    "NodeSpec",
    "Observation",
    "ParseError",
    "PreconditionUnsatisfied",
    "Property",
    "RewardPair",
    "ScenarioSpec",
    "SchemaError",
    "StepOutcome",
    "TerminationStatus",
    "ValidationError",
    "WILDCARD",
    "apply_action",
    "compute_metrics",
    "eval_rewards",
    "load_scenario",
    "observe",
    "precondition_satisfied",
    "run_episode",
    "save_scenario",
    "shortest_goal_path",
    "validate",
]
