from .behaviors import (
    DecisionTreeBehavior,
    PassBehavior,
    QLearningBehavior,
    RandomBehavior,
    build_behaviors,
    choose_action,
    epsilon_greedy,
    evaluate_tree,
    make_behavior,
)
from .config import BehaviorConfig, DTBranch, DTLeaf
from .qlearning import EMPTY_OBSERVATION_KEY, QTable, dump_tables, encode_observation, load_tables, q_update

_TRAINING = ("Phase", "TrainingResult", "parse_phases", "train_curriculum")


def __getattr__(name):
    # training pulls in the environment, which imports the scenario module,
    # which imports .config from this package: load it on first use.
    if name in _TRAINING:
        from . import training

        return getattr(training, name)
    raise AttributeError(name)


__all__ = [
    "BehaviorConfig",
    "DTBranch",
    "DTLeaf",
    "DecisionTreeBehavior",
    "EMPTY_OBSERVATION_KEY",
    "PassBehavior",
    "Phase",
    "QLearningBehavior",
    "QTable",
    "RandomBehavior",
    "TrainingResult",
    "build_behaviors",
    "choose_action",
    "dump_tables",
    "encode_observation",
    "epsilon_greedy",
    "evaluate_tree",
    "load_tables",
    "make_behavior",
    "parse_phases",
    "q_update",
    "train_curriculum",
]
