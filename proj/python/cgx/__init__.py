from ._cgx import (
    Error,
    Model,
    ParameterError,
    RuleSet,
    ShapeError,
    default_config,
    extract,
    fidelity,
    generate_xor,
    rbo,
    run_experiment,
    train_mlp,
)

__all__ = [
    "Error",
    "Model",
    "ParameterError",
    "RuleSet",
    "ShapeError",
    "default_config",
    "extract",
    "fidelity",
    "generate_xor",
    "rbo",
    "run_experiment",
    "train_mlp",
]
