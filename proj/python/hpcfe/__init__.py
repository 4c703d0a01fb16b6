"""Multi-fidelity surrogates built from a polynomial trend plus a Gaussian-process residual."""

from ._core import (
    Cascade,
    Config,
    Model,
    NumericalError,
    ValidationError,
    buckling,
    cli,
    load_model,
    pedagogical,
    run_study,
    train,
    train_cascade,
    twin_scenario,
)

__all__ = [
    "Cascade",
    "Config",
    "Model",
    "NumericalError",
    "ValidationError",
    "buckling",
    "cli",
    "load_model",
    "pedagogical",
    "run_study",
    "train",
    "train_cascade",
    "twin_scenario",
]
