# SPDX-License-Identifier: Apache-2.0
"""Semantic self-verification for multiple-choice logical reasoning."""

import json

from ._core import (
    ConfigError,
    DatasetError,
    DslError,
    FormatError,
    IoError,
    LabelError,
    LlmError,
    OracleError,
    Program,
    SolverError,
    SsvError,
    count_models,
    execute,
    format_percent,
    normalize_label,
    verify,
    well_formed,
)
from . import _core

__all__ = [
    "ConfigError",
    "DatasetError",
    "DslError",
    "FormatError",
    "IoError",
    "LabelError",
    "LlmError",
    "OracleError",
    "Program",
    "SolverError",
    "SsvError",
    "count_models",
    "default_config",
    "evaluate_dataset",
    "execute",
    "format_percent",
    "metrics",
    "normalize_label",
    "run_task",
    "verify",
    "well_formed",
]


def default_config():
    return json.loads(_core.default_config())


def metrics(total, correct, verified, verified_correct):
    return json.loads(_core.metrics(total, correct, verified, verified_correct))


def run_task(task, config_path):
    """`task` is a dataset line, either as a dict or a JSON string."""
    if not isinstance(task, str):
        task = json.dumps(task)
    return json.loads(_core.run_task(task, str(config_path)))


def evaluate_dataset(dataset_path, config_path):
    return json.loads(_core.evaluate_dataset(str(dataset_path), str(config_path)))
