"""YAML experiment configuration.

Layout::

    seed: 0            # master seed (restart orderings, learner seeds, bootstrap)
    restarts: 50
    cadence: 1
    jobs: 1
    bootstrap: 10000
    modes: [base, overhypothesis]
    dataset:
      colors: 10       # counts, or explicit value lists
      shapes: 10
      materials: 3
      sizes: 3
      n_train: 400
      n_test: 100
      seed: 0
      test_known_words_only: false
    learner:
      tau: 0.2
      margin: 1.0
      ...

Every key is optional. ``CCGWL_SEED`` in the environment replaces ``seed``.
"""

from __future__ import annotations

import os
from dataclasses import fields, replace
from pathlib import Path

import yaml

from .experiment import ExperimentConfig
from .learner import LearnerConfig
from .scene import ConfigError, DatasetConfig

SEED_ENV = "CCGWL_SEED"
_INVENTORIES = ("colors", "shapes", "materials", "sizes")
_ALIASES = {"train": "n_train", "test": "n_test"}


def _known(cls, section: dict, where: str) -> dict:
    names = {f.name for f in fields(cls)}
    unknown = set(section) - names
    if unknown:
        raise ConfigError(f"unknown {where} keys: {sorted(unknown)}")
    return section


def dataset_config(section: dict) -> DatasetConfig:
    section = {_ALIASES.get(k, k): v for k, v in (section or {}).items()}
    counts = {k: section.pop(k) for k in _INVENTORIES if isinstance(section.get(k), int)}
    _known(DatasetConfig, section, "dataset")
    for k in _INVENTORIES:
        if k in section:
            section[k] = tuple(section[k])
    base = DatasetConfig.from_counts(**counts) if counts else DatasetConfig()
    cfg = replace(base, **section)
    cfg.check()
    return cfg


def learner_config(section: dict) -> LearnerConfig:
    section = dict(section or {})
    if section.get("mode") == "overhyp":
        section["mode"] = "overhypothesis"
    return LearnerConfig(**_known(LearnerConfig, section, "learner"))


def experiment_config(data: dict, env=None) -> ExperimentConfig:
    data = dict(data or {})
    env = os.environ if env is None else env
    dataset = dataset_config(data.pop("dataset", None))
    learner = learner_config(data.pop("learner", None))
    _known(ExperimentConfig, data, "top-level")
    if "modes" in data:
        data["modes"] = tuple("overhypothesis" if m == "overhyp" else m for m in data["modes"])
    if env.get(SEED_ENV, "").strip():
        try:
            data["seed"] = int(env[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env[SEED_ENV]!r}") from None
    return ExperimentConfig(dataset=dataset, learner=learner, **data)


def load_config(path, env=None) -> ExperimentConfig:
    data = yaml.safe_load(Path(path).read_text()) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping at top level")
    return experiment_config(data, env)
