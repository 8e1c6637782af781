"""Scenes, the synthetic reference-game dataset, and the validation function."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .logic import Term, evaluate

PROPERTY_TYPES = ("color", "shape", "material", "size")

COLOR_NAMES = ("red", "blue", "green", "yellow", "purple", "cyan", "brown", "gray", "orange", "pink")
SHAPE_NAMES = ("sphere", "cube", "cylinder", "cone", "torus", "pyramid", "prism", "ring", "star", "disk")
MATERIAL_NAMES = ("rubber", "metal", "glass", "wood", "plastic")
SIZE_NAMES = ("small", "medium", "large", "tiny", "huge")


class ConfigError(ValueError):
    pass


def _names(pool: Sequence[str], prefix: str, n: int) -> tuple:
    if n <= len(pool):
        return tuple(pool[:n])
    return tuple(pool) + tuple(f"{prefix}{i}" for i in range(len(pool), n))


@dataclass(frozen=True)
class DatasetConfig:
    colors: tuple = COLOR_NAMES
    shapes: tuple = SHAPE_NAMES
    materials: tuple = MATERIAL_NAMES[:3]
    sizes: tuple = SIZE_NAMES[:3]
    n_train: int = 400
    n_test: int = 100
    seed: int = 0
    min_objects: int = 1
    max_objects: int = 6
    test_known_words_only: bool = False

    @classmethod
    def from_counts(cls, colors=10, shapes=10, materials=3, sizes=3, **kwargs) -> "DatasetConfig":
        return cls(
            colors=_names(COLOR_NAMES, "color", colors),
            shapes=_names(SHAPE_NAMES, "shape", shapes),
            materials=_names(MATERIAL_NAMES, "material", materials),
            sizes=_names(SIZE_NAMES, "size", sizes),
            **kwargs,
        )

    def values_of(self) -> dict:
        """Property type -> its values, in canonical order."""
        return {"color": self.colors, "shape": self.shapes,
                "material": self.materials, "size": self.sizes}

    def value_types(self) -> dict:
        return {v: t for t, vals in self.values_of().items() for v in vals}

    def check(self) -> None:
        for ptype, vals in self.values_of().items():
            if not vals:
                raise ConfigError(f"empty {ptype} inventory")
        every = [v for vals in self.values_of().values() for v in vals]
        if len(set(every)) != len(every):
            raise ConfigError("property values must be unique across types")
        if not 1 <= self.min_objects <= self.max_objects:
            raise ConfigError("need 1 <= min_objects <= max_objects")


@dataclass(frozen=True)
class SceneObject:
    id: int
    color: str
    shape: str
    material: str
    size: str


@dataclass(frozen=True)
class Scene:
    objects: tuple

    def __post_init__(self):
        if not 1 <= len(self.objects) <= 6:
            raise ValueError(f"a scene holds 1-6 objects, got {len(self.objects)}")
        ids = [o.id for o in self.objects]
        if len(set(ids)) != len(ids):
            raise ValueError("object ids must be unique within a scene")

    def __iter__(self):
        return iter(self.objects)

    def __len__(self):
        return len(self.objects)

    def get(self, object_id: int) -> SceneObject:
        for o in self.objects:
            if o.id == object_id:
                return o
        raise KeyError(object_id)


@dataclass(frozen=True)
class ReferenceTrial:
    scene: Scene
    utterance: tuple
    referent: int

    def to_record(self) -> dict:
        return {
            "scene": [asdict(o) for o in self.scene.objects],
            "utterance": list(self.utterance),
            "referent": self.referent,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "ReferenceTrial":
        scene = Scene(tuple(SceneObject(**o) for o in rec["scene"]))
        return cls(scene, tuple(rec["utterance"]), int(rec["referent"]))


def generate_scene(rng: np.random.Generator, config: DatasetConfig = DatasetConfig()) -> Scene:
    config.check()
    n = int(rng.integers(config.min_objects, config.max_objects + 1))
    objects = []
    for i in range(n):
        objects.append(SceneObject(
            id=i,
            color=config.colors[rng.integers(len(config.colors))],
            shape=config.shapes[rng.integers(len(config.shapes))],
            material=config.materials[rng.integers(len(config.materials))],
            size=config.sizes[rng.integers(len(config.sizes))],
        ))
    return Scene(tuple(objects))


def enumerate_trials(scene: Scene, config: DatasetConfig = DatasetConfig()) -> list:
    """All "the <color> <shape>" expressions with a unique referent in ``scene``.

    Ordered by (color index, shape index) in ``config``.
    """
    counts = Counter((o.color, o.shape) for o in scene.objects)
    color_rank = {c: i for i, c in enumerate(config.colors)}
    shape_rank = {s: i for i, s in enumerate(config.shapes)}
    trials = []
    for o in scene.objects:
        if counts[(o.color, o.shape)] == 1:
            trials.append(ReferenceTrial(scene, ("the", o.color, o.shape), o.id))
    trials.sort(key=lambda tr: (color_rank.get(tr.utterance[1], len(color_rank)), tr.utterance[1],
                                shape_rank.get(tr.utterance[2], len(shape_rank)), tr.utterance[2]))
    return trials


def validate(logical_form: Term, scene: Scene) -> frozenset:
    """Ids of the objects in ``scene`` denoted by ``logical_form`` (possibly none)."""
    return evaluate(logical_form, scene.objects)


def _sample_trials(rng: np.random.Generator, config: DatasetConfig, n: int,
                   vocabulary: Optional[set] = None) -> list:
    out = []
    while len(out) < n:
        trials = enumerate_trials(generate_scene(rng, config), config)
        if not trials:
            continue
        trial = trials[int(rng.integers(len(trials)))]
        if vocabulary is not None and not set(trial.utterance) <= vocabulary:
            continue
        out.append(trial)
    return out


def generate_dataset(config: DatasetConfig = DatasetConfig(), seed: Optional[int] = None):
    """Return (train, test) lists of trials; a pure function of (config, seed).

    Train and test use independent random streams spawned from the seed.
    """
    config.check()
    seed = config.seed if seed is None else seed
    train_ss, test_ss = np.random.SeedSequence(seed).spawn(2)
    train = _sample_trials(np.random.default_rng(train_ss), config, config.n_train)
    vocab = None
    if config.test_known_words_only:
        vocab = {tok for tr in train for tok in tr.utterance}
    test = _sample_trials(np.random.default_rng(test_ss), config, config.n_test, vocab)
    return train, test


def save_dataset(path, train: Iterable[ReferenceTrial], test: Iterable[ReferenceTrial]) -> None:
    """Line-delimited JSON; each record also carries a ``split`` field."""
    with open(path, "w") as fh:
        for split, trials in (("train", train), ("test", test)):
            for tr in trials:
                rec = tr.to_record()
                rec["split"] = split
                fh.write(json.dumps(rec, sort_keys=True) + "\n")


def load_dataset(path):
    train, test = [], []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        (test if rec.get("split") == "test" else train).append(ReferenceTrial.from_record(rec))
    return train, test
