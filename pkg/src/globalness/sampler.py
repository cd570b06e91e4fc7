"""Polarized training-set selection: very local in-scope nodes vs. far-away outsiders."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, SamplingError
from .features import FeatureMatrix
from .graph import LabelTable
from .seeding import substream

OT = "OT"
LOCAL_RULE = "local"
GLOBAL_RULE = "global"


@dataclass(frozen=True)
class SamplingPolicy:
    target_classes: tuple[str, ...]
    local_threshold: int = 1
    global_threshold: int = 3
    max_per_class: int | None = None
    rng_seed: int = 0
    other_label: str = OT

    def __post_init__(self):
        object.__setattr__(self, "target_classes", tuple(self.target_classes))
        if not self.target_classes:
            raise ConfigError("sampling policy needs at least one target class")
        if self.local_threshold < 0 or self.global_threshold < 0:
            raise ConfigError("thresholds must be >= 0")
        if self.global_threshold <= self.local_threshold:
            raise ConfigError(
                f"global_threshold ({self.global_threshold}) must exceed local_threshold ({self.local_threshold})"
            )
        if self.max_per_class is not None and self.max_per_class < 1:
            raise ConfigError("max_per_class must be >= 1")
        if self.other_label in self.target_classes:
            raise ConfigError(f"other label {self.other_label!r} collides with a target class")


@dataclass(frozen=True)
class TrainingSet:
    node_ids: tuple[str, ...]
    X: np.ndarray
    y: tuple[str, ...]
    rule: tuple[str, ...]
    classes: tuple[str, ...]
    columns: tuple[str, ...] = field(default=())

    def __len__(self):
        return len(self.node_ids)

    def counts(self) -> dict[str, int]:
        out = dict.fromkeys(self.classes, 0)
        for lab in self.y:
            out[lab] += 1
        return out


def local_mask(mhop: np.ndarray, in_scope: np.ndarray, threshold: int) -> np.ndarray:
    return in_scope & (mhop <= threshold)


def global_mask(mhop: np.ndarray, out_of_scope: np.ndarray, threshold: int) -> np.ndarray:
    return out_of_scope & (mhop >= threshold)


def select_biased(features: FeatureMatrix, labels: LabelTable, policy: SamplingPolicy) -> TrainingSet:
    """Keep in-scope nodes with ``mhop <= local_threshold`` under their own label and
    out-of-scope nodes with ``mhop >= global_threshold`` relabelled as the other class.

    Unlabeled and excluded nodes are never selected. Nodes between the thresholds
    are left out of training.
    """
    unknown = [c for c in policy.target_classes if c not in labels.class_names]
    if unknown:
        raise ConfigError(f"target classes not in label table: {unknown}")
    names = [labels.label_of(n) for n in features.node_ids]
    labeled = np.array([n is not None for n in names])
    targets = set(policy.target_classes)
    in_scope = np.array([n in targets for n in names]) & labeled
    out_scope = labeled & ~in_scope

    loc = local_mask(features.mhop, in_scope, policy.local_threshold)
    glo = global_mask(features.mhop, out_scope, policy.global_threshold)
    if not loc.any():
        raise SamplingError(
            f"local partition is empty (no target-class node with mhop <= {policy.local_threshold})"
        )
    if not glo.any():
        raise SamplingError(
            f"{policy.other_label} partition is empty (no out-of-scope node with mhop >= {policy.global_threshold})"
        )

    assigned = np.array([n if n is not None else "" for n in names], dtype=object)
    assigned[glo] = policy.other_label
    keep = loc | glo

    if policy.max_per_class is not None:
        rng = substream(policy.rng_seed, "sampling")
        # fixed class order so the RNG draws do not depend on dict iteration
        for cls in [c for c in labels.class_names if c in targets] + [policy.other_label]:
            rows = np.flatnonzero(keep & (assigned == cls))
            if len(rows) > policy.max_per_class:
                drop = np.setdiff1d(rows, rng.choice(rows, size=policy.max_per_class, replace=False))
                keep[drop] = False

    rows = np.flatnonzero(keep)
    classes = tuple(c for c in labels.class_names if c in targets) + (policy.other_label,)
    return TrainingSet(
        node_ids=tuple(features.node_ids[i] for i in rows),
        X=features.X[rows],
        y=tuple(str(assigned[i]) for i in rows),
        rule=tuple(LOCAL_RULE if loc[i] else GLOBAL_RULE for i in rows),
        classes=classes,
        columns=features.columns,
    )
