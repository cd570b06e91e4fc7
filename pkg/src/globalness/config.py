"""JSON run configuration: loading, seed handling, hashing, and hypothesis assembly."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .classifiers import TrainConfig
from .errors import ConfigError
from .features import load_anchors, make_anchor_set
from .graph import DEFAULT_CAP, DirectedGraph, LabelTable, load_edges, load_labels
from .pipeline import DefinitionParams, Hypothesis
from .sampler import OT, SamplingPolicy
from .synthgen import SynthConfig

SECTIONS = ("seed", "paths", "synth", "hypothesis", "sampling", "classifier", "definition")
DATA_FILES = {"edges": "edges.tsv", "labels": "labels.tsv", "anchors": "anchors.tsv", "truth": "truth.csv"}
# keys allowed to differ between the two sides of a stability comparison
ANCHOR_KEYS = {"paths.anchors", "paths.output_dir", "hypothesis.anchor_classes", "hypothesis.scope_name"}


def _only(d: dict, cls, section: str) -> dict:
    allowed = {f.name for f in fields(cls)}
    extra = sorted(set(d) - allowed)
    if extra:
        raise ConfigError(f"unknown keys in '{section}': {extra}")
    return d


@dataclass
class RunConfig:
    raw: dict
    base_dir: Path = field(default_factory=Path.cwd)

    @property
    def seed(self) -> int:
        return int(self.raw["seed"])

    def path(self, key: str, required: bool = True) -> Path | None:
        paths = self.raw.get("paths", {})
        value = paths.get(key)
        data_dir = paths.get("data_dir") or paths.get("output_dir")
        if value is None and key in DATA_FILES and data_dir:
            value = str(Path(data_dir) / DATA_FILES[key])
        if value is None:
            if key == "data_dir":
                return self.path("output_dir", required)
            if key == "output_dir" and not required:
                return None
            if required:
                raise ConfigError(f"config is missing paths.{key}")
            return None
        p = Path(value)
        return p if p.is_absolute() else (self.base_dir / p).resolve()

    def input_path(self, key: str, required: bool = True) -> Path | None:
        p = self.path(key, required)
        if p is not None and not p.exists():
            raise ConfigError(f"{key} file not found: {p}")
        return p

    def synth(self) -> SynthConfig:
        if "synth" not in self.raw:
            raise ConfigError("config has no 'synth' section")
        block = _only(dict(self.raw["synth"]), SynthConfig, "synth")
        block.pop("rng_seed", None)
        return SynthConfig(**block, rng_seed=self.seed)

    def sampling(self, targets, other_label) -> SamplingPolicy:
        block = dict(self.raw.get("sampling", {}))
        for k in ("target_classes", "rng_seed", "other_label"):
            block.pop(k, None)
        _only(block, SamplingPolicy, "sampling")
        return SamplingPolicy(tuple(targets), **block, rng_seed=self.seed, other_label=other_label)

    def classifier(self) -> TrainConfig:
        block = _only(dict(self.raw.get("classifier", {})), TrainConfig, "classifier")
        block.pop("rng_seed", None)
        return TrainConfig(**block, rng_seed=self.seed)

    def definition(self) -> DefinitionParams:
        return DefinitionParams(**_only(dict(self.raw.get("definition", {})), DefinitionParams, "definition"))

    def load_data(self) -> tuple[DirectedGraph, LabelTable]:
        g = load_edges(self.input_path("edges"))
        mapping = self.input_path("mapping", required=False)
        labels = load_labels(self.input_path("labels"), mapping)
        return g, labels

    def hypothesis(self, g: DirectedGraph, labels: LabelTable) -> Hypothesis:
        h = dict(self.raw.get("hypothesis", {}))
        allowed = {"scope_name", "target_classes", "other_label", "anchor_classes", "cap", "surrogate"}
        extra = sorted(set(h) - allowed)
        if extra:
            raise ConfigError(f"unknown keys in 'hypothesis': {extra}")
        targets = tuple(h.get("target_classes") or ())
        if not targets:
            raise ConfigError("hypothesis.target_classes must be a non-empty list")
        other = h.get("other_label", OT)
        anchors = make_anchor_set(g, labels, load_anchors(self.input_path("anchors")), h.get("anchor_classes"))
        return Hypothesis(
            scope_name=h.get("scope_name", "+".join(targets)),
            target_classes=targets,
            anchors=anchors,
            sampling=self.sampling(targets, other),
            classifier=self.classifier(),
            other_label=other,
            cap=int(h.get("cap", DEFAULT_CAP)),
            surrogate=h.get("surrogate"),
        )

    def persisted(self) -> dict:
        """The config as it ran: seed explicit, paths absolute."""
        d = copy.deepcopy(self.raw)
        d["seed"] = self.seed
        paths = d.setdefault("paths", {})
        for key in list(paths):
            p = self.path(key, required=False)
            if p is not None:
                paths[key] = str(p.resolve())
        return d

    def config_hash(self) -> str:
        """Digest of the settings plus the bytes of every input file.

        Output location and file names do not enter the hash.
        """
        d = copy.deepcopy(self.raw)
        d["seed"] = self.seed
        d.pop("paths", None)
        inputs = {}
        for key in ("edges", "labels", "mapping", "anchors"):
            p = self.path(key, required=False)
            if p is not None and p.exists():
                inputs[key] = hashlib.sha256(p.read_bytes()).hexdigest()
        d["inputs"] = inputs
        blob = json.dumps(d, sort_keys=True, separators=(",", ":")).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


def load_config(path: str | Path, seed: int | None = None) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    unknown = sorted(set(raw) - set(SECTIONS))
    if unknown:
        raise ConfigError(f"{path}: unknown sections {unknown}")
    if seed is not None:
        raw["seed"] = seed
    if "seed" not in raw:
        raise ConfigError(f"{path}: no seed given (set 'seed' or pass --seed)")
    return RunConfig(raw, path.parent.resolve())


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def differing_keys(a: RunConfig, b: RunConfig, ignore=ANCHOR_KEYS) -> list[str]:
    fa, fb = _flatten(a.raw), _flatten(b.raw)
    # relative paths are compared after resolution against each config's folder
    for cfg, flat in ((a, fa), (b, fb)):
        for key in list(flat):
            if key.startswith("paths.") and flat[key] is not None:
                flat[key] = str(cfg.path(key.split(".", 1)[1]).resolve())
    keys = sorted(set(fa) | set(fb))
    return [k for k in keys if k not in ignore and fa.get(k) != fb.get(k)]
