"""
Resolved settings of one command run.

Precedence, highest first: explicit command-line flags, the `--config` JSON file,
environment (SETREF_SEED, SETREF_DATA_DIR, usually from .env), dataclass defaults.
A logged run_config record can be passed back through `--config` to repeat a run.
"""
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from pose_refiners.config import ModelConfig
from pose_refiners.trainer import TrainingConfig
from scene_data.generator import CorruptionConfig
from utils.errors import ConfigError

SEED_ENV = "SETREF_SEED"
DATA_DIR_ENV = "SETREF_DATA_DIR"
DEFAULT_DATA_DIR = Path(__file__).parent.parent.parent / "data"

SECTIONS = ("model", "corruption", "training")

# flag dest -> (section, field); everything else lands in `options`
FLAG_FIELDS: Dict[str, Tuple[str, str]] = {
    "mode": ("model", "mode"),
    "d": ("model", "d"),
    "sab_blocks": ("model", "sab_blocks"),
    "heads": ("model", "heads"),
    "decoder_hidden": ("model", "decoder_hidden"),
    "joints": ("model", "joints"),
    "joint_noise": ("corruption", "joint_noise_sigma"),
    "depth_noise": ("corruption", "depth_offset_sigma"),
    "truncation_prob": ("corruption", "truncation_prob"),
    "truncation_noise": ("corruption", "truncation_noise_sigma"),
    "epochs": ("training", "epochs"),
    "batch_size": ("training", "batch_size"),
    "lr": ("training", "lr"),
}


@dataclass
class RunConfig:
    command: str
    seed: int = 0
    data_dir: str = str(DEFAULT_DATA_DIR)
    options: Dict[str, Any] = field(default_factory=dict)
    model: ModelConfig = field(default_factory=ModelConfig)
    corruption: CorruptionConfig = field(default_factory=CorruptionConfig)
    training: TrainingConfig = field(default_factory=TrainingConfig)

    def option(self, name: str, default=None):
        return self.options.get(name, default)

    @property
    def data_path(self) -> Path:
        return Path(self.data_dir)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "seed": self.seed,
            "data_dir": self.data_dir,
            "options": dict(self.options),
            "model": self.model.to_dict(),
            "corruption": self.corruption.to_dict(),
            "training": self.training.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RunConfig":
        data = dict(data)
        data.pop("event", None)
        unknown = set(data) - {"command", "seed", "data_dir", "options"} - set(SECTIONS)
        if unknown:
            raise ConfigError(f"unknown run config keys: {sorted(unknown)}")
        try:
            return cls(
                command=data.get("command", ""),
                seed=int(data.get("seed", 0)),
                data_dir=str(data.get("data_dir", DEFAULT_DATA_DIR)),
                options=dict(data.get("options", {})),
                model=ModelConfig.from_dict(data.get("model", {})),
                corruption=CorruptionConfig.from_dict(data.get("corruption", {})),
                training=TrainingConfig.from_dict(data.get("training", {})),
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid run config: {e}")


def env_layer(environ: Optional[Mapping[str, str]] = None) -> dict:
    environ = os.environ if environ is None else environ
    layer = {}
    if environ.get(SEED_ENV):
        try:
            layer["seed"] = int(environ[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got '{environ[SEED_ENV]}'")
    if environ.get(DATA_DIR_ENV):
        layer["data_dir"] = environ[DATA_DIR_ENV]
    return layer


def file_layer(path) -> dict:
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: invalid config JSON: {e.msg}")
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    data.pop("event", None)
    data.pop("command", None)
    return data


def flag_layer(flags: Mapping[str, Any]) -> dict:
    layer: Dict[str, Any] = {"options": {}}
    for dest, value in flags.items():
        if dest == "seed":
            layer["seed"] = value
            layer.setdefault("training", {})["seed"] = value
        elif dest == "data_dir":
            layer[dest] = value
        elif dest in FLAG_FIELDS:
            section, key = FLAG_FIELDS[dest]
            layer.setdefault(section, {})[key] = value
        elif dest == "fold":
            k, i = value
            layer.setdefault("training", {}).update(folds=k, fold_index=i)
        else:
            layer["options"][dest] = value
    return layer


def _merge(base: dict, layer: Mapping[str, Any]) -> dict:
    merged = dict(base)
    for key, value in layer.items():
        if key in SECTIONS + ("options",) and isinstance(value, Mapping):
            merged[key] = {**merged.get(key, {}), **value}
        else:
            merged[key] = value
    return merged


def resolve_run_config(command: str, flags: Mapping[str, Any], config_path=None,
                       environ: Optional[Mapping[str, str]] = None) -> RunConfig:
    """`flags` holds only the options given explicitly on the command line."""
    resolved: dict = {"command": command}
    resolved = _merge(resolved, env_layer(environ))
    if config_path:
        resolved = _merge(resolved, file_layer(config_path))
    resolved = _merge(resolved, flag_layer(flags))
    resolved["command"] = command
    # one seed drives data, init, shuffling and the split unless the file pins them
    resolved.setdefault("training", {}).setdefault("seed", resolved.get("seed", 0))
    return RunConfig.from_dict(resolved)
