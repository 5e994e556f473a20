import json
from dataclasses import asdict, dataclass

from utils.errors import ConfigError

MODES = ("people", "scene", "none")


@dataclass
class ModelConfig:
    joints: int = 15
    d: int = 64
    sab_blocks: int = 2
    heads: int = 4
    decoder_hidden: int = 256
    mode: str = "people"

    def __post_init__(self):
        if self.joints < 2:
            raise ConfigError(f"joints must be >= 2, got {self.joints}")
        if self.sab_blocks < 1:
            raise ConfigError(f"sab_blocks must be >= 1, got {self.sab_blocks}")
        if self.heads < 1:
            raise ConfigError(f"heads must be >= 1, got {self.heads}")
        if self.d < 2 or self.d % self.heads != 0:
            raise ConfigError(f"d={self.d} must be >= 2 and divisible by heads={self.heads}")
        if self.decoder_hidden < 1:
            raise ConfigError(f"decoder_hidden must be >= 1, got {self.decoder_hidden}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got '{self.mode}'")

    @property
    def head_dim(self) -> int:
        return self.d // self.heads

    @property
    def person_width(self) -> int:
        return 3 * self.joints

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown model config keys: {sorted(unknown)}")
        return cls(**data)

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
