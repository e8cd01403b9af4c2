"""Model and optimiser hyper-parameters, read from and written to INI files."""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path

SECTIONS = {
    "architecture": (
        "cnn_window_size",
        "cnn_number_of_filters",
        "bilstm_encoder_layers",
        "bilstm_encoder_size",
        "lstm_decoder_layers",
        "lstm_decoder_size",
        "lstm_layers_dropout",
        "word_embedding_dimension",
        "pos_embedding_dimension",
        "char_embedding_dimension",
        "lemma_embedding_dimension",
        "external_embedding_dimension",
        "embeddings_dropout",
        "arc_mlp_size",
        "label_mlp_size",
        "unk_replacement_probability",
    ),
    "optimizer": (
        "initial_learning_rate",
        "beta1",
        "beta2",
        "epsilon",
        "batch_size",
        "decay_rate",
        "decay_patience",
        "gradient_clipping",
    ),
    "training": ("epochs", "beam_size", "seed"),
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    """Defaults are the desk-scale setting; ``full.ini`` holds the full-scale sizes."""

    cnn_window_size: int = 3
    cnn_number_of_filters: int = 16
    bilstm_encoder_layers: int = 1
    bilstm_encoder_size: int = 32
    lstm_decoder_layers: int = 1
    lstm_decoder_size: int = 32
    lstm_layers_dropout: float = 0.0
    word_embedding_dimension: int = 16
    pos_embedding_dimension: int = 16
    char_embedding_dimension: int = 8
    lemma_embedding_dimension: int = 16
    # 0 disables the external (e.g. contextual) vectors
    external_embedding_dimension: int = 0
    embeddings_dropout: float = 0.0
    arc_mlp_size: int = 32
    label_mlp_size: int = 16
    unk_replacement_probability: float = 0.0
    initial_learning_rate: float = 0.005
    beta1: float = 0.9
    beta2: float = 0.9
    epsilon: float = 1e-8
    batch_size: int = 4
    decay_rate: float = 0.75
    decay_patience: int = 10
    gradient_clipping: float = 5.0
    epochs: int = 200
    beam_size: int = 5
    seed: int = 1

    def __post_init__(self):
        positive = (
            "cnn_window_size",
            "bilstm_encoder_layers",
            "bilstm_encoder_size",
            "lstm_decoder_layers",
            "lstm_decoder_size",
            "word_embedding_dimension",
            "pos_embedding_dimension",
            "arc_mlp_size",
            "label_mlp_size",
            "batch_size",
            "beam_size",
        )
        for name in positive:
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        for name in (
            "char_embedding_dimension",
            "lemma_embedding_dimension",
            "external_embedding_dimension",
            "cnn_number_of_filters",
            "epochs",
            "decay_patience",
        ):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.char_embedding_dimension and not self.cnn_number_of_filters:
            raise ConfigError("character embeddings need at least one CNN filter")
        for name in (
            "lstm_layers_dropout",
            "embeddings_dropout",
            "unk_replacement_probability",
            "beta1",
            "beta2",
            "decay_rate",
        ):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.initial_learning_rate < 0 or self.gradient_clipping <= 0 or self.epsilon <= 0:
            raise ConfigError("learning rate must be >= 0, clipping and epsilon > 0")

    @property
    def use_chars(self) -> bool:
        return self.char_embedding_dimension > 0

    @property
    def input_dim(self) -> int:
        return (
            (self.cnn_number_of_filters if self.use_chars else 0)
            + self.word_embedding_dimension
            + self.lemma_embedding_dimension
            + self.pos_embedding_dimension
            + self.external_embedding_dimension
        )

    @property
    def encoder_dim(self) -> int:
        return 2 * self.bilstm_encoder_size

    def replace(self, **changes) -> "ModelConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, values: dict) -> "ModelConfig":
        known = {f.name: f for f in fields(cls)}
        unknown = set(values) - set(known)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        typed = {}
        for key, raw in values.items():
            kind = int if known[key].type in ("int", int) else float
            try:
                typed[key] = kind(raw)
            except ValueError:
                raise ConfigError(f"{key}: cannot parse {raw!r}") from None
        return cls(**typed)

    def to_ini(self) -> str:
        parser = configparser.ConfigParser()
        values = self.to_dict()
        for section, keys in SECTIONS.items():
            parser[section] = {k: repr(values[k]) for k in keys}
        lines = []
        for section in parser.sections():
            lines.append(f"[{section}]")
            lines.extend(f"{k} = {v}" for k, v in parser[section].items())
            lines.append("")
        return "\n".join(lines)


def load_config(path: str | Path) -> ModelConfig:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    values = {}
    for section in parser.sections():
        values.update(parser[section])
    return ModelConfig.from_dict(values)


def builtin_config(name: str) -> ModelConfig:
    """``desk`` or ``full``, as shipped with the package."""
    text = resources.files("pointer_sdp.configs").joinpath(f"{name}.ini").read_text()
    parser = configparser.ConfigParser()
    parser.read_string(text)
    values = {}
    for section in parser.sections():
        values.update(parser[section])
    return ModelConfig.from_dict(values)
