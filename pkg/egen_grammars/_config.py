"""Limits and weights, optionally read from `egen.toml`."""

from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any

from corallium.log import get_logger
from corallium.tomllib import tomllib
from typing_extensions import Self

logger = get_logger()

CONFIG_FILE_NAME = 'egen.toml'

_SECTIONS = {
    'limits': {'max_count', 'max_weight', 'substitution_budget', 'max_states', 'rewrite_steps'},
    'weights': {'symbol_weight', 'variable_weight'},
}


@dataclass(frozen=True)
class Settings:
    """Resolved limits shared by the library entry points and the CLI."""

    max_count: int = 20
    max_weight: int | None = None
    substitution_budget: int = 4096
    """Cap on the substitution set used to subtract negative examples."""
    max_states: int = 20_000
    """Cap on the subset states built by `difference`."""
    rewrite_steps: int = 10_000
    symbol_weight: int = 1
    variable_weight: int = 0

    def override(self, **kwargs: Any) -> Self:
        """Replace the values that are not None."""
        return replace(self, **{key: value for key, value in kwargs.items() if value is not None})


def _validate_config(config: dict) -> None:  # type: ignore[type-arg]
    for section, values in config.items():
        if section not in _SECTIONS:
            msg = f"Unknown section '[{section}]'. Expected one of: {sorted(_SECTIONS)}"
            raise RuntimeError(msg)
        if unknown := set(values) - _SECTIONS[section]:
            msg = f'Unknown keys in [{section}]: {sorted(unknown)}'
            raise RuntimeError(msg)
    for section, values in config.items():
        for key, value in values.items():
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                msg = f'Expected a nonnegative integer for {section}.{key}. Received: {value!r}'
                raise RuntimeError(msg)


def settings_from_dict(config: dict) -> Settings:  # type: ignore[type-arg]
    """Flatten the validated sections into `Settings`."""
    _validate_config(config)
    names = {field.name for field in fields(Settings)}
    flat = {key: value for values in config.values() for key, value in values.items() if key in names}
    return Settings(**flat)


def load_config(base_dir: Path | None = None) -> Settings:
    """Read `egen.toml` from `base_dir` (or `CWD`) when present."""
    cfg_path = (base_dir or Path.cwd()) / CONFIG_FILE_NAME
    if not cfg_path.is_file():
        return Settings()
    config: dict = tomllib.loads(cfg_path.read_text(encoding='utf-8'))  # type: ignore[type-arg]
    logger.debug('Loaded configuration', path=cfg_path)
    return settings_from_dict(config)
