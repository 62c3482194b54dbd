from contextlib import nullcontext as does_not_raise
from pathlib import Path

import pytest

from egen_grammars._config import CONFIG_FILE_NAME, Settings, _validate_config, load_config, settings_from_dict


@pytest.mark.parametrize(
    ('config', 'expectation'),
    [
        (
            {'output': {'max_count': 3}},
            pytest.raises(RuntimeError, match=r"Unknown section '\[output\]'"),
        ),
        (
            {'limits': {'max_depth': 3}},
            pytest.raises(RuntimeError, match=r"Unknown keys in \[limits\]: \['max_depth'\]"),
        ),
        (
            {'limits': {'max_count': -1}},
            pytest.raises(RuntimeError, match='Expected a nonnegative integer for limits.max_count'),
        ),
        (
            {'weights': {'variable_weight': True}},
            pytest.raises(RuntimeError, match='Expected a nonnegative integer for weights.variable_weight'),
        ),
        (
            {},
            does_not_raise(),
        ),
        (
            {'limits': {'max_count': 3, 'substitution_budget': 10}, 'weights': {'variable_weight': 1}},
            does_not_raise(),
        ),
    ],
    ids=[
        'Check an unknown section',
        'Check an unknown key',
        'Check a negative limit',
        'Check a boolean weight',
        'Check an empty config',
        'Check a normal config',
    ],
)
def test_validate_config(config: dict, expectation) -> None:  # type: ignore[type-arg]
    with expectation:
        _validate_config(config)


def test_settings_from_dict() -> None:
    settings = settings_from_dict({'limits': {'max_count': 3, 'max_states': 50}, 'weights': {'variable_weight': 1}})

    assert settings == Settings(max_count=3, max_states=50, variable_weight=1)
    assert settings.override(max_count=None, max_weight=4) == Settings(
        max_count=3,
        max_weight=4,
        max_states=50,
        variable_weight=1,
    )


def test_load_config(fix_test_cache: Path) -> None:
    assert load_config(fix_test_cache) == Settings()

    (fix_test_cache / CONFIG_FILE_NAME).write_text('[limits]\nrewrite_steps = 5\n', encoding='utf-8')

    assert load_config(fix_test_cache).rewrite_steps == 5
