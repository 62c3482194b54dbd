"""Pytest configuration."""

import logging
from collections.abc import Iterator
from pathlib import Path

import pytest
from corallium.log import configure_logger
from corallium.loggers.plain_printer import plain_printer

from egen_grammars.grammars import TreeGrammar, parse_grammar

from .configuration import TEST_TMP_CACHE, ZERO_ONE_GRAMMAR, clear_test_cache


@pytest.fixture
def fix_test_cache() -> Path:
    """Fixture to clear and return the test cache directory for use.

    Returns:
        Path: Path to the test cache directory

    """
    clear_test_cache()
    return TEST_TMP_CACHE


@pytest.fixture
def zero_one_grammar() -> TreeGrammar:
    """Grammar with `N0` for terms equal to 0, `N1` for terms equal to 1, and `Nt` for every term."""
    return parse_grammar(ZERO_ONE_GRAMMAR.read_text(encoding='utf-8'))


@pytest.fixture
def quiet_logger() -> Iterator[None]:
    """Log warnings only, as `egen --json` does, so that stdout holds just the JSON document."""
    configure_logger(log_level=logging.WARNING, logger=plain_printer)
    yield
    configure_logger(log_level=logging.INFO, logger=plain_printer)
