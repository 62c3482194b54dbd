"""Result Writer."""

import json
import sys
from collections.abc import Iterable
from dataclasses import dataclass
from typing import TextIO

from corallium.log import get_logger

logger = get_logger()

JSON_FORMAT = 1
"""Version of the JSON document written by `--json`."""


@dataclass(frozen=True)
class Result:
    weight: int
    text: str


def format_lines(results: Iterable[Result]) -> str:
    """One `weight<TAB>text` line per result."""
    return ''.join(f'{result.weight}\t{result.text}\n' for result in results)


def format_json(results: Iterable[Result]) -> str:
    """`{"format": 1, "results": [{"weight": .., "term": .., "rank": ..}]}` with 1-based ranks."""
    payload = {
        'format': JSON_FORMAT,
        'results': [
            {'weight': result.weight, 'term': result.text, 'rank': rank}
            for rank, result in enumerate(results, start=1)
        ],
    }
    return json.dumps(payload, ensure_ascii=False, indent=2) + '\n'


def write_output(results: Iterable[Result], *, as_json: bool = False, stream: TextIO | None = None) -> int:
    """Write every result to `stream` (default: stdout) and return how many there were.

    Line output is streamed so that long enumerations show up as they are found.

    """
    stream = stream or sys.stdout
    if as_json:
        collected = list(results)
        stream.write(format_json(collected))
        return len(collected)
    count = 0
    for result in results:
        stream.write(format_lines([result]))
        stream.flush()
        count += 1
    logger.debug('Wrote results', count=count)
    return count
