import io
import json

from egen_grammars._write_output import JSON_FORMAT, Result, format_json, format_lines, write_output

RESULTS = [Result(0, 'v04'), Result(1, 'v02*v02'), Result(1, 'ẍ')]


def test_format_lines() -> None:
    assert format_lines(RESULTS) == '0\tv04\n1\tv02*v02\n1\tẍ\n'
    assert format_lines([]) == ''


def test_format_json() -> None:
    text = format_json(RESULTS)

    assert 'ẍ' in text
    assert json.loads(text) == {
        'format': JSON_FORMAT,
        'results': [
            {'weight': 0, 'term': 'v04', 'rank': 1},
            {'weight': 1, 'term': 'v02*v02', 'rank': 2},
            {'weight': 1, 'term': 'ẍ', 'rank': 3},
        ],
    }


def test_write_output() -> None:
    lines, document = io.StringIO(), io.StringIO()

    assert write_output(iter(RESULTS), stream=lines) == 3
    assert write_output(iter(RESULTS), as_json=True, stream=document) == 3
    assert lines.getvalue() == format_lines(RESULTS)
    assert json.loads(document.getvalue())['results'][2]['rank'] == 3
    assert write_output(iter([]), stream=io.StringIO()) == 0
