import json
import logging
import re
from pathlib import Path

import pytest
from pytestshellutils.shell import Subprocess

from egen_grammars import main
from egen_grammars.carriers import builtin_carrier, class_grammar
from egen_grammars.grammars import format_grammar, parse_grammar
from egen_grammars.main import EXIT_EMPTY, EXIT_ERROR, EXIT_OK, EXIT_USAGE, log_level, run

from .configuration import TEST_DATA_DIR
from .helpers import run_egen

SCREEN = str(TEST_DATA_DIR / 'editor_screen.txt')


def _data(name: str) -> str:
    return str(TEST_DATA_DIR / name)


def _results(text: str) -> list[str]:
    """Result lines, without any interleaved log output."""
    return [line for line in text.splitlines() if re.match(r'\d+\t', line)]


def test_editor(capsys: pytest.CaptureFixture[str]) -> None:
    code = run(['editor', SCREEN, '--move', 'k2:b2', '--limit', '1'])

    assert code == EXIT_OK
    assert _results(capsys.readouterr().out) == ['2\tl(B(x))']


@pytest.mark.usefixtures('quiet_logger')
def test_antiunify_json(capsys: pytest.CaptureFixture[str]) -> None:
    code = run(['antiunify', '--builtin', 'peano', '--carrier', '4', '--limit', '3', '--json', '0', '4'])

    assert code == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload['format'] == 1
    assert payload['results'][0] == {'weight': 0, 'term': 'v04', 'rank': 1}
    assert [result['rank'] for result in payload['results']] == [1, 2, 3]


def test_classgrammar(capsys: pytest.CaptureFixture[str]) -> None:
    code = run(['classgrammar', '--builtin', 'peano', '--carrier', '2', '--no-absorb'])

    lines = capsys.readouterr().out.splitlines()
    assert code == EXIT_OK
    assert 'sig 0/0 ctor, s/1 ctor, +/2, */2' in lines
    assert any(line.startswith('N2 ::= ') for line in lines)


@pytest.mark.usefixtures('quiet_logger')
def test_learn_atom(capsys: pytest.CaptureFixture[str]) -> None:
    args = ['learn-atom', '--builtin', 'peano', '--carrier', '1', _data('leq.examples')]

    code = run([*args, '--cutoff', '2', '--limit', '3', '--json'])

    assert code == EXIT_OK
    results = json.loads(capsys.readouterr().out)['results']
    assert results
    assert all(result['term'].startswith('le(') for result in results)


def test_learn_atom_budget(capsys: pytest.CaptureFixture[str]) -> None:
    code = run(['learn-atom', '--builtin', 'peano', '--carrier', '1', _data('leq.examples')])

    assert code == EXIT_ERROR
    assert 'error[budget]: Removing negative examples needs' in capsys.readouterr().err


def test_lgg_smallest(capsys: pytest.CaptureFixture[str]) -> None:
    code = run(['lgg', '--theory', _data('family.theory'), _data('daughter.clauses'), '--smallest'])

    results = _results(capsys.readouterr().out)
    assert code == EXIT_OK
    assert len(results) == 1
    assert '\td(' in results[0]
    assert ' <- ' in results[0]


def test_lgg_without_a_theory(capsys: pytest.CaptureFixture[str], fix_test_cache: Path) -> None:
    clauses = fix_test_cache / 'plotkin.clauses'
    clauses.write_text('p(a,b)\np(a,c)\n', encoding='utf-8')

    code = run(['lgg', str(clauses), '--smallest'])

    assert code == EXIT_OK
    assert [line.split('\t')[1][:2] for line in _results(capsys.readouterr().out)] == ['p(']


def test_lgg_ce(capsys: pytest.CaptureFixture[str]) -> None:
    code = run(['lgg-ce', '--builtin', 'lists', '--ops', 'ap', _data('append.clauses'), '--limit', '3'])

    results = _results(capsys.readouterr().out)
    assert code == EXIT_OK
    assert len(results) == 3
    assert all('\tp0(' in line and ' <- q(' in line for line in results)


def test_lemma(capsys: pytest.CaptureFixture[str]) -> None:
    code = run(['lemma', _data('lemma.toml'), '--limit', '2'])

    assert code == EXIT_OK
    assert _results(capsys.readouterr().out)[0] == '1\tx*y'


def test_series(capsys: pytest.CaptureFixture[str]) -> None:
    code = run(['series', '--builtin', 'peano', '--carrier', '12', '--k', '3', '0,1,4,9', '--limit', '5'])

    assert code == EXIT_OK
    assert '1\tv_p*v_p' in _results(capsys.readouterr().out)


def test_series_without_a_law(capsys: pytest.CaptureFixture[str]) -> None:
    code = run(['series', '--builtin', 'peano', '--carrier', '12', '--ops', '+', '0;1,4,9'])

    assert code == EXIT_EMPTY
    assert 'no results' in capsys.readouterr().err


def test_grammar_enumerate(capsys: pytest.CaptureFixture[str]) -> None:
    code = run(['grammar-op', 'enumerate', _data('even.tg'), '--roots', 'E', '--max-weight', '5'])

    assert code == EXIT_OK
    assert _results(capsys.readouterr().out) == ['1\t0', '3\ts(s(0))', '5\ts(s(s(s(0))))']


@pytest.mark.parametrize(
    ('args', 'expected'),
    [
        (['intersect', _data('small.tg'), _data('even.tg'), '--roots', 'S,E'], EXIT_OK),
        (['difference', _data('small.tg'), _data('even.tg'), '--roots', 'S,E'], EXIT_OK),
        (['difference', _data('even.tg'), _data('even.tg'), '--roots', 'E,E'], EXIT_EMPTY),
        (['simplify', _data('even.tg')], EXIT_OK),
        (['determinize', _data('small.tg')], EXIT_OK),
        (['intersect', _data('small.tg'), '--roots', 'S'], EXIT_ERROR),
        (['enumerate', _data('even.tg')], EXIT_ERROR),
    ],
    ids=[
        'Check intersect',
        'Check difference',
        'Check an empty difference',
        'Check simplify',
        'Check determinize',
        'Check a missing grammar',
        'Check a missing root',
    ],
)
def test_grammar_op(capsys: pytest.CaptureFixture[str], args: list[str], expected: int) -> None:
    code = run(['grammar-op', *args])

    assert code == expected
    if expected == EXIT_ERROR:
        assert 'error[parse]: ' in capsys.readouterr().err


@pytest.mark.parametrize(
    'argv',
    [
        ['editor', SCREEN],
        ['editor', SCREEN, '--move', 'k2-b2'],
        ['series', '--builtin', 'reals', '0;1'],
        ['lemma', _data('missing.toml')],
        [],
    ],
    ids=[
        'Check a missing move',
        'Check a bad move',
        'Check an unknown builtin',
        'Check a missing file',
        'Check no command',
    ],
)
def test_usage_errors(argv: list[str]) -> None:
    assert run(argv) == EXIT_USAGE


def test_missing_theory(capsys: pytest.CaptureFixture[str]) -> None:
    code = run(['classgrammar'])

    assert code == EXIT_ERROR
    assert 'error[parse]: Pass `--theory FILE` or `--builtin NAME`' in capsys.readouterr().err


def test_version() -> None:
    assert run(['--version']) == EXIT_OK


def test_config_limits(capsys: pytest.CaptureFixture[str], fix_test_cache: Path) -> None:
    (fix_test_cache / 'egen.toml').write_text('[limits]\nmax_count = 2\n', encoding='utf-8')

    code = run(['editor', SCREEN, '--move', 'k2:b2'], base_dir=fix_test_cache)

    assert code == EXIT_OK
    assert len(_results(capsys.readouterr().out)) == 2


def test_config_errors(capsys: pytest.CaptureFixture[str], fix_test_cache: Path) -> None:
    (fix_test_cache / 'egen.toml').write_text('[output]\nmax_count = 2\n', encoding='utf-8')

    code = run(['editor', SCREEN, '--move', 'k2:b2'], base_dir=fix_test_cache)

    assert code == EXIT_USAGE
    assert "error[config]: Unknown section '[output]'" in capsys.readouterr().err


def test_cli(shell: Subprocess) -> None:
    ret = run_egen(shell, 'editor', 'editor_screen.txt', '--move', 'm2:o2', '--move', 'n4:v4', '--limit', '1')

    assert ret.returncode == 0, ret.stderr
    ret.stdout.matcher.fnmatch_lines(['3\td(W(u(x)))'])


def test_cli_reports_errors(shell: Subprocess) -> None:
    ret = run_egen(shell, 'antiunify', '--builtin', 'peano', 's(0')

    assert ret.returncode == EXIT_ERROR
    ret.stderr.matcher.fnmatch_lines(['*error[[]parse[]]: Could not parse*'])


@pytest.mark.parametrize(
    ('argv', 'expected'),
    [
        (['antiunify', '0', '4'], logging.INFO),
        (['antiunify', '--json', '0', '4'], logging.WARNING),
        (['antiunify', '--json', '--verbose', '0', '4'], logging.DEBUG),
    ],
    ids=['Check the default level', 'Check that JSON output is quiet', 'Check that verbose wins'],
)
def test_log_level(argv: list[str], expected: int) -> None:
    assert log_level(argv) == expected


def test_run_leaves_the_logger_alone(monkeypatch: pytest.MonkeyPatch) -> None:
    calls: list[dict] = []
    monkeypatch.setattr(main, 'configure_logger', lambda **kwargs: calls.append(kwargs))

    code = run(['antiunify', '--builtin', 'peano', '--carrier', '4', '--limit', '1', '--verbose', '0', '4'])

    assert code == EXIT_OK
    assert calls == []


def test_cli_json(shell: Subprocess) -> None:
    ret = run_egen(shell, 'antiunify', '--builtin', 'peano', '--carrier', '4', '--limit', '2', '--json', '0', '4')

    assert ret.returncode == EXIT_OK, ret.stderr
    assert [result['rank'] for result in json.loads(str(ret.stdout))['results']] == [1, 2]


@pytest.mark.usefixtures('quiet_logger')
def test_classgrammar_round_trip(capsys: pytest.CaptureFixture[str]) -> None:
    code = run(['classgrammar', '--builtin', 'peano', '--carrier', '3'])

    out = capsys.readouterr().out
    grammar, _ = class_grammar(builtin_carrier('peano', carrier=3))
    assert code == EXIT_OK
    assert dict(parse_grammar(out).rules) == dict(grammar.rules)
    assert format_grammar(parse_grammar(out)) == out


def test_cli_is_deterministic(shell: Subprocess) -> None:
    args = ['lgg', 'daughter.clauses', '--theory', 'family.theory', '--smallest']

    first, second = run_egen(shell, *args), run_egen(shell, *args)

    assert first.returncode == EXIT_OK, first.stderr
    assert _results(str(first.stdout)) == _results(str(second.stdout))
    assert _results(str(first.stdout))
