import pytest

from egen_grammars._errors import ParseError, TheoryError
from egen_grammars._parser import parse_term
from egen_grammars.carriers import builtin_carrier, class_grammar
from egen_grammars.grammars import TreeGrammar, membership
from egen_grammars.learn import learn_atom_determinate
from egen_grammars.series import (
    PLACE,
    SeriesTask,
    law_grammar,
    parse_series,
    replay,
    series_law,
    slot_bindings,
    slot_variable,
)
from egen_grammars.terms import App, Term, Var, const, peano


def _numbers() -> tuple[TreeGrammar, list[str]]:
    return class_grammar(builtin_carrier('peano', carrier=12, ops=['+', '*']))


def _law(text: str) -> Term:
    return parse_term(text)


def _cons(head: Term, tail: Term) -> App:
    return App('cons', (head, tail))


def test_parse_series() -> None:
    task = parse_series('0;1,4,9')

    assert task.series == (peano(0), peano(1), peano(4), peano(9))
    assert task.k == 3
    assert task.depth == 1
    assert parse_series('0,1,4,9', k=2).k == 2


@pytest.mark.parametrize(
    ('text', 'k', 'match'),
    [
        (' ; ', None, 'comma separated'),
        ('0,1,4,9', None, 'Mark the elements'),
        ('0,1,4,(', 1, 'Could not parse'),
    ],
    ids=['Check an empty series', 'Check a missing k', 'Check a bad element'],
)
def test_parse_series_errors(text: str, k: int | None, match: str) -> None:
    with pytest.raises(ParseError, match=match):
        parse_series(text, k=k)


@pytest.mark.parametrize('k', [0, 4])
def test_series_task_bounds_k(k: int) -> None:
    with pytest.raises(ValueError, match='Expected 1 <= k < 4'):
        SeriesTask((peano(0), peano(1), peano(4), peano(9)), k)


def test_examples() -> None:
    task = parse_series('0;1,4,9')

    assert task.encode(0) == _cons(peano(0), const('nil'))
    assert task.encode(2) == _cons(peano(2), _cons(peano(1), _cons(peano(0), const('nil'))))
    assert [atom.symbol for atom in task.examples()] == ['p'] * 3
    assert [atom.args[0] for atom in task.examples()] == [task.encode(1), task.encode(2), task.encode(3)]
    assert [atom.args[1] for atom in task.examples()] == [peano(1), peano(4), peano(9)]


def test_window() -> None:
    task = parse_series('1,1;2,3,5')

    assert slot_variable(2) == 'v_2'
    assert task.window(3) == ({PLACE: peano(3), 'v_1': peano(2), 'v_2': peano(1)}, peano(3))
    assert task.window(3, depth=1) == ({PLACE: peano(3), 'v_1': peano(2)}, peano(3))


def test_slot_bindings() -> None:
    length, first, tail = Var('a'), Var('b'), Var('c')
    pattern = _cons(App('s', (length,)), _cons(first, _cons(peano(2), tail)))

    assert slot_bindings(pattern) == {PLACE: App('s', (length,)), 'v_1': first, 'v_2': peano(2)}
    assert slot_bindings(_cons(peano(1), const('nil'))) == {PLACE: peano(1)}
    with pytest.raises(TheoryError, match='length-prefixed'):
        slot_bindings(first)


@pytest.mark.parametrize(
    ('text', 'law'),
    [
        ('0;1,4,9', 'v_p*v_p'),
        ('1,1;2,3,5', 'v_1+v_2'),
    ],
    ids=['Check squares', 'Check the Fibonacci law'],
)
def test_series_law(text: str, law: str) -> None:
    grammar, classes = _numbers()
    task = parse_series(text)

    found = list(series_law(task, grammar, classes=classes, max_count=5))

    swapped = _law('v_2+v_1')
    assert _law(law) in found or (law == 'v_1+v_2' and swapped in found)
    assert all(place < task.depth for term in found for place in replay(term, task, grammar))


def test_series_law_repeats_the_previous_element() -> None:
    grammar, classes = _numbers()
    task = parse_series('1,2,2,3,3,3,4;4,4,4')

    hypotheses = learn_atom_determinate(task.examples(), grammar=grammar, classes=classes)
    bindings = slot_bindings(hypotheses.entries[0].pattern)
    found = list(series_law(task, grammar, classes=classes, max_count=5))

    assert len(bindings) == 1 + task.depth
    assert bindings['v_1'] == peano(4)
    assert bindings['v_4'] == peano(3)
    assert found[0] == _law('v_1')
    assert replay(_law('v_1'), task, grammar) == [1, 3, 6]
    assert all(place < task.depth for term in found for place in replay(term, task, grammar))


def test_law_grammar() -> None:
    grammar, classes = _numbers()
    laws, root = law_grammar(parse_series('0;1,4,9'), grammar, classes=classes)

    assert membership(laws, root, _law('v_p*v_p'))
    assert membership(laws, root, _law('v_p*v_p+0'))
    assert not membership(laws, root, _law('v_1+v_1'))


def test_series_law_without_a_law() -> None:
    grammar, classes = class_grammar(builtin_carrier('peano', carrier=12, ops=['+']))

    assert list(series_law(parse_series('0;1,4,9'), grammar, classes=classes, max_count=5)) == []


def test_replay() -> None:
    grammar, _ = _numbers()
    task = parse_series('0;1,4,9')

    assert replay(_law('v_p*v_p'), task, grammar) == []
    assert replay(_law('v_1+v_1'), task, grammar) == [1, 2, 3]
