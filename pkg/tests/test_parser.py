import pytest

from egen_grammars._errors import ParseError
from egen_grammars._parser import ground_resolver, parse_examples, parse_signed_literals, parse_term
from egen_grammars.terms import App, Signature, Symbol, Var, make_tuple, peano

PEANO = Signature((Symbol('0', 0), Symbol('s', 1), Symbol('+', 2), Symbol('*', 2)))


@pytest.mark.parametrize(
    ('text', 'signature', 'expected'),
    [
        ('x+y*z', PEANO, App('+', (Var('x'), App('*', (Var('y'), Var('z')))))),
        ('(x+y)*z', PEANO, App('*', (App('+', (Var('x'), Var('y'))), Var('z')))),
        ('2', None, peano(2)),
        ('s(0)+v1', None, App('+', (peano(1), Var('v1')))),
        ('p(a, X)', None, App('p', (App('a'), Var('X')))),
        ('(a, b)', None, make_tuple([App('a'), App('b')])),
        ('⟨a, b, c⟩', None, make_tuple([App('a'), App('b'), App('c')])),
        ("z'", PEANO, Var("z'")),
        ('v_{0,s(0)}', None, Var('v_{0,s(0)}')),
    ],
    ids=[
        'Check precedence',
        'Check parentheses',
        'Check decimal numerals',
        'Check the default variable prefix',
        'Check upper-case variables',
        'Check tuples',
        'Check angle tuples',
        'Check primed names',
        'Check lgg variable names',
    ],
)
def test_parse_term(text: str, signature: Signature | None, expected) -> None:
    assert parse_term(text, signature=signature) == expected


def test_declared_and_ground_names() -> None:
    assert parse_term('f(a)', variables=['a']) == App('f', (Var('a'),))
    assert parse_term('f(vx, X)', is_variable=ground_resolver) == App('f', (App('vx'), App('X')))


def test_parse_signed_literals() -> None:
    literals = parse_signed_literals('d(v,w) <- p(w,v), ¬f(v)', variables=['v', 'w'])

    assert [positive for positive, _ in literals] == [True, False, True]
    assert literals[1][1] == App('p', (Var('w'), Var('v')))


@pytest.mark.parametrize(
    'text',
    ['f(', 'a +', 'f(a,,b)'],
    ids=['Check an open parenthesis', 'Check a dangling operator', 'Check an empty argument'],
)
def test_parse_errors(text: str) -> None:
    with pytest.raises(ParseError, match='Could not parse'):
        parse_term(text)


def test_parse_examples() -> None:
    positives, negatives = parse_examples('# comment\n+ le(0, 0)\n+ le(0, x)\n- le(s(0), 0)\n')

    assert positives == [App('le', (peano(0), peano(0))), App('le', (peano(0), App('x')))]
    assert negatives == [App('le', (peano(1), peano(0)))]


@pytest.mark.parametrize(
    ('text', 'match'),
    [
        ('le(0, 0)\n', 'Line 1'),
        ('- le(0, 0)\n', 'at least one positive'),
    ],
    ids=['Check a missing sign', 'Check only negatives'],
)
def test_parse_examples_errors(text: str, match: str) -> None:
    with pytest.raises(ParseError, match=match):
        parse_examples(text)
