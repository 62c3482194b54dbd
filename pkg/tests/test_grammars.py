from random import Random

import pytest

from egen_grammars._errors import BudgetExceededError, ParseError, TheoryError
from egen_grammars.grammars import (
    Alt,
    TreeGrammar,
    VarLeaf,
    WeightMap,
    determinize,
    difference,
    disjoint_union,
    drop_symbols,
    enumerate_terms,
    format_grammar,
    from_terms,
    instance_in_class,
    intersect,
    intersect_all,
    is_empty,
    is_finite,
    lift,
    membership,
    min_weight,
    parse_grammar,
    restrict_variables,
    simplify,
    states,
    universal_grammar,
)
from egen_grammars.terms import App, Signature, Symbol, Var, apply_subst, const, peano

from .configuration import TEST_DATA_DIR
from .helpers import all_terms, random_term

X = Var('x')


def _grammar(name: str) -> TreeGrammar:
    return parse_grammar((TEST_DATA_DIR / name).read_text(encoding='utf-8'))


def _plus(left, right) -> App:
    return App('+', (left, right))


def _times(left, right) -> App:
    return App('*', (left, right))


@pytest.mark.parametrize(
    ('term', 'nonterminal', 'expected'),
    [
        (_times(peano(0), peano(1)), 'N0', True),
        (_plus(peano(0), peano(1)), 'N1', True),
        (_times(peano(1), peano(1)), 'N1', True),
        (peano(1), 'N0', False),
        (_plus(peano(1), peano(1)), 'N1', False),
        (_plus(peano(1), peano(1)), 'Nt', True),
    ],
    ids=['0*1 equals 0', '0+1 equals 1', '1*1 equals 1', '1 is not 0', '1+1 is not 1', 'anything is a term'],
)
def test_membership(zero_one_grammar: TreeGrammar, term, nonterminal: str, expected: bool) -> None:
    assert membership(zero_one_grammar, nonterminal, term) is expected


def test_states(zero_one_grammar: TreeGrammar) -> None:
    assert states(zero_one_grammar, peano(0)) == {'N0', 'Nt'}
    assert states(zero_one_grammar, peano(2)) == {'Nt'}
    with pytest.raises(TheoryError, match='not in the signature'):
        states(zero_one_grammar, App('f', (peano(0),)))


def test_format_grammar(zero_one_grammar: TreeGrammar) -> None:
    text = format_grammar(zero_one_grammar)

    assert text.splitlines() == [
        'sig 0/0, s/1, +/2, */2',
        'N0 ::= 0 | N0+N0 | N0*Nt | Nt*N0',
        'N1 ::= s(N0) | N0+N1 | N1+N0 | N1*N1',
        'Nt ::= 0 | s(Nt) | Nt+Nt | Nt*Nt',
    ]
    assert parse_grammar(text) == zero_one_grammar


def test_format_grammar_with_leaves() -> None:
    grammar = parse_grammar('sig s/1\nvars x\nN ::= x | s(N)\n')

    assert 'vars x' in format_grammar(grammar)
    assert grammar.rules['N'] == (VarLeaf('x'), Alt('s', ('N',)))


@pytest.mark.parametrize(
    ('text', 'match'),
    [
        ('N0 ::= 0\nnonsense\n', 'Line 2'),
        ('sig s/1, 0/0\nN ::= s(s(N)) | 0\n', 'must apply one symbol'),
        ('sig 0/0\nN ::= M\nM ::= 0\n', 'Chain rule'),
        ('sig s\nN ::= 0\n', 'name/arity'),
    ],
    ids=['Check an unknown line', 'Check a nested alternative', 'Check a chain rule', 'Check a bad signature'],
)
def test_parse_grammar_errors(text: str, match: str) -> None:
    with pytest.raises(ParseError, match=match):
        parse_grammar(text)


def test_undefined_nonterminal(zero_one_grammar: TreeGrammar) -> None:
    with pytest.raises(TheoryError, match='undefined nonterminals'):
        TreeGrammar(zero_one_grammar.signature, {'N': (Alt('s', ('M',)),)})


def test_emptiness_and_simplify() -> None:
    grammar = parse_grammar('sig 0/0, s/1\nA ::= s(A)\nB ::= 0 | s(A)\nC ::= s(B)\n')

    assert is_empty(grammar, 'A')
    assert not is_empty(grammar, 'B')
    assert simplify(grammar, ['B']).rules == {'B': (Alt('0'),)}
    assert simplify(grammar, ['A']).rules == {'A': ()}


def test_is_finite() -> None:
    assert is_finite(_grammar('small.tg'), 'S')
    assert not is_finite(_grammar('even.tg'), 'E')


def test_intersection() -> None:
    grammar, root = intersect_all([(_grammar('even.tg'), 'E'), (_grammar('small.tg'), 'S')])

    assert list(enumerate_terms(grammar, root)) == [peano(0), peano(2)]


def test_difference() -> None:
    grammar, root = difference(_grammar('small.tg'), 'S', _grammar('even.tg'), 'E')

    assert list(enumerate_terms(grammar, root)) == [peano(1)]


def test_difference_budget() -> None:
    with pytest.raises(BudgetExceededError, match='max_states'):
        difference(_grammar('small.tg'), 'S', _grammar('even.tg'), 'E', max_states=1)


def test_disjoint_union() -> None:
    grammar, root = disjoint_union([(_grammar('even.tg'), 'O'), (_grammar('small.tg'), 'U')])

    assert membership(grammar, root, peano(5))
    assert membership(grammar, root, peano(0))
    assert not membership(grammar, root, peano(4))


def test_determinize(zero_one_grammar: TreeGrammar) -> None:
    deterministic, names = determinize(zero_one_grammar)

    assert sorted(names.values()) == ['N0_Nt', 'N1_Nt', 'Nt']
    assert states(deterministic, _times(peano(1), peano(2))) == {'Nt'}
    assert states(deterministic, _times(peano(2), peano(0))) == {'N0_Nt'}


def test_determinize_keeps_joined_names_apart() -> None:
    grammar = parse_grammar('sig a/0, b/0\nA ::= a\nB ::= a\nA_B ::= b\n')

    deterministic, names = determinize(grammar)

    assert len(set(names.values())) == len(names) == 2
    assert states(deterministic, const('a')) != states(deterministic, const('b'))
    assert {names[frozenset({'A', 'B'})], names[frozenset({'A_B'})]} == {'A_B', "A_B'"}


def test_min_weight(zero_one_grammar: TreeGrammar) -> None:
    best = min_weight(zero_one_grammar)

    assert best['N1'] == (2, peano(1))
    assert best['Nt'] == (1, peano(0))
    assert min_weight(zero_one_grammar, WeightMap({'s': 5}))['N1'] == (6, peano(1))


def test_enumerate_terms(zero_one_grammar: TreeGrammar) -> None:
    weights = WeightMap()
    found = list(enumerate_terms(zero_one_grammar, 'N1', max_count=25))

    assert found[0] == peano(1)
    assert len(found) == len(set(found)) == 25
    assert all(membership(zero_one_grammar, 'N1', term) for term in found)
    assert [weights.term(term) for term in found] == sorted(weights.term(term) for term in found)
    assert found[1:3] == [_plus(peano(0), peano(1)), _plus(peano(1), peano(0))]


def test_enumerate_max_weight() -> None:
    assert list(enumerate_terms(_grammar('even.tg'), 'E', max_weight=5)) == [peano(0), peano(2), peano(4)]
    assert not list(enumerate_terms(_grammar('even.tg'), 'missing'))


def test_enumerate_zero_weight_symbol() -> None:
    with pytest.raises(ValueError, match='weight 0'):
        list(enumerate_terms(_grammar('even.tg'), 'E', WeightMap({'s': 0})))


def test_negative_weights() -> None:
    with pytest.raises(ValueError, match='nonnegative'):
        WeightMap(variable=-1)


def test_lift(zero_one_grammar: TreeGrammar) -> None:
    lifted, renamed = lift(zero_one_grammar, {'x': peano(0)}, suffix="'")

    assert renamed['N1'] == "N1'"
    assert membership(lifted, "N0'", _times(X, peano(1)))
    assert membership(lifted, "N1'", App('s', (X,)))
    assert not membership(lifted, "N1'", X)


@pytest.mark.parametrize(
    ('term', 'nonterminal', 'expected'),
    [
        (_times(X, X), 'N1', True),
        (_plus(X, X), 'N1', False),
        (_plus(X, App('s', (X,))), 'N1', True),
        (App('s', (X,)), 'N0', False),
    ],
    ids=['x*x can equal 1', 'x+x is never 1', 'x+s(x) can equal 1', 's(x) is never 0'],
)
def test_instance_in_class(zero_one_grammar: TreeGrammar, term, nonterminal: str, expected: bool) -> None:
    assert instance_in_class(term, zero_one_grammar, nonterminal) is expected


@pytest.mark.parametrize(
    ('term', 'nonterminal', 'expected'),
    [
        (X, 'N', False),
        (App('f', (X,)), 'N', False),
        (App('s', (X,)), 'M', True),
    ],
    ids=['x has no instance in an empty class', 'f(x) has no instance in an empty class', 's(x) reaches M'],
)
def test_instance_in_empty_class(term, nonterminal: str, expected: bool) -> None:
    grammar = parse_grammar('sig 0/0, s/1, f/1\nN ::= f(N)\nM ::= 0 | s(M)\n')

    assert instance_in_class(term, grammar, nonterminal) is expected


def test_from_terms() -> None:
    grammar = from_terms([_plus(X, peano(0)), peano(1)])

    assert membership(grammar, 'L', _plus(X, peano(0)))
    assert membership(grammar, 'L', peano(1))
    assert not membership(grammar, 'L', peano(0))


def test_restrictions(zero_one_grammar: TreeGrammar) -> None:
    universal = universal_grammar(zero_one_grammar.signature, leaves=['x', 'y'])

    assert membership(universal, 'Nt', _plus(X, Var('y')))
    assert not membership(restrict_variables(universal, ['x']), 'Nt', _plus(X, Var('y')))
    assert not membership(drop_symbols(universal, ['+']), 'Nt', _plus(X, X))


SIGNATURE = Signature((Symbol('a', 0), Symbol('b', 0), Symbol('f', 1), Symbol('g', 2)))
SYMBOLS = [(symbol.name, symbol.arity) for symbol in SIGNATURE.symbols]
SMALL_TERMS = all_terms(SYMBOLS, 3)


def _random_grammar(rng: Random) -> TreeGrammar:
    names = ['A', 'B', 'C']
    rules = {
        name: tuple(
            dict.fromkeys(
                Alt(symbol.name, tuple(rng.choice(names) for _ in range(symbol.arity)))
                for symbol in SIGNATURE.symbols
                for _ in range(2)
                if rng.random() < 0.4
            )
        )
        for name in names
    }
    return TreeGrammar(SIGNATURE, rules)


def test_lift_matches_substituted_membership(zero_one_grammar: TreeGrammar) -> None:
    rng = Random(3)
    symbols = [('0', 0), ('s', 1), ('+', 2), ('*', 2)]
    for _ in range(40):
        sigma = {name: random_term(rng, symbols, 3) for name in 'xy'}
        lifted, renamed = lift(zero_one_grammar, sigma)
        for _ in range(25):
            term = random_term(rng, symbols, 4, 'xyz')
            for nonterminal in zero_one_grammar.rules:
                expected = membership(zero_one_grammar, nonterminal, apply_subst(term, sigma))
                assert membership(lifted, renamed[nonterminal], term) == expected


def test_products_match_membership() -> None:
    rng = Random(5)
    for _ in range(20):
        first, second = _random_grammar(rng), _random_grammar(rng)
        product, names = intersect(first, second, [('A', 'A')])
        subtracted, root = difference(first, 'A', second, 'A')
        for term in SMALL_TERMS:
            left, right = membership(first, 'A', term), membership(second, 'A', term)
            assert membership(product, names['A', 'A'], term) == (left and right)
            assert membership(subtracted, root, term) == (left and not right)


def test_simplify_and_determinize_keep_languages() -> None:
    rng = Random(19)
    for _ in range(20):
        grammar = _random_grammar(rng)
        simplified = simplify(grammar, ['A'])
        deterministic, names = determinize(grammar)
        for term in SMALL_TERMS:
            assert membership(simplified, 'A', term) == membership(grammar, 'A', term)
            found = states(grammar, term)
            assert states(deterministic, term) == (frozenset([names[found]]) if found else frozenset())


def test_enumeration_follows_weights() -> None:
    rng = Random(23)
    for _ in range(20):
        grammar = _random_grammar(rng)
        lowest = min_weight(grammar)
        terms = list(enumerate_terms(grammar, 'A', max_count=60))

        assert bool(terms) == ('A' in lowest)
        if terms:
            assert terms[0].size == lowest['A'][0]
        assert [term.size for term in terms] == sorted(term.size for term in terms)
        assert len(set(terms)) == len(terms)
        assert all(membership(grammar, 'A', term) for term in terms)
