"""Built-in finite carriers, their rewrite theories, and the theory file format."""

import itertools
import re
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass

from corallium.log import get_logger

from ._errors import ParseError, TheoryError
from ._parser import parse_term
from .congruence import (
    CarrierSpec,
    Equation,
    EquationalTheory,
    NormalFormOrder,
    class_name,
    finite_quotient,
    from_convergent_rs,
    from_ground_equations,
)
from .grammars import TreeGrammar, parse_signature
from .terms import App, Signature, Symbol, Term, const, peano as numeral, subterms, term_size

logger = get_logger()

PEANO_ARITIES = {
    '+': 2,
    '*': 2,
    '-': 2,
    '//': 2,
    '/': 2,
    'mod': 2,
    '<': 2,
    'max': 2,
    'min': 2,
    'dp': 1,
    'if': 3,
    'ev': 1,
}
"""Operations available on top of `0` and `s`."""

BOOLEAN_ARITIES = {'not': 1, 'and': 2, 'or': 2, 'imp': 2, 'eq': 2}
LIST_ARITIES = {'ap': 2, 'rv': 1, 'ln': 1}
CUBE_MOVES = ('lf', 'rg', 'up', 'dn', 'cl', 'cc')
ATTRIBUTE_ARITIES = {'=': 2, 'and': 2, 'or': 2, 'not': 1}


def _check_ops(ops: Iterable[str], known: dict[str, int], carrier: str) -> tuple[str, ...]:
    ops = tuple(dict.fromkeys(ops))
    if unknown := [op for op in ops if op not in known]:
        msg = f'Unknown operations for the {carrier} carrier: {unknown}. Expected some of: {list(known)}'
        raise TheoryError(msg)
    return ops


def _spec(
    symbols: Sequence[Symbol],
    values: Sequence[object],
    names: Sequence[str],
    representatives: Sequence[Term | None],
    operation: Callable[[str, tuple[object, ...]], object | None],
    *,
    absorbing: int | None = None,
) -> CarrierSpec:
    index = {value: idx for idx, value in enumerate(values)}

    def _evaluate(symbol: str, args: tuple[int, ...]) -> int | None:
        result = operation(symbol, tuple(values[arg] for arg in args))
        return None if result is None else index.get(result)

    return CarrierSpec(
        Signature(tuple(symbols)),
        tuple(names),
        tuple(representatives),
        _evaluate,
        absorbing=absorbing,
        values=tuple(values),
    )


# ----------------------------------------------------------------------------------------------------------------------
# Peano numerals


TOP = 'top'
"""Value of the absorbing class that collects every number above the carrier bound."""


def peano(bound: int, ops: Iterable[str] = ('+', '*'), *, absorb: bool = True) -> CarrierSpec:
    """Numbers `0..bound`, plus the class `Ntop` of larger numbers when `absorb`.

    Without `absorb`, results above `bound` are undefined (a cut-off approximation). Booleans are embedded as 0/1 for
    `<`, `if` and `ev`; `-` is only defined when it does not go below zero and `/` only when it divides exactly.

    """
    if bound < 0:
        msg = f'Expected a nonnegative carrier bound. Received: {bound}'
        raise TheoryError(msg)
    ops = _check_ops(ops, PEANO_ARITIES, 'peano')
    symbols = [Symbol('0', 0, is_constructor=True), Symbol('s', 1, is_constructor=True)]
    symbols.extend(Symbol(op, PEANO_ARITIES[op]) for op in ops)
    values: list[object] = list(range(bound + 1))
    names = [f'N{value}' for value in range(bound + 1)]
    representatives: list[Term | None] = [numeral(value) for value in range(bound + 1)]
    if absorb:
        values.append(TOP)
        names.append('Ntop')
        representatives.append(None)

    def _fit(value: int) -> object | None:
        if value <= bound:
            return value
        return TOP if absorb else None

    def _operation(symbol: str, args: tuple[object, ...]) -> object | None:  # noqa: C901, PLR0911, PLR0912
        tops = [arg == TOP for arg in args]
        nums = [arg if isinstance(arg, int) else -1 for arg in args]
        if symbol == '0':
            return 0
        if symbol in {'s', 'dp'}:
            if tops[0]:
                return TOP
            return _fit(nums[0] + 1 if symbol == 's' else 2 * nums[0])
        if symbol == 'if':
            return args[2] if args[0] == 0 else args[1]
        if symbol == 'ev':
            return None if tops[0] else _fit(int(nums[0] % 2 == 0))
        left, right = nums
        if symbol == '+':
            return TOP if any(tops) else _fit(left + right)
        if symbol == '*':
            if 0 in {args[0], args[1]}:
                return 0
            return TOP if any(tops) else _fit(left * right)
        if symbol == 'max':
            return TOP if any(tops) else max(left, right)
        if symbol == 'min':
            if all(tops):
                return TOP
            return args[1] if tops[0] else args[0] if tops[1] else min(left, right)
        if symbol == '<':
            if all(tops):
                return None
            return _fit(int(tops[1] or (not tops[0] and left < right)))
        if symbol == '-':
            if tops[1]:
                return None
            if tops[0]:
                return TOP if right == 0 else None
            return left - right if left >= right else None
        # Remaining operations divide: '//', '/', 'mod'
        if right == 0:
            return None
        if tops[1]:
            if tops[0]:
                return None
            if symbol == 'mod':
                return left
            return 0 if symbol == '//' or left == 0 else None
        if tops[0]:
            if right != 1:
                return None
            return 0 if symbol == 'mod' else TOP
        if symbol == 'mod':
            return left % right
        if symbol == '/' and left % right:
            return None
        return left // right

    return _spec(symbols, values, names, representatives, _operation, absorbing=bound + 1 if absorb else None)


# ----------------------------------------------------------------------------------------------------------------------
# Booleans


def booleans(ops: Iterable[str] = tuple(BOOLEAN_ARITIES)) -> CarrierSpec:
    ops = _check_ops(ops, BOOLEAN_ARITIES, 'boolean')
    symbols = [Symbol('false', 0, is_constructor=True), Symbol('true', 0, is_constructor=True)]
    symbols.extend(Symbol(op, BOOLEAN_ARITIES[op]) for op in ops)
    table: dict[str, Callable[..., bool]] = {
        'false': lambda: False,
        'true': lambda: True,
        'not': lambda value: not value,
        'and': lambda left, right: left and right,
        'or': lambda left, right: left or right,
        'imp': lambda left, right: (not left) or right,
        'eq': lambda left, right: left == right,
    }

    def _operation(symbol: str, args: tuple[object, ...]) -> object | None:
        return table[symbol](*args)

    return _spec(symbols, [False, True], ['N_false', 'N_true'], [const('false'), const('true')], _operation)


# ----------------------------------------------------------------------------------------------------------------------
# Lists


def word_term(word: str) -> Term:
    """`cons(w1, cons(w2, ... nil))` for a word over one-character letters."""
    term: Term = const('nil')
    for letter in reversed(word):
        term = App('cons', (const(letter), term))
    return term


@dataclass(frozen=True)
class _Word:
    letters: str


@dataclass(frozen=True)
class _Letter:
    letter: str


def lists(
    alphabet: Sequence[str] = ('b',),
    max_len: int = 3,
    ops: Iterable[str] = tuple(LIST_ARITIES),
) -> CarrierSpec:
    """Words up to `max_len` built with `nil` and `cons`, the letters themselves, and lengths `0..max_len`.

    `ap` appends, `rv` reverses and `ln` measures; results longer than `max_len` are undefined.

    """
    ops = _check_ops(ops, LIST_ARITIES, 'list')
    if bad := [letter for letter in alphabet if not re.fullmatch(r'[a-z]', letter) or letter == 's']:
        msg = f'List letters must be single lowercase characters other than s. Received: {bad}'
        raise TheoryError(msg)
    symbols = [Symbol('nil', 0, is_constructor=True), Symbol('cons', 2, is_constructor=True)]
    symbols.extend(Symbol(letter, 0, is_constructor=True) for letter in alphabet)
    if 'ln' in ops:
        symbols.extend([Symbol('0', 0, is_constructor=True), Symbol('s', 1, is_constructor=True)])
    symbols.extend(Symbol(op, LIST_ARITIES[op]) for op in ops)

    words = [''.join(combo) for size in range(max_len + 1) for combo in itertools.product(alphabet, repeat=size)]
    values: list[object] = [_Letter(letter) for letter in alphabet]
    names = [f'E_{letter}' for letter in alphabet]
    representatives: list[Term | None] = [const(letter) for letter in alphabet]
    values.extend(_Word(word) for word in words)
    names.extend(f'N_{word}' if word else 'N_eps' for word in words)
    representatives.extend(word_term(word) for word in words)
    if 'ln' in ops:
        values.extend(range(max_len + 1))
        names.extend(f'N{value}' for value in range(max_len + 1))
        representatives.extend(numeral(value) for value in range(max_len + 1))

    def _word(letters: str) -> object | None:
        return _Word(letters) if len(letters) <= max_len else None

    def _operation(symbol: str, args: tuple[object, ...]) -> object | None:  # noqa: PLR0911
        if symbol == 'nil':
            return _Word('')
        if not args:
            return 0 if symbol == '0' else _Letter(symbol)
        if symbol == 's':
            return args[0] + 1 if isinstance(args[0], int) and args[0] < max_len else None
        if symbol == 'cons':
            head, tail = args
            if isinstance(head, _Letter) and isinstance(tail, _Word):
                return _word(head.letter + tail.letters)
            return None
        if not all(isinstance(arg, _Word) for arg in args):
            return None
        word_args = [arg.letters for arg in args if isinstance(arg, _Word)]
        if symbol == 'ap':
            return _word(word_args[0] + word_args[1])
        if symbol == 'rv':
            return _Word(word_args[0][::-1])
        return len(word_args[0])

    return _spec(symbols, values, names, representatives, _operation)


# ----------------------------------------------------------------------------------------------------------------------
# Cube rotations


Orientation = tuple[int, int, int, int, int, int]
"""Die numbers on the (top, bottom, front, back, left, right) faces."""

_MOVES: dict[str, Callable[[Orientation], Orientation]] = {
    'lf': lambda o: (o[0], o[1], o[5], o[4], o[2], o[3]),
    'rg': lambda o: (o[0], o[1], o[4], o[5], o[3], o[2]),
    'up': lambda o: (o[2], o[3], o[1], o[0], o[4], o[5]),
    'dn': lambda o: (o[3], o[2], o[0], o[1], o[4], o[5]),
    'cl': lambda o: (o[4], o[5], o[2], o[3], o[1], o[0]),
    'cc': lambda o: (o[5], o[4], o[2], o[3], o[0], o[1]),
}


def orientation_name(orientation: Orientation) -> str:
    """`c` followed by the top, front, and right faces, e.g. `c123` for the start position."""
    return f'c{orientation[0]}{orientation[2]}{orientation[5]}'


def cube() -> CarrierSpec:
    """The 24 rotations of a die, one constant per orientation, moved by `lf rg up dn cl cc`."""
    start: Orientation = (1, 6, 2, 5, 4, 3)
    found = [start]
    for orientation in found:
        for move in _MOVES.values():
            if (nxt := move(orientation)) not in found:
                found.append(nxt)
    names = [orientation_name(orientation) for orientation in found]
    symbols = [Symbol(name, 0, is_constructor=True) for name in names]
    symbols.extend(Symbol(move, 1) for move in CUBE_MOVES)
    by_name = dict(zip(names, found, strict=True))

    def _operation(symbol: str, args: tuple[object, ...]) -> object | None:
        if symbol in by_name:
            return by_name[symbol]
        orientation = args[0]
        assert isinstance(orientation, tuple)
        return _MOVES[symbol](orientation)  # type: ignore[arg-type]

    return _spec(symbols, found, [f'N_{name}' for name in names], [const(name) for name in names], _operation)


# ----------------------------------------------------------------------------------------------------------------------
# Attribute values


def attributes(values: Sequence[str], ops: Iterable[str] = tuple(ATTRIBUTE_ARITIES)) -> CarrierSpec:
    """Enumerated attribute values with equality and junctors over `y`/`n`."""
    ops = _check_ops(ops, ATTRIBUTE_ARITIES, 'attribute')
    values = tuple(dict.fromkeys(['y', 'n', *values]))
    symbols = [Symbol(value, 0, is_constructor=True) for value in values]
    symbols.extend(Symbol(op, ATTRIBUTE_ARITIES[op]) for op in ops)

    def _operation(symbol: str, args: tuple[object, ...]) -> object | None:
        if not args:
            return symbol
        if symbol == '=':
            return 'y' if args[0] == args[1] else 'n'
        if not all(arg in {'y', 'n'} for arg in args):
            return None
        truth = [arg == 'y' for arg in args]
        if symbol == 'not':
            result = not truth[0]
        elif symbol == 'and':
            result = truth[0] and truth[1]
        else:
            result = truth[0] or truth[1]
        return 'y' if result else 'n'

    names = [class_name(const(value)) for value in values]
    return _spec(symbols, values, names, [const(value) for value in values], _operation)


# ----------------------------------------------------------------------------------------------------------------------
# Rewrite theories


def _equations(signature: Signature, texts: Iterable[str]) -> tuple[Equation, ...]:
    equations = []
    for text in texts:
        equation = parse_equation(text, signature=signature)
        symbols = {
            sub.symbol for side in (equation.lhs, equation.rhs) for sub in subterms(side) if isinstance(sub, App)
        }
        if all(symbol in signature for symbol in symbols):
            equations.append(equation)
    return tuple(equations)


PEANO_RULES = (
    'x+0 = x',
    'x+s(y) = s(x+y)',
    'x*0 = 0',
    'x*s(y) = x*y+x',
    'dp(x) = x+x',
    'max(0,y) = y',
    'max(x,0) = x',
    'max(s(x),s(y)) = s(max(x,y))',
    'min(0,y) = 0',
    'min(x,0) = 0',
    'min(s(x),s(y)) = s(min(x,y))',
    'x-0 = x',
    's(x)-s(y) = x-y',
    'ev(0) = s(0)',
    'ev(s(0)) = 0',
    'ev(s(s(x))) = ev(x)',
    'if(0,y,z) = z',
    'if(s(x),y,z) = y',
)
LIST_RULES = (
    'ap(nil,ys) = ys',
    'ap(cons(hd,xs),ys) = cons(hd,ap(xs,ys))',
    'rv(nil) = nil',
    'rv(cons(hd,xs)) = ap(rv(xs),cons(hd,nil))',
    'ln(nil) = 0',
    'ln(cons(hd,xs)) = s(ln(xs))',
)
BOOLEAN_RULES = (
    'not(true) = false',
    'not(false) = true',
    'and(true,y) = y',
    'and(false,y) = false',
    'or(true,y) = true',
    'or(false,y) = y',
    'imp(x,y) = or(not(x),y)',
)


def builtin_theory(signature: Signature, family: str) -> EquationalTheory:
    """Oriented defining equations of a built-in family, restricted to the symbols of `signature`."""
    texts = {'peano': PEANO_RULES, 'lists': LIST_RULES, 'booleans': BOOLEAN_RULES}.get(family, ())
    return EquationalTheory(signature, _equations(signature, texts))


def parse_equation(text: str, *, signature: Signature | None = None, oriented: bool = True) -> Equation:
    """Parse `lhs = rhs`; names that are not nullary symbols of `signature` are variables."""
    term = parse_term(text, signature=signature)
    if not isinstance(term, App) or term.symbol != '=' or len(term.args) != 2:  # noqa: PLR2004
        msg = f"Expected an equation 'lhs = rhs'. Received: {text!r}"
        raise ParseError(msg)
    return Equation(term.args[0], term.args[1], oriented)


# ----------------------------------------------------------------------------------------------------------------------
# Theory files


BUILTINS = ('peano', 'booleans', 'lists', 'cube', 'attributes')


@dataclass(frozen=True)
class Theory:
    """A loaded theory: an optional finite carrier and the equations used for rewriting."""

    signature: Signature
    equations: EquationalTheory
    carrier: CarrierSpec | None = None
    family: str = ''


def builtin_carrier(
    name: str,
    *,
    carrier: int | None = None,
    ops: Sequence[str] | None = None,
    alphabet: Sequence[str] | None = None,
    absorb: bool = True,
) -> Theory:
    """Theory for one of `BUILTINS`; `carrier` is the Peano bound or the maximal list length."""
    if name == 'peano':
        spec = peano(6 if carrier is None else carrier, ops or ('+', '*'), absorb=absorb)
    elif name == 'booleans':
        spec = booleans(ops or tuple(BOOLEAN_ARITIES))
    elif name == 'lists':
        spec = lists(alphabet or ('b',), 3 if carrier is None else carrier, ops or tuple(LIST_ARITIES))
    elif name == 'cube':
        spec = cube()
    elif name == 'attributes':
        spec = attributes(alphabet or (), ops or tuple(ATTRIBUTE_ARITIES))
    else:
        msg = f"Unknown builtin '{name}'. Expected one of: {list(BUILTINS)}"
        raise TheoryError(msg)
    logger.debug('Loaded builtin carrier', name=name, classes=spec.size)
    return Theory(spec.signature, builtin_theory(spec.signature, name), spec, name)


def _options(words: Sequence[str]) -> dict[str, str]:
    options = {}
    for word in words:
        if word.startswith('len<='):
            options['len'] = word.removeprefix('len<=')
            continue
        key, sep, value = word.partition('=')
        if not sep:
            key, value = word, ''
        options[key] = value
    return options


def _carrier_directive(family: str, words: Sequence[str]) -> Theory:
    bound: int | None = None
    alphabet: tuple[str, ...] | None = None
    rest = list(words)
    if family == 'peano' and rest and (match := re.fullmatch(r'0\.\.(\d+)', rest[0])):
        bound = int(match[1])
        rest.pop(0)
    elif family in {'lists', 'attributes'} and rest and '=' not in rest[0] and not rest[0].startswith('len'):
        alphabet = tuple(filter(None, rest.pop(0).split(',')))
    options = _options(rest)
    if unknown := set(options) - {'absorb', 'ops', 'len'}:
        msg = f'Unknown carrier options: {sorted(unknown)}'
        raise ParseError(msg)
    if 'len' in options:
        if not options['len'].isdigit():
            msg = f"Expected 'len<=N'. Received: {options['len']!r}"
            raise ParseError(msg)
        bound = int(options['len'])
    ops = tuple(filter(None, options['ops'].split(','))) if 'ops' in options else None
    absorb = 'absorb' in options or family != 'peano'
    return builtin_carrier(family, carrier=bound, ops=ops, alphabet=alphabet, absorb=absorb)


def load_theory(text: str) -> Theory:
    """Parse a theory file.

    Lines are `sig name/arity [ctor], ...`, `eq lhs = rhs` (oriented left to right), `ax lhs = rhs` (unoriented),
    `carrier peano 0..N [absorb] [ops=+,*]` and `builtin NAME [letters] [len<=N] [ops=...]`. `#` starts a comment.

    """
    signature = Signature()
    loaded: Theory | None = None
    raw_equations: list[tuple[int, str, bool]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        keyword, _, rest = line.partition(' ')
        if keyword == 'sig':
            signature = signature.merge(parse_signature(rest))
        elif keyword in {'eq', 'ax'}:
            raw_equations.append((line_no, rest, keyword == 'eq'))
        elif keyword in {'carrier', 'builtin'}:
            family, *words = rest.split()
            if family not in BUILTINS:
                msg = f"Line {line_no}: unknown carrier '{family}'. Expected one of: {list(BUILTINS)}"
                raise ParseError(msg)
            loaded = _carrier_directive(family, words)
        else:
            msg = f'Line {line_no}: expected `sig`, `eq`, `ax`, `carrier`, or `builtin`. Received: {raw!r}'
            raise ParseError(msg)
    if loaded is not None:
        signature = loaded.signature.merge(signature)
    equations = [parse_equation(text, signature=signature, oriented=oriented) for _, text, oriented in raw_equations]
    if loaded is not None:
        equations = [*loaded.equations.equations, *equations]
    theory = EquationalTheory(signature, tuple(equations))
    return Theory(signature, theory, loaded.carrier if loaded else None, loaded.family if loaded else '')


def class_grammar(
    theory: Theory,
    *,
    bound: int = 5,
    nf_order: NormalFormOrder = term_size,
    compress: bool = False,
    max_steps: int = 10_000,
) -> tuple[TreeGrammar, list[str]]:
    """Class grammar of `theory` and its class nonterminals.

    A finite carrier gives its quotient. Otherwise ground unoriented equations are closed by congruence, and oriented
    ones are read as a convergent rewrite system whose normal forms of `nf_order` rank up to `bound` become the
    classes.

    """
    if theory.carrier is not None:
        return finite_quotient(theory.carrier, compress=compress), list(theory.carrier.names)
    equations = theory.equations.equations
    if all(not equation.oriented and equation.lhs.is_ground and equation.rhs.is_ground for equation in equations):
        grammar, names = from_ground_equations(theory.signature, [(eq.lhs, eq.rhs) for eq in equations])
    else:
        grammar, names = from_convergent_rs(theory.equations, bound, nf_order=nf_order, max_steps=max_steps)
    return grammar, list(dict.fromkeys(names.values()))
