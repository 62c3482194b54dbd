"""First-order terms, signatures, substitutions, and syntactic anti-unification."""

from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

from typing_extensions import Self

from ._errors import TheoryError

INFIX_PRECEDENCE = {'<': 1, '<=': 1, '=': 1, '+': 2, '-': 2, '*': 3, '/': 3, '//': 3}
"""Binary symbols printed infix, with their binding strength."""

TUPLE_PREFIX = 'tuple'


@dataclass(frozen=True)
class Symbol:
    """A function symbol with a fixed arity."""

    name: str
    arity: int
    is_constructor: bool = False


@dataclass(frozen=True)
class Predicate:
    name: str
    arity: int = 1
    negatable: bool = True


@dataclass(frozen=True)
class Signature:
    """Function symbols and predicates; names are unique."""

    symbols: tuple[Symbol, ...] = ()
    predicates: tuple[Predicate, ...] = ()

    def __post_init__(self) -> None:
        seen: dict[str, Symbol] = {}
        for symbol in self.symbols:
            if symbol.name in seen:
                msg = f"Symbol '{symbol.name}' is declared twice ({seen[symbol.name]} and {symbol})"
                raise TheoryError(msg)
            seen[symbol.name] = symbol

    @cached_property
    def by_name(self) -> dict[str, Symbol]:
        return {symbol.name: symbol for symbol in self.symbols}

    @cached_property
    def constants(self) -> tuple[Symbol, ...]:
        return tuple(symbol for symbol in self.symbols if symbol.arity == 0)

    def get(self, name: str) -> Symbol | None:
        return self.by_name.get(name)

    def __contains__(self, name: object) -> bool:
        return name in self.by_name

    def merge(self, other: Self) -> Self:
        """Union of both signatures, keeping the order of first declaration."""
        symbols = list(self.symbols)
        for symbol in other.symbols:
            if (known := self.get(symbol.name)) is None:
                symbols.append(symbol)
            elif known.arity != symbol.arity:
                msg = f"Symbol '{symbol.name}' has arity {known.arity} and {symbol.arity}"
                raise TheoryError(msg)
        predicates = list(self.predicates)
        names = {predicate.name for predicate in predicates}
        predicates.extend(predicate for predicate in other.predicates if predicate.name not in names)
        return type(self)(tuple(symbols), tuple(predicates))

    def with_symbols(self, *symbols: Symbol) -> Self:
        return self.merge(type(self)(symbols))


class Term:
    """Common base of `Var` and `App`; terms are immutable and hashable."""

    __slots__ = ()

    @property
    def key(self) -> tuple[Any, ...]:
        raise NotImplementedError

    @property
    def size(self) -> int:
        raise NotImplementedError

    @property
    def is_ground(self) -> bool:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Var(Term):
    """A named variable."""

    name: str
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, '_hash', hash(('var', self.name)))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Var) and other.name == self.name

    def __str__(self) -> str:
        return self.name

    @property
    def key(self) -> tuple[Any, ...]:
        return (0, self.name)

    @property
    def size(self) -> int:
        return 1

    @property
    def is_ground(self) -> bool:
        return False


@dataclass(frozen=True, eq=False)
class App(Term):
    """Application of a function symbol; constants have no arguments."""

    symbol: str
    args: tuple[Term, ...] = ()
    _hash: int = field(init=False, repr=False, compare=False)
    _key: tuple[Any, ...] = field(init=False, repr=False, compare=False)
    _size: int = field(init=False, repr=False, compare=False)
    _ground: bool = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, '_hash', hash((self.symbol, *(hash(arg) for arg in self.args))))
        object.__setattr__(self, '_key', (1, self.symbol, tuple(arg.key for arg in self.args)))
        object.__setattr__(self, '_size', 1 + sum(arg.size for arg in self.args))
        object.__setattr__(self, '_ground', all(arg.is_ground for arg in self.args))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, App) or other._hash != self._hash:
            return False
        return other.symbol == self.symbol and other.args == self.args

    def __str__(self) -> str:
        return format_term(self)

    @property
    def key(self) -> tuple[Any, ...]:
        return self._key

    @property
    def size(self) -> int:
        return self._size

    @property
    def is_ground(self) -> bool:
        return self._ground


Substitution = Mapping[str, Term]
"""Variable name to term."""


def term_key(term: Term) -> tuple[Any, ...]:
    """Canonical order: variables first, then by symbol name and children."""
    return term.key


def term_size(term: Term) -> int:
    return term.size


def is_ground(term: Term) -> bool:
    return term.is_ground


def variables(term: Term) -> tuple[str, ...]:
    """Variable names in order of first occurrence."""
    found: dict[str, None] = {}
    stack: list[Term] = [term]
    while stack:
        current = stack.pop()
        if isinstance(current, Var):
            found.setdefault(current.name)
        elif isinstance(current, App) and not current.is_ground:
            stack.extend(reversed(current.args))
    return tuple(found)


def subterms(term: Term) -> Iterator[Term]:
    """Pre-order walk, including `term` itself."""
    yield term
    if isinstance(term, App):
        for arg in term.args:
            yield from subterms(arg)


def symbols_of(term: Term) -> set[str]:
    return {sub.symbol for sub in subterms(term) if isinstance(sub, App)}


def const(name: str) -> App:
    return App(name)


def peano(value: int) -> Term:
    """Numeral `s^value(0)`."""
    term: Term = App('0')
    for _ in range(value):
        term = App('s', (term,))
    return term


def peano_value(term: Term) -> int | None:
    """Inverse of `peano`, or None for anything that is not a numeral."""
    count = 0
    while isinstance(term, App) and term.symbol == 's' and len(term.args) == 1:
        count += 1
        term = term.args[0]
    if isinstance(term, App) and term.symbol == '0' and not term.args:
        return count
    return None


def tuple_symbol(arity: int) -> str:
    return f'{TUPLE_PREFIX}{arity}'


def tuple_arity(symbol: str) -> int | None:
    suffix = symbol.removeprefix(TUPLE_PREFIX)
    if suffix != symbol and suffix.isdigit():
        return int(suffix)
    return None


def make_tuple(items: Sequence[Term]) -> Term:
    """Tuple of two or more items; a single item is returned as-is."""
    if len(items) == 1:
        return items[0]
    return App(tuple_symbol(len(items)), tuple(items))


def tuple_items(term: Term) -> tuple[Term, ...]:
    if isinstance(term, App) and tuple_arity(term.symbol) == len(term.args):
        return term.args
    return (term,)


def signature_of(terms: Iterable[Term], *, constructors: Iterable[str] = ()) -> Signature:
    """Smallest signature covering every symbol that occurs in `terms`."""
    arities: dict[str, int] = {}
    for term in terms:
        for sub in subterms(term):
            if isinstance(sub, App):
                if arities.setdefault(sub.symbol, len(sub.args)) != len(sub.args):
                    msg = f"Symbol '{sub.symbol}' is used with arity {arities[sub.symbol]} and {len(sub.args)}"
                    raise TheoryError(msg)
    ctors = set(constructors)
    return Signature(tuple(Symbol(name, arity, name in ctors) for name, arity in arities.items()))


# ----------------------------------------------------------------------------------------------------------------------
# Printing


def _is_infix(term: App) -> bool:
    return term.symbol in INFIX_PRECEDENCE and len(term.args) == 2  # noqa: PLR2004


def _format(term: Term, parent: int) -> str:
    if not isinstance(term, App):
        return str(term)
    if _is_infix(term):
        level = INFIX_PRECEDENCE[term.symbol]
        # Left-associative operators; comparisons do not chain
        left = _format(term.args[0], level if level > 1 else level + 1)
        right = _format(term.args[1], level + 1)
        text = f'{left}{term.symbol}{right}'
        return f'({text})' if level < parent else text
    inner = ','.join(_format(arg, 0) for arg in term.args)
    if tuple_arity(term.symbol) == len(term.args):
        return f'({inner})'
    return f'{term.symbol}({inner})' if term.args else term.symbol


def format_term(term: Term) -> str:
    """Render with infix operators, e.g. `x*(y*z')+x*y`."""
    return _format(term, 0)


def format_substitution(subst: Substitution) -> str:
    return '{' + ', '.join(f'{name}↦{format_term(value)}' for name, value in subst.items()) + '}'


# ----------------------------------------------------------------------------------------------------------------------
# Substitutions


def apply_subst(term: Term, subst: Substitution) -> Term:
    if not subst or term.is_ground:
        return term
    if isinstance(term, App):
        return App(term.symbol, tuple(apply_subst(arg, subst) for arg in term.args))
    return subst.get(str(term), term)


def compose(first: Substitution, second: Substitution) -> dict[str, Term]:
    """Apply `first`, then `second`."""
    composed = {name: apply_subst(value, second) for name, value in first.items()}
    for name, value in second.items():
        composed.setdefault(name, value)
    return {name: value for name, value in composed.items() if value != Var(name)}


def rename(term: Term, mapping: Mapping[str, str]) -> Term:
    return apply_subst(term, {old: Var(new) for old, new in mapping.items()})


def match_syntactic(pattern: Term, target: Term) -> dict[str, Term] | None:
    """Matcher σ with `pattern·σ == target`, binding only variables of `pattern`."""
    bindings: dict[str, Term] = {}
    stack = [(pattern, target)]
    while stack:
        left, right = stack.pop()
        if isinstance(left, Var):
            if bindings.setdefault(left.name, right) != right:
                return None
        elif left.is_ground:
            if left != right:
                return None
        elif (
            isinstance(left, App)
            and isinstance(right, App)
            and right.symbol == left.symbol
            and len(right.args) == len(left.args)
        ):
            stack.extend(zip(left.args, right.args, strict=True))
        else:
            return None
    return bindings


def renaming_equivalent(first: Term, second: Term) -> bool:
    """True when a variable bijection maps one term onto the other."""
    forward = match_syntactic(first, second)
    backward = match_syntactic(second, first)
    if forward is None or backward is None:
        return False
    return all(isinstance(value, Var) for value in forward.values()) and len(set(forward.values())) == len(forward)


def lgg_variable_name(column: Sequence[Term]) -> str:
    """Canonical variable for the abstracted subterms, e.g. `v_{0,s(s(0))}`."""
    return 'v_{' + ','.join(format_term(term) for term in column) + '}'


def lgg_syntactic(terms: Sequence[Term]) -> tuple[Term, tuple[dict[str, Term], ...]]:
    """Most specific syntactic generalization and the matchers onto each input."""
    if not terms:
        msg = 'Expected at least one term to generalize'
        raise ValueError(msg)
    names: dict[tuple[Term, ...], str] = {}

    def _lgg(column: tuple[Term, ...]) -> Term:
        first = column[0]
        if all(term == first for term in column):
            return first
        if isinstance(first, App):
            apps = [
                term
                for term in column
                if isinstance(term, App) and term.symbol == first.symbol and len(term.args) == len(first.args)
            ]
            if len(apps) == len(column):
                return App(
                    first.symbol,
                    tuple(_lgg(tuple(app.args[idx] for app in apps)) for idx in range(len(first.args))),
                )
        if column not in names:
            names[column] = lgg_variable_name(column)
        return Var(names[column])

    general = _lgg(tuple(terms))
    matchers = []
    for term in terms:
        matcher = match_syntactic(general, term)
        if matcher is None:  # pragma: no cover
            msg = f'Internal error: {format_term(general)} does not generalize {format_term(term)}'
            raise RuntimeError(msg)
        matchers.append(matcher)
    return general, tuple(matchers)


def is_constructor_term(term: Term, signature: Signature) -> bool:
    for sub in subterms(term):
        if isinstance(sub, App):
            symbol = signature.get(sub.symbol)
            if symbol is None or not symbol.is_constructor:
                return False
    return True
