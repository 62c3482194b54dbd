"""Cursor-movement commands of a screen editor as a class grammar over file positions."""

import string
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field
from functools import cached_property

from corallium.log import get_logger
from typing_extensions import Self

from ._errors import ParseError, TheoryError
from .grammars import Alt, Alternative, TreeGrammar, VarLeaf, WeightMap, enumerate_terms, intersect_all
from .terms import App, Signature, Symbol, Term, Var, format_term

logger = get_logger()

Position = tuple[int, int]
"""1-based `(column, line)`."""

START = 'x'
"""Variable standing for the start position in suggested command terms."""

SPACES = frozenset(' \t')
OPENING = {'(': ')', '[': ']', '{': '}'}
CLOSING = {close: open_ for open_, close in OPENING.items()}

COMMANDS = ('l', 'r', 'u', 'd', 'W', 'B', 'H', 'm')
"""Left, right, up, down, next word, previous word, home, and matching parenthesis."""

WEIGHT_PROFILES = {
    'unit': WeightMap(),
    'keys': WeightMap({'W': 2, 'B': 2, 'H': 2}),
}
"""`keys` counts the shift key of upper-case commands."""


def column_name(column: int) -> str:
    """`a`..`z`, then `aa`, `ab`, ..."""
    letters = ''
    while column > 0:
        column, rest = divmod(column - 1, 26)
        letters = string.ascii_lowercase[rest] + letters
    return letters


def position_name(position: Position) -> str:
    """E.g. `k2` for column 11 of line 2."""
    column, line = position
    return f'{column_name(column)}{line}'


def parse_position(text: str) -> Position:
    letters = text.rstrip(string.digits)
    digits = text[len(letters) :]
    if not letters or not digits or not letters.isalpha() or not letters.islower():
        msg = f"Expected a position like 'k2' (column letters, then the line number). Received: {text!r}"
        raise ParseError(msg)
    column = 0
    for letter in letters:
        column = column * 26 + string.ascii_lowercase.index(letter) + 1
    return column, int(digits)


@dataclass(frozen=True)
class EditorWorld:
    """File contents, padded to a rectangle, and the enabled commands."""

    lines: tuple[str, ...]
    commands: tuple[str, ...] = COMMANDS
    weights: WeightMap = field(default_factory=WeightMap)

    def __post_init__(self) -> None:
        if unknown := [command for command in self.commands if command not in COMMANDS]:
            msg = f'Unknown editor commands: {unknown}. Expected some of: {list(COMMANDS)}'
            raise TheoryError(msg)

    @classmethod
    def from_text(
        cls,
        text: str,
        *,
        commands: Sequence[str] = COMMANDS,
        weights: WeightMap | None = None,
    ) -> Self:
        raw = text.rstrip('\n').split('\n') if text.strip('\n') else ['']
        width = max(len(line) for line in raw)
        return cls(tuple(line.ljust(width) for line in raw), tuple(commands), weights or WeightMap())

    @property
    def width(self) -> int:
        return len(self.lines[0])

    @property
    def height(self) -> int:
        return len(self.lines)

    def positions(self) -> Iterator[Position]:
        for line in range(1, self.height + 1):
            for column in range(1, self.width + 1):
                yield column, line

    def contains(self, position: Position) -> bool:
        column, line = position
        return 1 <= column <= self.width and 1 <= line <= self.height

    def char(self, position: Position) -> str:
        column, line = position
        return self.lines[line - 1][column - 1]

    def _is_word_start(self, column: int, line: int) -> bool:
        if self.char((column, line)) in SPACES:
            return False
        return column == 1 or self.char((column - 1, line)) in SPACES

    def _next_word(self, position: Position) -> Position | None:
        column, line = position
        return next(
            ((other, line) for other in range(column + 1, self.width + 1) if self._is_word_start(other, line)),
            None,
        )

    def _previous_word(self, position: Position) -> Position | None:
        column, line = position
        return next(
            ((other, line) for other in range(column - 1, 0, -1) if self._is_word_start(other, line)),
            None,
        )

    def _matching(self, position: Position) -> Position | None:
        char = self.char(position)
        if char in OPENING:
            step, opening, closing = 1, char, OPENING[char]
        elif char in CLOSING:
            step, opening, closing = -1, char, CLOSING[char]
        else:
            return None
        cells = list(self.positions())
        idx = cells.index(position)
        depth = 0
        while 0 <= idx < len(cells):
            current = self.char(cells[idx])
            if current == opening:
                depth += 1
            elif current == closing:
                depth -= 1
                if depth == 0:
                    return cells[idx]
            idx += step
        return None

    @cached_property
    def _moves(self) -> dict[str, Callable[[Position], Position | None]]:
        def _shift(d_column: int, d_line: int) -> Callable[[Position], Position | None]:
            def _move(position: Position) -> Position | None:
                target = (position[0] + d_column, position[1] + d_line)
                return target if self.contains(target) else None

            return _move

        return {
            'l': _shift(-1, 0),
            'r': _shift(1, 0),
            'u': _shift(0, -1),
            'd': _shift(0, 1),
            'W': self._next_word,
            'B': self._previous_word,
            'm': self._matching,
        }

    def apply(self, command: str, position: Position | None = None) -> Position | None:
        """Target of `command`, or None where it is undefined. `H` takes no position."""
        if command == 'H':
            return (1, 1)
        if position is None:
            msg = f"Command '{command}' needs a position"
            raise TheoryError(msg)
        return self._moves[command](position)

    def evaluate(self, term: Term, start: Position) -> Position | None:
        """Run a command term with `x` bound to `start`."""
        if isinstance(term, Var):
            return start
        assert isinstance(term, App)
        if not term.args:
            return self.apply(term.symbol)
        inner = self.evaluate(term.args[0], start)
        return None if inner is None else self.apply(term.symbol, inner)


def editor_grammar(world: EditorWorld) -> tuple[TreeGrammar, dict[Position, str]]:
    """One nonterminal per position: `c(N_q)` is an alternative of `N_q'` whenever `c(q) = q'`."""
    names = {position: position_name(position) for position in world.positions()}
    rules: dict[str, list[Alternative]] = {name: [] for name in names.values()}
    symbols = []
    for command in world.commands:
        if command == 'H':
            symbols.append(Symbol(command, 0))
            home = world.apply(command)
            assert home is not None
            rules[names[home]].append(Alt(command))
            continue
        symbols.append(Symbol(command, 1))
        for position, name in names.items():
            target = world.apply(command, position)
            if target is not None:
                rules[names[target]].append(Alt(command, (name,)))
    grammar = TreeGrammar(Signature(tuple(symbols)), {name: tuple(alts) for name, alts in rules.items()})
    logger.debug('Built editor grammar', positions=len(names), alternatives=grammar.size)
    return grammar, names


def _with_start(grammar: TreeGrammar, start: str) -> TreeGrammar:
    rules = dict(grammar.rules)
    rules[start] = (VarLeaf(START), *rules[start])
    return grammar.with_rules(rules)


def editor_suggest(
    world: EditorWorld,
    moves: Sequence[tuple[Position, Position]],
    *,
    max_count: int | None = None,
    max_weight: int | None = None,
) -> Iterator[Term]:
    """Command terms over `x` that take every start position to its end position, cheapest first."""
    if not moves:
        msg = 'Expected at least one (start, end) move'
        raise ValueError(msg)
    for start, end in moves:
        for position in (start, end):
            if not world.contains(position):
                msg = f'Position {position_name(position)} is outside the file'
                raise TheoryError(msg)
    grammar, names = editor_grammar(world)
    targets = [(_with_start(grammar, names[start]), names[end]) for start, end in moves]
    result, root = intersect_all(targets)
    logger.info(
        'Generalized cursor movements',
        moves=' '.join(f'{position_name(start)}:{position_name(end)}' for start, end in moves),
        alternatives=result.size,
    )
    for term in enumerate_terms(result, root, world.weights, max_count=max_count, max_weight=max_weight):
        logger.debug('Suggested command', term=format_term(term))
        yield term
