"""Construction laws for term series."""

from collections.abc import Iterator, Sequence
from dataclasses import dataclass

from corallium.log import get_logger

from ._errors import ParseError, TheoryError
from ._parser import parse_term
from .congruence import extend_with_terms
from .grammars import TreeGrammar, WeightMap, enumerate_terms, is_empty, lift, membership, restrict_variables, simplify
from .learn import learn_atom_determinate
from .terms import App, Signature, Term, apply_subst, const, format_term, peano, variables

logger = get_logger()

PLACE = 'v_p'
"""Law variable for the place of the element, i.e. the number of elements before it."""

CONS = 'cons'
NIL = 'nil'


def slot_variable(offset: int) -> str:
    """`v_1` for the previous element, `v_2` for the one before, ..."""
    return f'v_{offset}'


def _is_cons(term: Term) -> bool:
    return isinstance(term, App) and term.symbol == CONS and len(term.args) == 2  # noqa: PLR2004


@dataclass(frozen=True)
class SeriesTask:
    """Explain each of the last `k` elements from the elements before it."""

    series: tuple[Term, ...]
    k: int

    def __post_init__(self) -> None:
        if not 1 <= self.k < len(self.series):
            msg = f'Expected 1 <= k < {len(self.series)} (the series length). Received: {self.k}'
            raise ValueError(msg)

    @property
    def depth(self) -> int:
        """Number of preceding elements known at every explained place."""
        return len(self.series) - self.k

    def encode(self, place: int) -> App:
        """`cons(len, cons(x_{q-1}, ... cons(x_0, nil)))` for the elements before `place`."""
        suffix: Term = const(NIL)
        for element in self.series[:place]:
            suffix = App(CONS, (element, suffix))
        return App(CONS, (peano(place), suffix))

    def examples(self, predicate: str = 'p') -> list[App]:
        """One `p(l.s, n)` atom per explained place."""
        return [
            App(predicate, (self.encode(place), self.series[place])) for place in range(self.depth, len(self.series))
        ]

    def window(self, place: int, depth: int | None = None) -> tuple[dict[str, Term], Term]:
        """Values of the law variables at `place` and the element a law has to produce there."""
        depth = self.depth if depth is None else depth
        sigma = {PLACE: peano(place)}
        sigma.update({slot_variable(offset): self.series[place - offset] for offset in range(1, depth + 1)})
        return sigma, self.series[place]


def parse_series(text: str, *, signature: Signature | None = None, k: int | None = None) -> SeriesTask:
    """Parse `a,b;c,d`: the elements after `;` are the ones to explain unless `k` says otherwise."""
    given, sep, explained = text.partition(';')
    items = [item.strip() for item in [*given.split(','), *explained.split(',')] if item.strip()]
    if not items:
        msg = f'Expected a comma separated series. Received: {text!r}'
        raise ParseError(msg)
    if k is None:
        if not sep:
            msg = f"Mark the elements to explain with ';' or pass k. Received: {text!r}"
            raise ParseError(msg)
        k = len([item for item in explained.split(',') if item.strip()])
    series = tuple(parse_term(item, signature=signature) for item in items)
    return SeriesTask(series, k)


def slot_bindings(pattern: Term) -> dict[str, Term]:
    """Law variable to the part of a `cons(length, cons(x_{q-1}, ...))` pattern it stands for."""
    if not _is_cons(pattern):
        msg = f'Expected a length-prefixed list pattern. Received: {format_term(pattern)}'
        raise TheoryError(msg)
    assert isinstance(pattern, App)
    bindings = {PLACE: pattern.args[0]}
    rest = pattern.args[1]
    while _is_cons(rest):
        assert isinstance(rest, App)
        bindings[slot_variable(len(bindings))] = rest.args[0]
        rest = rest.args[1]
    return bindings


def law_grammar(
    task: SeriesTask,
    grammar: TreeGrammar,
    *,
    classes: Sequence[str] | None = None,
) -> tuple[TreeGrammar, str]:
    """Grammar of the laws over `v_p, v_1, ..., v_depth` that reproduce every explained element.

    The determinate hypotheses for the examples `p(l.s, n)` share one pattern. Lifting them by the slot bindings of
    that pattern renames its variables back to `v_p` and `v_i`.

    """
    hypotheses = learn_atom_determinate(task.examples(), grammar=grammar, classes=classes)
    if not hypotheses.entries:
        logger.info('No determinate hypothesis', places=task.k)
        return TreeGrammar(grammar.signature, {'L': ()}), 'L'
    entry = hypotheses.entries[0]
    bindings = slot_bindings(entry.pattern)
    lifted, renamed = lift(entry.grammar, bindings)
    root = renamed[entry.root]
    laws = simplify(restrict_variables(lifted, bindings), [root])
    logger.info(
        'Computed construction laws',
        pattern=format_term(entry.pattern),
        places=task.k,
        depth=len(bindings) - 1,
        alternatives=laws.size,
    )
    return laws, root


def series_law(
    task: SeriesTask,
    grammar: TreeGrammar,
    weights: WeightMap | None = None,
    *,
    classes: Sequence[str] | None = None,
    max_count: int | None = None,
    max_weight: int | None = None,
) -> Iterator[Term]:
    """Laws by increasing weight; nothing when the operators cannot express one."""
    result, root = law_grammar(task, grammar, classes=classes)
    if is_empty(result, root):
        logger.info('No construction law', series=','.join(format_term(term) for term in task.series))
        return
    yield from enumerate_terms(result, root, weights, max_count=max_count, max_weight=max_weight)


def replay(law: Term, task: SeriesTask, grammar: TreeGrammar) -> list[int]:
    """Places where `law` does not produce the element, over every place with enough preceding elements."""
    depth = max((int(name[2:]) for name in variables(law) if name != PLACE), default=0)
    places = range(depth, len(task.series))
    windows = [task.window(place, depth) for place in places]
    extended, class_map = extend_with_terms(grammar, [target for _, target in windows])
    return [
        place
        for place, (sigma, target) in zip(places, windows, strict=True)
        if not membership(extended, class_map[target], apply_subst(law, sigma))
    ]
