"""Grammars whose nonterminals produce congruence classes, plus the rewriting used to filter candidates."""

import itertools
import re
from collections import defaultdict
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from os.path import commonprefix

from corallium.log import get_logger

from ._errors import BudgetExceededError, TheoryError
from .grammars import Alt, Alternative, TreeGrammar, VarLeaf, states
from .terms import (
    App,
    Signature,
    Symbol,
    Term,
    Var,
    apply_subst,
    format_term,
    match_syntactic,
    peano_value,
    signature_of,
    subterms,
    term_size,
    variables,
)

logger = get_logger()

UNIVERSAL = 'Nt'
"""Name of the auxiliary nonterminal that covers every class of a compressed quotient."""


def class_name(representative: Term, taken: Iterable[str] = ()) -> str:
    """Nonterminal name for a class, e.g. `N2` for `s(s(0))` or `N_g` for `g`."""
    value = peano_value(representative)
    if value is not None:
        base = f'N{value}'
    else:
        base = 'N_' + (re.sub(r'[^A-Za-z0-9_]+', '_', format_term(representative)).strip('_') or 'x')
    used = set(taken)
    name = base
    while name in used:
        name += "'"
    return name


# ----------------------------------------------------------------------------------------------------------------------
# Theories


@dataclass(frozen=True)
class Equation:
    lhs: Term
    rhs: Term
    oriented: bool = True
    """Oriented equations are used as rewrite rules `lhs → rhs`."""

    def __str__(self) -> str:
        return f'{format_term(self.lhs)} = {format_term(self.rhs)}'


@dataclass(frozen=True)
class EquationalTheory:
    """Equations over a signature; the oriented ones double as a rewrite system."""

    signature: Signature
    equations: tuple[Equation, ...] = ()

    def __post_init__(self) -> None:
        for equation in self.equations:
            for side in (equation.lhs, equation.rhs):
                for sub in subterms(side):
                    if isinstance(sub, App):
                        symbol = self.signature.get(sub.symbol)
                        if symbol is None or symbol.arity != len(sub.args):
                            msg = f"Equation '{equation}' uses {sub.symbol}/{len(sub.args)} outside the signature"
                            raise TheoryError(msg)
            if equation.oriented:
                if isinstance(equation.lhs, Var):
                    msg = f"Rewrite rule '{equation}' has a variable left-hand side"
                    raise TheoryError(msg)
                if extra := set(variables(equation.rhs)) - set(variables(equation.lhs)):
                    msg = f"Rewrite rule '{equation}' introduces variables {sorted(extra)}"
                    raise TheoryError(msg)

    @property
    def rules(self) -> tuple[tuple[Term, Term], ...]:
        return tuple((equation.lhs, equation.rhs) for equation in self.equations if equation.oriented)


# ----------------------------------------------------------------------------------------------------------------------
# Ground equations


def _sort_alternatives(alternatives: Iterable[Alternative]) -> tuple[Alternative, ...]:
    def _key(alt: Alternative) -> tuple[int, str, tuple[str, ...]]:
        if isinstance(alt, VarLeaf):
            return (-1, alt.name, ())
        return (len(alt.children), alt.symbol, alt.children)

    return tuple(sorted(dict.fromkeys(alternatives), key=_key))


def from_ground_equations(
    signature: Signature,
    equations: Sequence[tuple[Term, Term]],
) -> tuple[TreeGrammar, dict[Term, str]]:
    """Deterministic grammar with one nonterminal per congruence class of the subterms of `equations`.

    Congruence closure by union-find: equal sides are merged, then applications whose arguments share classes are
    merged until nothing changes.

    """
    universe: dict[Term, None] = {}
    for lhs, rhs in equations:
        for side in (lhs, rhs):
            if not side.is_ground:
                msg = f'Expected ground equations. Received: {format_term(lhs)} = {format_term(rhs)}'
                raise TheoryError(msg)
            universe.update(dict.fromkeys(subterms(side)))
    parent: dict[Term, Term] = {term: term for term in universe}

    def _find(term: Term) -> Term:
        while parent[term] != term:
            parent[term] = parent[parent[term]]
            term = parent[term]
        return term

    def _union(first: Term, second: Term) -> bool:
        root_a, root_b = _find(first), _find(second)
        if root_a == root_b:
            return False
        parent[root_b] = root_a
        return True

    for lhs, rhs in equations:
        _union(lhs, rhs)
    changed = True
    while changed:
        changed = False
        table: dict[tuple[str, tuple[Term, ...]], Term] = {}
        for term in universe:
            assert isinstance(term, App)
            signature_key = (term.symbol, tuple(_find(arg) for arg in term.args))
            if signature_key in table:
                changed |= _union(table[signature_key], term)
            else:
                table[signature_key] = term

    members: dict[Term, list[Term]] = defaultdict(list)
    for term in universe:
        members[_find(term)].append(term)
    names: dict[Term, str] = {}
    taken: set[str] = set()
    for root, group in members.items():
        representative = min(group, key=lambda term: (term.size, term.key))
        names[root] = class_name(representative, taken)
        taken.add(names[root])

    rules: dict[str, list[Alternative]] = {names[root]: [] for root in members}
    for term in universe:
        assert isinstance(term, App)
        alt = Alt(term.symbol, tuple(names[_find(arg)] for arg in term.args))
        rules[names[_find(term)]].append(alt)
    grammar = TreeGrammar(
        signature.merge(signature_of(universe)),
        {name: _sort_alternatives(alts) for name, alts in rules.items()},
    )
    logger.debug('Closed ground equations', classes=len(rules), subterms=len(universe))
    return grammar, {term: names[_find(term)] for term in universe}


def extend_with_terms(
    grammar: TreeGrammar,
    terms: Iterable[Term],
    *,
    classes: Sequence[str] | None = None,
) -> tuple[TreeGrammar, dict[Term, str]]:
    """Class nonterminal of every ground term, adding rules for tuples and other terms that have no class yet.

    Terms produced by several nonterminals resolve to the first one in `classes` (default: rule order).

    """
    order = list(classes) if classes is not None else list(grammar.rules)
    rank = {name: idx for idx, name in enumerate(order)}
    signature = grammar.signature
    rules = {name: list(alts) for name, alts in grammar.rules.items()}
    found: dict[Term, str] = {}

    def _resolve(term: Term) -> str:
        if term in found:
            return found[term]
        if not term.is_ground:
            msg = f'Expected a ground term. Received: {format_term(term)}'
            raise TheoryError(msg)
        assert isinstance(term, App)
        children = tuple(_resolve(arg) for arg in term.args)
        owners = [parent for parent, alt in by_symbol.get(term.symbol, ()) if alt.children == children]
        known = sorted((name for name in owners if name in rank), key=rank.__getitem__)
        if known:
            found[term] = known[0]
            return known[0]
        name = class_name(term, rules)
        rules[name] = [Alt(term.symbol, children)]
        by_symbol[term.symbol].append((name, Alt(term.symbol, children)))
        order.append(name)
        rank[name] = len(rank)
        found[term] = name
        return name

    by_symbol: dict[str, list[tuple[str, Alt]]] = defaultdict(list)
    for name, alts in grammar.rules.items():
        for alt in alts:
            if isinstance(alt, Alt):
                by_symbol[alt.symbol].append((name, alt))

    terms = list(terms)
    for term in terms:
        for sub in subterms(term):
            if isinstance(sub, App) and sub.symbol not in signature:
                signature = signature.with_symbols(Symbol(sub.symbol, len(sub.args), is_constructor=True))
    for term in terms:
        # A term whose class is already determined needs no new rule
        known_states = states(grammar, term, strict=False)
        hits = sorted((name for name in known_states if name in rank), key=rank.__getitem__)
        if hits:
            found[term] = hits[0]
        else:
            _resolve(term)
    extended = TreeGrammar(signature, {name: tuple(alts) for name, alts in rules.items()})
    return extended, {term: found[term] for term in terms}


# ----------------------------------------------------------------------------------------------------------------------
# Finite quotients


Evaluator = Callable[[str, tuple[int, ...]], int | None]
"""Maps a symbol and argument class indices to the result class index, or None where undefined."""


@dataclass(frozen=True)
class CarrierSpec:
    """A finite quotient of the term algebra given by an evaluation table over class indices."""

    signature: Signature
    names: tuple[str, ...]
    representatives: tuple[Term | None, ...]
    evaluate: Evaluator
    absorbing: int | None = None
    """Index of the class that collects every value beyond the explicit representatives."""
    values: tuple[object, ...] = field(default=())
    """Optional semantic value per class, for callers that evaluate terms directly."""

    def __post_init__(self) -> None:
        if len(self.names) != len(self.representatives):
            msg = f'Expected one representative per class name ({len(self.names)} != {len(self.representatives)})'
            raise TheoryError(msg)
        if len(set(self.names)) != len(self.names):
            msg = f'Class names must be unique: {self.names}'
            raise TheoryError(msg)
        if self.absorbing is not None and not 0 <= self.absorbing < len(self.names):
            msg = f'Absorbing class index {self.absorbing} is out of range'
            raise TheoryError(msg)

    @property
    def size(self) -> int:
        return len(self.names)

    def apply(self, symbol: str, args: tuple[int, ...]) -> int | None:
        """Checked call of `evaluate`."""
        arity = self.signature.by_name[symbol].arity
        if len(args) != arity:
            msg = f"Evaluator called with {len(args)} arguments for '{symbol}/{arity}'"
            raise TheoryError(msg)
        result = self.evaluate(symbol, args)
        if result is not None and not 0 <= result < self.size:
            msg = f"Evaluator returned class {result} for '{symbol}{args}', expected 0..{self.size - 1}"
            raise TheoryError(msg)
        return result

    def table(self) -> dict[str, dict[tuple[int, ...], int]]:
        """Defined entries of the evaluation table per symbol."""
        result: dict[str, dict[tuple[int, ...], int]] = {}
        for symbol in self.signature.symbols:
            entries = {}
            for combo in itertools.product(range(self.size), repeat=symbol.arity):
                value = self.apply(symbol.name, combo)
                if value is not None:
                    entries[combo] = value
            result[symbol.name] = entries
        return result

    def class_of(self, term: Term) -> int | None:
        """Evaluate a ground term to its class index, or None when some operation is undefined."""
        if not isinstance(term, App):
            return None
        args = []
        for arg in term.args:
            value = self.class_of(arg)
            if value is None:
                return None
            args.append(value)
        if term.symbol not in self.signature:
            return None
        return self.apply(term.symbol, tuple(args))


def _box_cover(cells: set[tuple[int, ...]], arity: int) -> list[tuple[tuple[int, int], ...]]:
    """Greedy cover of `cells` by disjoint boxes with contiguous sides."""
    remaining = set(cells)
    boxes = []
    for cell in sorted(cells):
        if cell not in remaining:
            continue
        low, high = list(cell), list(cell)
        for dim in reversed(range(arity)):
            while True:
                ranges = [range(low[idx], high[idx] + 1) for idx in range(arity)]
                ranges[dim] = range(high[dim] + 1, high[dim] + 2)
                slab = list(itertools.product(*ranges))
                if all(item in remaining for item in slab):
                    high[dim] += 1
                else:
                    break
        box = tuple(zip(low, high, strict=True))
        remaining -= set(itertools.product(*(range(lo, hi + 1) for lo, hi in box)))
        boxes.append(box)
    return boxes


def finite_quotient(spec: CarrierSpec, *, compress: bool = False) -> TreeGrammar:
    """Class grammar of a finite carrier: `f(N_a1..N_an)` is an alternative of `N_b` iff `f(a1..an)` evaluates to `b`.

    With `compress`, the argument tuples of each class are covered by boxes of contiguous class ranges. Ranges wider
    than one class become auxiliary union nonterminals (the full range is `Nt`), which keeps products of lifted
    grammars small. Class languages are the same either way.

    """
    table = spec.table()
    rules: dict[str, list[Alternative]] = {name: [] for name in spec.names}
    if not compress:
        for symbol in spec.signature.symbols:
            for combo, value in table[symbol.name].items():
                rules[spec.names[value]].append(Alt(symbol.name, tuple(spec.names[idx] for idx in combo)))
        grammar = TreeGrammar(spec.signature, {name: tuple(alts) for name, alts in rules.items()})
        logger.debug('Built finite quotient', classes=spec.size, alternatives=grammar.size)
        return grammar

    last = spec.size - 1
    intervals: dict[tuple[int, int], str] = {(idx, idx): name for idx, name in enumerate(spec.names)}
    pending: list[tuple[int, int]] = [(idx, idx) for idx in range(spec.size)]

    def _interval(low: int, high: int) -> str:
        if (low, high) not in intervals:
            if (low, high) == (0, last) and UNIVERSAL not in spec.names:
                name = UNIVERSAL
            else:
                first, second = spec.names[low], spec.names[high]
                name = f'{first}to{second[len(commonprefix([first, second])) :]}'
            intervals[low, high] = name
            rules[name] = []
            pending.append((low, high))
        return intervals[low, high]

    while pending:
        low, high = pending.pop(0)
        target = intervals[low, high]
        for symbol in spec.signature.symbols:
            cells = {combo for combo, value in table[symbol.name].items() if low <= value <= high}
            for box in _box_cover(cells, symbol.arity):
                rules[target].append(Alt(symbol.name, tuple(_interval(lo, hi) for lo, hi in box)))
    grammar = TreeGrammar(spec.signature, {name: tuple(alts) for name, alts in rules.items()})
    logger.debug('Built compressed quotient', classes=spec.size, nonterminals=len(rules), alternatives=grammar.size)
    return grammar


# ----------------------------------------------------------------------------------------------------------------------
# Rewriting


def rewrite_step(term: Term, rules: Sequence[tuple[Term, Term]]) -> Term | None:
    """One leftmost-outermost rewrite step, or None for a normal form."""
    for lhs, rhs in rules:
        matcher = match_syntactic(lhs, term)
        if matcher is not None:
            return apply_subst(rhs, matcher)
    if isinstance(term, App):
        for idx, arg in enumerate(term.args):
            reduced = rewrite_step(arg, rules)
            if reduced is not None:
                return App(term.symbol, (*term.args[:idx], reduced, *term.args[idx + 1 :]))
    return None


def is_normal_form(term: Term, rules: Sequence[tuple[Term, Term]]) -> bool:
    return rewrite_step(term, rules) is None


def normalize(term: Term, rules: Sequence[tuple[Term, Term]], *, max_steps: int = 10_000) -> Term:
    """Innermost normal form.

    Raises:
        BudgetExceededError: after `max_steps` rewrite steps

    """
    steps = 0
    cache: dict[Term, Term] = {}

    def _normalize(current: Term) -> Term:
        nonlocal steps
        if current in cache:
            return cache[current]
        original = current
        while True:
            if isinstance(current, App) and current.args:
                current = App(current.symbol, tuple(_normalize(arg) for arg in current.args))
            for lhs, rhs in rules:
                matcher = match_syntactic(lhs, current)
                if matcher is not None:
                    steps += 1
                    if steps > max_steps:
                        msg = f'Rewriting {format_term(term)} did not terminate within {max_steps} steps'
                        raise BudgetExceededError(msg)
                    current = apply_subst(rhs, matcher)
                    break
            else:
                cache[original] = current
                return current

    return _normalize(term)


NormalFormOrder = Callable[[Term], int]
"""Rank of a ground normal form; no argument may outrank its term, and each rank holds finitely many terms."""


def _ground_normal_forms(
    signature: Signature,
    rules: Sequence[tuple[Term, Term]],
    bound: int,
    nf_order: NormalFormOrder,
) -> list[Term]:
    """Ground normal forms of rank at most `bound`, lowest rank first."""
    found: list[Term] = []
    ranks: dict[Term, int] = {}
    start, end, first = 0, 0, True
    while first or start < end:
        for symbol in signature.symbols:
            if symbol.arity == 0 and not first:
                continue
            for combo in itertools.product(range(end), repeat=symbol.arity):
                if combo and max(combo) < start:
                    continue
                candidate = App(symbol.name, tuple(found[idx] for idx in combo))
                if candidate in ranks or (rank := nf_order(candidate)) > bound:
                    continue
                # Arguments are normal, so only the root can be a redex
                if all(match_syntactic(lhs, candidate) is None for lhs, _ in rules):
                    ranks[candidate] = rank
                    found.append(candidate)
        first = False
        start, end = end, len(found)
    return sorted(found, key=lambda term: (ranks[term], term.key))


def from_convergent_rs(
    theory: EquationalTheory,
    bound: int,
    *,
    nf_order: NormalFormOrder = term_size,
    max_steps: int = 10_000,
) -> tuple[TreeGrammar, dict[Term, str]]:
    """One nonterminal per ground normal form whose `nf_order` rank is at most `bound` (term size by default).

    `f(N_t1..N_tn)` is an alternative of `N_t` whenever `f(t1..tn)` rewrites to `t`. The oriented equations must be
    ground confluent and terminating, and the normal form of `f(t1..tn)` must not rank below any `ti`; neither
    property is checked.

    """
    rules = theory.rules
    normal_forms = _ground_normal_forms(theory.signature, rules, bound, nf_order)
    names: dict[Term, str] = {}
    for term in normal_forms:
        names[term] = class_name(term, names.values())
    productions: dict[str, list[Alternative]] = {name: [] for name in names.values()}
    for symbol in theory.signature.symbols:
        for args in itertools.product(normal_forms, repeat=symbol.arity):
            result = normalize(App(symbol.name, tuple(args)), rules, max_steps=max_steps)
            if result in names:
                productions[names[result]].append(Alt(symbol.name, tuple(names[arg] for arg in args)))
    grammar = TreeGrammar(theory.signature, {name: tuple(alts) for name, alts in productions.items()})
    logger.debug('Built normal-form class grammar', normal_forms=len(normal_forms), alternatives=grammar.size)
    return grammar, names


def truncate(grammar: TreeGrammar, max_alternatives: int) -> TreeGrammar:
    """Keep at most `max_alternatives` per rule, preferring variables, constants, then constructor alternatives."""
    if max_alternatives < 1:
        msg = f'Expected at least one alternative per rule. Received: {max_alternatives}'
        raise ValueError(msg)

    def _priority(alt: Alternative) -> int:
        if isinstance(alt, VarLeaf) or not alt.children:
            return 0
        symbol = grammar.signature.get(alt.symbol)
        return 1 if symbol is not None and symbol.is_constructor else 2

    return grammar.with_rules({
        name: sorted(alts, key=_priority)[:max_alternatives] for name, alts in grammar.rules.items()
    })


# ----------------------------------------------------------------------------------------------------------------------
# Filters


_HOLE = Var('_')


def _pattern(term: Term) -> Term:
    """Replace every variable by the anonymous hole."""
    if isinstance(term, Var):
        return _HOLE
    assert isinstance(term, App)
    return App(term.symbol, tuple(_pattern(arg) for arg in term.args))


def normal_form_grammar(
    theory: EquationalTheory,
    *,
    signature: Signature | None = None,
    variables: Iterable[str] = (),
    root: str = 'NF',
) -> tuple[TreeGrammar, str]:
    """Grammar whose `root` produces the terms without a redex of the oriented equations.

    Each state records which proper subpatterns of left-hand sides match the term; a symbol application whose state
    contains a whole left-hand side is a redex and gets no alternative. `variables` become VarLeaves and behave like
    fresh constants.

    Raises:
        TheoryError: when a left-hand side is not linear; filter with `is_normal_form` instead

    """
    signature = signature or theory.signature
    lhs_patterns: set[Term] = set()
    patterns: set[Term] = set()
    for lhs, _ in theory.rules:
        names = [sub.name for sub in subterms(lhs) if isinstance(sub, Var)]
        if len(names) != len(set(names)):
            msg = f"Left-hand side '{format_term(lhs)}' is not linear; filter candidates with `is_normal_form`"
            raise TheoryError(msg)
        lhs_patterns.add(_pattern(lhs))
        patterns.update(sub for sub in subterms(_pattern(lhs)) if isinstance(sub, App))
    by_symbol: dict[str, list[App]] = defaultdict(list)
    for pattern in patterns:
        assert isinstance(pattern, App)
        by_symbol[pattern.symbol].append(pattern)

    def _delta(symbol: str, children: tuple[frozenset[Term], ...]) -> frozenset[Term] | None:
        matched = frozenset(
            pattern
            for pattern in by_symbol.get(symbol, ())
            if len(pattern.args) == len(children)
            and all(arg == _HOLE or arg in found for arg, found in zip(pattern.args, children, strict=True))
        )
        return None if matched & lhs_patterns else matched

    state_ids: dict[frozenset[Term], str] = {}
    rules: dict[str, dict[Alternative, None]] = {}

    def _state(state: frozenset[Term]) -> str:
        if state not in state_ids:
            state_ids[state] = f'{root}{len(state_ids)}'
            rules[state_ids[state]] = {}
        return state_ids[state]

    for name in sorted(variables):
        rules[_state(frozenset())].setdefault(VarLeaf(name))
    for symbol in signature.constants:
        target = _delta(symbol.name, ())
        if target is not None:
            rules[_state(target)].setdefault(Alt(symbol.name))
    symbols = [symbol for symbol in signature.symbols if symbol.arity]
    done = 0
    while done < len(state_ids):
        current = list(state_ids)
        boundary, done = done, len(current)
        for symbol in symbols:
            for combo in itertools.product(range(len(current)), repeat=symbol.arity):
                if max(combo) < boundary:
                    continue
                target = _delta(symbol.name, tuple(current[idx] for idx in combo))
                if target is not None:
                    alt = Alt(symbol.name, tuple(state_ids[current[idx]] for idx in combo))
                    rules[_state(target)].setdefault(alt)
    result = {name: tuple(alts) for name, alts in rules.items()}
    result[root] = tuple(dict.fromkeys(alt for alts in rules.values() for alt in alts))
    logger.debug('Built normal-form grammar', states=len(state_ids), rules=len(theory.rules))
    return TreeGrammar(signature, result), root


def variable_set_grammar(
    signature: Signature,
    lower: Iterable[str],
    upper: Iterable[str],
) -> tuple[TreeGrammar, str]:
    """Grammar for the terms `t` with `lower ⊆ vars(t) ⊆ upper`."""
    lower_set = frozenset(lower)
    upper_set = frozenset(upper) | lower_set
    subsets = [
        frozenset(combo)
        for size in range(len(lower_set) + 1)
        for combo in itertools.combinations(sorted(lower_set), size)
    ]

    def _name(subset: frozenset[str]) -> str:
        return 'V_' + '_'.join(sorted(subset)) if subset else 'V_none'

    rules: dict[str, list[Alternative]] = {_name(subset): [] for subset in subsets}
    for name in sorted(upper_set):
        rules[_name(frozenset([name]) & lower_set)].append(VarLeaf(name))
    for symbol in signature.symbols:
        for combo in itertools.product(subsets, repeat=symbol.arity):
            union = frozenset().union(*combo)
            rules[_name(union)].append(Alt(symbol.name, tuple(_name(part) for part in combo)))
    return TreeGrammar(signature, {name: tuple(alts) for name, alts in rules.items()}), _name(lower_set)
