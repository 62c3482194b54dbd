"""Regular tree grammars and the automaton algorithms used by E-generalization."""

import heapq
import itertools
from collections import defaultdict, deque
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from os.path import commonprefix
from typing import Any

import networkx as nx
from corallium.log import get_logger
from typing_extensions import Self

from ._errors import BudgetExceededError, ParseError, TheoryError
from ._parser import parse_term
from .terms import App, Signature, Symbol, Term, Var, format_term, signature_of, subterms

logger = get_logger()


@dataclass(frozen=True)
class Alt:
    """Alternative `symbol(child_1, ..., child_k)` over nonterminal names."""

    symbol: str
    children: tuple[str, ...] = ()


@dataclass(frozen=True)
class VarLeaf:
    """Alternative that produces the variable `name`; added by lifting."""

    name: str


Alternative = Alt | VarLeaf


@dataclass(frozen=True)
class TreeGrammar:
    """One rule per nonterminal; `rules` keeps insertion order."""

    signature: Signature
    rules: Mapping[str, tuple[Alternative, ...]]

    def __post_init__(self) -> None:
        for nonterminal, alternatives in self.rules.items():
            for alt in alternatives:
                if isinstance(alt, VarLeaf):
                    continue
                symbol = self.signature.get(alt.symbol)
                if symbol is None or symbol.arity != len(alt.children):
                    msg = f"Alternative {alt.symbol}/{len(alt.children)} of '{nonterminal}' does not fit the signature"
                    raise TheoryError(msg)
                if missing := [child for child in alt.children if child not in self.rules]:
                    msg = f"Rule '{nonterminal}' refers to undefined nonterminals: {missing}"
                    raise TheoryError(msg)

    @property
    def nonterminals(self) -> tuple[str, ...]:
        return tuple(self.rules)

    @property
    def size(self) -> int:
        """Total number of alternatives."""
        return sum(len(alts) for alts in self.rules.values())

    @cached_property
    def by_symbol(self) -> dict[str, list[tuple[str, Alt]]]:
        """Symbol to every (parent, alternative) that produces it."""
        index: dict[str, list[tuple[str, Alt]]] = defaultdict(list)
        for nonterminal, alternatives in self.rules.items():
            for alt in alternatives:
                if isinstance(alt, Alt):
                    index[alt.symbol].append((nonterminal, alt))
        return dict(index)

    @cached_property
    def rule_index(self) -> dict[str, dict[str, list[Alt]]]:
        """Nonterminal to symbol to alternatives."""
        index: dict[str, dict[str, list[Alt]]] = {}
        for nonterminal, alternatives in self.rules.items():
            per_symbol: dict[str, list[Alt]] = defaultdict(list)
            for alt in alternatives:
                if isinstance(alt, Alt):
                    per_symbol[alt.symbol].append(alt)
            index[nonterminal] = dict(per_symbol)
        return index

    @cached_property
    def var_parents(self) -> dict[str, frozenset[str]]:
        """VarLeaf name to the nonterminals that produce it."""
        index: dict[str, set[str]] = defaultdict(set)
        for nonterminal, alternatives in self.rules.items():
            for alt in alternatives:
                if isinstance(alt, VarLeaf):
                    index[alt.name].add(nonterminal)
        return {name: frozenset(parents) for name, parents in index.items()}

    def alternatives(self, nonterminal: str) -> tuple[Alternative, ...]:
        return self.rules.get(nonterminal, ())

    def with_rules(self, rules: Mapping[str, Sequence[Alternative]]) -> Self:
        return type(self)(self.signature, {name: tuple(alts) for name, alts in rules.items()})


@dataclass(frozen=True)
class WeightMap:
    """Weight per symbol occurrence; VarLeaves weigh `variable` unless listed in `variables`."""

    symbols: Mapping[str, int] = field(default_factory=dict)
    default: int = 1
    variable: int = 0
    variables: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if any(value < 0 for value in [*self.symbols.values(), *self.variables.values(), self.default, self.variable]):
            msg = f'Weights must be nonnegative: {self}'
            raise ValueError(msg)

    def symbol(self, name: str) -> int:
        return self.symbols.get(name, self.default)

    def var(self, name: str) -> int:
        return self.variables.get(name, self.variable)

    def of(self, alt: Alternative) -> int:
        return self.var(alt.name) if isinstance(alt, VarLeaf) else self.symbol(alt.symbol)

    def term(self, term: Term) -> int:
        return sum(
            self.symbol(sub.symbol) if isinstance(sub, App) else self.var(str(sub)) for sub in subterms(term)
        )


# ----------------------------------------------------------------------------------------------------------------------
# Text format


def _format_alternative(alt: Alternative) -> str:
    if isinstance(alt, VarLeaf):
        return alt.name
    return format_term(App(alt.symbol, tuple(Var(child) for child in alt.children)))


def format_grammar(grammar: TreeGrammar) -> str:
    """Print as `sig`/`vars` directives followed by one `N ::= alt | alt` line per rule."""
    lines = []
    if grammar.signature.symbols:
        symbols = (
            f'{symbol.name}/{symbol.arity}' + (' ctor' if symbol.is_constructor else '')
            for symbol in grammar.signature.symbols
        )
        lines.append('sig ' + ', '.join(symbols))
    if leaves := sorted(grammar.var_parents):
        lines.append('vars ' + ', '.join(leaves))
    for nonterminal, alternatives in grammar.rules.items():
        body = ' | '.join(_format_alternative(alt) for alt in alternatives)
        lines.append(f'{nonterminal} ::= {body}'.rstrip())
    return '\n'.join(lines) + '\n'


def parse_signature(text: str) -> Signature:
    symbols = []
    for item in filter(None, (part.strip() for part in text.split(','))):
        declaration, *flags = item.split()
        name, _, arity = declaration.rpartition('/')
        if not name or not arity.isdigit() or set(flags) - {'ctor'}:
            msg = f"Expected 'name/arity [ctor]'. Received: {item!r}"
            raise ParseError(msg)
        symbols.append(Symbol(name, int(arity), 'ctor' in flags))
    return Signature(tuple(symbols))


def parse_grammar(text: str, *, signature: Signature | None = None) -> TreeGrammar:
    """Parse the format written by `format_grammar`; `#` starts a comment."""
    declared_vars: set[str] = set()
    raw_rules: dict[str, list[str]] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if line.startswith('sig '):
            parsed = parse_signature(line[4:])
            signature = parsed if signature is None else signature.merge(parsed)
        elif line.startswith('vars '):
            declared_vars.update(filter(None, (name.strip() for name in line[5:].split(','))))
        elif '::=' in line:
            lhs, _, rhs = line.partition('::=')
            raw_rules.setdefault(lhs.strip(), []).extend(part.strip() for part in rhs.split('|') if part.strip())
        else:
            msg = f'Line {line_no}: expected `N ::= alternatives`, `sig ...`, or `vars ...`. Received: {raw!r}'
            raise ParseError(msg)

    nonterminals = set(raw_rules)

    def _is_variable(name: str) -> bool:
        if name in nonterminals or name in declared_vars:
            return True
        if signature is not None and name in signature:
            return False
        return name.startswith('v')

    rules: dict[str, list[Alternative]] = {}
    for nonterminal, alternatives in raw_rules.items():
        parsed_alts: list[Alternative] = []
        for text_alt in alternatives:
            term = parse_term(text_alt, is_variable=_is_variable)
            if isinstance(term, Var):
                if term.name in nonterminals:
                    msg = f"Chain rule '{nonterminal} ::= {term.name}' is not supported"
                    raise ParseError(msg)
                parsed_alts.append(VarLeaf(term.name))
                continue
            assert isinstance(term, App)
            if not all(isinstance(arg, Var) and arg.name in nonterminals for arg in term.args):
                msg = f"Alternative {text_alt!r} of '{nonterminal}' must apply one symbol to nonterminals"
                raise ParseError(msg)
            parsed_alts.append(Alt(term.symbol, tuple(str(arg) for arg in term.args)))
        rules[nonterminal] = parsed_alts

    if signature is None:
        arities = {alt.symbol: len(alt.children) for alts in rules.values() for alt in alts if isinstance(alt, Alt)}
        signature = Signature(tuple(Symbol(name, arity) for name, arity in arities.items()))
    return TreeGrammar(signature, {name: tuple(alts) for name, alts in rules.items()})


# ----------------------------------------------------------------------------------------------------------------------
# Membership


def states(grammar: TreeGrammar, term: Term, *, strict: bool = True) -> frozenset[str]:
    """Nonterminals whose language contains `term` (bottom-up run)."""
    if isinstance(term, Var):
        return grammar.var_parents.get(term.name, frozenset())
    assert isinstance(term, App)
    if strict and term.symbol not in grammar.signature:
        msg = f"Symbol '{term.symbol}' of {format_term(term)} is not in the signature"
        raise TheoryError(msg)
    child_states = [states(grammar, arg, strict=strict) for arg in term.args]
    if any(not found for found in child_states):
        return frozenset()
    return frozenset(
        parent
        for parent, alt in grammar.by_symbol.get(term.symbol, ())
        if len(alt.children) == len(child_states)
        and all(child in found for child, found in zip(alt.children, child_states, strict=True))
    )


def membership(grammar: TreeGrammar, nonterminal: str, term: Term) -> bool:
    return nonterminal in states(grammar, term)


# ----------------------------------------------------------------------------------------------------------------------
# Emptiness, reachability, simplification


def productive(grammar: TreeGrammar) -> set[str]:
    """Nonterminals with a nonempty language (counter-based fixpoint)."""
    users: dict[str, list[tuple[str, int]]] = defaultdict(list)
    remaining: dict[tuple[str, int], int] = {}
    queue: deque[str] = deque()
    found: set[str] = set()
    for nonterminal, alternatives in grammar.rules.items():
        for idx, alt in enumerate(alternatives):
            children = set(alt.children) if isinstance(alt, Alt) else set()
            if not children:
                if nonterminal not in found:
                    found.add(nonterminal)
                    queue.append(nonterminal)
                continue
            remaining[nonterminal, idx] = len(children)
            for child in children:
                users[child].append((nonterminal, idx))
    while queue:
        child = queue.popleft()
        for parent, idx in users.get(child, ()):
            remaining[parent, idx] -= 1
            if remaining[parent, idx] == 0 and parent not in found:
                found.add(parent)
                queue.append(parent)
    return found


def _dependency_graph(grammar: TreeGrammar) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(grammar.rules)
    for nonterminal, alternatives in grammar.rules.items():
        graph.add_edges_from(
            (nonterminal, child) for alt in alternatives if isinstance(alt, Alt) for child in alt.children
        )
    return graph


def reachable(grammar: TreeGrammar, roots: Iterable[str]) -> set[str]:
    graph = _dependency_graph(grammar)
    found: set[str] = set()
    for root in roots:
        if root in graph:
            found |= {root} | nx.descendants(graph, root)
    return found


def is_empty(grammar: TreeGrammar, nonterminal: str) -> bool:
    return nonterminal not in productive(grammar)


def _drop_unproductive(grammar: TreeGrammar) -> TreeGrammar:
    alive = productive(grammar)
    return grammar.with_rules({
        name: [alt for alt in alts if isinstance(alt, VarLeaf) or all(child in alive for child in alt.children)]
        for name, alts in grammar.rules.items()
        if name in alive
    })


def is_finite(grammar: TreeGrammar, nonterminal: str) -> bool:
    """True when the language is finite (empty languages are finite)."""
    if is_empty(grammar, nonterminal):
        return True
    trimmed = _drop_unproductive(grammar)
    graph = _dependency_graph(trimmed)
    keep = {nonterminal} | nx.descendants(graph, nonterminal)
    return nx.is_directed_acyclic_graph(graph.subgraph(keep))


def simplify(grammar: TreeGrammar, roots: Iterable[str]) -> TreeGrammar:
    """Drop unproductive nonterminals, then those unreachable from `roots`; an empty root keeps an empty rule."""
    roots = list(roots)
    trimmed = _drop_unproductive(grammar)
    keep = reachable(trimmed, [root for root in roots if root in trimmed.rules])
    rules: dict[str, tuple[Alternative, ...]] = {}
    for name in grammar.rules:
        if name in keep:
            rules[name] = trimmed.rules[name]
        elif name in roots:
            logger.info('Root has an empty language', root=name)
            rules[name] = ()
    logger.debug('Simplified grammar', before=grammar.size, after=sum(len(alts) for alts in rules.values()))
    return TreeGrammar(grammar.signature, rules)


# ----------------------------------------------------------------------------------------------------------------------
# Products


def _pair_name(first: str, second: str, taken: set[str]) -> str:
    prefix = commonprefix([first, second])[: min(len(first), len(second)) - 1]
    base = prefix + first[len(prefix) :] + second[len(prefix) :] if prefix else f'{first}_{second}'
    name = base
    while name in taken:
        name += "'"
    taken.add(name)
    return name


def intersect(
    first: TreeGrammar,
    second: TreeGrammar,
    roots: Iterable[tuple[str, str]],
) -> tuple[TreeGrammar, dict[tuple[str, str], str]]:
    """Product grammar with `L(N12) = L(N1) ∩ L(N2)` for every pair reachable from `roots`."""
    signature = first.signature.merge(second.signature)
    names: dict[tuple[str, str], str] = {}
    taken: set[str] = set()
    queue: deque[tuple[str, str]] = deque()

    def _name(pair: tuple[str, str]) -> str:
        if pair not in names:
            names[pair] = _pair_name(*pair, taken)
            queue.append(pair)
        return names[pair]

    for pair in roots:
        _name(pair)
    rules: dict[str, tuple[Alternative, ...]] = {}
    while queue:
        left, right = pair = queue.popleft()
        right_leaves = {alt for alt in second.alternatives(right) if isinstance(alt, VarLeaf)}
        right_index = second.rule_index.get(right, {})
        alternatives: dict[Alternative, None] = {}
        for alt in first.alternatives(left):
            if isinstance(alt, VarLeaf):
                if alt in right_leaves:
                    alternatives.setdefault(alt)
                continue
            for other in right_index.get(alt.symbol, ()):
                if len(other.children) == len(alt.children):
                    children = tuple(_name(child) for child in zip(alt.children, other.children, strict=True))
                    alternatives.setdefault(Alt(alt.symbol, children))
        rules[names[pair]] = tuple(alternatives)
    product = TreeGrammar(signature, rules)
    logger.debug('Intersected grammars', nonterminals=len(rules), alternatives=product.size)
    return product, names


def intersect_all(targets: Sequence[tuple[TreeGrammar, str]]) -> tuple[TreeGrammar, str]:
    """Intersect left to right, simplifying after every step."""
    if not targets:
        msg = 'Expected at least one grammar to intersect'
        raise ValueError(msg)
    grammar, root = targets[0]
    grammar = simplify(grammar, [root])
    for other, other_root in targets[1:]:
        product, names = intersect(grammar, other, [(root, other_root)])
        root = names[root, other_root]
        grammar = simplify(product, [root])
    return grammar, root


def disjoint_union(targets: Sequence[tuple[TreeGrammar, str]], *, root: str = 'U') -> tuple[TreeGrammar, str]:
    """Grammar whose `root` produces the union of the target languages."""
    signature = Signature()
    rules: dict[str, tuple[Alternative, ...]] = {}
    root_alts: dict[Alternative, None] = {}
    for idx, (grammar, target) in enumerate(targets):
        signature = signature.merge(grammar.signature)
        rename = {name: f'{root}{idx}_{name}' for name in grammar.rules}
        for name, alts in grammar.rules.items():
            rules[rename[name]] = tuple(
                alt if isinstance(alt, VarLeaf) else Alt(alt.symbol, tuple(rename[child] for child in alt.children))
                for alt in alts
            )
        for alt in rules.get(rename.get(target, ''), ()):
            root_alts.setdefault(alt)
    rules[root] = tuple(root_alts)
    return TreeGrammar(signature, rules), root


def restrict_variables(grammar: TreeGrammar, allowed: Iterable[str]) -> TreeGrammar:
    """Remove VarLeaves outside `allowed`."""
    keep = set(allowed)
    return grammar.with_rules({
        name: [alt for alt in alts if not isinstance(alt, VarLeaf) or alt.name in keep]
        for name, alts in grammar.rules.items()
    })


def drop_symbols(grammar: TreeGrammar, names: Iterable[str]) -> TreeGrammar:
    """Remove alternatives headed by the given symbols."""
    drop = set(names)
    return grammar.with_rules({
        name: [alt for alt in alts if isinstance(alt, VarLeaf) or alt.symbol not in drop]
        for name, alts in grammar.rules.items()
    })


def universal_grammar(signature: Signature, *, name: str = 'Nt', leaves: Iterable[str] = ()) -> TreeGrammar:
    """Grammar for every term over `signature` (and the given VarLeaves)."""
    alts: list[Alternative] = [VarLeaf(leaf) for leaf in leaves]
    alts.extend(Alt(symbol.name, (name,) * symbol.arity) for symbol in signature.symbols)
    return TreeGrammar(signature, {name: tuple(alts)})


def from_terms(terms: Iterable[Term], *, signature: Signature | None = None, root: str = 'L') -> TreeGrammar:
    """Grammar whose `root` produces exactly the given terms; their variables become VarLeaves."""
    terms = list(terms)
    signature = signature or signature_of(terms)
    names: dict[Term, str] = {}
    rules: dict[str, tuple[Alternative, ...]] = {}

    def _alternative(term: Term) -> Alternative:
        if isinstance(term, Var):
            return VarLeaf(term.name)
        assert isinstance(term, App)
        return Alt(term.symbol, tuple(_nonterminal(arg) for arg in term.args))

    def _nonterminal(term: Term) -> str:
        if term not in names:
            names[term] = f'{root}_{len(names)}'
            rules[names[term]] = (_alternative(term),)
        return names[term]

    rules[root] = tuple(dict.fromkeys(_alternative(term) for term in terms))
    return TreeGrammar(signature, rules)


# ----------------------------------------------------------------------------------------------------------------------
# Subset construction


def _leaf_symbols(grammar: TreeGrammar) -> Iterator[tuple[Alternative, frozenset[str]]]:
    leaves: dict[Alternative, set[str]] = defaultdict(set)
    for nonterminal, alternatives in grammar.rules.items():
        for alt in alternatives:
            if isinstance(alt, VarLeaf) or not alt.children:
                leaves[alt].add(nonterminal)
    for alt, parents in leaves.items():
        yield alt, frozenset(parents)


class _Transitions:
    """Deterministic transition function of a grammar's subset construction, memoized."""

    def __init__(self, grammar: TreeGrammar) -> None:
        self.grammar = grammar
        self._cache: dict[tuple[str, tuple[frozenset[str], ...]], frozenset[str]] = {}

    def __call__(self, symbol: str, children: tuple[frozenset[str], ...]) -> frozenset[str]:
        key = (symbol, children)
        if key not in self._cache:
            self._cache[key] = frozenset(
                parent
                for parent, alt in self.grammar.by_symbol.get(symbol, ())
                if len(alt.children) == len(children)
                and all(child in found for child, found in zip(alt.children, children, strict=True))
            )
        return self._cache[key]


Transition = tuple[Alternative, tuple[int, ...], int]


def reachable_states(grammar: TreeGrammar) -> tuple[list[frozenset[str]], list[Transition]]:
    """Nonempty subset states of the bottom-up determinization and the transitions between them.

    VarLeaves behave like constants. Transitions are `(leaf-or-symbol, child state indices, target index)`.

    """
    found: dict[frozenset[str], int] = {}
    transitions: list[Transition] = []
    delta = _Transitions(grammar)

    def _add(state: frozenset[str]) -> int:
        if state not in found:
            found[state] = len(found)
        return found[state]

    for alt, parents in _leaf_symbols(grammar):
        transitions.append((alt, (), _add(parents)))

    symbols = [symbol for symbol in grammar.signature.symbols if symbol.arity and symbol.name in grammar.by_symbol]
    done = 0
    while done < len(found):
        current = list(found)
        boundary = done
        done = len(current)
        for symbol in symbols:
            # Only tuples that use at least one state discovered in the last round
            for combo in itertools.product(range(len(current)), repeat=symbol.arity):
                if max(combo) < boundary:
                    continue
                target = delta(symbol.name, tuple(current[idx] for idx in combo))
                if target:
                    transitions.append((Alt(symbol.name, ()), combo, _add(target)))
    return list(found), transitions


def determinize(grammar: TreeGrammar) -> tuple[TreeGrammar, dict[frozenset[str], str]]:
    """Bottom-up deterministic grammar over the reachable subset states, named by joining members with `_`.

    A joined name that is already taken gets primes appended.

    """
    state_list, transitions = reachable_states(grammar)
    order = {name: idx for idx, name in enumerate(grammar.rules)}
    names: dict[frozenset[str], str] = {}
    taken: set[str] = set()
    for state in state_list:
        name = '_'.join(sorted(state, key=order.__getitem__))
        while name in taken:
            name += "'"
        taken.add(name)
        names[state] = name
    rules: dict[str, list[Alternative]] = {names[state]: [] for state in state_list}
    for alt, children, target in transitions:
        name = names[state_list[target]]
        if isinstance(alt, VarLeaf) or not children:
            rules[name].append(alt)
        else:
            rules[name].append(Alt(alt.symbol, tuple(names[state_list[idx]] for idx in children)))
    return grammar.with_rules(rules), names


def difference(
    first: TreeGrammar,
    first_root: str,
    second: TreeGrammar,
    second_root: str,
    *,
    max_states: int | None = None,
    root: str = 'D',
) -> tuple[TreeGrammar, str]:
    """Grammar for `L(first_root) ∖ L(second_root)`.

    Pairs `(N1, S)` are built bottom-up, where `S` is the deterministic state of `second` for the same terms. The empty
    state acts as the sink of the completed automaton.

    """
    delta = _Transitions(second)
    pair_ids: dict[tuple[str, frozenset[str]], str] = {}
    by_nonterminal: dict[str, list[frozenset[str]]] = defaultdict(list)
    rules: dict[str, dict[Alternative, None]] = {}

    def _pair(nonterminal: str, state: frozenset[str]) -> tuple[str, bool]:
        key = (nonterminal, state)
        if key in pair_ids:
            return pair_ids[key], False
        if max_states is not None and len(pair_ids) >= max_states:
            msg = f'Difference needs more than {max_states} product states; raise `max_states` or add a weight cutoff'
            raise BudgetExceededError(msg)
        pair_ids[key] = f'{nonterminal}_d{len(pair_ids)}'
        by_nonterminal[nonterminal].append(state)
        rules[pair_ids[key]] = {}
        return pair_ids[key], True

    second_leaves = dict(_leaf_symbols(second))
    for nonterminal, alternatives in first.rules.items():
        for alt in alternatives:
            if isinstance(alt, VarLeaf) or not alt.children:
                name, _ = _pair(nonterminal, second_leaves.get(alt, frozenset()))
                rules[name].setdefault(alt)

    changed = True
    while changed:
        changed = False
        for nonterminal, alternatives in first.rules.items():
            for alt in alternatives:
                if isinstance(alt, VarLeaf) or not alt.children:
                    continue
                options = [list(by_nonterminal.get(child, ())) for child in alt.children]
                for combo in itertools.product(*options):
                    state = delta(alt.symbol, tuple(combo))
                    name, created = _pair(nonterminal, state)
                    children = tuple(
                        pair_ids[child, child_state] for child, child_state in zip(alt.children, combo, strict=True)
                    )
                    product_alt = Alt(alt.symbol, children)
                    if product_alt not in rules[name]:
                        rules[name][product_alt] = None
                        changed = True
                    changed |= created

    root_alts: dict[Alternative, None] = {}
    for state in by_nonterminal.get(first_root, ()):
        if second_root not in state:
            root_alts.update(rules[pair_ids[first_root, state]])
    result_rules = {name: tuple(alts) for name, alts in rules.items()}
    result_rules[root] = tuple(root_alts)
    grammar = TreeGrammar(first.signature.merge(second.signature), result_rules)
    logger.debug('Computed difference', pairs=len(pair_ids))
    return simplify(grammar, [root]), root


# ----------------------------------------------------------------------------------------------------------------------
# Lifting


def lift(
    grammar: TreeGrammar,
    sigma: Mapping[str, Term],
    *,
    suffix: str = '',
) -> tuple[TreeGrammar, dict[str, str]]:
    """Lift by `sigma`: `t ∈ L(N^σ)` iff `vars(t) ⊆ dom σ` and `tσ ∈ L(N)`.

    Each rule is copied and gains a VarLeaf `x` for every `x` with `xσ ∈ L(N)`. Symbols of `sigma` values that are
    foreign to the grammar simply match nothing.

    """
    renamed = {name: f'{name}{suffix}' for name in grammar.rules}
    leaves: dict[str, list[VarLeaf]] = defaultdict(list)
    for name in sorted(sigma):
        for parent in states(grammar, sigma[name], strict=False):
            leaves[parent].append(VarLeaf(name))
    rules: dict[str, tuple[Alternative, ...]] = {}
    for nonterminal, alternatives in grammar.rules.items():
        copied = [
            alt if isinstance(alt, VarLeaf) else Alt(alt.symbol, tuple(renamed[child] for child in alt.children))
            for alt in alternatives
        ]
        rules[renamed[nonterminal]] = tuple(dict.fromkeys([*leaves.get(nonterminal, ()), *copied]))
    return TreeGrammar(grammar.signature, rules), renamed


# ----------------------------------------------------------------------------------------------------------------------
# Weights and enumeration


def min_weight(grammar: TreeGrammar, weights: WeightMap | None = None) -> dict[str, tuple[int, Term]]:
    """Minimal weight and a witness for every nonempty nonterminal (Knuth's generalization of Dijkstra)."""
    weights = weights or WeightMap()
    users: dict[str, list[tuple[str, Alt]]] = defaultdict(list)
    remaining: dict[tuple[str, Alt], int] = {}
    heap: list[tuple[int, tuple[Any, ...], int, str, Term]] = []
    counter = itertools.count()
    for nonterminal, alternatives in grammar.rules.items():
        for alt in alternatives:
            if isinstance(alt, VarLeaf):
                leaf = Var(alt.name)
                heapq.heappush(heap, (weights.var(alt.name), leaf.key, next(counter), nonterminal, leaf))
            elif not alt.children:
                term = App(alt.symbol)
                heapq.heappush(heap, (weights.symbol(alt.symbol), term.key, next(counter), nonterminal, term))
            else:
                distinct = set(alt.children)
                remaining[nonterminal, alt] = len(distinct)
                for child in distinct:
                    users[child].append((nonterminal, alt))

    best: dict[str, tuple[int, Term]] = {}
    while heap:
        weight, _key, _, nonterminal, witness = heapq.heappop(heap)
        if nonterminal in best:
            continue
        best[nonterminal] = (weight, witness)
        for parent, alt in users.get(nonterminal, ()):
            remaining[parent, alt] -= 1
            if remaining[parent, alt] == 0 and parent not in best:
                term = App(alt.symbol, tuple(best[child][1] for child in alt.children))
                total = weights.symbol(alt.symbol) + sum(best[child][0] for child in alt.children)
                heapq.heappush(heap, (total, term.key, next(counter), parent, term))
    return best


def _build(tokens: Sequence[tuple[str, int]]) -> Term:
    """Rebuild a term from prefix-order `(name, arity)` tokens; arity -1 marks a variable."""
    stack: list[Term] = []
    for name, arity in reversed(tokens):
        if arity < 0:
            stack.append(Var(name))
        else:
            args = tuple(stack.pop() for _ in range(arity))
            stack.append(App(name, args))
    return stack[0]


def enumerate_terms(
    grammar: TreeGrammar,
    nonterminal: str,
    weights: WeightMap | None = None,
    *,
    max_count: int | None = None,
    max_weight: int | None = None,
) -> Iterator[Term]:
    """Yield `L(nonterminal)` by nondecreasing weight, ties in canonical term order, without duplicates.

    Partial derivations are expanded best-first at their leftmost open nonterminal. The priority of a partial
    derivation is its weight so far plus the minimal weights of its open nonterminals, so completed terms surface in
    weight order.

    """
    weights = weights or WeightMap()
    for symbol in grammar.signature.symbols:
        if symbol.arity and symbol.name in grammar.by_symbol and weights.symbol(symbol.name) == 0:
            msg = f"Symbol '{symbol.name}' has arity {symbol.arity} and weight 0, so enumeration would not terminate"
            raise ValueError(msg)
    lower = {name: weight for name, (weight, _) in min_weight(grammar, weights).items()}
    if nonterminal not in lower:
        return

    counter = itertools.count()
    heap: list[tuple[int, int, int, tuple[tuple[str, int], ...], tuple[str, ...]]] = [
        (lower[nonterminal], next(counter), 0, (), (nonterminal,)),
    ]
    emitted: set[Term] = set()
    bucket: list[Term] = []
    bucket_weight = lower[nonterminal]
    count = 0

    def _flush() -> Iterator[Term]:
        nonlocal count
        for term in sorted(set(bucket), key=lambda item: item.key):
            if term in emitted:
                continue
            emitted.add(term)
            count += 1
            yield term
            if max_count is not None and count >= max_count:
                return

    while heap:
        priority, _, filled, tokens, holes = heapq.heappop(heap)
        if max_weight is not None and priority > max_weight:
            break
        if priority > bucket_weight:
            yield from _flush()
            if max_count is not None and count >= max_count:
                return
            bucket = []
            bucket_weight = priority
        if not holes:
            bucket.append(_build(tokens))
            continue
        hole, rest = holes[0], holes[1:]
        rest_bound = priority - filled - lower[hole]
        for alt in grammar.alternatives(hole):
            if isinstance(alt, VarLeaf):
                cost = weights.var(alt.name)
                token = (alt.name, -1)
                children: tuple[str, ...] = ()
            else:
                if any(child not in lower for child in alt.children):
                    continue
                cost = weights.symbol(alt.symbol)
                token = (alt.symbol, len(alt.children))
                children = alt.children
            new_filled = filled + cost
            new_priority = new_filled + sum(lower[child] for child in children) + rest_bound
            heapq.heappush(heap, (new_priority, next(counter), new_filled, (*tokens, token), (*children, *rest)))
    yield from _flush()


# ----------------------------------------------------------------------------------------------------------------------
# Instances


def instance_in_class(
    term: Term,
    grammar: TreeGrammar,
    nonterminal: str,
    *,
    reachable_sets: Sequence[frozenset[str]] | None = None,
) -> bool:
    """True when some ground instance of `term` lies in `L(nonterminal)`.

    Runs of the rigid part of `term` collect, per variable, the nonterminals its instance must belong to. A run is
    accepted when each such set is covered by a reachable subset state.

    Pass `reachable_sets` (from `reachable_states`) when testing many terms against one grammar.

    """
    if reachable_sets is None:
        reachable_sets = reachable_states(grammar)[0]

    def _coverable(required: frozenset[str]) -> bool:
        return any(required <= state for state in reachable_sets)

    def _runs(sub: Term, target: str) -> list[dict[str, frozenset[str]]]:
        if isinstance(sub, Var):
            required = frozenset([target])
            return [{sub.name: required}] if _coverable(required) else []
        assert isinstance(sub, App)
        results: dict[tuple[tuple[str, frozenset[str]], ...], dict[str, frozenset[str]]] = {}
        for alt in grammar.rule_index.get(target, {}).get(sub.symbol, ()):
            if len(alt.children) != len(sub.args):
                continue
            partials: list[dict[str, frozenset[str]]] = [{}]
            for arg, child in zip(sub.args, alt.children, strict=True):
                child_runs = _runs(arg, child)
                partials = [
                    merged
                    for partial in partials
                    for run in child_runs
                    if (merged := _merge(partial, run)) is not None
                ]
                if not partials:
                    break
            for run in partials:
                results.setdefault(tuple(sorted(run.items(), key=lambda item: item[0])), run)
        return list(results.values())

    def _merge(left: dict[str, frozenset[str]], right: dict[str, frozenset[str]]) -> dict[str, frozenset[str]] | None:
        merged = dict(left)
        for name, required in right.items():
            combined = merged.get(name, frozenset()) | required
            if not _coverable(combined):
                return None
            merged[name] = combined
        return merged

    if term.is_ground:
        return membership(grammar, nonterminal, term)
    return bool(_runs(term, nonterminal))

