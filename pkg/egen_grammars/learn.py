"""Hypothesis sets for atoms and clauses built from E-generalization."""

import heapq
import itertools
from collections import deque
from collections.abc import Callable, Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field

from corallium.log import get_logger

from ._errors import BudgetExceededError, TheoryError
from ._parser import NameResolver, parse_signed_literals
from .congruence import extend_with_terms, from_ground_equations
from .generalize import NormalFormMaps, UniversalSubstitutions, constrained_egen, maximal_sets, universal_substitutions
from .grammars import (
    Alt,
    Alternative,
    TreeGrammar,
    WeightMap,
    difference,
    disjoint_union,
    enumerate_terms,
    from_terms,
    instance_in_class,
    is_empty,
    lift,
    membership,
    min_weight,
    reachable_states,
    restrict_variables,
)
from .terms import (
    App,
    Signature,
    Symbol,
    Term,
    Var,
    apply_subst,
    format_term,
    lgg_syntactic,
    make_tuple,
    match_syntactic,
    renaming_equivalent,
    signature_of,
    subterms,
    tuple_arity,
    tuple_items,
    variables,
)

logger = get_logger()

# ----------------------------------------------------------------------------------------------------------------------
# Literals and clauses


@dataclass(frozen=True)
class Literal:
    """`p(t)` or `¬p(t)`; several arguments are tupled into `arg`."""

    predicate: str
    arg: Term
    positive: bool = True

    @property
    def args(self) -> tuple[Term, ...]:
        return tuple_items(self.arg)

    @property
    def atom(self) -> App:
        return App(self.predicate, self.args)

    def fits(self, other: 'Literal') -> bool:
        """Same predicate, sign and arity."""
        return (
            self.predicate == other.predicate
            and self.positive == other.positive
            and len(self.args) == len(other.args)
        )

    def __str__(self) -> str:
        return ('' if self.positive else '¬') + format_term(self.atom)


def literal_of(atom: Term, *, positive: bool = True) -> Literal:
    if not isinstance(atom, App) or not atom.args:
        msg = f'Expected an atom p(t1,...,tn) with at least one argument. Received: {format_term(atom)}'
        raise TheoryError(msg)
    return Literal(atom.symbol, make_tuple(atom.args), positive)


@dataclass(frozen=True)
class Clause:
    """Disjunction of literals; syntactic duplicates are dropped on construction."""

    literals: tuple[Literal, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, 'literals', tuple(dict.fromkeys(self.literals)))

    @property
    def head(self) -> Literal | None:
        return next((lit for lit in self.literals if lit.positive), None)

    @property
    def body(self) -> tuple[Literal, ...]:
        return tuple(lit for lit in self.literals if not lit.positive)

    @property
    def is_horn(self) -> bool:
        return sum(lit.positive for lit in self.literals) <= 1

    @property
    def is_ground(self) -> bool:
        return all(lit.arg.is_ground for lit in self.literals)

    @property
    def variables(self) -> tuple[str, ...]:
        found: dict[str, None] = {}
        for lit in self.literals:
            found.update(dict.fromkeys(variables(lit.arg)))
        return tuple(found)

    @property
    def is_constrained(self) -> bool:
        """Every body variable occurs in the head."""
        head = set(variables(self.head.arg)) if self.head else set()
        return all(set(variables(lit.arg)) <= head for lit in self.body)

    def __str__(self) -> str:
        return format_clause(self)


def format_clause(clause: Clause) -> str:
    """`head <- b1, b2` for Horn clauses, otherwise a disjunction."""
    head = clause.head
    if clause.is_horn and head is not None:
        if not clause.body:
            return format_term(head.atom)
        return f'{format_term(head.atom)} <- ' + ', '.join(format_term(lit.atom) for lit in clause.body)
    return ' ∨ '.join(str(lit) for lit in clause.literals)


def parse_clause(
    text: str,
    *,
    signature: Signature | None = None,
    variables: Iterable[str] = (),
    is_variable: NameResolver | None = None,
) -> Clause:
    literals = parse_signed_literals(text, signature=signature, variables=variables, is_variable=is_variable)
    return Clause(tuple(literal_of(term, positive=positive) for positive, term in literals))


def nonredundant(clause: Clause, grammar: TreeGrammar) -> Clause:
    """Drop ground literals whose argument is congruent to that of an earlier fitting literal."""
    extended, class_map = extend_with_terms(grammar, [lit.arg for lit in clause.literals if lit.arg.is_ground])
    kept: list[Literal] = []
    for lit in clause.literals:
        duplicate = lit.arg.is_ground and any(
            other.arg.is_ground and other.fits(lit) and membership(extended, class_map[other.arg], lit.arg)
            for other in kept
        )
        if not duplicate:
            kept.append(lit)
    return Clause(tuple(kept))


# ----------------------------------------------------------------------------------------------------------------------
# Atoms


def _components(term: Term, signature: Signature) -> Iterator[Term]:
    """Maximal subterms below tuples and below symbols foreign to `signature`."""
    if isinstance(term, App) and term.args and (tuple_arity(term.symbol) is not None or term.symbol not in signature):
        for arg in term.args:
            yield from _components(arg, signature)
    else:
        yield term


def _base_grammar(
    grammar: TreeGrammar,
    examples: Sequence[Term],
    classes: Sequence[str] | None,
) -> tuple[TreeGrammar, list[str]]:
    """`grammar` plus a class for every foreign constant or component the examples use."""
    classes = list(classes) if classes is not None else list(grammar.rules)
    components = [item for term in examples for item in _components(term, grammar.signature)]
    base, _ = extend_with_terms(grammar, components, classes=classes)
    return base, [*classes, *(name for name in base.rules if name not in grammar.rules)]


@dataclass(frozen=True)
class HypothesisSet:
    """Regular set of hypotheses; each member `t` has `t·τi` in the class of the i-th positive example."""

    grammar: TreeGrammar
    root: str
    substitutions: UniversalSubstitutions
    maps: NormalFormMaps

    def contains(self, term: Term) -> bool:
        return membership(self.grammar, self.root, term)

    def enumerate(
        self,
        weights: WeightMap | None = None,
        *,
        max_count: int | None = None,
        max_weight: int | None = None,
    ) -> Iterator[Term]:
        return enumerate_terms(self.grammar, self.root, weights, max_count=max_count, max_weight=max_weight)


def hyp_set(
    positives: Sequence[Term],
    negatives: Sequence[Term] = (),
    *,
    grammar: TreeGrammar,
    classes: Sequence[str] | None = None,
    budget: int = 4096,
    max_weight: int | None = None,
    weights: WeightMap | None = None,
    max_states: int | None = None,
) -> HypothesisSet:
    """Terms with an instance congruent to every positive example and no instance congruent to any negative one.

    Without `max_weight` the negatives are removed exactly, by subtracting the union of the negatives lifted by every
    substitution from the universal variables into the class representatives. That union grows as
    `|NM| ** |NM| ** n`, so it is refused beyond `budget`. With `max_weight` the positive hypotheses up to that weight
    are tested one by one instead.

    Raises:
        BudgetExceededError: when the exact removal needs more than `budget` substitutions

    """
    if not positives:
        msg = 'Expected at least one positive example'
        raise ValueError(msg)
    base, base_classes = _base_grammar(grammar, [*positives, *negatives], classes)
    maps = maximal_sets(base, base_classes, weights=weights)
    extended, class_map = extend_with_terms(base, [*positives, *negatives], classes=base_classes)
    substitutions = universal_substitutions(maps, len(positives))
    result, root = constrained_egen(
        extended,
        [(class_map[term], tau) for term, tau in zip(positives, substitutions.tau, strict=True)],
    )
    if negatives:
        if max_weight is not None:
            reachable_sets = reachable_states(extended)[0]
            kept = [
                term
                for term in enumerate_terms(result, root, weights, max_weight=max_weight)
                if not any(
                    instance_in_class(term, extended, class_map[negative], reachable_sets=reachable_sets)
                    for negative in negatives
                )
            ]
            root = 'H'
            result = from_terms(kept, signature=result.signature, root=root)
            logger.debug('Filtered hypotheses by weight', kept=len(kept), max_weight=max_weight)
        else:
            domain = sorted(substitutions.tau[0])
            count = len(maps.sets) ** len(domain)
            if count > budget:
                msg = (
                    f'Removing negative examples needs {count} substitutions (budget {budget}); '
                    'pass a weight cutoff, use the determinate mode, or drop negatives'
                )
                raise BudgetExceededError(msg)
            targets = []
            for assignment in itertools.product(maps.representatives, repeat=len(domain)):
                lifted, renamed = lift(extended, dict(zip(domain, assignment, strict=True)))
                targets.extend((lifted, renamed[class_map[negative]]) for negative in negatives)
            excluded, excluded_root = disjoint_union(targets, root='Hneg')
            result, root = difference(result, root, excluded, excluded_root, max_states=max_states, root='H')
    logger.info(
        'Computed hypothesis set',
        positives=len(positives),
        negatives=len(negatives),
        alternatives=result.size,
    )
    return HypothesisSet(result, root, substitutions, maps)


@dataclass(frozen=True)
class AtomHypotheses:
    """Hypotheses `p(t1,...,tk)` for one predicate."""

    predicate: str
    hypotheses: HypothesisSet

    def atom(self, term: Term) -> App:
        return App(self.predicate, tuple_items(term))

    def contains(self, atom: Term) -> bool:
        if not isinstance(atom, App) or atom.symbol != self.predicate:
            return False
        return self.hypotheses.contains(make_tuple(atom.args))

    def enumerate(
        self,
        weights: WeightMap | None = None,
        *,
        max_count: int | None = None,
        max_weight: int | None = None,
    ) -> Iterator[App]:
        for term in self.hypotheses.enumerate(weights, max_count=max_count, max_weight=max_weight):
            yield self.atom(term)

    def atom_grammar(self, root: str = 'P') -> tuple[TreeGrammar, str]:
        """Grammar whose `root` produces the atoms themselves."""
        grammar = self.hypotheses.grammar
        alts: list[Alternative] = []
        arities: set[int] = set()
        for alt in grammar.alternatives(self.hypotheses.root):
            if isinstance(alt, Alt) and tuple_arity(alt.symbol) is not None:
                alts.append(Alt(self.predicate, alt.children))
                arities.add(len(alt.children))
            else:
                alts.append(Alt(self.predicate, (self.hypotheses.root,)))
                arities.add(1)
        if len(arities) > 1:
            msg = f"Predicate '{self.predicate}' would be used with arities {sorted(arities)}"
            raise TheoryError(msg)
        signature = grammar.signature.with_symbols(Symbol(self.predicate, arities.pop() if arities else 1))
        rules = {**grammar.rules, root: tuple(dict.fromkeys(alts))}
        return TreeGrammar(signature, rules), root


def _split_atoms(atoms: Sequence[Term], predicate: str | None = None) -> tuple[str, list[Term]]:
    items = []
    for atom in atoms:
        lit = literal_of(atom)
        if predicate is None:
            predicate = lit.predicate
        elif lit.predicate != predicate:
            msg = f"Examples mix the predicates '{predicate}' and '{lit.predicate}'"
            raise TheoryError(msg)
        items.append(lit.arg)
    if predicate is None:
        msg = 'Expected at least one positive example'
        raise ValueError(msg)
    return predicate, items


def learn_atom(
    positives: Sequence[Term],
    negatives: Sequence[Term] = (),
    *,
    grammar: TreeGrammar,
    **kwargs,
) -> AtomHypotheses:
    """Atoms `p(t)` that cover every positive example and no negative one; `kwargs` go to `hyp_set`."""
    predicate, positive_args = _split_atoms(positives)
    _, negative_args = _split_atoms(negatives, predicate) if negatives else (predicate, [])
    return AtomHypotheses(predicate, hyp_set(positive_args, negative_args, grammar=grammar, **kwargs))


# ----------------------------------------------------------------------------------------------------------------------
# Determinate atoms


def maximal_index_sets(positives: Sequence[Term], negatives: Sequence[Term] = ()) -> list[frozenset[int]]:
    """Index sets `I ⊇ positives` that no larger set shares a syntactic lgg with.

    Such sets are exactly the closed ones: every input that the lgg of `I` matches is already in `I`. Indices number
    the positives first, then the negatives.

    """
    inputs = [*positives, *negatives]
    n = len(positives)

    def _closure(indices: Iterable[int]) -> frozenset[int]:
        pattern, _ = lgg_syntactic([inputs[idx] for idx in sorted(indices)])
        return frozenset(
            idx for idx in range(len(inputs)) if idx < n or match_syntactic(pattern, inputs[idx]) is not None
        )

    start = _closure(range(n))
    found = {start}
    queue = deque([start])
    while queue:
        current = queue.popleft()
        for idx in range(n, len(inputs)):
            if idx in current:
                continue
            closed = _closure(current | {idx})
            if closed not in found:
                found.add(closed)
                queue.append(closed)
    return sorted(found, key=lambda indices: (len(indices), sorted(indices)))


@dataclass(frozen=True)
class DeterminateHypothesis:
    """Hypotheses `(pattern, t)` for one maximal index set, with `t` drawn from `L(root)`."""

    pattern: Term
    grammar: TreeGrammar
    root: str
    indices: frozenset[int]
    matchers: tuple[dict[str, Term], ...] = field(default=())


@dataclass(frozen=True)
class DeterminateHypothesisSet:
    """Tagged union of the hypotheses for every maximal index set."""

    entries: tuple[DeterminateHypothesis, ...]
    predicate: str = 'p'

    def contains(self, pattern: Term, body: Term) -> bool:
        """Membership of `(pattern, body)` up to a renaming of the pattern's variables."""
        for entry in self.entries:
            if not renaming_equivalent(entry.pattern, pattern):
                continue
            inverse = match_syntactic(pattern, entry.pattern)
            if inverse is not None and membership(entry.grammar, entry.root, apply_subst(body, inverse)):
                return True
        return False

    def enumerate(
        self,
        weights: WeightMap | None = None,
        *,
        max_count: int | None = None,
        max_weight: int | None = None,
    ) -> Iterator[tuple[int, Term, Term]]:
        """`(weight, pattern, body)` by nondecreasing body weight across all entries."""
        weights = weights or WeightMap()
        streams = [
            (
                (weights.term(body), body.key, idx, entry.pattern, body)
                for body in enumerate_terms(entry.grammar, entry.root, weights, max_weight=max_weight)
            )
            for idx, entry in enumerate(self.entries)
        ]
        for count, (weight, _key, _idx, pattern, body) in enumerate(heapq.merge(*streams), start=1):
            yield weight, pattern, body
            if max_count is not None and count >= max_count:
                return

    def atoms(self, **kwargs) -> Iterator[App]:
        for _, pattern, body in self.enumerate(**kwargs):
            yield App(self.predicate, (pattern, body))


def hyp_determinate(
    positives: Sequence[tuple[Term, Term]],
    negatives: Sequence[tuple[Term, Term]] = (),
    *,
    grammar: TreeGrammar,
    classes: Sequence[str] | None = None,
    max_states: int | None = None,
    predicate: str = 'p',
) -> DeterminateHypothesisSet:
    """Pairs `(s_I, t)` where `s_I` generalizes the inputs of a maximal index set syntactically.

    For each maximal `I`, `t` ranges over the terms whose instances under the lgg matchers are congruent to the
    positive outputs, minus those congruent to a negative output of `I`.

    """
    if not positives:
        msg = 'Expected at least one positive example'
        raise ValueError(msg)
    pairs = [*positives, *negatives]
    for source, target in pairs:
        if not source.is_ground or not target.is_ground:
            msg = f'Expected ground examples. Received: ({format_term(source)}, {format_term(target)})'
            raise TheoryError(msg)
    n = len(positives)
    base, base_classes = _base_grammar(grammar, [target for _, target in pairs], classes)
    extended, class_map = extend_with_terms(base, [target for _, target in pairs], classes=base_classes)
    entries = []
    for indices in maximal_index_sets([source for source, _ in positives], [source for source, _ in negatives]):
        ordered = sorted(indices)
        pattern, matchers = lgg_syntactic([pairs[idx][0] for idx in ordered])
        by_index = dict(zip(ordered, matchers, strict=True))
        body_grammar, root = constrained_egen(extended, [(class_map[pairs[idx][1]], by_index[idx]) for idx in range(n)])
        if excluded := [idx for idx in ordered if idx >= n]:
            targets = []
            for idx in excluded:
                lifted, renamed = lift(extended, by_index[idx])
                targets.append((lifted, renamed[class_map[pairs[idx][1]]]))
            negative_grammar, negative_root = disjoint_union(targets, root='Tneg')
            body_grammar, root = difference(
                body_grammar,
                root,
                negative_grammar,
                negative_root,
                max_states=max_states,
                root='T',
            )
        if is_empty(body_grammar, root):
            logger.debug('No hypotheses for index set', indices=ordered, pattern=format_term(pattern))
            continue
        entries.append(DeterminateHypothesis(pattern, body_grammar, root, indices, matchers))
    logger.info('Computed determinate hypotheses', positives=n, negatives=len(negatives), entries=len(entries))
    return DeterminateHypothesisSet(tuple(entries), predicate)


def _is_constructor_input(term: Term, signature: Signature) -> bool:
    for sub in subterms(term):
        if isinstance(sub, App) and tuple_arity(sub.symbol) is None:
            symbol = signature.get(sub.symbol)
            if symbol is not None and not symbol.is_constructor:
                return False
    return True


def _split_pairs(atoms: Sequence[Term], predicate: str | None) -> tuple[str, list[tuple[Term, Term]]]:
    pairs = []
    for atom in atoms:
        if not isinstance(atom, App) or len(atom.args) != 2:  # noqa: PLR2004
            msg = f'Expected a binary atom p(s,t). Received: {format_term(atom)}'
            raise TheoryError(msg)
        if predicate is None:
            predicate = atom.symbol
        elif atom.symbol != predicate:
            msg = f"Examples mix the predicates '{predicate}' and '{atom.symbol}'"
            raise TheoryError(msg)
        pairs.append((atom.args[0], atom.args[1]))
    if predicate is None:
        msg = 'Expected at least one positive example'
        raise ValueError(msg)
    return predicate, pairs


def learn_atom_determinate(
    positives: Sequence[Term],
    negatives: Sequence[Term] = (),
    *,
    grammar: TreeGrammar,
    **kwargs,
) -> DeterminateHypothesisSet:
    """Determinate atoms `p(s,t)` for examples whose inputs `s` are ground constructor terms."""
    predicate, positive_pairs = _split_pairs(positives, None)
    _, negative_pairs = _split_pairs(negatives, predicate) if negatives else (predicate, [])
    for source, _ in [*positive_pairs, *negative_pairs]:
        if not _is_constructor_input(source, grammar.signature):
            msg = f'Input {format_term(source)} is not a constructor term'
            raise TheoryError(msg)
    return hyp_determinate(positive_pairs, negative_pairs, grammar=grammar, predicate=predicate, **kwargs)


# ----------------------------------------------------------------------------------------------------------------------
# Clauses


Preselect = Callable[[Literal, Literal], bool]
"""Literal preselection: keep the pair when True."""


def fitting_pairs(
    first: Sequence[Literal],
    second: Sequence[Literal],
    preselect: Preselect | None = None,
) -> list[tuple[Literal, Literal]]:
    return [
        (left, right)
        for left in first
        for right in second
        if left.fits(right) and (preselect is None or preselect(left, right))
    ]


@dataclass(frozen=True)
class ClauseHypothesisSet:
    """Clauses whose literals follow `templates` and whose tupled arguments form `L(root)`."""

    grammar: TreeGrammar
    root: str
    templates: tuple[tuple[str, bool], ...]
    """`(predicate, positive)` per literal position."""
    substitutions: UniversalSubstitutions | None = None

    def clause(self, term: Term) -> Clause:
        items = tuple_items(term) if len(self.templates) > 1 else (term,)
        return Clause(
            tuple(
                Literal(predicate, item, positive)
                for (predicate, positive), item in zip(self.templates, items, strict=True)
            ),
        )

    def contains(self, clause: Clause) -> bool:
        options = [
            [lit for lit in clause.literals if lit.predicate == predicate and lit.positive == positive]
            for predicate, positive in self.templates
        ]
        if not self.templates:
            return False
        for chosen in itertools.product(*options):
            if set(chosen) != set(clause.literals):
                continue
            if membership(self.grammar, self.root, make_tuple([lit.arg for lit in chosen])):
                return True
        return False

    def enumerate(
        self,
        weights: WeightMap | None = None,
        *,
        max_count: int | None = None,
        max_weight: int | None = None,
    ) -> Iterator[Clause]:
        for term in enumerate_terms(self.grammar, self.root, weights, max_count=max_count, max_weight=max_weight):
            yield self.clause(term)

    def smallest(self, weights: WeightMap | None = None, *, constrained: bool = True) -> Clause | None:
        """Minimal-weight clause; when `constrained`, the body only uses variables of a minimal head.

        Body literals whose language has no member over the head variables are dropped.

        """
        best = min_weight(self.grammar, weights)
        if self.root not in best:
            return None
        heads = [idx for idx, (_, positive) in enumerate(self.templates) if positive]
        if not constrained or not heads:
            return self.clause(best[self.root][1])

        if len(self.templates) == 1:
            candidates: list[tuple[str, ...]] = [(self.root,)]
        else:
            candidates = [
                alt.children
                for alt in self.grammar.alternatives(self.root)
                if isinstance(alt, Alt) and len(alt.children) == len(self.templates)
            ]
        chosen: tuple[int, Clause] | None = None
        for components in candidates:
            if any(components[idx] not in best for idx in heads):
                continue
            head_terms = {idx: best[components[idx]][1] for idx in heads}
            allowed = [name for term in head_terms.values() for name in variables(term)]
            restricted = min_weight(restrict_variables(self.grammar, allowed), weights)
            literals = []
            total = 0
            for idx, ((predicate, positive), component) in enumerate(zip(self.templates, components, strict=True)):
                if idx in head_terms:
                    weight, term = best[component][0], head_terms[idx]
                elif component in restricted:
                    weight, term = restricted[component]
                else:
                    continue
                total += weight
                literals.append(Literal(predicate, term, positive))
            if chosen is None or total < chosen[0]:
                chosen = (total, Clause(tuple(literals)))
        return chosen[1] if chosen else None


def _empty_clause_set(grammar: TreeGrammar) -> ClauseHypothesisSet:
    return ClauseHypothesisSet(grammar.with_rules({'H': ()}), 'H', ())


def lgg_e(
    first: Clause,
    second: Clause,
    *,
    grammar: TreeGrammar,
    classes: Sequence[str] | None = None,
    preselect: Preselect | None = None,
    **kwargs,
) -> ClauseHypothesisSet:
    """Clauses that E-subsume both ground clauses; `kwargs` go to `hyp_set`."""
    for clause in (first, second):
        if not clause.is_ground:
            msg = f'Expected a ground clause. Received: {clause}'
            raise TheoryError(msg)
    pairs = fitting_pairs(first.literals, second.literals, preselect)
    if not pairs:
        logger.info('No fitting literal pairs')
        return _empty_clause_set(grammar)
    left = make_tuple([lit.arg for lit, _ in pairs])
    right = make_tuple([lit.arg for _, lit in pairs])
    hypotheses = hyp_set([left, right], grammar=grammar, classes=classes, **kwargs)
    templates = tuple((lit.predicate, lit.positive) for lit, _ in pairs)
    logger.info('Computed clausal generalization', pairs=len(pairs), alternatives=hypotheses.grammar.size)
    return ClauseHypothesisSet(hypotheses.grammar, hypotheses.root, templates, hypotheses.substitutions)


def remove_det_literals(clause: Clause, det_defs: Mapping[str, str]) -> Clause:
    """Replace each determinate body literal `q(s1,...,sk,x)` by binding `x` to `g(s1,...,sk)`.

    `det_defs` maps the determinate predicate `q` to the function symbol `g`. Literals are processed in body order, and
    each output variable must be fresh: it may not occur in the head input, an earlier literal, or its own inputs.

    Raises:
        TheoryError: when a determinate literal breaks these conditions

    """
    if not any(lit.predicate in det_defs for lit in clause.body):
        return clause
    head = clause.head
    seen: set[str] = set()
    if head is not None and len(head.args) > 1:
        seen.update(variables(head.args[0]))
    binding: dict[str, Term] = {}
    for lit in clause.body:
        if lit.predicate not in det_defs:
            continue
        *inputs, output = lit.args
        if not inputs or not isinstance(output, Var):
            msg = f'Determinate literal {lit} needs inputs and a variable output'
            raise TheoryError(msg)
        if output.name in binding or output.name in seen:
            msg = f"Determinate literal {lit} rebinds the variable '{output.name}'"
            raise TheoryError(msg)
        if output.name in {name for item in inputs for name in variables(item)}:
            msg = f"Determinate literal {lit} uses its output '{output.name}' as input"
            raise TheoryError(msg)
        value = App(det_defs[lit.predicate], tuple(apply_subst(item, binding) for item in inputs))
        binding = {name: apply_subst(term, {output.name: value}) for name, term in binding.items()}
        binding[output.name] = value
        seen.update(name for item in inputs for name in variables(item))
    kept = tuple(
        Literal(lit.predicate, apply_subst(lit.arg, binding), lit.positive)
        for lit in clause.literals
        if lit.positive or lit.predicate not in det_defs
    )
    result = Clause(kept)
    if not result.is_constrained:
        logger.debug('Clause is not constrained after removal', clause=format_clause(result))
    return result


@dataclass(frozen=True)
class DeterminateClauseSet:
    """Constrained Horn clauses `p0(s,t0) <- q1(t1), ..., qk(tk)` from a determinate hypothesis set."""

    head: str
    body: tuple[str, ...]
    hypotheses: DeterminateHypothesisSet

    def clause(self, pattern: Term, term: Term) -> Clause:
        items = tuple_items(term) if self.body else (term,)
        literals = [Literal(self.head, make_tuple([pattern, items[0]]))]
        literals.extend(
            Literal(predicate, item, positive=False) for predicate, item in zip(self.body, items[1:], strict=True)
        )
        return Clause(tuple(literals))

    def contains(self, clause: Clause) -> bool:
        head = clause.head
        if head is None or head.predicate != self.head or len(head.args) != 2:  # noqa: PLR2004
            return False
        pattern, output = head.args
        options = [[lit for lit in clause.body if lit.predicate == predicate] for predicate in self.body]
        for chosen in itertools.product(*options):
            if set(chosen) != set(clause.body):
                continue
            if self.hypotheses.contains(pattern, make_tuple([output, *(lit.arg for lit in chosen)])):
                return True
        return False

    def enumerate(self, weights: WeightMap | None = None, **kwargs) -> Iterator[Clause]:
        for _, pattern, term in self.hypotheses.enumerate(weights, **kwargs):
            yield self.clause(pattern, term)


def lgg_ce(
    first: Clause,
    second: Clause,
    *,
    grammar: TreeGrammar,
    classes: Sequence[str] | None = None,
    preselect: Preselect | None = None,
    max_states: int | None = None,
) -> DeterminateClauseSet:
    """Constrained clauses that E-subsume both Horn clauses, whose heads are `p0(s,t)` with constructor inputs `s`."""
    head_one, head_two = first.head, second.head
    if head_one is None or head_two is None or not head_one.fits(head_two):
        msg = f'Expected heads with one predicate. Received: {head_one} and {head_two}'
        raise TheoryError(msg)
    if len(head_one.args) != 2:  # noqa: PLR2004
        msg = f'Expected a binary head p0(s,t). Received: {head_one}'
        raise TheoryError(msg)
    pairs = fitting_pairs(first.body, second.body, preselect)
    source_one, target_one = head_one.args
    source_two, target_two = head_two.args
    examples = [
        (source_one, make_tuple([target_one, *(lit.arg for lit, _ in pairs)])),
        (source_two, make_tuple([target_two, *(lit.arg for _, lit in pairs)])),
    ]
    for source, _ in examples:
        if not _is_constructor_input(source, grammar.signature):
            msg = f'Head input {format_term(source)} is not a constructor term'
            raise TheoryError(msg)
    hypotheses = hyp_determinate(
        examples,
        grammar=grammar,
        classes=classes,
        max_states=max_states,
        predicate=head_one.predicate,
    )
    return DeterminateClauseSet(head_one.predicate, tuple(lit.predicate for lit, _ in pairs), hypotheses)


# ----------------------------------------------------------------------------------------------------------------------
# Subsumption


def _skolemize(clause: Clause) -> Clause:
    mapping: dict[str, Term] = {name: App(f'sk_{name}') for name in clause.variables}
    return Clause(tuple(Literal(lit.predicate, apply_subst(lit.arg, mapping), lit.positive) for lit in clause.literals))


def e_subsumes(
    first: Clause,
    second: Clause,
    grammar: TreeGrammar | None = None,
    *,
    classes: Sequence[str] | None = None,
) -> bool:
    """True when some σ maps every literal of `first` to a literal of `second` congruent to it.

    Variables of `second` are read as fresh constants. Without `grammar` the theory is empty.

    """
    target = _skolemize(second)
    args = [lit.arg for lit in target.literals]
    if grammar is None:
        grammar, _ = from_ground_equations(signature_of(args), [(arg, arg) for arg in args])
    extended, _ = extend_with_terms(grammar, args, classes=classes)
    order = [*(classes if classes is not None else grammar.rules)]
    order.extend(name for name in extended.rules if name not in grammar.rules)
    options = [[lit for lit in target.literals if lit.fits(wanted)] for wanted in first.literals]
    if any(not option for option in options):
        return False
    reachable_sets = reachable_states(extended)[0]
    pattern = make_tuple([lit.arg for lit in first.literals])
    for chosen in itertools.product(*options):
        tupled = make_tuple([lit.arg for lit in chosen])
        with_tuple, class_map = extend_with_terms(extended, [tupled], classes=order)
        if instance_in_class(pattern, with_tuple, class_map[tupled], reachable_sets=reachable_sets):
            return True
    return False
