"""E-generalization: maximal nonterminal sets, universal substitutions, and the lift-intersect pipeline."""

import itertools
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

from corallium.log import get_logger

from ._errors import TheoryError
from .grammars import TreeGrammar, WeightMap, determinize, intersect_all, lift, min_weight, simplify, states
from .terms import Term

logger = get_logger()


@dataclass(frozen=True)
class NormalFormMaps:
    """The maximal nonterminal sets of a grammar with a fixed representative term for each."""

    grammar: TreeGrammar
    sets: tuple[frozenset[str], ...]
    """Maximal sets in canonical order."""
    representatives: tuple[Term, ...]

    @property
    def default_set(self) -> frozenset[str]:
        """Assigned to terms outside every language."""
        return self.sets[0]

    def index(self, nonterminals: frozenset[str]) -> int:
        return self.sets.index(nonterminals)

    def class_of(self, nonterminals: frozenset[str]) -> Term:
        return self.representatives[self.index(nonterminals)]

    def classify(self, term: Term) -> frozenset[str]:
        """First maximal set (in canonical order) that contains every nonterminal producing `term`."""
        if not term.is_ground:
            return self.default_set
        found = states(self.grammar, term, strict=False)
        if not found:
            return self.default_set
        return next((candidate for candidate in self.sets if found <= candidate), self.default_set)

    def describe(self, nonterminals: frozenset[str]) -> str:
        order = {name: idx for idx, name in enumerate(self.grammar.rules)}
        return '{' + ','.join(sorted(nonterminals, key=order.__getitem__)) + '}'


def maximal_sets(
    grammar: TreeGrammar,
    classes: Sequence[str] | None = None,
    *,
    weights: WeightMap | None = None,
) -> NormalFormMaps:
    """Maximal sets `NN` whose languages intersect, with the minimal-weight member of each intersection.

    The sets of nonterminals sharing a term are the reachable states of the subset construction, so the maximal sets
    are the maximal reachable states. They are ordered by their nonterminals' positions, with `classes` first.

    Raises:
        TheoryError: when a class nonterminal has an empty language

    """
    classes = list(classes) if classes is not None else list(grammar.rules)
    deterministic, names = determinize(grammar)
    reachable = list(names)
    covered = set().union(*reachable) if reachable else set()
    if empty := [name for name in classes if name not in covered]:
        msg = f'Class nonterminals have an empty language: {empty}'
        raise TheoryError(msg)
    maximal = [state for state in reachable if not any(state < other for other in reachable)]
    rank = {name: idx for idx, name in enumerate([*classes, *(name for name in grammar.rules if name not in classes)])}
    maximal.sort(key=lambda state: sorted(rank[name] for name in state))
    witnesses = min_weight(deterministic, weights)
    representatives = tuple(witnesses[names[state]][1] for state in maximal)
    logger.debug('Computed maximal sets', count=len(maximal), reachable=len(reachable))
    return NormalFormMaps(grammar, tuple(maximal), representatives)


@dataclass(frozen=True)
class UniversalSubstitutions:
    """`n` ground substitutions over the variables `v_{NN1..NNn}`: the i-th maps each variable to `class_of(NNi)`."""

    arity: int
    variables: Mapping[tuple[int, ...], str]
    tau: tuple[dict[str, Term], ...]

    def variable(self, indices: Sequence[int]) -> str:
        return self.variables[tuple(indices)]


def universal_variable(indices: Sequence[int], width: int) -> str:
    """`v01` while every index is a single digit, `v_0_12` otherwise."""
    if width <= 10:  # noqa: PLR2004
        return 'v' + ''.join(str(idx) for idx in indices)
    return 'v_' + '_'.join(str(idx) for idx in indices)


def universal_substitutions(maps: NormalFormMaps, n: int) -> UniversalSubstitutions:
    if n < 1:
        msg = f'Expected at least one term to generalize. Received: {n}'
        raise ValueError(msg)
    width = len(maps.sets)
    names: dict[tuple[int, ...], str] = {}
    tau: tuple[dict[str, Term], ...] = tuple({} for _ in range(n))
    for combo in itertools.product(range(width), repeat=n):
        name = universal_variable(combo, width)
        names[combo] = name
        for idx, set_idx in enumerate(combo):
            tau[idx][name] = maps.representatives[set_idx]
    return UniversalSubstitutions(n, names, tau)


def substitution_normalization(maps: NormalFormMaps, sigma: Mapping[str, Term]) -> dict[str, Term]:
    """Replace each value by the representative of its maximal set; membership of `t·σ` is preserved."""
    return {name: maps.class_of(maps.classify(value)) for name, value in sigma.items()}


def constrained_egen(
    grammar: TreeGrammar,
    targets: Sequence[tuple[str, Mapping[str, Term]]],
) -> tuple[TreeGrammar, str]:
    """Grammar for `{t : t·σi ∈ L(Ni) for every i}` over the common domain of the σi."""
    if not targets:
        msg = 'Expected at least one (nonterminal, substitution) target'
        raise ValueError(msg)
    domain = set(targets[0][1])
    for root, sigma in targets:
        if set(sigma) != domain:
            msg = f'Substitutions must share one domain: {sorted(domain)} != {sorted(sigma)}'
            raise ValueError(msg)
        if root not in grammar.rules:
            msg = f"Unknown nonterminal '{root}'"
            raise TheoryError(msg)
    lifted = []
    for root, sigma in targets:
        lifted_grammar, renamed = lift(grammar, sigma)
        lifted.append((lifted_grammar, renamed[root]))
    result, root = intersect_all(lifted)
    result = simplify(result, [root])
    logger.debug('Constrained E-generalization', targets=len(targets), variables=len(domain), size=result.size)
    return result, root


@dataclass(frozen=True)
class Generalization:
    """Result of `egen`: the grammar, its root, and the substitutions that map members back onto the inputs."""

    grammar: TreeGrammar
    root: str
    substitutions: UniversalSubstitutions
    maps: NormalFormMaps


def egen(
    grammar: TreeGrammar,
    roots: Sequence[str],
    *,
    classes: Sequence[str] | None = None,
    maps: NormalFormMaps | None = None,
    weights: WeightMap | None = None,
) -> Generalization:
    """Complete set of E-generalizations of the classes `roots`.

    Every member `t` satisfies `t·τi ∈ L(roots[i])`, and every E-generalization has an instance in the result.

    """
    maps = maps or maximal_sets(grammar, classes, weights=weights)
    substitutions = universal_substitutions(maps, len(roots))
    result, root = constrained_egen(grammar, list(zip(roots, substitutions.tau, strict=True)))
    logger.info('E-generalized', classes=','.join(roots), maximal_sets=len(maps.sets), alternatives=result.size)
    return Generalization(result, root, substitutions, maps)

