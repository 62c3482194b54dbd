"""Lemma candidates: terms that agree with a given right-hand side on a few sample substitutions."""

import random
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from corallium.log import get_logger
from corallium.tomllib import tomllib

from ._errors import ParseError, TheoryError
from ._parser import parse_term
from .carriers import Theory, builtin_carrier, class_grammar, load_theory
from .congruence import normal_form_grammar, variable_set_grammar
from .grammars import TreeGrammar, VarLeaf, WeightMap, enumerate_terms, intersect_all
from .learn import learn_atom_determinate
from .terms import App, Term, Var, apply_subst, format_term, lgg_syntactic, make_tuple, peano, tuple_items, variables

logger = get_logger()

LEMMA_PREDICATE = 'lemma'


@dataclass(frozen=True)
class LemmaTask:
    """Find `t2` with `rhs·σ =E t2·σ` for every sample σ."""

    theory: Theory
    rhs: Term
    samples: tuple[dict[str, Term], ...]
    require_normal_form: bool = True
    lower: tuple[str, ...] = ()
    """Variables every candidate must use."""
    upper: tuple[str, ...] | None = None
    """Variables candidates may use; defaults to those of `rhs`."""

    @property
    def variables(self) -> tuple[str, ...]:
        return variables(self.rhs)


def invert_samples(names: Sequence[str], samples: Sequence[Mapping[str, Term]]) -> dict[str, str]:
    """Map the lgg variables of the sample tuples back to `names`.

    Raises:
        TheoryError: when the lgg is not a tuple of distinct variables, so the samples cannot be told apart

    """
    if missing := sorted({name for sample in samples for name in names if name not in sample}):
        msg = f'Samples do not bind the variables {missing}'
        raise TheoryError(msg)
    rows = [make_tuple([sample[name] for name in names]) for sample in samples]
    pattern, _ = lgg_syntactic(rows)
    items = tuple_items(pattern) if len(names) > 1 else (pattern,)
    if not all(isinstance(item, Var) for item in items) or len(set(items)) != len(names):
        msg = (
            f'Samples are not different enough: their generalization is {format_term(pattern)}. '
            'Resample with another seed, or give samples whose values differ in their outermost symbol'
        )
        raise TheoryError(msg)
    return {str(item): name for item, name in zip(items, names, strict=True)}


def draw_samples(
    names: Sequence[str],
    *,
    bound: int,
    rng: random.Random,
    count: int = 3,
    attempts: int = 100,
) -> tuple[dict[str, Term], ...]:
    """Random numeral samples in `0..bound` that `invert_samples` accepts."""
    for _ in range(attempts):
        samples = tuple({name: peano(rng.randint(0, bound)) for name in names} for _ in range(count))
        try:
            invert_samples(names, samples)
        except TheoryError:
            continue
        return samples
    msg = f'Could not draw {count} distinguishable samples in {attempts} attempts; try another seed or a larger carrier'
    raise TheoryError(msg)


def _rename_leaves(grammar: TreeGrammar, mapping: Mapping[str, str]) -> TreeGrammar:
    return grammar.with_rules({
        name: [VarLeaf(mapping.get(alt.name, alt.name)) if isinstance(alt, VarLeaf) else alt for alt in alts]
        for name, alts in grammar.rules.items()
    })


def lemma_grammar(task: LemmaTask, *, max_states: int | None = None) -> tuple[TreeGrammar, str] | None:
    """Candidate grammar after the normal-form and variable filters, or None when nothing fits the samples."""
    names = task.variables
    renaming = invert_samples(names, task.samples)
    grammar, classes = class_grammar(task.theory)
    positives = [
        App(LEMMA_PREDICATE, (make_tuple([sample[name] for name in names]), apply_subst(task.rhs, sample)))
        for sample in task.samples
    ]
    hypotheses = learn_atom_determinate(positives, grammar=grammar, classes=classes, max_states=max_states)
    if not hypotheses.entries:
        return None
    entry = hypotheses.entries[0]
    targets = [(_rename_leaves(entry.grammar, renaming), entry.root)]
    signature = task.theory.signature
    if task.require_normal_form and task.theory.equations.rules:
        targets.append(normal_form_grammar(task.theory.equations, signature=signature, variables=names))
    upper = names if task.upper is None else task.upper
    targets.append(variable_set_grammar(signature, task.lower, upper))
    result, root = intersect_all(targets)
    logger.info('Built lemma candidates', rhs=format_term(task.rhs), samples=len(task.samples), size=result.size)
    return result, root


def suggest_lemmas(
    task: LemmaTask,
    weights: WeightMap | None = None,
    *,
    max_count: int | None = None,
    max_weight: int | None = None,
    max_states: int | None = None,
) -> Iterator[Term]:
    """Candidates `t2` for the lemma `rhs = t2`, lightest first.

    Agreement on the samples is necessary for validity, not sufficient.

    """
    found = lemma_grammar(task, max_states=max_states)
    if found is None:
        return
    grammar, root = found
    yield from enumerate_terms(grammar, root, weights, max_count=max_count, max_weight=max_weight)


# ----------------------------------------------------------------------------------------------------------------------
# Task files

_THEORY_KEYS = {'builtin', 'file', 'carrier', 'ops', 'alphabet', 'absorb'}
_LEMMA_KEYS = {'rhs', 'samples', 'count', 'normal_form', 'lower', 'upper'}


def _check_keys(section: str, values: Mapping[str, Any], known: set[str]) -> None:
    if unknown := sorted(set(values) - known):
        msg = f'Unknown keys in [{section}]: {unknown}. Expected some of: {sorted(known)}'
        raise ParseError(msg)


def _task_theory(config: Mapping[str, Any], base_dir: Path) -> Theory:
    _check_keys('theory', config, _THEORY_KEYS)
    if 'file' in config:
        return load_theory((base_dir / config['file']).read_text(encoding='utf-8'))
    if 'builtin' not in config:
        msg = "Expected [theory] to name a 'builtin' or a theory 'file'"
        raise ParseError(msg)
    return builtin_carrier(
        config['builtin'],
        carrier=config.get('carrier'),
        ops=config.get('ops'),
        alphabet=config.get('alphabet'),
        absorb=config.get('absorb', True),
    )


def _sample_value(value: object, theory: Theory) -> Term:
    if isinstance(value, bool):
        msg = f'Expected a number or a term for a sample value. Received: {value!r}'
        raise ParseError(msg)
    if isinstance(value, int):
        return peano(value)
    if isinstance(value, str):
        return parse_term(value, signature=theory.signature)
    msg = f'Expected a number or a term for a sample value. Received: {value!r}'
    raise ParseError(msg)


def lemma_task_from_dict(
    config: Mapping[str, Any],
    *,
    base_dir: Path,
    seed: int | None = None,
) -> LemmaTask:
    _check_keys('task', config, {'theory', 'lemma'})
    theory = _task_theory(config.get('theory', {}), base_dir)
    lemma = config.get('lemma', {})
    _check_keys('lemma', lemma, _LEMMA_KEYS)
    if 'rhs' not in lemma:
        msg = "Expected [lemma] to give the right-hand side 'rhs'"
        raise ParseError(msg)
    rhs = parse_term(lemma['rhs'], signature=theory.signature)
    if 'samples' in lemma:
        samples = tuple(
            {name: _sample_value(value, theory) for name, value in sample.items()} for sample in lemma['samples']
        )
    else:
        numbers = [value for value in (theory.carrier.values if theory.carrier else ()) if type(value) is int]
        bound = max(numbers, default=5)
        samples = draw_samples(variables(rhs), bound=bound, rng=random.Random(seed), count=lemma.get('count', 3))
    return LemmaTask(
        theory,
        rhs,
        samples,
        require_normal_form=lemma.get('normal_form', True),
        lower=tuple(lemma.get('lower', ())),
        upper=tuple(lemma['upper']) if 'upper' in lemma else None,
    )


def load_lemma_task(path: Path, *, seed: int | None = None) -> LemmaTask:
    """Read a TOML task file with a `[theory]` and a `[lemma]` table."""
    config: dict = tomllib.loads(path.read_text(encoding='utf-8'))  # type: ignore[type-arg]
    logger.debug('Loaded lemma task', path=path)
    return lemma_task_from_dict(config, base_dir=path.parent, seed=seed)
