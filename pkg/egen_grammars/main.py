"""Command line front end.

Results go to stdout as `weight<TAB>term` lines (or JSON with `--json`); errors go to stderr with a stable prefix.

Exit codes: 0 on success, 1 on a usage error, 2 on a semantic error, 3 when a mandatory result is empty.

"""

import logging
import sys
from argparse import ArgumentParser, ArgumentTypeError, Namespace
from collections.abc import Callable, Iterable, Iterator, Sequence
from pathlib import Path

from corallium.log import configure_logger, get_logger
from corallium.loggers.plain_printer import plain_printer

from . import __version__
from ._config import Settings, load_config
from ._errors import EgenError, ParseError
from ._parser import ground_resolver, parse_examples, parse_term
from ._write_output import Result, write_output
from .carriers import BUILTINS, Theory, builtin_carrier, class_grammar, load_theory
from .congruence import EquationalTheory, extend_with_terms
from .editor import COMMANDS, WEIGHT_PROFILES, EditorWorld, Position, editor_suggest, parse_position
from .generalize import egen
from .grammars import (
    TreeGrammar,
    WeightMap,
    determinize,
    difference,
    enumerate_terms,
    format_grammar,
    intersect,
    is_empty,
    parse_grammar,
    simplify,
)
from .learn import (
    Clause,
    format_clause,
    learn_atom,
    learn_atom_determinate,
    lgg_ce,
    lgg_e,
    parse_clause,
    remove_det_literals,
)
from .lemmas import load_lemma_task, suggest_lemmas
from .series import parse_series, series_law
from .terms import App, Signature, Term, format_term

configure_logger(log_level=logging.INFO, logger=plain_printer)
logger = get_logger()

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ERROR = 2
EXIT_EMPTY = 3

GRAMMAR_OPS = ('intersect', 'difference', 'simplify', 'determinize', 'enumerate')


# ----------------------------------------------------------------------------------------------------------------------
# Argument validation


def _positive_int(text: str) -> int:
    if text.isdigit() and int(text) > 0:
        return int(text)
    msg = f'Expected a positive integer. Received: `{text}`'
    raise ArgumentTypeError(msg)


def _file_path(pth: str) -> Path:
    if pth and Path(pth).is_file():
        return Path(pth).resolve()
    msg = f'Expected a path to a file. Received: `{pth}`'
    raise ArgumentTypeError(msg)


def _names(text: str) -> tuple[str, ...]:
    return tuple(filter(None, (part.strip() for part in text.split(','))))


def _move(text: str) -> tuple[Position, Position]:
    start, sep, end = text.partition(':')
    if not sep:
        msg = f'Expected a move like `k2:b2`. Received: `{text}`'
        raise ArgumentTypeError(msg)
    try:
        return parse_position(start), parse_position(end)
    except ParseError as exc:
        raise ArgumentTypeError(str(exc)) from None


def _det_definition(text: str) -> tuple[str, str]:
    predicate, sep, symbol = text.partition('=')
    if not sep or not predicate or not symbol:
        msg = f'Expected `predicate=function`, e.g. `s=spouse`. Received: `{text}`'
        raise ArgumentTypeError(msg)
    return predicate, symbol


# ----------------------------------------------------------------------------------------------------------------------
# Shared inputs


def _theory(args: Namespace, *, required: bool = True) -> Theory:
    if args.theory:
        return load_theory(args.theory.read_text(encoding='utf-8'))
    if args.builtin:
        return builtin_carrier(
            args.builtin,
            carrier=args.carrier,
            ops=args.ops,
            alphabet=args.alphabet,
            absorb=not args.no_absorb,
        )
    if required:
        msg = f'Pass `--theory FILE` or `--builtin NAME` (one of: {", ".join(BUILTINS)})'
        raise ParseError(msg)
    return Theory(Signature(), EquationalTheory(Signature(), ()))


def _class_grammar(args: Namespace, settings: Settings, theory: Theory) -> tuple[TreeGrammar, list[str]]:
    return class_grammar(theory, bound=args.bound, compress=args.compress, max_steps=settings.rewrite_steps)


def _weights(settings: Settings) -> WeightMap:
    return WeightMap(default=settings.symbol_weight, variable=settings.variable_weight)


def _read_clauses(path: Path, signature: Signature) -> tuple[Clause, Clause]:
    lines = [line for raw in path.read_text(encoding='utf-8').splitlines() if (line := raw.split('#', 1)[0].strip())]
    if len(lines) != 2:  # noqa: PLR2004
        msg = f'Expected two clauses, one per line, in {path.name}. Received: {len(lines)}'
        raise ParseError(msg)
    first, second = (parse_clause(line, signature=signature, is_variable=ground_resolver) for line in lines)
    return first, second


def _clause_weight(clause: Clause, weights: WeightMap) -> int:
    return sum(weights.term(arg) for lit in clause.literals for arg in lit.args)


def _term_results(terms: Iterable[Term], weights: WeightMap) -> Iterator[Result]:
    for term in terms:
        yield Result(weights.term(term), format_term(term))


def _emit(args: Namespace, results: Iterable[Result]) -> int:
    if write_output(results, as_json=args.json) == 0:
        print('no results', file=sys.stderr)
        return EXIT_EMPTY
    return EXIT_OK


# ----------------------------------------------------------------------------------------------------------------------
# Subcommands


def _cmd_classgrammar(args: Namespace, settings: Settings) -> int:
    grammar, classes = _class_grammar(args, settings, _theory(args))
    logger.info('Class grammar', classes=len(classes), alternatives=grammar.size)
    sys.stdout.write(format_grammar(grammar))
    return EXIT_OK


def _cmd_antiunify(args: Namespace, settings: Settings) -> int:
    theory = _theory(args)
    grammar, classes = _class_grammar(args, settings, theory)
    terms = [parse_term(text, signature=theory.signature, is_variable=ground_resolver) for text in args.terms]
    extended, class_map = extend_with_terms(grammar, terms, classes=classes)
    weights = _weights(settings)
    result = egen(extended, [class_map[term] for term in terms], classes=classes, weights=weights)
    found = enumerate_terms(
        result.grammar,
        result.root,
        weights,
        max_count=settings.max_count,
        max_weight=settings.max_weight,
    )
    return _emit(args, _term_results(found, weights))


def _cmd_learn_atom(args: Namespace, settings: Settings) -> int:
    theory = _theory(args)
    grammar, classes = _class_grammar(args, settings, theory)
    positives, negatives = parse_examples(args.examples.read_text(encoding='utf-8'), signature=theory.signature)
    weights = _weights(settings)
    hypotheses = learn_atom(
        positives,
        negatives,
        grammar=grammar,
        classes=classes,
        budget=settings.substitution_budget,
        max_weight=args.cutoff,
        weights=weights,
        max_states=settings.max_states,
    )
    atoms = hypotheses.enumerate(weights, max_count=settings.max_count, max_weight=settings.max_weight)
    return _emit(args, (Result(sum(weights.term(arg) for arg in atom.args), format_term(atom)) for atom in atoms))


def _cmd_learn_det(args: Namespace, settings: Settings) -> int:
    theory = _theory(args)
    grammar, classes = _class_grammar(args, settings, theory)
    positives, negatives = parse_examples(args.examples.read_text(encoding='utf-8'), signature=theory.signature)
    hypotheses = learn_atom_determinate(
        positives,
        negatives,
        grammar=grammar,
        classes=classes,
        max_states=settings.max_states,
    )
    found = hypotheses.enumerate(_weights(settings), max_count=settings.max_count, max_weight=settings.max_weight)
    return _emit(
        args,
        (Result(weight, format_term(App(hypotheses.predicate, (pattern, body)))) for weight, pattern, body in found),
    )


def _cmd_lgg(args: Namespace, settings: Settings) -> int:
    theory = _theory(args, required=False)
    grammar, classes = _class_grammar(args, settings, theory)
    first, second = _read_clauses(args.clauses, theory.signature)
    weights = _weights(settings)
    hypotheses = lgg_e(
        first,
        second,
        grammar=grammar,
        classes=classes,
        budget=settings.substitution_budget,
        max_states=settings.max_states,
    )
    if args.smallest:
        clause = hypotheses.smallest(weights)
        if clause is not None and args.det:
            clause = remove_det_literals(clause, dict(args.det))
        clauses: Iterable[Clause] = [] if clause is None else [clause]
    else:
        clauses = hypotheses.enumerate(weights, max_count=settings.max_count, max_weight=settings.max_weight)
    return _emit(args, (Result(_clause_weight(clause, weights), format_clause(clause)) for clause in clauses))


def _cmd_lgg_ce(args: Namespace, settings: Settings) -> int:
    theory = _theory(args)
    grammar, classes = _class_grammar(args, settings, theory)
    first, second = _read_clauses(args.clauses, theory.signature)
    weights = _weights(settings)
    hypotheses = lgg_ce(first, second, grammar=grammar, classes=classes, max_states=settings.max_states)
    clauses = hypotheses.enumerate(weights, max_count=settings.max_count, max_weight=settings.max_weight)
    return _emit(args, (Result(_clause_weight(clause, weights), format_clause(clause)) for clause in clauses))


def _cmd_lemma(args: Namespace, settings: Settings) -> int:
    task = load_lemma_task(args.task, seed=args.seed)
    weights = _weights(settings)
    found = suggest_lemmas(
        task,
        weights,
        max_count=settings.max_count,
        max_weight=settings.max_weight,
        max_states=settings.max_states,
    )
    return _emit(args, _term_results(found, weights))


def _cmd_series(args: Namespace, settings: Settings) -> int:
    theory = _theory(args)
    grammar, classes = _class_grammar(args, settings, theory)
    task = parse_series(args.series, signature=theory.signature, k=args.k)
    weights = _weights(settings)
    found = series_law(
        task,
        grammar,
        weights,
        classes=classes,
        max_count=settings.max_count,
        max_weight=settings.max_weight,
    )
    return _emit(args, _term_results(found, weights))


def _cmd_editor(args: Namespace, settings: Settings) -> int:
    world = EditorWorld.from_text(
        args.screen.read_text(encoding='utf-8'),
        commands=args.commands or COMMANDS,
        weights=WEIGHT_PROFILES[args.profile],
    )
    found = editor_suggest(world, args.move, max_count=settings.max_count, max_weight=settings.max_weight)
    return _emit(args, _term_results(found, world.weights))


def _grammar_roots(args: Namespace, count: int) -> tuple[str, ...]:
    roots = args.roots or ()
    if len(roots) != count:
        msg = f'`{args.op}` needs {count} root(s) in `--roots`. Received: {list(roots)}'
        raise ParseError(msg)
    return roots


def _print_grammar(grammar: TreeGrammar, root: str | None) -> int:
    if root is not None:
        sys.stdout.write(f'# root {root}\n')
    sys.stdout.write(format_grammar(grammar))
    if root is not None and is_empty(grammar, root):
        print(f'no results: the language of {root} is empty', file=sys.stderr)
        return EXIT_EMPTY
    return EXIT_OK


def _cmd_grammar_op(args: Namespace, settings: Settings) -> int:
    expected = 2 if args.op in {'intersect', 'difference'} else 1
    if len(args.grammars) != expected:
        msg = f'`{args.op}` takes {expected} grammar file(s). Received: {len(args.grammars)}'
        raise ParseError(msg)
    grammars = [parse_grammar(path.read_text(encoding='utf-8')) for path in args.grammars]
    if args.op == 'intersect':
        first, second = _grammar_roots(args, 2)
        product, names = intersect(grammars[0], grammars[1], [(first, second)])
        root = names[first, second]
        return _print_grammar(simplify(product, [root]), root)
    if args.op == 'difference':
        first, second = _grammar_roots(args, 2)
        result, root = difference(grammars[0], first, grammars[1], second, max_states=settings.max_states)
        return _print_grammar(result, root)
    if args.op == 'simplify':
        return _print_grammar(simplify(grammars[0], args.roots or grammars[0].rules), None)
    if args.op == 'determinize':
        deterministic, _ = determinize(grammars[0])
        return _print_grammar(deterministic, None)
    (root,) = _grammar_roots(args, 1)
    weights = _weights(settings)
    found = enumerate_terms(grammars[0], root, weights, max_count=settings.max_count, max_weight=settings.max_weight)
    return _emit(args, _term_results(found, weights))


# ----------------------------------------------------------------------------------------------------------------------
# Parser


def _common_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    theory = common.add_mutually_exclusive_group()
    theory.add_argument('--theory', help='Theory file (`sig`, `eq`, `ax`, `carrier` lines)', type=_file_path)
    theory.add_argument('--builtin', help='Built-in carrier', choices=BUILTINS)
    common.add_argument('--carrier', help='Peano bound or maximal list length', type=_positive_int)
    common.add_argument('--ops', help='Comma separated operations of the built-in carrier', type=_names)
    common.add_argument('--alphabet', help='Comma separated letters or attribute values', type=_names)
    common.add_argument('--no-absorb', help='Leave Peano results outside the carrier undefined', action='store_true')
    common.add_argument('--bound', help='Size bound on normal forms of a rewrite theory', type=_positive_int, default=5)
    common.add_argument('--compress', help='Compress the finite-quotient grammar', action='store_true')
    common.add_argument('--limit', help='Maximal number of results', type=_positive_int)
    common.add_argument('--max-weight', help='Stop enumerating above this weight', type=_positive_int)
    common.add_argument('--json', help='Print a JSON document instead of lines', action='store_true')
    common.add_argument('--seed', help='Seed for drawn lemma samples', type=int)
    common.add_argument('--verbose', help='Log debug messages', action='store_true')
    return common


_COMMANDS: dict[str, tuple[Callable[[Namespace, Settings], int], str]] = {
    'classgrammar': (_cmd_classgrammar, 'Print the class grammar of a theory'),
    'antiunify': (_cmd_antiunify, 'E-generalize ground terms'),
    'learn-atom': (_cmd_learn_atom, 'Learn an atomic definition from examples'),
    'learn-det': (_cmd_learn_det, 'Learn a determinate atomic definition from examples'),
    'lgg': (_cmd_lgg, 'Clausal E-generalization of two ground clauses'),
    'lgg-ce': (_cmd_lgg_ce, 'Constrained clausal E-generalization with determinate heads'),
    'lemma': (_cmd_lemma, 'Suggest lemma candidates from a TOML task'),
    'series': (_cmd_series, 'Infer construction laws of a term series'),
    'editor': (_cmd_editor, 'Generalize cursor movements to editor commands'),
    'grammar-op': (_cmd_grammar_op, 'Run a tree grammar operation on grammar files'),
}


def build_parser() -> ArgumentParser:
    common = _common_parser()
    cli = ArgumentParser(prog='egen', description='E-generalization with regular tree grammars')
    cli.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    sub = cli.add_subparsers(dest='command', required=True)
    parsers = {name: sub.add_parser(name, parents=[common], help=text) for name, (_, text) in _COMMANDS.items()}

    parsers['antiunify'].add_argument('terms', nargs='+', help='Ground terms, e.g. `0` and `s(s(0))`')
    for name in ('learn-atom', 'learn-det'):
        parsers[name].add_argument('examples', type=_file_path, help='Lines of `+ atom` and `- atom`')
    parsers['learn-atom'].add_argument(
        '--cutoff',
        help='Remove negatives by testing members up to this weight instead of the exact difference',
        type=_positive_int,
    )
    for name in ('lgg', 'lgg-ce'):
        parsers[name].add_argument('clauses', type=_file_path, help='Two clauses, one per line')
    parsers['lgg'].add_argument('--smallest', help='Only the smallest constrained clause', action='store_true')
    parsers['lgg'].add_argument(
        '--det',
        help='Determinate predicate and its function, e.g. `s=spouse` (with --smallest)',
        type=_det_definition,
        action='append',
    )
    parsers['lemma'].add_argument('task', type=_file_path, help='TOML task with [theory] and [lemma] tables')
    parsers['series'].add_argument('series', help='Series like `0;1,4,9`; the elements after `;` are explained')
    parsers['series'].add_argument('--k', help='Number of elements to explain', type=_positive_int)
    parsers['editor'].add_argument('screen', type=_file_path, help='Text file shown on the screen')
    parsers['editor'].add_argument(
        '--move',
        help='Start and end position, e.g. `k2:b2`; repeat for several moves',
        type=_move,
        action='append',
        required=True,
    )
    parsers['editor'].add_argument('--profile', help='Command weights', choices=sorted(WEIGHT_PROFILES), default='unit')
    parsers['editor'].add_argument('--commands', help='Comma separated enabled commands', type=_names)
    parsers['grammar-op'].add_argument('op', choices=GRAMMAR_OPS)
    parsers['grammar-op'].add_argument('grammars', nargs='+', type=_file_path, help='Grammar files')
    parsers['grammar-op'].add_argument('--roots', help='Comma separated root nonterminals', type=_names)
    return cli


def run(argv: Sequence[str] | None = None, *, base_dir: Path | None = None) -> int:
    """Entry point; returns the exit code."""
    cli = build_parser()
    try:
        args = cli.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in {0, None} else EXIT_USAGE

    try:
        settings = load_config(base_dir).override(max_count=args.limit, max_weight=args.max_weight)
    except (RuntimeError, ValueError) as exc:
        print(f'error[config]: {exc}', file=sys.stderr)
        return EXIT_USAGE

    handler, _ = _COMMANDS[args.command]
    try:
        return handler(args, settings)
    except EgenError as exc:
        print(exc.render(), file=sys.stderr)
        return EXIT_ERROR
    except ValueError as exc:
        print(f'error: {exc}', file=sys.stderr)
        return EXIT_ERROR


def log_level(argv: Sequence[str]) -> int:
    """DEBUG for `--verbose`, WARNING for `--json` so that stdout carries only the document, INFO otherwise."""
    if '--verbose' in argv:
        return logging.DEBUG
    return logging.WARNING if '--json' in argv else logging.INFO


def run_cli() -> None:  # pragma: no cover
    """Console script `egen`."""
    argv = sys.argv[1:]
    configure_logger(log_level=log_level(argv), logger=plain_printer)
    sys.exit(run(argv))
