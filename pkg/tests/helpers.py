import itertools
from collections.abc import Sequence
from pathlib import Path
from random import Random

from corallium.log import get_logger
from pytestshellutils.shell import Subprocess
from pytestshellutils.utils.processes import ProcessResult

from egen_grammars.terms import App, Term, Var

from .configuration import TEST_DATA_DIR

logger = get_logger()

EGEN_CMD = ['poetry', 'run', 'egen']


def _log_shell(message: str, ret: ProcessResult, *args, **kwargs) -> None:
    """Cleanup the shell output for printing."""
    logger.text(message, stdout=f'`{ret.stdout.strip()}`', stderr=f'`{ret.stderr.strip()}`', args=args, _kwargs=kwargs)


def run_egen(shell: Subprocess, *args: str, cwd: Path = TEST_DATA_DIR) -> ProcessResult:
    """Run `egen` with `args` from the test data directory."""
    ret = shell.run(*EGEN_CMD, *args, cwd=cwd)
    _log_shell('ran egen', ret, *args)
    return ret


def random_term(rng: Random, symbols: Sequence[tuple[str, int]], depth: int, leaves: Sequence[str] = ()) -> Term:
    """Random term of at most `depth` levels; `leaves` names the variables that may appear."""
    constants = [(name, 0) for name, arity in symbols if arity == 0]
    choices = [*constants, *((name, -1) for name in leaves)]
    if depth > 1:
        choices.extend((name, arity) for name, arity in symbols if arity)
    name, arity = rng.choice(choices)
    if arity < 0:
        return Var(name)
    return App(name, tuple(random_term(rng, symbols, depth - 1, leaves) for _ in range(arity)))


def all_terms(symbols: Sequence[tuple[str, int]], depth: int) -> list[Term]:
    """Every ground term of at most `depth` levels, smallest first."""
    found: list[Term] = [App(name) for name, arity in symbols if arity == 0]
    for _ in range(depth - 1):
        found = [App(name) for name, arity in symbols if arity == 0] + [
            App(name, args)
            for name, arity in symbols
            if arity
            for args in itertools.product(found, repeat=arity)
        ]
    return sorted(found, key=lambda term: (term.size, term.key))
