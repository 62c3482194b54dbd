"""Check that the public modules import in the built package."""

from pprint import pprint

from egen_grammars.carriers import BUILTINS, class_grammar
from egen_grammars.generalize import egen
from egen_grammars.grammars import TreeGrammar
from egen_grammars.main import run

pprint(f'run: {run}\nbuiltins: {BUILTINS}\n\n{locals()}')  # noqa: T203
