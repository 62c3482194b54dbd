"""Text syntax for terms and clauses.

Terms are written in prefix form (`plus(s(0),x)`) with infix sugar for `< <= = + - * / //`, tuples `(a,b)` or
`⟨a,b⟩`, and decimal literals for Peano numerals (`3` is `s(s(s(0)))`).

"""

from collections.abc import Callable, Iterable
from functools import lru_cache

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import LarkError, VisitError

from ._errors import ParseError
from .terms import App, Signature, Term, Var, make_tuple, peano

_GRAMMAR = r"""
    ?term: sum
         | sum CMPOP sum                -> infix

    ?sum: product
        | sum ADDOP product             -> infix

    ?product: atom
            | product MULOP atom        -> infix

    ?atom: NAME "(" args ")"            -> app
         | NAME                         -> name
         | INT                          -> number
         | "(" term ")"
         | "(" term "," args ")"        -> tupled
         | "⟨" args "⟩"                 -> tupled

    args: term ("," term)*

    clause: literal (IMPLIED_BY body)?
    body: literal ("," literal)*
    ?literal: term
            | NEGATION term              -> negated

    IMPLIED_BY: "<-" | ":-" | "←"
    NEGATION: "~" | "¬"
    CMPOP: "<=" | "<" | "="
    ADDOP: "+" | "-"
    MULOP: "//" | "*" | "/"
    NAME: /v_\{[^{}]*\}|[A-Za-z_][A-Za-z0-9_']*/
    INT: /[0-9]+/

    %import common.WS
    %ignore WS
    %ignore /#[^\n]*/
"""


@lru_cache(maxsize=1)
def _lark() -> Lark:
    return Lark(_GRAMMAR, start=['term', 'clause'], parser='lalr', maybe_placeholders=False)


NameResolver = Callable[[str], bool]
"""Return True when a bare name denotes a variable."""


def default_resolver(*, signature: Signature | None = None, declared: Iterable[str] = ()) -> NameResolver:
    """Variables are declared names, names outside `signature`, or (without a signature) names starting with `v`."""
    known = frozenset(declared)

    def _is_variable(name: str) -> bool:
        if name in known:
            return True
        if signature is not None:
            symbol = signature.get(name)
            return symbol is None or symbol.arity != 0
        return name.startswith('v') or name[0].isupper()

    return _is_variable


@v_args(inline=True)
class _ToTerm(Transformer):  # type: ignore[type-arg]
    def __init__(self, is_variable: NameResolver) -> None:
        super().__init__()
        self._is_variable = is_variable

    def infix(self, left: Term, op: Token, right: Term) -> Term:
        return App(str(op), (left, right))

    def app(self, name: Token, args: list[Term]) -> Term:
        return App(str(name), tuple(args))

    def name(self, name: Token) -> Term:
        text = str(name)
        return Var(text) if self._is_variable(text) else App(text)

    def number(self, value: Token) -> Term:
        return peano(int(value))

    def tupled(self, *items: Term | list[Term]) -> Term:
        flat: list[Term] = []
        for item in items:
            flat.extend(item if isinstance(item, list) else [item])
        return make_tuple(flat)

    def args(self, *items: Term) -> list[Term]:
        return list(items)

    def negated(self, _sign: Token, term: Term) -> tuple[bool, Term]:
        return (False, term)

    def body(self, *literals: Term | tuple[bool, Term]) -> list[tuple[bool, Term]]:
        return [_signed(literal) for literal in literals]

    def clause(self, head: Term | tuple[bool, Term], *rest: Token | list[tuple[bool, Term]]) -> list[tuple[bool, Term]]:
        body = rest[-1] if rest else []
        return [_signed(head), *[(not positive, term) for positive, term in body]]  # type: ignore[union-attr]


def _signed(literal: Term | tuple[bool, Term]) -> tuple[bool, Term]:
    return literal if isinstance(literal, tuple) else (True, literal)


def _parse(text: str, start: str, is_variable: NameResolver):  # noqa: ANN202
    try:
        tree = _lark().parse(text, start=start)
        return _ToTerm(is_variable).transform(tree)
    except VisitError as exc:
        msg = f'Could not interpret {text!r}: {exc.orig_exc}'
        raise ParseError(msg) from None
    except LarkError as exc:
        first_line = str(exc).strip().splitlines()[0]
        msg = f'Could not parse {text!r}: {first_line}'
        raise ParseError(msg) from None


def parse_term(
    text: str,
    *,
    signature: Signature | None = None,
    variables: Iterable[str] = (),
    is_variable: NameResolver | None = None,
) -> Term:
    """Parse one term. Bare names resolve through `is_variable` (default: `default_resolver`)."""
    resolver = is_variable or default_resolver(signature=signature, declared=variables)
    result: Term = _parse(text, 'term', resolver)
    return result


def parse_signed_literals(
    text: str,
    *,
    signature: Signature | None = None,
    variables: Iterable[str] = (),
    is_variable: NameResolver | None = None,
) -> list[tuple[bool, Term]]:
    """Parse `head <- b1, b2` into signed literal terms; body literals come back negative."""
    resolver = is_variable or default_resolver(signature=signature, declared=variables)
    result: list[tuple[bool, Term]] = _parse(text, 'clause', resolver)
    return result


def ground_resolver(_name: str) -> bool:
    """Every bare name is a constant."""
    return False


def parse_examples(text: str, *, signature: Signature | None = None) -> tuple[list[Term], list[Term]]:
    """Read `+ atom` and `- atom` lines into positive and negative examples; `#` starts a comment.

    Examples are ground, so bare names are read as constants even when `signature` does not declare them.

    """
    positives: list[Term] = []
    negatives: list[Term] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        sign, body = line[0], line[1:].strip()
        if sign not in '+-' or not body:
            msg = f"Line {line_no}: expected '+ atom' or '- atom'. Received: {raw!r}"
            raise ParseError(msg)
        term = parse_term(body, signature=signature, is_variable=ground_resolver)
        (positives if sign == '+' else negatives).append(term)
    if not positives:
        msg = 'Expected at least one positive example'
        raise ParseError(msg)
    return positives, negatives
