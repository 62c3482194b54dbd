"""Errors reported to users with a stable prefix."""


class EgenError(Exception):
    """Base class for all errors that the CLI reports as semantic errors."""

    prefix = 'error'

    def render(self) -> str:
        """Format for stderr."""
        return f'{self.prefix}: {self}'


class ParseError(EgenError):
    """Malformed term, grammar, theory, clause, or example text."""

    prefix = 'error[parse]'


class TheoryError(EgenError):
    """The equational theory or grammar cannot support the requested operation."""

    prefix = 'error[theory]'


class BudgetExceededError(EgenError):
    """A configured budget (substitutions, states, or rewrite steps) was exceeded."""

    prefix = 'error[budget]'
