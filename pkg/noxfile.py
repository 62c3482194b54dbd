"""nox-poetry sessions for testing egen_grammars against each supported Python and checking the built wheel."""

from calcipy.noxfile import build_check, build_dist, tests  # noqa: F401
