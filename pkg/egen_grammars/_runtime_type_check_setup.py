"""Opt-in runtime type checking of the whole package with beartype."""

from contextlib import suppress
from enum import Enum
from os import getenv

from typing_extensions import Self

NAME = 'egen_grammars'.upper()
"""Suffix for the package-specific environment variable."""


class _RuntimeTypeCheckingModes(Enum):
    """Values accepted by `RUNTIME_TYPE_CHECKING_MODE`."""

    ERROR = 'ERROR'
    WARNING = 'WARNING'
    OFF = None

    @classmethod
    def from_environment(cls) -> Self:  # pragma: no cover
        """Read the mode from the environment.

        Raises:
            ValueError: for an unknown mode

        """
        rtc_mode = getenv(f'RUNTIME_TYPE_CHECKING_MODE_{NAME}') or getenv('RUNTIME_TYPE_CHECKING_MODE') or None
        try:
            return cls(rtc_mode)
        except ValueError:
            modes = [_e.value for _e in cls]
            msg = f"'RUNTIME_TYPE_CHECKING_MODE={rtc_mode}' is not from {modes}"
            raise ValueError(msg) from None


def configure_runtime_type_checking_mode() -> None:  # pragma: no cover
    """Install the beartype import hook when a mode other than OFF is configured."""
    rtc_mode = _RuntimeTypeCheckingModes.from_environment()
    if rtc_mode is _RuntimeTypeCheckingModes.OFF:
        return

    with suppress(ImportError, ModuleNotFoundError):
        from beartype import BeartypeConf  # noqa: PLC0415
        from beartype.claw import beartype_this_package  # noqa: PLC0415
        from beartype.roar import BeartypeClawDecorWarning  # noqa: PLC0415

        warning_cls = None if rtc_mode is _RuntimeTypeCheckingModes.ERROR else BeartypeClawDecorWarning
        beartype_this_package(conf=BeartypeConf(warning_cls_on_decorator_exception=warning_cls))
