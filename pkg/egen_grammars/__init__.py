"""egen_grammars."""

from ._runtime_type_check_setup import configure_runtime_type_checking_mode

__version__ = '0.4.0'
__pkg_name__ = 'egen_grammars'

configure_runtime_type_checking_mode()


# == Above code must always be first ==
