"""Diagnostic output shared by the library and the CLI."""

import sys

PREFIX = "[household-mpc]"


def log(msg):
    # type: (str) -> None
    """Log a diagnostic message to stderr with the [household-mpc] prefix."""
    print("{} {}".format(PREFIX, msg), file=sys.stderr)
