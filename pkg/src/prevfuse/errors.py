"""Exception types shared across the package.

The CLI maps these onto exit codes: UsageError -> 1, DataError -> 2.
"""


class PrevfuseError(Exception):
    exit_code = 1


class UsageError(PrevfuseError, ValueError):
    """Caller supplied arguments that violate an operation's contract."""

    exit_code = 1


class DataError(PrevfuseError, ValueError):
    """Input data is malformed or inconsistent."""

    exit_code = 2
