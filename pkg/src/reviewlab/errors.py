"""Error type for problems caused by user-supplied input.

Raised for malformed files, impossible configuration values, missing
columns, and similar issues.  The CLI maps it to exit code 2, while
programming errors (plain exceptions) map to exit code 1.
"""


class InputError(Exception):
    pass
