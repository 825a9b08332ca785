"""Exception types shared across the package.

Argument/usage problems raise plain ValueError; these map to exit code 2
in the CLI. Problems with the data itself (empty masks, unreadable or
inconsistent files) raise DataError and map to exit code 1.
"""


class DataError(Exception):
    """Input data is structurally valid but unusable (e.g. empty mask)."""


class NumericalError(Exception):
    """A linear solve or similar numeric step failed; message carries details."""
