"""Package-wide error types.

Validation problems raise plain :class:`ValueError` (or subclasses such as
:class:`pepslab.tensor.NonInjectiveError`). Resource guards raise
:class:`GuardExceeded`, which the CLI maps to its own exit code and which
callers may override with an explicit force flag.
"""

from __future__ import annotations


class GuardExceeded(RuntimeError):
    """A computation was refused because it exceeds a configured resource guard."""

    def __init__(self, message: str, required: int, limit: int) -> None:
        super().__init__(f"{message} (required {required}, guard {limit})")
        self.required = required
        self.limit = limit
