"""Error type shared across the toolkit.

Every failure carries a stable machine-readable ``code`` (kebab-case) so the
HTTP layer and the CLI can map errors without string matching on messages.
"""

from __future__ import annotations


class ProfilingError(Exception):
    """Domain error with a stable error code."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message

    def __repr__(self) -> str:
        return f"ProfilingError({self.code!r}, {self.message!r})"
