from __future__ import annotations

from typing import Any, NamedTuple


class Verdict(NamedTuple):
    """Outcome of a checker: truthy on success, otherwise names what failed."""

    ok: bool
    reason: str | None = None
    witness: Any = None

    def __bool__(self):
        return self.ok


PASS = Verdict(True)
