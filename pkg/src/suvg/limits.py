"""Resource guards.

Enumeration and search are exhaustive by design, so every entry point that
can blow up takes a ResourceLimits value.  Exceeding a cap raises
ResourceBudgetError instead of silently truncating.  Caps can be set
process-wide through environment variables:

    SUVG_MAX_TREES      cap on enumerated trees        (default 10**5)
    SUVG_MAX_TABLE      cap on forest table entries    (default 10**6)
    SUVG_SEARCH_BUDGET  cap on visited search nodes    (default 10**7)
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

from .errors import ResourceBudgetError

DEFAULT_MAX_TREES = 10**5
DEFAULT_MAX_TABLE = 10**6
DEFAULT_SEARCH_BUDGET = 10**7


def _env_int(name, fallback):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return fallback
    return int(raw)


@dataclass(frozen=True)
class ResourceLimits:
    max_trees: int = DEFAULT_MAX_TREES
    max_table: int = DEFAULT_MAX_TABLE
    search_budget: int = DEFAULT_SEARCH_BUDGET

    @staticmethod
    def from_env() -> "ResourceLimits":
        return ResourceLimits(
            max_trees=_env_int("SUVG_MAX_TREES", DEFAULT_MAX_TREES),
            max_table=_env_int("SUVG_MAX_TABLE", DEFAULT_MAX_TABLE),
            search_budget=_env_int("SUVG_SEARCH_BUDGET", DEFAULT_SEARCH_BUDGET),
        )

    def with_overrides(self, **kwargs) -> "ResourceLimits":
        provided = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **provided) if provided else self


class BudgetMeter:
    """Counts units of work against a cap."""

    def __init__(self, cap: int, what: str):
        self.cap = cap
        self.what = what
        self.used = 0

    def spend(self, amount: int = 1) -> None:
        self.used += amount
        if self.used > self.cap:
            raise ResourceBudgetError(
                f"{self.what} budget of {self.cap} exceeded"
            )
