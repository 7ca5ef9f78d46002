from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass
class Report:
    """Outcome of a numeric check.

    `violations` holds one tuple per failing case, in the order found;
    `checked` counts the cases the check actually evaluated.
    """

    name: str
    passed: bool
    violations: list = field(default_factory=list)
    checked: int = 0
    details: dict[str, Any] = field(default_factory=dict)

    def __bool__(self):
        return self.passed

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f", {len(self.violations)} violation(s)" if self.violations else ""
        return f"{status}  {self.name}  ({self.checked} checked{extra})"
