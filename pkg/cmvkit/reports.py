"""
Result containers shared by the validation operations.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List


@dataclass
class ValidationReport:
    """
    Collected findings of a validation pass.

    Numeric failures are recorded, never raised; ``passed`` is true iff
    ``errors`` is empty.
    """
    errors: List[str] = field(default_factory=list)
    residuals: Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.errors

    def add_error(self, message: str) -> None:
        self.errors.append(message)

    def record(self, name: str, value: float, threshold: float) -> None:
        """Store a residual and flag it when it exceeds ``threshold``."""
        self.residuals[name] = float(value)
        if not value <= threshold:
            self.errors.append(f"{name}: residual {value:.3e} exceeds {threshold:.1e}")

    def merge(self, other: "ValidationReport") -> None:
        self.errors.extend(other.errors)
        self.residuals.update(other.residuals)

    def to_dict(self) -> Dict[str, Any]:
        return {"passed": self.passed, "errors": list(self.errors), "residuals": dict(self.residuals)}
