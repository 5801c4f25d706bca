"""Shared result record for numeric and symbolic checks."""

from __future__ import annotations

from dataclasses import dataclass, field

PASS = "pass"
FAIL = "fail"
SKIPPED = "skipped"

EXACT_ZERO = "exact-zero"


@dataclass
class IdentityReport:
    """One check outcome.

    ``residual`` is a float for numeric checks, :data:`EXACT_ZERO` for a
    symbolic check that closed, or a string describing the leftover terms.
    ``runtime_ms`` is kept in memory only; written reports omit it.
    """

    suite: str
    check_id: str
    status: str
    residual: object
    tolerance: object = None
    details: dict = field(default_factory=dict)
    runtime_ms: float = 0.0

    @property
    def passed(self) -> bool:
        return self.status == PASS

    @classmethod
    def numeric(cls, suite, check_id, residual, tolerance, **details):
        residual = float(residual)
        status = PASS if residual <= tolerance else FAIL
        return cls(suite, check_id, status, residual, tolerance, details)

    @classmethod
    def symbolic(cls, suite, check_id, ok, leftover="", **details):
        if ok:
            return cls(suite, check_id, PASS, EXACT_ZERO, EXACT_ZERO, details)
        return cls(suite, check_id, FAIL, leftover or "nonzero", EXACT_ZERO, details)
