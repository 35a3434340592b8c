"""Exceptions shared across the package."""


class FuelError(RuntimeError):
    """Step budget exhausted before reaching a normal form."""

    def __init__(self, message: str, steps: int = 0, report=None):
        super().__init__(message)
        self.steps = steps
        self.report = report


class MachineStuck(RuntimeError):
    """No transition applies: a machine invariant has been broken."""


class UnfoldCapExceeded(ValueError):
    """Refusal to materialize an unfolded term larger than the cap."""

    def __init__(self, size: int, cap: int):
        super().__init__(f"unfolded size {size} exceeds cap {cap}")
        self.size = size
        self.cap = cap


class ShapeViolation(AssertionError):
    """A configuration fell outside the reachable-shape grammars."""


class AuditViolation(AssertionError):
    """A runtime audit failed; carries the offending step and report."""

    def __init__(self, message: str, violation=None, report=None):
        super().__init__(message)
        self.violation = violation
        self.report = report
