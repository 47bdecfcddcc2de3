"""Shared error types and lightweight event counters."""


class NumericalError(RuntimeError):
    """A computation failed for numerical reasons (singular system,
    non-finite intermediate, quadrature that does not settle)."""


class EventCounter:
    """Counts recoverable incidents (distance floors, skipped candidates).

    Estimators keep returning values when these events happen; the counter
    lets callers notice that something was patched over.
    """

    def __init__(self):
        self.count = 0

    def add(self, n: int = 1):
        self.count += n

    def reset(self):
        self.count = 0
