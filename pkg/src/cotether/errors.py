"""Exception types shared across the package."""


class IllConditionedError(ValueError):
    """Raised when nearly coincident poles or rates make a closed form unusable."""


class DivergentIntegralError(ValueError):
    """Raised when a requested integral does not converge."""


class SearchCapExceeded(RuntimeError):
    """Raised when an exhaustive search would exceed the configured evaluation cap."""

    def __init__(self, required: int, cap: int):
        super().__init__(f"search needs {required} evaluations, cap is {cap}")
        self.required = required
        self.cap = cap
