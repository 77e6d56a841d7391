"""Exception types shared across the toolkit."""


class ConfigError(ValueError):
    """Invalid configuration: bad value, unknown key, or violated exponent relation."""


class NumericalError(RuntimeError):
    """A numerical routine failed to converge.

    Carries the solver state that was current at the failure so the caller can
    diagnose the bracket instead of guessing.
    """

    def __init__(self, message: str, **state):
        super().__init__(message)
        self.state = dict(state)

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        base = super().__str__()
        if self.state:
            detail = ", ".join(f"{k}={v!r}" for k, v in sorted(self.state.items()))
            return f"{base} [{detail}]"
        return base
