"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A precondition on user-supplied configuration was violated."""


class NumericError(RuntimeError):
    """A numerical procedure failed to converge or left its valid domain.

    Carries optional diagnostics describing where the failure happened.
    """

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = dict(diagnostics)

    def __str__(self):
        base = super().__str__()
        if not self.diagnostics:
            return base
        extra = ", ".join(f"{k}={v!r}" for k, v in sorted(self.diagnostics.items()))
        return f"{base} [{extra}]"
