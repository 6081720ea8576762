class ConfigError(ValueError):
    """Invalid run configuration; ``field`` names the offending key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class ResourceError(MemoryError):
    """A many-body run would exceed the memory cap."""

    def __init__(self, required_bytes, available_bytes, what="many-body workspace"):
        super().__init__(
            f"{what} needs {required_bytes} bytes but the cap is {available_bytes} bytes"
        )
        self.required_bytes = int(required_bytes)
        self.available_bytes = int(available_bytes)


class NumericalError(ArithmeticError):
    """Integration produced non-finite values or drifted out of tolerance."""
