class ConfigError(ValueError):
    """Invalid run configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class PropagationDiverged(ArithmeticError):
    def __init__(self, step: int):
        self.step = step
        super().__init__(f"non-finite wavefunction at step {step}")


class PulseFileError(ValueError):
    pass
