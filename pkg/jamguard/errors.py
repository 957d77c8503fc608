class JamguardError(Exception):
    pass


class ConfigError(JamguardError, ValueError):
    def __init__(self, errors: list[str] | str) -> None:
        self.errors: list[str] = [errors] if isinstance(errors, str) else list(errors)
        super().__init__("; ".join(self.errors))


class OutOfRangeError(JamguardError, ValueError):
    pass


class ContractError(JamguardError):
    pass


class OutputBusyError(JamguardError):
    pass
