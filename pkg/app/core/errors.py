class SignalLabError(Exception):
    """Base error; ``exit_code`` is what the CLI returns when it escapes a command."""

    exit_code = 4


class ConfigError(SignalLabError, ValueError):
    exit_code = 2


class MissingArtifactError(SignalLabError, FileNotFoundError):
    exit_code = 3

    def __init__(self, paths: list[str]) -> None:
        self.paths = list(paths)
        super().__init__("missing artifact(s): " + ", ".join(self.paths))


class MalformedModelError(SignalLabError, ValueError):
    exit_code = 3


class ArchitectureMismatchError(SignalLabError, ValueError):
    exit_code = 3


class SequencingError(SignalLabError, RuntimeError):
    pass


class InsufficientMemoryError(SignalLabError, ValueError):
    pass


class NonFiniteInputError(SignalLabError, ValueError):
    pass
