"""Exception hierarchy. ``exit_code`` maps each family onto the CLI contract."""


class GlobalnessError(Exception):
    exit_code = 3

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage


class ConfigError(GlobalnessError):
    exit_code = 1


class UsageError(GlobalnessError):
    exit_code = 1


class VersionError(GlobalnessError):
    exit_code = 1


class DataError(GlobalnessError):
    exit_code = 2


class ParseError(DataError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptyGraphError(DataError):
    pass


class ConsistencyError(DataError):
    pass


class SamplingError(DataError):
    pass


class TrainingError(DataError):
    pass


class ShapeError(DataError):
    pass


class EvaluationError(DataError):
    pass
