class Error(Exception):
    pass


class ConfigError(Error):
    def __init__(self, errors):
        self.errors = errors
        super().__init__(f"Invalid configuration: {errors}")


class CorpusError(Error):
    """
    Raised when an input table cannot be loaded.

    ``problems`` holds ``(line, field, message)`` tuples; ``line`` is the
    1-based line number in the file (the header is line 1) or ``None`` for
    file-level problems.
    """

    def __init__(self, message, problems=()):
        self.problems = list(problems)
        if self.problems:
            details = "; ".join(
                f"line {line}: {field}: {text}" if line else f"{field}: {text}" for line, field, text in self.problems
            )
            message = f"{message} ({details})"
        super().__init__(message)


class PartitionError(Error):
    pass


class UndefinedRatioError(Error):
    pass


class DesignError(Error):
    pass


class DegenerateOutcomeError(Error):
    pass


class ScheduleError(Error):
    pass


class StageError(Error):
    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")
