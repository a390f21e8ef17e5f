class StabilityError(Exception):
    """Base class for every error raised by the toolkit"""
    exit_code = 3


class UsageError(StabilityError):
    exit_code = 1


class ParameterError(UsageError, ValueError):
    """A hyper-parameter is outside its legal range"""


class IngestionError(StabilityError):
    """A corpus, model or embedding file could not be read"""
    exit_code = 2

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        location = ''
        if path is not None:
            location = f'{path}:{line}: ' if line is not None else f'{path}: '
        super().__init__(f'{location}{message}')


class FormatError(IngestionError, ValueError):
    pass
