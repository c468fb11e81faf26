"""
Error kinds raised by the click_metrics package
"""

from typing import Optional


class ClickMetricsError(Exception):
    """Base class for every error the toolkit raises on purpose"""


class DomainError(ClickMetricsError, ValueError):
    """A value lies outside its domain (e.g. a grade above max_grade)"""


class FormatError(ClickMetricsError):
    """Malformed input file or record"""

    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        self.line = line
        self.path = path
        where = ''
        if path is not None and line is not None:
            where = f'{path}:{line}: '
        elif line is not None:
            where = f'line {line}: '
        elif path is not None:
            where = f'{path}: '
        super().__init__(f'{where}{message}')


class EvaluationError(ClickMetricsError):
    """A metric or profile cannot be computed for the given inputs"""


class ConfigurationError(ClickMetricsError):
    """Invalid parameters or settings"""


class EstimationError(ClickMetricsError):
    """Click model fitting cannot proceed"""


class AnalysisError(ClickMetricsError):
    pass


class InsufficientDataError(AnalysisError):
    pass


class SizeError(ClickMetricsError):
    """Input too large for exhaustive enumeration"""


class UsageError(ClickMetricsError):
    """Bad command-line usage"""
