"""Exception types shared across the package."""


class CondelError(Exception):
    """Base class for all package errors."""


class CorpusFormatError(CondelError):
    """Malformed corpus or prediction file; carries the offending line."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"{message} at line {line}"
        super().__init__(message)


class KeywordError(CondelError):
    """Keyword failed normalization (empty, multi-token, or token-free)."""


class DuplicateRuleError(CondelError):
    pass


class MissingRuleError(CondelError):
    pass


class MissingLabelError(CondelError):
    """A gold label was needed in strict mode but is absent."""


class MissingPredictionError(CondelError):
    """A model prediction was needed in strict mode but is absent."""


class TrainingError(CondelError):
    pass


class SessionError(CondelError):
    pass


class MinRulesError(SessionError):
    pass


class EvaluationMismatchError(CondelError):
    """Two reports being compared were not built from the same ruleset/mode."""
