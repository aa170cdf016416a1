"""
Exceptions raised across sgpivot

All of them derive from the built-in that a caller would naturally catch (mostly ``ValueError``),
so code that only cares about "bad input" keeps working. The CLI maps them to exit codes:
``DATA_ERRORS`` -> 2 and ``NUMERIC_ERRORS`` -> 3.
"""
from typing import List


class ZeroVectorError(ArithmeticError):
    """A norm-based operation received a vector whose norm is zero"""


class DomainError(ValueError):
    """Argument outside the mathematical domain of the operation (e.g. temperature <= 0)"""


class ContractError(ValueError):
    """Caller broke an operation's precondition (shapes, node kinds, stages...)"""


class NonDeterministicError(RuntimeError):
    """Two evaluations of the same function with the same parameters differ"""


class SceneGraphValidationError(ValueError):
    """A scene graph violates one or more structural invariants"""

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        super().__init__("Invalid scene graph: " + "; ".join(self.violations))


class GraphFormatError(ValueError):
    """Malformed scene-graph text or labelled graph"""

    def __init__(self, message: str, position: int = -1):
        self.position = position
        if position >= 0:
            message = f"{message} (at character {position})"
        super().__init__(message)


class GrammarParseError(ValueError):
    """Sentence cannot be derived from the toy grammar"""

    def __init__(self, message: str, token: str = None, index: int = -1):
        self.token = token
        self.index = index
        super().__init__(message)


class OutOfVocabularyError(ValueError):
    """Label or token not present in a vocabulary"""

    def __init__(self, label: str, vocabulary: str = "vocabulary"):
        self.label = label
        super().__init__(f"Label '{label}' is not in the {vocabulary}")


class VocabularyDataError(ValueError):
    """Training scene graphs are inconsistent (e.g. a label used under two node kinds)"""


class ConfigurationError(ValueError):
    """Components were configured in a way that makes the operation impossible"""


class SizingError(ValueError):
    """Requested corpus sizes cannot be satisfied by the grammar"""


class CheckpointError(ValueError):
    """Checkpoint file is malformed or belongs to a different grammar"""


class NumericFailure(ArithmeticError):
    """Training produced a non-finite loss or a gradient check failed"""


DATA_ERRORS = (SceneGraphValidationError, GraphFormatError, GrammarParseError, OutOfVocabularyError,
               VocabularyDataError, SizingError, CheckpointError, ConfigurationError, FileNotFoundError)
NUMERIC_ERRORS = (NumericFailure, ZeroVectorError, NonDeterministicError)
