"""
Error hierarchy for the FS lab.
Every error carries the process exit code the command-line front end
reports when the error escapes a command.
"""

from typing import Any, Dict, List, Optional


class FSLabError(Exception):
    """Base class for all lab errors."""
    exit_code = 1


class InvalidInputError(FSLabError):
    """Malformed graph input, bad flag or violated precondition."""
    exit_code = 2


class GraphFormatError(InvalidInputError):
    """
    Parse failure in an edge-list or graph6 source.
    """

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class InstanceTooLargeError(FSLabError):
    """Instance exceeds the order cap or the memory budget."""
    exit_code = 3


class VerificationMismatchError(FSLabError):
    """
    A prediction or conjectured statement disagreed with the oracle.
    """
    exit_code = 4

    def __init__(self, message: str, records: Optional[List[Dict[str, Any]]] = None):
        self.records = records or []
        super().__init__(message)


class CertificateError(FSLabError):
    """A generator could not produce a valid exchange certificate."""
    exit_code = 5


class ProofGapError(CertificateError):
    """The structure a constructive case relies on was absent."""
    pass


class NavigationError(CertificateError):
    """A cycle navigation goal is unreachable from the given bijection."""
    pass
