# -*- coding: utf-8 -*-
"""
exceptions module
"""


class UniverseError(IndexError):
    """Raised when a vertex id falls outside the fixed vertex universe."""


class MissingEdgeError(KeyError):
    """Raised when an operation references an edge that is not live."""


class DuplicateEdgeError(ValueError):
    """Raised when inserting an edge that is already live."""


class LabelRangeError(ValueError):
    """Raised when an edge label is outside of {0, 1, 2, 3}."""


class ParameterError(ValueError):
    """Raised for invalid construction or generator parameters."""


class ContractError(RuntimeError):
    """Raised when an internal precondition of a maintenance routine is broken."""


class SizeLimitError(ValueError):
    """Raised when an exact oracle is asked to enumerate a graph that is too large."""


class LadderExhaustedError(RuntimeError):
    """Raised when no level of the density ladder reports LOW."""


class PaletteExhaustedError(RuntimeError):
    """Raised when a vertex has no admissible color left in its palette."""


class DensityContractError(RuntimeError):
    """Raised when an application's density upper bound is violated."""


class StreamParseError(ValueError):
    """
    Raised for malformed update streams.

    Parameters
    ----------
    message : str
        Description of the problem.
    lineno : int
        1-based line number of the offending line.
    """

    def __init__(self, message, lineno):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")
