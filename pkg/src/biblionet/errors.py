"""Exception hierarchy.

Everything raised for bad user input derives from :class:`BiblionetError`,
which the CLI maps to exit code 2.
"""

from __future__ import annotations


class BiblionetError(Exception):
    """Base class for data and contract errors."""


class LineError(BiblionetError):
    """An error tied to a position in an input stream (1-based line)."""

    def __init__(self, line: int, message: str = ""):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}" if message else f"line {line}")


# ingest
class MissingColumn(BiblionetError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"required column missing from header: {name!r}")


class MalformedRow(LineError):
    pass


class BadYear(LineError):
    pass


class EmptyMerge(BiblionetError):
    pass


class AliasConflict(BiblionetError):
    pass


# netcore
class SelfLoop(BiblionetError):
    pass


class UnknownNode(BiblionetError):
    pass


class DuplicateNode(BiblionetError):
    pass


class SinkFailure(BiblionetError):
    pass


class ParseFailure(LineError):
    pass


# builders
class EmptyCorpus(BiblionetError):
    pass


class InvalidSpec(BiblionetError):
    pass


# metrics
class IsolatedNode(BiblionetError):
    pass


class DegenerateGraph(BiblionetError):
    pass


class BadProbability(BiblionetError):
    pass


class AlreadyNormalized(BiblionetError):
    pass


# cluster
class PartialAssignment(BiblionetError):
    pass


class BadResolution(BiblionetError):
    pass


# quartile
class DuplicateEntry(BiblionetError):
    pass


class BadQuartile(BiblionetError):
    pass
