"""Exception and warning taxonomy shared across the package.

Every error raised on purpose derives from :class:`GSobolevError` so callers
(and the CLI) can distinguish bad data from genuine bugs with one except
clause.  Parsing problems, structural graph violations, measure violations,
and numeric preconditions each get their own class; messages carry enough
context (line numbers, ids, offending values) to fix the input.
"""

from __future__ import annotations


class GSobolevError(Exception):
    """Base class for all errors raised deliberately by this package."""


class ParseError(GSobolevError):
    """A graph, measure, or point-cloud file is malformed."""


class NonPositiveWeight(GSobolevError):
    """An edge length is zero, negative, or not finite."""


class Disconnected(GSobolevError):
    """The graph does not consist of a single connected component."""


class DuplicateEdge(GSobolevError):
    """An unordered node pair appears twice, or an edge is a self-loop."""


class NodeOutOfRange(GSobolevError):
    """A node id falls outside ``[0, node_count)``."""


class MassNotNormalized(GSobolevError):
    """Measure masses do not sum to one within tolerance."""


class NegativeMass(GSobolevError):
    """A measure entry carries negative mass."""


class InvalidExponent(GSobolevError):
    """The order ``p`` is below one, NaN, or infinite where finiteness is required."""


class RootMismatch(GSobolevError):
    """Operands were prepared against different roots."""


class InvalidBandwidth(GSobolevError):
    """A kernel bandwidth ``t`` is not strictly positive."""


class NonConvergence(GSobolevError):
    """An eigenvalue computation failed to converge."""


class NonPositiveEntry(GSobolevError):
    """An entrywise root requires strictly positive matrix entries."""


class InfeasibleMass(GSobolevError):
    """Transport endpoints carry different total mass."""


class SizeLimitExceeded(GSobolevError):
    """An exact oracle was asked for an instance above its size cap."""


class EmptyCloud(GSobolevError):
    """A point cloud holds no points."""


class SupportTooLarge(GSobolevError):
    """A requested support size exceeds the number of available nodes."""


class DegenerateGeometryWarning(UserWarning):
    """Coincident points produced a zero-length edge; a jitter was applied."""
