"""Exception hierarchy.

Everything raised on bad input derives from :class:`HypergraphError`, which is
itself a ``ValueError`` so callers that only care about "bad data" can catch
the builtin.
"""


class HypergraphError(ValueError):
    pass


class EmptyHyperedge(HypergraphError):
    pass


class SingletonHyperedge(HypergraphError):
    pass


class NonpositiveWeight(HypergraphError):
    pass


class VertexOutOfRange(HypergraphError):
    pass


class DegenerateCut(HypergraphError):
    """Cut with an empty side (zero minimum volume)."""


class ConstantVector(HypergraphError):
    """Vector with no component orthogonal to the all-ones vector."""


class DisconnectedGraph(HypergraphError):
    pass


class Unbounded(HypergraphError):
    """Resolvent problem with lambda = 0 and a seed not orthogonal to ones."""


class InvalidEpsilon(HypergraphError):
    pass


class NonpositiveConstants(HypergraphError):
    pass


class InvalidCutFunction(HypergraphError):
    pass


class ToleranceNotReached(RuntimeError):
    """Iterative oracle hit its iteration cap.

    The best iterate found so far is attached as ``result``.
    """

    def __init__(self, max_iters, result=None):
        super().__init__(f"tolerance not reached after {max_iters} iterations")
        self.max_iters = max_iters
        self.result = result
