"""Exception hierarchy.

Every domain error derives from :class:`AtomlabError`; the CLI maps those to
exit code 1 and everything parse/I-O related to exit code 2.
"""


class AtomlabError(Exception):
    """Base class for violations of a mathematical precondition."""


class ClusterAmbiguity(AtomlabError):
    pass


class InvalidCI(AtomlabError):
    pass


class NotFano(AtomlabError):
    pass


class NoSolution(AtomlabError):
    pass


class Inconsistent(AtomlabError):
    pass


class InsufficientOrder(AtomlabError):
    pass


class CrossCheckFailure(AtomlabError):
    pass


class NotCommuting(AtomlabError):
    def __init__(self, i, j):
        super().__init__(f"generators {i} and {j} do not commute")
        self.pair = (i, j)


class NotDegreeRaising(AtomlabError):
    def __init__(self, source_degree, target_degree):
        super().__init__(
            f"kappa has a nonzero block H^{source_degree} -> H^{target_degree}"
        )
        self.block = (source_degree, target_degree)


class ClusterMismatch(AtomlabError):
    def __init__(self, message, observed=None):
        super().__init__(message)
        self.observed = observed


class DimensionMismatch(AtomlabError):
    pass


class IdCollision(AtomlabError):
    pass


class InvalidDiamond(AtomlabError):
    pass


class NotValidated(AtomlabError):
    pass


class NonIsolated(AtomlabError):
    pass


class ActionMismatch(AtomlabError):
    pass


class DegenerateParameters(AtomlabError):
    pass


class BadTodd(AtomlabError):
    pass


class RelationViolated(AtomlabError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class Singular(AtomlabError):
    pass
