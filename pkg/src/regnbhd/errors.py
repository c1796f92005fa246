"""Exception hierarchy shared by every stage of the pipeline."""


class RegnbhdError(Exception):
    """Base class; ``exit_code`` is what the CLI returns when it escapes."""

    exit_code = 4


class InputError(RegnbhdError):
    exit_code = 2


class SchemaError(InputError):
    pass


class UnknownGenerator(InputError):
    pass


class MalformedWord(InputError):
    pass


class MixedPresentations(InputError):
    pass


class UnknownGallery(InputError):
    pass


class BallTooLarge(RegnbhdError):
    pass


class UndecidableForDesc(RegnbhdError):
    pass


class InfiniteValence(RegnbhdError):
    pass


class NotASubgraph(InputError):
    pass


class EdgeGroupNotElliptic(RegnbhdError):
    pass


class NotMinimal(RegnbhdError):
    pass


class WindowTooSmall(RegnbhdError):
    pass


class InconsistentDirectTable(InputError):
    pass


class AxiomsFail(RegnbhdError):
    def __init__(self, axiom, witness):
        super().__init__(f"pretree axiom {axiom} fails at {witness}")
        self.axiom = axiom
        self.witness = witness


class NoStabilization(RegnbhdError):
    exit_code = 3


class PositionFailure(RegnbhdError):
    pass


class UnresolvedCorners(RegnbhdError):
    exit_code = 3


class NotEnclosed(RegnbhdError):
    pass


class NoSplittingRealization(RegnbhdError):
    pass


class NonzeroIntersection(RegnbhdError):
    def __init__(self, i, j, value=None):
        super().__init__(f"splittings {i} and {j} have intersection number {value}")
        self.i, self.j, self.value = i, j, value
