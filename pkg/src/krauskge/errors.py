"""Exception hierarchy shared by all modules.

Every error carries an ``exit_code`` so the command-line layer can map
failures to the documented process exit codes without a lookup table.
"""


class KrausError(Exception):
    exit_code = 2


# channel algebra
class ZeroFactor(KrausError):
    pass


class DimensionMismatch(KrausError):
    pass


class IncompleteChannel(KrausError):
    pass


class EmptyChannel(KrausError):
    pass


class GeometryMismatch(KrausError):
    pass


class KappaOverflow(KrausError):
    exit_code = 3


class UnsupportedGeometry(KrausError):
    pass


class NotPSD(KrausError):
    pass


class ZeroMatrix(KrausError):
    pass


# parametrisation
class SolveFailure(KrausError):
    pass


class ShapeMismatch(KrausError):
    pass


class NonPositiveWeight(KrausError):
    pass


class NearSingular(KrausError):
    pass


class KappaMismatch(KrausError):
    pass


# training
class EmptyNegatives(KrausError):
    pass


class ExhaustedCandidates(KrausError):
    pass


class MissingParam(KrausError):
    pass


# data
class ParseError(KrausError):
    def __init__(self, path, lineno, message):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = path
        self.lineno = lineno


class EmptySplit(KrausError):
    pass


class EmptyRelation(KrausError):
    pass


class TooLargeExact(KrausError):
    pass


class InvalidParams(KrausError):
    pass


# evaluation
class UnknownId(KrausError):
    pass


class EmptyRanks(KrausError):
    pass


class TooFewRelations(KrausError):
    pass


# baselines
class NotOrthogonal(KrausError):
    pass


class InvalidSign(KrausError):
    pass


class NotWOrthogonal(KrausError):
    pass


class UnknownModel(KrausError):
    pass


# cli
class ConfigError(KrausError):
    pass


class CheckpointError(KrausError):
    pass


class PropertyFailure(KrausError):
    exit_code = 1
