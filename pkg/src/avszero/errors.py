"""Exception hierarchy shared across the engine."""


class AvsError(Exception):
    """Base class for all engine errors."""


# --- manifest / codecs ---

class ParseError(AvsError):
    pass


class DuplicateId(AvsError):
    pass


class MissingFile(AvsError):
    pass


class DecodeError(AvsError):
    pass


class UnsupportedFormat(AvsError):
    pass


class RangeViolation(AvsError):
    pass


# --- metrics ---

class DimensionMismatch(AvsError):
    pass


class EmptyGT(AvsError):
    pass


class InvalidK(AvsError):
    pass


class InvalidThreshold(AvsError):
    pass


class EmptyInput(AvsError):
    pass


# --- inversion ---

class ZeroVector(AvsError):
    pass


class EncoderFailure(AvsError):
    pass


class NonFiniteGradient(AvsError):
    pass


# --- strategies ---

class EmptyLabel(AvsError):
    pass


class EmptyCaption(AvsError):
    pass


# --- backend bridge ---

class BackendError(AvsError):
    def __init__(self, stage, message):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


class UnsupportedCapability(AvsError):
    pass


class TransportError(AvsError):
    pass


class Timeout(TransportError):
    pass


class SchemaViolation(AvsError):
    pass


class CacheCorruption(AvsError):
    pass


class UnmatchedFixture(AvsError):
    pass


# --- cli ---

class ConfigError(AvsError):
    pass


class MissingGT(AvsError):
    pass


class NoValidSamples(AvsError):
    pass
