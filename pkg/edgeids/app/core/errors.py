"""
Exception hierarchy for the IDS toolkit.

Every error carries the CLI exit code it maps to, and every error is also a
ValueError so callers that only know the builtin keep working.
"""


class EdgeIdsError(ValueError):
    exit_code = 2


class UsageError(EdgeIdsError):
    exit_code = 1


class DataError(EdgeIdsError):
    exit_code = 2


class SchemaError(DataError):
    pass


class EmptyDatasetError(DataError):
    pass


class StratificationError(DataError):
    pass


class ArityError(DataError):
    pass


class TrainingError(DataError):
    def __init__(self, message: str, epoch: int | None = None, batch: int | None = None):
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch


class CalibrationError(DataError):
    pass


class NothingToReportError(DataError):
    pass


class CompatibilityError(EdgeIdsError):
    exit_code = 3


class ConfigError(CompatibilityError):
    pass


class ModelInvariantError(CompatibilityError):
    pass


class ModelFormatError(CompatibilityError):
    pass


class BadMagicError(ModelFormatError):
    pass


class UnsupportedVersionError(ModelFormatError):
    pass


class UnknownKindError(ModelFormatError):
    pass


class TruncatedModelError(ModelFormatError):
    pass
