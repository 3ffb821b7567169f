class SvIndexError(Exception):
    """Base class for every error raised by svindex."""


class DimensionError(SvIndexError, ValueError):
    """Vectors (or a vector and an index) disagree on dimension."""


class InvalidGeometryError(SvIndexError, ValueError):
    """A rectangle, ratio or radius is outside its valid domain."""


class ConfigError(SvIndexError, ValueError):
    """A parameter bundle failed validation."""


class StorageError(SvIndexError, IOError):
    """Base class for simulated-disk failures."""


class RecordWriteError(StorageError):
    pass


class RecordReadError(StorageError):
    pass


class BuildError(SvIndexError):
    """An index structure could not be built from the given dataset."""


class ContractViolation(SvIndexError):
    """A caller broke an operation's precondition."""


class TraceMismatchError(ContractViolation):
    """A query trace does not belong to the index kind it was evaluated for."""


class IncomparableWorkloadError(ContractViolation):
    """Structure runs cannot be compared (missing structures or differing queries)."""


class WorkloadError(SvIndexError, ValueError):
    pass


class FormatError(SvIndexError, ValueError):
    """A dataset, workload, report or manifest file is malformed."""
