"""Exception hierarchy.

Every domain failure derives from :class:`AssetFailError` so callers (and the
command line) can separate bad input from programming errors.
"""


class AssetFailError(Exception):
    """Base class for all domain errors raised by the package."""


# -- data ingestion ---------------------------------------------------------

class SchemaError(AssetFailError):
    pass


class DataError(AssetFailError):
    pass


class MissingColumn(DataError):
    def __init__(self, column):
        super().__init__(f"missing column {column!r}")
        self.column = column


class UnknownLevel(DataError):
    def __init__(self, feature, value, row=None):
        where = f" (row {row})" if row is not None else ""
        super().__init__(f"unknown level {value!r} for feature {feature!r}{where}")
        self.feature = feature
        self.value = value
        self.row = row


class NegativeAge(DataError):
    def __init__(self, row=None, value=None):
        where = f"row {row}: " if row is not None else ""
        super().__init__(f"{where}physical age must be finite and >= 0, got {value!r}")
        self.row = row
        self.value = value


class DuplicateKey(DataError):
    def __init__(self, asset_id, year=None):
        key = asset_id if year is None else f"{asset_id}@{year}"
        super().__init__(f"duplicate record key {key}")
        self.asset_id = asset_id
        self.year = year


class MalformedNumeric(DataError):
    def __init__(self, row, feature, value=None):
        super().__init__(f"row {row}: cannot parse {value!r} as a number for {feature!r}")
        self.row = row
        self.feature = feature


class InvalidStatus(DataError):
    def __init__(self, row, value):
        super().__init__(f"row {row}: status must be Working or Failed, got {value!r}")
        self.row = row


class EmptyDataset(DataError):
    pass


# -- numerical components ---------------------------------------------------

class OutOfRange(AssetFailError, ValueError):
    pass


class SchemaMismatch(AssetFailError, ValueError):
    pass


class TooFewPoints(AssetFailError):
    pass


class SingleCluster(AssetFailError):
    pass


class InsufficientHistory(AssetFailError):
    pass


class ZeroPhysicalAge(AssetFailError, ZeroDivisionError):
    pass


class EmptySimilars(AssetFailError):
    pass


class ZeroBaseRate(AssetFailError, ZeroDivisionError):
    pass


class ZeroObservedInterval(AssetFailError, ZeroDivisionError):
    pass


class SingleClass(AssetFailError):
    pass


class NotConverged(AssetFailError):
    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


class InsufficientFailures(AssetFailError):
    pass


class TooFewPerClass(AssetFailError):
    pass


class InvalidConfig(AssetFailError):
    pass


class ModeDataMismatch(AssetFailError):
    pass


class ArtifactError(AssetFailError):
    pass
