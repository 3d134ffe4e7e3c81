"""Error hierarchy shared across the package.

Every error carries the CLI exit code of its category: 1 for bad
configuration, 2 for data problems, 3 for training failures.
"""


class EmbedHallucError(Exception):
    exit_code = 1


class ConfigError(EmbedHallucError):
    exit_code = 1


class DataError(EmbedHallucError):
    exit_code = 2


class ParseError(DataError):
    """Malformed input file; message carries the offending line number."""


class LabelError(DataError):
    """Label string or index outside the task's label set."""


class CapacityError(DataError):
    """A class has too few examples for the requested split sizes."""


class CoverageError(DataError):
    """A class is entirely missing from a dataset that must cover all."""


class ContaminationError(DataError):
    """Supposedly disjoint partitions share examples."""


class TrainingError(EmbedHallucError):
    exit_code = 3


class DimensionError(ValueError, EmbedHallucError):
    """Operand shapes are incompatible; message names both shapes."""


class DistributionError(ValueError, EmbedHallucError):
    """A probability vector is non-normalized or negative."""


class DegenerateBatchError(ValueError, EmbedHallucError):
    """Batch statistics are undefined, e.g. batch norm on one row."""


class CapabilityError(EmbedHallucError):
    """Requested derivative path is not recorded on the graph."""
