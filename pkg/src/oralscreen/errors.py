"""Exception types shared across the oralscreen package."""


class OralScreenError(Exception):
    """Base class for all errors raised by this package."""

    category = "error"


class InvalidGeometryError(OralScreenError, ValueError):
    """A box or guide rectangle is degenerate or out of bounds."""

    category = "invalid-geometry"


class WrongTaskError(OralScreenError, ValueError):
    """An operation was asked to treat a condition under the wrong task form."""

    category = "wrong-task"


class ConfigError(OralScreenError, ValueError):
    """A configuration value is missing, out of range, or inconsistent."""

    category = "config"


class SplitError(OralScreenError, ValueError):
    """A person-disjoint split cannot be produced for the given inputs."""

    category = "cannot-split"


class DatasetFormatError(OralScreenError, ValueError):
    """An on-disk dataset record failed validation; message names the record."""

    category = "dataset-format"


class MissingPriorsError(OralScreenError, ValueError):
    """Fine-tuning was requested on samples that carry no prior profiles."""

    category = "missing-priors"


class CorruptParamsError(OralScreenError, ValueError):
    """A parameter checkpoint is inconsistent with its declared architecture."""

    category = "corrupt-params"


class NumericError(OralScreenError, ArithmeticError):
    """A NaN or infinity surfaced where a finite value is required."""

    category = "numeric"


class UndefinedMetricError(OralScreenError, ValueError):
    """A metric is undefined for the given inputs (e.g. single-class ROC)."""

    category = "undefined-metric"


class InfeasiblePolicyError(OralScreenError, ValueError):
    """No threshold satisfies the calibration policy; message lists the frontier."""

    category = "infeasible-policy"


class MissingArtifactError(OralScreenError, FileNotFoundError):
    """An upstream artifact is absent; message names the producing command."""

    category = "missing-artifact"


class ConflictError(OralScreenError):
    """The request conflicts with the session's current state or another
    in-flight mutation."""

    category = "conflict"
