"""Exception hierarchy. Every error carries a stable machine-readable ``code``."""


class PigmmError(Exception):
    code = "E_PIGMM"


class DimensionError(PigmmError, ValueError):
    code = "E_DIMENSION"

    def __init__(self, expected, received, what="input"):
        super().__init__(f"{what} has dimension {received}, expected d={expected}")
        self.expected = expected
        self.received = received


class SingularCovarianceError(PigmmError, ValueError):
    code = "E_SINGULAR_COVARIANCE"


class InsufficientDataError(PigmmError, ValueError):
    code = "E_INSUFFICIENT_DATA"


class DegenerateFitError(PigmmError, RuntimeError):
    code = "E_DEGENERATE_FIT"


class InvalidPhysicsInputError(PigmmError, ValueError):
    code = "E_INVALID_PHYSICS"


class UnusableDataError(PigmmError, ValueError):
    code = "E_UNUSABLE_DATA"


class PipelineError(PigmmError, ValueError):
    code = "E_PIPELINE"


class SchemaError(PigmmError, ValueError):
    code = "E_SCHEMA"


class LabelError(PigmmError, ValueError):
    code = "E_LABEL"


class EmptyDatasetError(PigmmError, ValueError):
    code = "E_EMPTY_DATA"


class ParseError(PigmmError, ValueError):
    code = "E_PARSE"


class SplitError(PigmmError, ValueError):
    code = "E_SPLIT"


class InvalidParameterError(PigmmError, ValueError):
    code = "E_INVALID_PARAMETER"


class ModelFormatError(PigmmError, ValueError):
    code = "E_MODEL_FORMAT"
