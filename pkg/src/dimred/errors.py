"""Exception and warning types shared across the package."""


class DimRedError(ValueError):
    """Base class for all validation errors raised by this package."""


class MissingFile(DimRedError, FileNotFoundError):
    pass


class ParseError(DimRedError):
    def __init__(self, row, col, text=""):
        self.row = row
        self.col = col
        super().__init__(f"cannot parse cell at row {row}, column {col}: {text!r}")


class NonFiniteValue(DimRedError):
    def __init__(self, row, col):
        self.row = row
        self.col = col
        super().__init__(f"non-finite value at row {row}, column {col}")


class EmptyDataset(DimRedError):
    pass


class InvalidParam(DimRedError):
    pass


class KTooLarge(DimRedError):
    pass


class InvalidDim(DimRedError):
    pass


class SvdFailure(DimRedError):
    pass


class EigenFailure(DimRedError):
    pass


class AllPairsDegenerate(DimRedError):
    pass


class FitDiverged(DimRedError):
    pass


class DimensionMismatch(DimRedError):
    pass


class SubsampleTooSmall(DimRedError):
    pass


class ZeroMassCurve(DimRedError):
    pass


class SingleClass(DimRedError):
    pass


class UnlabeledData(DimRedError):
    pass


class RowCountMismatch(DimRedError):
    pass


class DimensionTooLow(DimRedError):
    pass


class ConfigInvalid(DimRedError):
    pass


class SuiteConfigInvalid(ConfigInvalid):
    pass


class StageError(RuntimeError):
    """Wraps a failure inside a pipeline run with the name of the stage that raised it."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {type(cause).__name__}: {cause}")


class DisconnectedGraphWarning(UserWarning):
    """The kNN graph has more than one connected component."""

    def __init__(self, n_components):
        self.n_components = n_components
        super().__init__(f"kNN graph is disconnected ({n_components} components); embedding them jointly")


class InfiniteMismatchWarning(UserWarning):
    """Two diagrams carry different numbers of essential (infinite) bars."""


class EmptyDiagramWarning(UserWarning):
    pass
