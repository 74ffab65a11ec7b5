"""Exception hierarchy shared by all segroute modules."""


class SegrouteError(Exception):
    """Base class for all errors raised by this package."""


# --- volume I/O ---------------------------------------------------------


class MalformedHeader(SegrouteError):
    """File header is structurally invalid (bad magic, size, dims, truncation)."""


class UnsupportedDatatype(SegrouteError):
    """File uses a voxel datatype outside the supported set."""


class LabelOutOfRange(SegrouteError):
    """A label payload contains a non-integral value or one outside {0..3}."""


class NonFiniteData(SegrouteError):
    """A scalar payload contains NaN or infinity after scaling."""


class IoFailure(SegrouteError):
    """Writing a volume to disk failed."""


# --- preprocessing ------------------------------------------------------


class DimsMismatch(SegrouteError):
    """Two grids that must share dimensions do not."""


class EmptyMask(SegrouteError):
    """A mask with no true voxels was used where voxels are required."""


class ConstantIntensity(SegrouteError):
    """All masked intensities are equal; the [0,1] rescale is undefined."""


# --- histogram / judgement ----------------------------------------------


class EmptyInput(SegrouteError):
    """An operation requiring at least one value received none."""


class BadRange(SegrouteError):
    """Histogram range upper bound does not exceed the lower bound."""


class BadWindow(SegrouteError):
    """Smoothing window is even, non-positive, or wider than the histogram."""


# --- segmenters ---------------------------------------------------------


class DegenerateClustering(SegrouteError):
    """Too few distinct intensities to form three clusters, or a cluster emptied."""


class BadEpsilon(SegrouteError):
    """Soft-Dice smoothing constant must be positive."""


class NonFiniteLoss(SegrouteError):
    """Training diverged: the loss or the parameters became non-finite."""


class UntrainedModel(SegrouteError):
    """A voxel-classifier backend was invoked before parameters were trained."""


class CommandFailed(SegrouteError):
    """External backend exited nonzero; carries captured stdout/stderr."""

    def __init__(self, message, returncode=None, stdout="", stderr=""):
        super().__init__(message)
        self.returncode = returncode
        self.stdout = stdout
        self.stderr = stderr


class BackendTimeout(SegrouteError):
    """External backend exceeded its time budget."""


class OutputMissing(SegrouteError):
    """External backend exited 0 but produced no output file."""


# --- metrics ------------------------------------------------------------


class BadClass(SegrouteError):
    """Class id outside the tissue set {1, 2, 3}."""


# --- phantom ------------------------------------------------------------


class BadSpec(SegrouteError):
    """Phantom specification violates its invariants."""


# --- harness ------------------------------------------------------------


class ManifestParseError(SegrouteError):
    """Manifest file is not valid JSON or violates the schema."""


class MissingFile(SegrouteError):
    """Manifest references a file that does not exist."""


class DuplicateSubject(SegrouteError):
    """Two manifest entries share a subject id."""


class SplitInvalid(SegrouteError):
    """Split ids overlap, are empty, or are absent from the manifest."""


class PipelineError(SegrouteError):
    """Wraps a module error with the pipeline stage where it occurred."""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
