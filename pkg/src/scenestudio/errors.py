"""Exception types shared across the toolkit."""


class ContractError(ValueError):
    """An operation was called with inputs violating its contract."""


class EncodingCapacityError(ContractError):
    """A label does not fit in the requested number of binary planes."""


class MissingPaletteError(ContractError):
    """A layout contains a label the oracle recipe has no palette entry for."""


class DatasetError(RuntimeError):
    """A dataset directory is unusable (empty split, missing manifest, ...)."""


class NoNegativeAvailableError(RuntimeError):
    """Negative mining was asked to pick a mismatch from a pool of one."""


class TrainingDivergenceError(RuntimeError):
    """A loss or score became non-finite during training."""


class SolverError(RuntimeError):
    """An iterative solver failed to reach its residual tolerance."""


class StageFailure(RuntimeError):
    """A transfer-pipeline stage failed; carries which stage for callers."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage


class CheckpointError(RuntimeError):
    """A checkpoint file is missing, corrupt, or spec-mismatched."""
