"""Exception hierarchy shared across the package."""


class EcglearnError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(EcglearnError):
    """Tensor/array shapes do not conform to an operation's shape algebra."""


class AutodiffError(EcglearnError):
    """Misuse of the autodiff graph (non-scalar backward, stochastic gradcheck, ...)."""


class SignalError(EcglearnError):
    """Invalid signal, filter specification, or segmentation request."""


class AugmentError(EcglearnError):
    """Invalid augmentation configuration or parameters."""


class DataError(EcglearnError):
    """Dataset files, manifests, or label vectors are malformed."""


class SplitError(EcglearnError):
    """A split protocol cannot be satisfied by the given manifest."""


class ModelError(EcglearnError):
    """Unknown architecture, invalid hyperparameters, or bad model input."""


class OptimizerError(EcglearnError):
    """Optimizer state mismatch or non-finite gradients."""


class TrainingDivergedError(EcglearnError):
    """Loss became non-finite; carries the epoch/batch where it happened."""

    def __init__(self, epoch: int, batch: int, value: float):
        self.epoch = epoch
        self.batch = batch
        self.value = value
        super().__init__(f"non-finite loss {value!r} at epoch {epoch}, batch {batch}")


class CheckpointError(EcglearnError):
    """Checkpoint file is unreadable, truncated, or inconsistent."""


class ConfigError(EcglearnError):
    """Run configuration is invalid or contains unknown keys."""
