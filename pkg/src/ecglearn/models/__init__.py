"""Nine classifier architectures built on the tensor engine."""

from .architectures import Model, build, summarize_parameters
from .modules import Module
from .spec import ARCHITECTURE_NAMES, HYPERPARAM_DEFAULTS, ModelSpec

__all__ = ["ModelSpec", "Model", "build", "summarize_parameters",
           "ARCHITECTURE_NAMES", "HYPERPARAM_DEFAULTS", "Module"]
