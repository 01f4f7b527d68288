__version__ = "0.1.0"

from .core import (
    CavityTallyError, ConfigError, NodeSingularityError, BudgetExceededError,
    GridBoxError, ConvergenceError, SamplingError, TruncationError,
)
from .params import SystemParams, from_config, to_config, load

__all__ = [
    "__version__",
    "CavityTallyError", "ConfigError", "NodeSingularityError", "BudgetExceededError",
    "GridBoxError", "ConvergenceError", "SamplingError", "TruncationError",
    "SystemParams", "from_config", "to_config", "load",
]
