"""Coverage and beam-training analysis of grid-deployed indoor THz networks."""
from .params import SystemParams, ParameterError

__version__ = "0.1.0"

__all__ = ["SystemParams", "ParameterError", "__version__"]
