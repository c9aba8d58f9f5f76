"""effparam: data-driven discovery of effective parameters.

Builds diffusion-map embeddings of input-output model data with plain,
output-informed, mixed, and delay-augmented kernels, and provides the model
zoo, samplers, sensitivity tools, and analysis routines needed to find which
parameter combinations a model's output actually depends on.
"""

__version__ = "0.1.0"

from .odeint import Trajectory, integrate_ivp  # noqa: F401
from .errors import ConfigurationError, NumericError  # noqa: F401
