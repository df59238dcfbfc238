"""Numerical workbench for quantitative convergence of kinetic equations.

Subpackages and modules:

* ``rates``: explicit decay constants and subgeometric envelopes.
* ``models``: kinetic model simulators, boundary kernels, generators.
* ``weights``: the Lyapunov weight catalog.
* ``verification``: drift certificates, minorisation estimation, geometric
  control checks.
* ``experiments``: ensemble simulation, weighted total variation, decay fits,
  theory-vs-measurement comparison.
* ``bgk_interval``: steady nonlinear relaxation solver on a slab.
* ``cli``: command-line entry points and run manifests.
"""

__version__ = "0.1.0"

from . import models, rates  # noqa: F401
from .config import MODEL_CATALOG, model_by_name, model_from_config  # noqa: F401
from .rng import RngStream  # noqa: F401
from .weights import WeightFn, catalog_tags, weight_catalog  # noqa: F401
