"""Numerics for slow-fast rough PDE averaging on a spectral truncation.

Subpackage map:

* ``spectral``     -- truncated state space, diagonal generator, semigroup
* ``roughpath``    -- rough-path lifts (Brownian, fBm, smooth, mixed) and stats
* ``controlled``   -- semigroup-controlled paths and the rough convolution
* ``coefficients`` -- built-in coefficient sets with registered derivatives
* ``solver``       -- coupled slow-fast one-step scheme and the Ito fast solver
* ``averaging``    -- frozen equation, averaged drift, auxiliary process,
  reduced-Hoelder error, epsilon-delta schedule
* ``sweep``        -- experiment orchestration, diagnostics, CSV persistence
* ``cli``          -- command-line entry point
"""

from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
