"""Adaptive UAV placement over Poisson-distributed ground users.

The package splits into:

* :mod:`uavdeploy.model`      -- link budget, cell geometry, placement types
* :mod:`uavdeploy.numerics`   -- quadrature, root finding, Poisson helpers
* :mod:`uavdeploy.sampling`   -- Poisson point process realization sampler
* :mod:`uavdeploy.analytic1d` -- closed forms for the linear (1D) cell
* :mod:`uavdeploy.analytic2d` -- closed forms for the square (2D) cell
* :mod:`uavdeploy.geometry`   -- exact disk/rectangle intersection areas
* :mod:`uavdeploy.montecarlo` -- simulation engine for all placement schemes
* :mod:`uavdeploy.cli`        -- batch command line front end
"""

__version__ = "0.1.0"
