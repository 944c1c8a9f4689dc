"""Random interlacements on finite killed weighted graphs.

Thin python surface over the C++ core: graph generators with exact exterior
collapse, potential theory by linear solves (equilibrium measures, capacities,
Green functions, hinge measures), Poissonian window sampling, total-variation
couplings, and zero-one-law criterion traces.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
