"""Transition probabilities of the two-sided loop-erased random walk on Z^2."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .estimate import Estimate
from .lattice import Saw, Site, Symmetry, SYMMETRIES
from .signed_field import STANDARD, ZIPPER, WeightField

__all__ = ["Estimate", "Saw", "Site", "Symmetry", "SYMMETRIES", "STANDARD", "ZIPPER", "WeightField", "__version__"]
