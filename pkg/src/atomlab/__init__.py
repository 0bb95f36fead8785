"""atomlab: quantum connections of Fano complete intersections, their
spectral decompositions, and bookkeeping for atom decompositions."""

from .errors import AtomlabError

__version__ = "0.1.0"
__all__ = ["AtomlabError", "__version__"]
