"""Progressive IR evaluation: index a corpus in disjoint bundles, query
and evaluate retrieval models against each partial index while indexing
continues, and quantify how fast partial results converge to the full
index's results."""

from .errors import AviatorError

__version__ = "0.1.0"

__all__ = ["AviatorError", "__version__"]
