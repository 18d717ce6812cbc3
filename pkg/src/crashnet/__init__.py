"""Crypto market-crash analytics: weighted correlation networks, TMFG centrality,
CSAD herding regressions and trade-flow imbalance."""
from ._backend import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
