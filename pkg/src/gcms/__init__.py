"""Computable thermodynamic formalism for generalized countable Markov shifts."""

from . import matrices, words, symbolsets, configs, cylinders, thermo
from . import measures

__all__ = ["configs", "cylinders", "matrices", "measures", "symbolsets", "thermo", "words"]

__version__ = "0.1.0"
