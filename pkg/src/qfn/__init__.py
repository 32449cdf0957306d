"""Distributed factor-graph quantum optimization: exact simulation and resource accounting.

Subpackages:

- ``fgraph``      factor-graph model, normalization, brute-force oracles
- ``decompose``   boundary separators and hierarchical decomposition trees
- ``qsim``        dense state-vector engine with named registers
- ``primitives``  amplitude amplification, reversible phase test, maximization
- ``network``     processor topologies, hop routing, EPR ledger
- ``dist``        the single-level distributed search and its benchmark
- ``hier``        hierarchical executor (coherent / hybrid policies)
- ``cli``         command-line front end
"""

from . import fgraph, decompose, qsim, primitives, network, dist, hier

__version__ = "0.1.0"

__all__ = [
    "fgraph",
    "decompose",
    "qsim",
    "primitives",
    "network",
    "dist",
    "hier",
]
