"""Seeded force-directed layout for network snapshots (presentation only)."""
from __future__ import annotations

import networkx as nx
import numpy as np

from .graph import TmfgGraph


def spring_positions(g: TmfgGraph, seed: int = 0, iterations: int = 200) -> np.ndarray:
    """(n, 2) positions in [-1, 1]; identical for identical graph and seed."""
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    for (i, j), w in g.edges.items():
        G.add_edge(i, j, weight=abs(w) + 1e-9)
    pos = nx.spring_layout(G, seed=seed, iterations=iterations, weight="weight")
    return np.array([pos[i] for i in range(g.n)])
