from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import _backend
from ..errors import NonSymmetricInput, TooFewVertices

EXHAUSTIVE_SEED_MAX = 100


@dataclass(frozen=True)
class TmfgGraph:
    """Planar chordal filtered graph.

    ``edges`` maps (i, j) with i < j to the similarity used while building;
    ``insertion_log`` lists (vertex, host_face) in insertion order after the seed.
    """

    n: int
    edges: dict
    faces: tuple
    seed: tuple
    insertion_log: tuple
    gains: tuple = ()

    def neighbors(self) -> list[set]:
        nb = [set() for _ in range(self.n)]
        for i, j in self.edges:
            nb[i].add(j)
            nb[j].add(i)
        return nb

    def adjacency(self, weighted: bool = True) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for (i, j), w in self.edges.items():
            a[i, j] = a[j, i] = abs(w) if weighted else 1.0
        return a

    def elimination_order(self) -> list[int]:
        """Reversed insertion order followed by the seed: a perfect elimination ordering."""
        return [v for v, _ in reversed(self.insertion_log)] + list(self.seed)


def _check_similarity(S) -> np.ndarray:
    S = np.array(S, dtype=float, order="C")
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise NonSymmetricInput(f"similarity matrix must be square, got shape {S.shape}")
    if S.shape[0] < 4:
        raise TooFewVertices(f"TMFG needs at least 4 vertices, got {S.shape[0]}")
    if not np.all(np.isfinite(S)):
        raise ValueError("similarity matrix contains non-finite entries")
    scale = max(1.0, float(np.abs(S).max()))
    if np.abs(S - S.T).max() > 1e-12 * scale:
        raise NonSymmetricInput("similarity matrix is not symmetric")
    return np.ascontiguousarray((S + S.T) / 2)


def _heuristic_seed(S) -> tuple:
    off = S - np.diag(np.diag(S))
    strength = off.sum(axis=1)
    top = np.argsort(-strength, kind="stable")[:4]
    return tuple(sorted(int(v) for v in top))


def build_tmfg(S, kernels=None) -> TmfgGraph:
    """Greedy TMFG on a symmetric similarity matrix.

    The seed tetrahedron maximises the sum of its six similarities (exhaustive
    for n <= 100, top-4 vertex strength above). Each remaining vertex is then
    inserted into the face with the largest summed similarity to it; ties go
    to the lowest vertex index, then the lexicographically smallest face.
    """
    S = _check_similarity(S)
    k = kernels or _backend.kernels
    n = S.shape[0]
    seed = tuple(int(v) for v in (k.seed_search(S) if n <= EXHAUSTIVE_SEED_MAX else _heuristic_seed(S)))
    a, b, c, d = seed
    faces = {(a, b, c), (a, b, d), (a, c, d), (b, c, d)}
    edge_set = {(a, b), (a, c), (a, d), (b, c), (b, d), (c, d)}
    log = []
    if n > 4:
        verts, hosts, gains = k.greedy_insert(S, seed)
        gains = tuple(float(g) for g in gains)
        for v, host in zip(verts.tolist(), hosts.tolist()):
            x, y, z = host
            faces.remove((x, y, z))
            faces.update(tuple(sorted(t)) for t in ((x, y, v), (x, z, v), (y, z, v)))
            edge_set.update(tuple(sorted(e)) for e in ((x, v), (y, v), (z, v)))
            log.append((v, (x, y, z)))
    else:
        gains = ()
    edges = {e: float(S[e]) for e in sorted(edge_set)}
    return TmfgGraph(n, edges, tuple(sorted(faces)), seed, tuple(log), gains)


@dataclass
class ValidationReport:
    checks: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def failures(self) -> list[str]:
        return [k for k, v in self.checks.items() if not v]


def is_perfect_elimination_order(neighbors, order) -> bool:
    pos = {v: i for i, v in enumerate(order)}
    if len(pos) != len(neighbors):
        return False
    for v in order:
        later = [u for u in neighbors[v] if pos[u] > pos[v]]
        for i, u in enumerate(later):
            for w in later[i + 1:]:
                if w not in neighbors[u]:
                    return False
    return True


def _connected(neighbors) -> bool:
    n = len(neighbors)
    if n == 0:
        return True
    seen, stack = {0}, [0]
    while stack:
        for u in neighbors[stack.pop()]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return len(seen) == n


def validate(g: TmfgGraph) -> ValidationReport:
    nb = g.neighbors()
    n, e, f = g.n, len(g.edges), len(g.faces)
    r = ValidationReport()
    r.checks["edge_count"] = e == 3 * (n - 2)
    r.checks["face_count"] = f == 2 * (n - 2)
    r.checks["connected"] = _connected(nb)
    # stored faces include the outer one of any planar embedding
    r.checks["euler"] = n - e + f == 2
    r.checks["chordal"] = is_perfect_elimination_order(nb, g.elimination_order())
    return r
