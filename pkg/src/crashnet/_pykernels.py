"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

Seed search and greedy insertion sum similarities in the same order as the
compiled code, so both backends build bit-identical graphs.
"""
import numpy as np


def seed_search(S):
    n = S.shape[0]
    best, best_q = None, (0, 1, 2, 3)
    for a in range(n - 3):
        for b in range(a + 1, n - 2):
            c, d = np.triu_indices(n - b - 1, k=1)
            c = c + b + 1
            d = d + b + 1
            if c.size == 0:
                continue
            s = S[a, b] + S[a, c] + S[a, d] + S[b, c] + S[b, d] + S[c, d]
            k = int(np.argmax(s))  # first maximum == lexicographically smallest (c, d)
            if best is None or s[k] > best:
                best, best_q = s[k], (a, b, int(c[k]), int(d[k]))
    return best_q


def _gain_rows(S, faces):
    return S[:, faces[:, 0]].T + S[:, faces[:, 1]].T + S[:, faces[:, 2]].T


def greedy_insert(S, seed):
    n = S.shape[0]
    steps = n - 4
    nf_max = 3 * n - 8  # dead faces are kept
    faces = np.zeros((nf_max, 3), dtype=np.int64)
    q = list(seed)
    faces[:4] = [[q[u] for u in range(4) if u != k] for k in range(4)]
    alive = np.zeros(nf_max, dtype=bool)
    alive[:4] = True
    used = np.zeros(n, dtype=bool)
    used[q] = True
    gains = np.full((nf_max, n), -np.inf)
    gains[:4] = _gain_rows(S, faces[:4])
    nf = 4
    out_v = np.zeros(steps, dtype=np.int64)
    out_f = np.zeros((steps, 3), dtype=np.int64)
    out_g = np.zeros(steps)
    for step in range(steps):
        fidx = np.flatnonzero(alive)
        vidx = np.flatnonzero(~used)
        block = gains[np.ix_(fidx, vidx)]
        best = block.max()
        hit_f, hit_v = np.nonzero(block == best)
        v = vidx[hit_v].min()
        cand = fidx[hit_f[vidx[hit_v] == v]]
        order = np.lexsort((faces[cand, 2], faces[cand, 1], faces[cand, 0]))
        f = cand[order[0]]
        x, y, z = faces[f]
        out_v[step], out_f[step], out_g[step] = v, faces[f], best
        used[v] = True
        alive[f] = False
        new = np.sort(np.array([[x, y, v], [x, z, v], [y, z, v]], dtype=np.int64), axis=1)
        faces[nf:nf + 3] = new
        alive[nf:nf + 3] = True
        gains[nf:nf + 3] = _gain_rows(S, new)
        nf += 3
    return out_v, out_f, out_g


def power_iteration(A, tol, max_iter):
    n = A.shape[0]
    v = np.full(n, 1.0 / np.sqrt(n))
    it, delta = 0, np.inf
    while it < max_iter:
        it += 1
        y = A @ v
        norm = np.sqrt(y @ y)
        if norm == 0.0:
            break
        y /= norm
        delta = float(np.sqrt(np.sum((y - v) ** 2)))
        v = y
        if delta < tol:
            break
    return v, it, delta
