"""Pure Python / numpy implementations of the hot kernels.

These define the reference behaviour; ``_ckernels`` (Cython) must return
identical results on int64 and long double inputs.  Object arrays (Python
big integers) are only ever handled here.
"""

from __future__ import annotations

from collections import deque

import numpy as np


def _inf_for(dtype):
    if dtype == object:
        return None
    if np.issubdtype(dtype, np.integer):
        return np.iinfo(np.int64).max // 4
    return np.longdouble(np.inf)


def hungarian(cost: np.ndarray):
    """Minimum-cost perfect assignment on a square matrix.

    Shortest augmenting paths with row/column potentials.  Returns
    ``(row_to_col, u, v)`` where ``cost[i, j] - u[i] - v[j] >= 0`` for all
    cells and equality holds on the assignment.  Ties resolve towards the
    smallest column index.
    """
    n = cost.shape[0]
    if cost.shape != (n, n):
        raise ValueError("hungarian needs a square matrix")
    if n == 0:
        return np.zeros(0, dtype=np.int64), cost[:, 0].copy(), cost[0, :].copy()
    if cost.dtype == object:
        return _hungarian_objects(cost)
    dtype = cost.dtype
    inf = _inf_for(dtype)
    # 1-indexed: index 0 is the virtual source row/column
    a = np.zeros((n + 1, n + 1), dtype=dtype)
    a[1:, 1:] = cost
    u = np.zeros(n + 1, dtype=dtype)
    v = np.zeros(n + 1, dtype=dtype)
    p = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, inf, dtype=dtype)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used
            free[0] = False
            cur = a[i0] - u[i0] - v
            better = free & (cur < minv)
            minv[better] = cur[better]
            way[better] = j0
            masked = np.where(free, minv, inf)
            j1 = int(np.argmin(masked))
            delta = masked[j1]
            u[p[used]] += delta
            v[used] -= delta
            minv[free] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    row_to_col = np.empty(n, dtype=np.int64)
    row_to_col[p[1:] - 1] = np.arange(n)
    return row_to_col, u[1:].copy(), v[1:].copy()


def _hungarian_objects(cost: np.ndarray):
    n = cost.shape[0]
    a = [[None] * (n + 1)] + [[None] + list(cost[i]) for i in range(n)]
    zero = a[1][1] - a[1][1]
    u = [zero] * (n + 1)
    v = [zero] * (n + 1)
    p = [0] * (n + 1)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [None] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            row = a[i0]
            ui0 = u[i0]
            delta = None
            j1 = -1
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = row[j] - ui0 - v[j]
                if minv[j] is None or cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if delta is None or minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] = None if minv[j] is None else minv[j] - delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    row_to_col = np.empty(n, dtype=np.int64)
    for j in range(1, n + 1):
        row_to_col[p[j] - 1] = j - 1
    uu = np.empty(n, dtype=object)
    vv = np.empty(n, dtype=object)
    uu[:] = u[1:]
    vv[:] = v[1:]
    return row_to_col, uu, vv


def tight_matrix(cost: np.ndarray, u: np.ndarray, v: np.ndarray, tol) -> np.ndarray:
    reduced = cost - u[:, None] - v[None, :]
    return np.asarray(reduced <= tol, dtype=np.uint8)


def canonicalize(tight: np.ndarray, row_to_col: np.ndarray) -> np.ndarray:
    """Lexicographically smallest perfect matching inside the tight graph.

    ``row_to_col`` must already be a perfect matching using tight cells.
    Rows are fixed in order; row ``i`` takes the smallest tight column that
    can be freed by an alternating path through rows ``> i``.
    """
    n = tight.shape[0]
    col_of = row_to_col.astype(np.int64).copy()
    row_of = np.empty(n, dtype=np.int64)
    row_of[col_of] = np.arange(n)
    tight = tight.astype(bool)
    for i in range(n):
        c0 = col_of[i]
        cand = np.flatnonzero(tight[i, :c0])
        if cand.size == 0:
            continue
        prev = np.full(n, -2, dtype=np.int64)
        prev[c0] = -1
        queue = deque([c0])
        while queue:
            c = queue.popleft()
            rows = np.flatnonzero(tight[i + 1 :, c]) + i + 1
            if rows.size == 0:
                continue
            cols = col_of[rows]
            fresh = prev[cols] == -2
            for cc in cols[fresh]:
                if prev[cc] == -2:
                    prev[cc] = c
                    queue.append(cc)
        reach = cand[prev[cand] != -2]
        if reach.size == 0:
            continue
        j = int(reach[0])
        chain = []
        cur = j
        while cur != c0:
            chain.append((row_of[cur], prev[cur]))
            cur = prev[cur]
        for r, c in chain:
            col_of[r] = c
            row_of[c] = r
        col_of[i] = j
        row_of[j] = i
    return col_of


def ortho_matrix(a_words: np.ndarray, b_words: np.ndarray) -> np.ndarray:
    """``out[i, j] = 1`` iff packed vectors ``a_i`` and ``b_j`` share no bit."""
    n, m = a_words.shape[0], b_words.shape[0]
    out = np.ones((n, m), dtype=np.uint8)
    if n == 0 or m == 0:
        return out
    step = max(1, 1 << 20 // max(1, m))
    for s in range(0, n, step):
        blk = a_words[s : s + step]
        hit = np.zeros((blk.shape[0], m), dtype=bool)
        for w in range(a_words.shape[1]):
            hit |= (blk[:, w][:, None] & b_words[:, w][None, :]) != 0
        out[s : s + step] = ~hit
    return out


def sqdist_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact squared distances between the rows of two integer matrices."""
    if a.dtype == object or b.dtype == object:
        a = a.astype(object)
        b = b.astype(object)
        na = (a * a).sum(axis=1)
        nb = (b * b).sum(axis=1)
        return na[:, None] + nb[None, :] - 2 * a.dot(b.T)
    na = np.einsum("ij,ij->i", a, a)
    nb = np.einsum("ij,ij->i", b, b)
    return na[:, None] + nb[None, :] - 2 * (a @ b.T)


def hopcroft_karp(n_left: int, n_right: int, indptr: np.ndarray, indices: np.ndarray):
    """Maximum-cardinality matching; returns ``match_left`` (-1 = unmatched).

    Adjacency is CSR over left vertices; neighbours are explored in the
    order given, which makes the result deterministic.
    """
    indptr = [int(x) for x in indptr]
    indices = [int(x) for x in indices]
    match_l = [-1] * n_left
    match_r = [-1] * n_right
    inf = n_left + 1
    dist = [0] * n_left
    while True:
        # BFS layering from free left vertices
        queue = deque()
        for x in range(n_left):
            if match_l[x] == -1:
                dist[x] = 0
                queue.append(x)
            else:
                dist[x] = inf
        found = inf
        while queue:
            x = queue.popleft()
            if dist[x] >= found:
                continue
            for k in range(indptr[x], indptr[x + 1]):
                y = indices[k]
                w = match_r[y]
                if w == -1:
                    if found == inf:
                        found = dist[x] + 1
                elif dist[w] == inf:
                    dist[w] = dist[x] + 1
                    queue.append(w)
        if found == inf:
            break
        # iterative DFS along the layers
        ptr = indptr[:-1].copy() if n_left else []
        for root in range(n_left):
            if match_l[root] != -1:
                continue
            stack = [root]
            path_cols = []
            while stack:
                x = stack[-1]
                advanced = False
                while ptr[x] < indptr[x + 1]:
                    y = indices[ptr[x]]
                    ptr[x] += 1
                    w = match_r[y]
                    if w == -1:
                        if dist[x] + 1 == found:
                            path_cols.append(y)
                            # augment along the stack
                            for xx, yy in zip(stack, path_cols):
                                match_l[xx] = yy
                                match_r[yy] = xx
                            stack = []
                            advanced = True
                            break
                    elif dist[w] == dist[x] + 1:
                        path_cols.append(y)
                        stack.append(w)
                        advanced = True
                        break
                if not advanced:
                    dist[x] = inf
                    stack.pop()
                    if path_cols:
                        path_cols.pop()
    return np.array(match_l, dtype=np.int64)
