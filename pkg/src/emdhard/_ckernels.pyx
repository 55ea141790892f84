# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; same contracts as ``emdhard._pykernels``."""

import numpy as np
from libc.stdint cimport int64_t, uint64_t, uint8_t
from libc.stdlib cimport malloc, free

ctypedef fused cost_t:
    int64_t
    long double


def hungarian(cost_t[:, ::1] cost, cost_t inf):
    cdef Py_ssize_t n = cost.shape[0]
    cdef Py_ssize_t i, j, j0, j1, i0
    cdef cost_t delta, cur, ui0
    if cost.shape[1] != n:
        raise ValueError("hungarian needs a square matrix")
    dtype = np.int64 if cost_t is int64_t else np.longdouble
    u_arr = np.zeros(n + 1, dtype=dtype)
    v_arr = np.zeros(n + 1, dtype=dtype)
    minv_arr = np.zeros(n + 1, dtype=dtype)
    p_arr = np.zeros(n + 1, dtype=np.int64)
    way_arr = np.zeros(n + 1, dtype=np.int64)
    used_arr = np.zeros(n + 1, dtype=np.uint8)
    cdef cost_t[::1] u = u_arr
    cdef cost_t[::1] v = v_arr
    cdef cost_t[::1] minv = minv_arr
    cdef int64_t[::1] p = p_arr
    cdef int64_t[::1] way = way_arr
    cdef uint8_t[::1] used = used_arr
    with nogil:
        for i in range(1, n + 1):
            p[0] = i
            j0 = 0
            for j in range(n + 1):
                minv[j] = inf
                used[j] = 0
            while True:
                used[j0] = 1
                i0 = p[j0]
                ui0 = u[i0]
                delta = inf
                j1 = 0
                for j in range(1, n + 1):
                    if used[j]:
                        continue
                    cur = cost[i0 - 1, j - 1] - ui0 - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
                for j in range(n + 1):
                    if used[j]:
                        u[p[j]] += delta
                        v[j] -= delta
                    else:
                        minv[j] -= delta
                j0 = j1
                if p[j0] == 0:
                    break
            while j0:
                j1 = way[j0]
                p[j0] = p[j1]
                j0 = j1
    row_to_col = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] rc = row_to_col
    for j in range(1, n + 1):
        rc[p[j] - 1] = j - 1
    return row_to_col, u_arr[1:].copy(), v_arr[1:].copy()


def tight_matrix(cost_t[:, ::1] cost, cost_t[::1] u, cost_t[::1] v, cost_t tol):
    cdef Py_ssize_t n = cost.shape[0], m = cost.shape[1], i, j
    out = np.empty((n, m), dtype=np.uint8)
    cdef uint8_t[:, ::1] t = out
    with nogil:
        for i in range(n):
            for j in range(m):
                t[i, j] = (cost[i, j] - u[i] - v[j]) <= tol
    return out


def canonicalize(uint8_t[:, ::1] tight, int64_t[::1] row_to_col):
    cdef Py_ssize_t n = tight.shape[0]
    cdef Py_ssize_t i, j, c, c0, r, head, tail, cur, best
    col_of_arr = np.asarray(row_to_col).astype(np.int64).copy()
    row_of_arr = np.empty(n, dtype=np.int64)
    prev_arr = np.empty(n, dtype=np.int64)
    queue_arr = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] col_of = col_of_arr
    cdef int64_t[::1] row_of = row_of_arr
    cdef int64_t[::1] prev = prev_arr
    cdef int64_t[::1] queue = queue_arr
    cdef bint has_smaller
    cdef int64_t nr, nc
    with nogil:
        for i in range(n):
            row_of[col_of[i]] = i
        for i in range(n):
            c0 = col_of[i]
            has_smaller = False
            for j in range(c0):
                if tight[i, j]:
                    has_smaller = True
                    break
            if not has_smaller:
                continue
            for j in range(n):
                prev[j] = -2
            prev[c0] = -1
            head = 0
            tail = 0
            queue[tail] = c0
            tail += 1
            while head < tail:
                c = queue[head]
                head += 1
                for r in range(i + 1, n):
                    if tight[r, c]:
                        nc = col_of[r]
                        if prev[nc] == -2:
                            prev[nc] = c
                            queue[tail] = nc
                            tail += 1
            best = -1
            for j in range(c0):
                if tight[i, j] and prev[j] != -2:
                    best = j
                    break
            if best < 0:
                continue
            # shift rows along the alternating path ending at c0
            cur = best
            nr = row_of[cur]
            while cur != c0:
                nc = prev[cur]
                r = nr
                nr = row_of[nc]
                col_of[r] = nc
                row_of[nc] = r
                cur = nc
            col_of[i] = best
            row_of[best] = i
    return col_of_arr


def ortho_matrix(uint64_t[:, ::1] a, uint64_t[:, ::1] b):
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0], w = a.shape[1], i, j, k
    out = np.empty((n, m), dtype=np.uint8)
    cdef uint8_t[:, ::1] o = out
    cdef uint8_t ok
    with nogil:
        for i in range(n):
            for j in range(m):
                ok = 1
                for k in range(w):
                    if a[i, k] & b[j, k]:
                        ok = 0
                        break
                o[i, j] = ok
    return out


def sqdist_matrix(int64_t[:, ::1] a, int64_t[:, ::1] b):
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0], dim = a.shape[1], i, j, k
    cdef int64_t s, diff
    out = np.empty((n, m), dtype=np.int64)
    cdef int64_t[:, ::1] o = out
    with nogil:
        for i in range(n):
            for j in range(m):
                s = 0
                for k in range(dim):
                    diff = a[i, k] - b[j, k]
                    s += diff * diff
                o[i, j] = s
    return out


def hopcroft_karp(Py_ssize_t n_left, Py_ssize_t n_right, int64_t[::1] indptr, int64_t[::1] indices):
    match_l_arr = np.full(n_left, -1, dtype=np.int64)
    match_r_arr = np.full(n_right, -1, dtype=np.int64)
    dist_arr = np.zeros(n_left, dtype=np.int64)
    queue_arr = np.zeros(n_left + 1, dtype=np.int64)
    ptr_arr = np.zeros(n_left + 1, dtype=np.int64)
    stack_arr = np.zeros(n_left + 1, dtype=np.int64)
    cols_arr = np.zeros(n_left + 1, dtype=np.int64)
    cdef int64_t[::1] match_l = match_l_arr
    cdef int64_t[::1] match_r = match_r_arr
    cdef int64_t[::1] dist = dist_arr
    cdef int64_t[::1] queue = queue_arr
    cdef int64_t[::1] ptr = ptr_arr
    cdef int64_t[::1] stack = stack_arr
    cdef int64_t[::1] cols = cols_arr
    cdef int64_t inf = n_left + 1, found, x, y, w, root, k
    cdef Py_ssize_t head, tail, top, t
    cdef bint advanced
    with nogil:
        while True:
            head = 0
            tail = 0
            for x in range(n_left):
                if match_l[x] == -1:
                    dist[x] = 0
                    queue[tail] = x
                    tail += 1
                else:
                    dist[x] = inf
            found = inf
            while head < tail:
                x = queue[head]
                head += 1
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
                        queue[tail] = w
                        tail += 1
            if found == inf:
                break
            for x in range(n_left):
                ptr[x] = indptr[x]
            for root in range(n_left):
                if match_l[root] != -1:
                    continue
                top = 0
                stack[0] = root
                top = 1
                while top > 0:
                    x = stack[top - 1]
                    advanced = False
                    while ptr[x] < indptr[x + 1]:
                        y = indices[ptr[x]]
                        ptr[x] += 1
                        w = match_r[y]
                        if w == -1:
                            if dist[x] + 1 == found:
                                cols[top - 1] = y
                                for t in range(top):
                                    match_l[stack[t]] = cols[t]
                                    match_r[cols[t]] = stack[t]
                                top = 0
                                advanced = True
                                break
                        elif dist[w] == dist[x] + 1:
                            cols[top - 1] = y
                            stack[top] = w
                            top += 1
                            advanced = True
                            break
                    if not advanced:
                        dist[x] = inf
                        top -= 1
    return match_l_arr
