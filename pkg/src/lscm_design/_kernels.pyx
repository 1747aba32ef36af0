# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled matching kernels. Mirrors ``_kernels_py`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef int _build_candidates(const unsigned char[:, :] adj, int *cand, int *ncand) nogil:
    cdef int k = adj.shape[0]
    cdef int r, c
    for c in range(k):
        ncand[c] = 0
        for r in range(k):
            if adj[r, c]:
                cand[c * k + ncand[c]] = r
                ncand[c] += 1
    return 0


def enumerate_matchings(adj, Py_ssize_t limit):
    cdef const unsigned char[:, :] a = np.ascontiguousarray(adj, dtype=np.uint8)
    cdef int k = a.shape[0]
    if k == 0:
        return np.zeros((1, 0), dtype=np.int32), False

    cdef int *cand = <int *> malloc(k * k * sizeof(int))
    cdef int *ncand = <int *> malloc(k * sizeof(int))
    cdef int *assign = <int *> malloc(k * sizeof(int))
    cdef int *pos = <int *> malloc(k * sizeof(int))
    cdef unsigned char *used = <unsigned char *> malloc(k)
    cdef Py_ssize_t cap = 64
    cdef Py_ssize_t count = 0
    cdef bint truncated = False
    cdef int c, r, j
    out = np.empty((cap, k), dtype=np.int32)
    cdef int[:, :] ov = out
    try:
        _build_candidates(a, cand, ncand)
        for j in range(k):
            pos[j] = 0
            used[j] = 0
        c = 0
        while c >= 0:
            while pos[c] < ncand[c] and used[cand[c * k + pos[c]]]:
                pos[c] += 1
            if pos[c] == ncand[c]:
                pos[c] = 0
                c -= 1
                if c >= 0:
                    used[assign[c]] = 0
                    pos[c] += 1
                continue
            r = cand[c * k + pos[c]]
            assign[c] = r
            if c == k - 1:
                if count >= limit:
                    truncated = True
                    break
                if count == cap:
                    cap *= 2
                    out = np.resize(out, (cap, k))
                    ov = out
                for j in range(k):
                    ov[count, j] = assign[j]
                count += 1
                pos[c] += 1
                continue
            used[r] = 1
            c += 1
    finally:
        free(cand)
        free(ncand)
        free(assign)
        free(pos)
        free(used)
    return np.ascontiguousarray(out[:count]), bool(truncated)


def count_marginals(adj, long long limit):
    cdef const unsigned char[:, :] a = np.ascontiguousarray(adj, dtype=np.uint8)
    cdef int k = a.shape[0]
    counts = np.zeros((k, k), dtype=np.int64)
    if k == 0:
        return 1, counts
    cdef long long[:, :] cv = counts
    cdef int *cand = <int *> malloc(k * k * sizeof(int))
    cdef int *ncand = <int *> malloc(k * sizeof(int))
    cdef int *assign = <int *> malloc(k * sizeof(int))
    cdef int *pos = <int *> malloc(k * sizeof(int))
    cdef unsigned char *used = <unsigned char *> malloc(k)
    cdef long long total = 0
    cdef bint overflow = False
    cdef int c, r, j
    try:
        with nogil:
            _build_candidates(a, cand, ncand)
            for j in range(k):
                pos[j] = 0
                used[j] = 0
            c = 0
            while c >= 0:
                while pos[c] < ncand[c] and used[cand[c * k + pos[c]]]:
                    pos[c] += 1
                if pos[c] == ncand[c]:
                    pos[c] = 0
                    c -= 1
                    if c >= 0:
                        used[assign[c]] = 0
                        pos[c] += 1
                    continue
                r = cand[c * k + pos[c]]
                assign[c] = r
                if c == k - 1:
                    total += 1
                    if total > limit:
                        overflow = True
                        break
                    for j in range(k):
                        cv[j, assign[j]] += 1
                    pos[c] += 1
                    continue
                used[r] = 1
                c += 1
    finally:
        free(cand)
        free(ncand)
        free(assign)
        free(pos)
        free(used)
    if overflow:
        raise OverflowError(f"more than {limit} perfect matchings")
    return int(total), counts


def greedy_sample_batch(adj, uniforms):
    cdef const unsigned char[:, :] a = np.ascontiguousarray(adj, dtype=np.uint8)
    cdef const double[:, :] u = np.ascontiguousarray(uniforms, dtype=np.float64)
    cdef Py_ssize_t m = u.shape[0]
    cdef int k = u.shape[1]
    out = np.full((m, k), -1, dtype=np.int32)
    ok = np.zeros(m, dtype=np.uint8)
    cdef int[:, :] ov = out
    cdef unsigned char[:] okv = ok
    cdef int *cand = <int *> malloc(k * k * sizeof(int) + 1)
    cdef int *ncand = <int *> malloc(k * sizeof(int) + 1)
    cdef int *base_deg = <int *> malloc(k * sizeof(int) + 1)
    cdef int *deg = <int *> malloc(k * sizeof(int) + 1)
    cdef unsigned char *row_used = <unsigned char *> malloc(k + 1)
    cdef unsigned char *col_used = <unsigned char *> malloc(k + 1)
    cdef Py_ssize_t s
    cdef int step, c, r, best, best_deg, pick, chosen, j
    cdef bint good
    try:
        with nogil:
            _build_candidates(a, cand, ncand)
            for c in range(k):
                base_deg[c] = ncand[c]
            for s in range(m):
                for j in range(k):
                    deg[j] = base_deg[j]
                    row_used[j] = 0
                    col_used[j] = 0
                good = True
                for step in range(k):
                    best = -1
                    best_deg = k + 1
                    for c in range(k):
                        if not col_used[c] and deg[c] < best_deg:
                            best = c
                            best_deg = deg[c]
                    if best_deg == 0:
                        good = False
                        break
                    pick = <int> (u[s, step] * best_deg)
                    if pick >= best_deg:
                        pick = best_deg - 1
                    chosen = -1
                    for j in range(ncand[best]):
                        r = cand[best * k + j]
                        if not row_used[r]:
                            if pick == 0:
                                chosen = r
                                break
                            pick -= 1
                    ov[s, best] = chosen
                    col_used[best] = 1
                    row_used[chosen] = 1
                    for c in range(k):
                        if a[chosen, c]:
                            deg[c] -= 1
                if good:
                    okv[s] = 1
                else:
                    for j in range(k):
                        ov[s, j] = -1
    finally:
        free(cand)
        free(ncand)
        free(base_deg)
        free(deg)
        free(row_used)
        free(col_used)
    return out, ok
