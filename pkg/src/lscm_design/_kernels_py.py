"""Pure-Python reference versions of the matching kernels.

Every function here has a compiled twin in ``_kernels.pyx`` with the same
signature and bit-identical output. All inputs are compact square 0/1
matrices ``adj[row, col]`` over the active part of a bipartite graph.
"""

import numpy as np


def _adjacent_rows(adj):
    k = adj.shape[0]
    return [[r for r in range(k) if adj[r, c]] for c in range(k)]


def enumerate_matchings(adj, limit):
    """Column-ordered backtracking over perfect matchings.

    Returns ``(rows, truncated)`` where ``rows[t, c]`` is the row matched
    to column ``c`` in the t-th matching. Matchings come out in
    lexicographic order of the row tuple.
    """
    adj = np.asarray(adj, dtype=np.uint8)
    k = adj.shape[0]
    if k == 0:
        return np.zeros((1, 0), dtype=np.int32), False
    cand = _adjacent_rows(adj)
    used = [False] * k
    assign = [0] * k
    pos = [0] * k
    out = []
    truncated = False
    c = 0
    while c >= 0:
        opts = cand[c]
        while pos[c] < len(opts) and used[opts[pos[c]]]:
            pos[c] += 1
        if pos[c] == len(opts):
            pos[c] = 0
            c -= 1
            if c >= 0:
                used[assign[c]] = False
                pos[c] += 1
            continue
        r = opts[pos[c]]
        assign[c] = r
        if c == k - 1:
            if len(out) >= limit:
                truncated = True
                break
            out.append(tuple(assign))
            pos[c] += 1
            continue
        used[r] = True
        c += 1
    rows = np.array(out, dtype=np.int32).reshape(len(out), k)
    return rows, truncated


def count_marginals(adj, limit):
    """Count perfect matchings and how often each (col, row) edge is used.

    Returns ``(total, counts)`` with ``counts[c, r]`` the number of perfect
    matchings that match column ``c`` to row ``r``. Raises ``OverflowError``
    once more than ``limit`` matchings have been seen.
    """
    adj = np.asarray(adj, dtype=np.uint8)
    k = adj.shape[0]
    counts = np.zeros((k, k), dtype=np.int64)
    if k == 0:
        return 1, counts
    cand = _adjacent_rows(adj)
    used = [False] * k
    assign = [0] * k
    pos = [0] * k
    total = 0
    c = 0
    while c >= 0:
        opts = cand[c]
        while pos[c] < len(opts) and used[opts[pos[c]]]:
            pos[c] += 1
        if pos[c] == len(opts):
            pos[c] = 0
            c -= 1
            if c >= 0:
                used[assign[c]] = False
                pos[c] += 1
            continue
        r = opts[pos[c]]
        assign[c] = r
        if c == k - 1:
            total += 1
            if total > limit:
                raise OverflowError(f"more than {limit} perfect matchings")
            for cc in range(k):
                counts[cc, assign[cc]] += 1
            pos[c] += 1
            continue
        used[r] = True
        c += 1
    return total, counts


def greedy_sample_batch(adj, uniforms):
    """Greedy min-degree matching sampler, one attempt per row of ``uniforms``.

    At each step the unmatched column with fewest unmatched neighbours is
    taken (lowest index on ties) and matched to its
    ``floor(u * degree)``-th free neighbour, ``u`` being the next entry of
    that attempt's uniforms. An attempt dead-ends when some column is left
    with no free neighbour; its ``ok`` flag is then 0.
    """
    adj = np.asarray(adj, dtype=np.uint8)
    uniforms = np.asarray(uniforms, dtype=np.float64)
    m, k = uniforms.shape
    out = np.full((m, k), -1, dtype=np.int32)
    ok = np.zeros(m, dtype=np.uint8)
    base_deg = adj.sum(axis=0).astype(np.int64).tolist()
    cols_of_row = [[c for c in range(k) if adj[r, c]] for r in range(k)]
    rows_of_col = _adjacent_rows(adj)
    for s in range(m):
        deg = list(base_deg)
        row_used = [False] * k
        col_used = [False] * k
        u = uniforms[s]
        good = True
        for step in range(k):
            best = -1
            best_deg = k + 1
            for c in range(k):
                if not col_used[c] and deg[c] < best_deg:
                    best, best_deg = c, deg[c]
            if best_deg == 0:
                good = False
                break
            pick = int(u[step] * best_deg)
            if pick >= best_deg:
                pick = best_deg - 1
            chosen = -1
            for r in rows_of_col[best]:
                if not row_used[r]:
                    if pick == 0:
                        chosen = r
                        break
                    pick -= 1
            out[s, best] = chosen
            col_used[best] = True
            row_used[chosen] = True
            for c in cols_of_row[chosen]:
                deg[c] -= 1
        if good:
            ok[s] = 1
        else:
            out[s, :] = -1
    return out, ok
