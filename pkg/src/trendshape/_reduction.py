"""GF(2) boundary-column reduction kernel.

The standard left-to-right persistence reduction: repeatedly add (XOR) the
already-reduced column owning the current pivot row until the column's lowest
set row is unclaimed or the column is zero. Columns use a scratch bitmap over
rows plus a touched-index list, so each addition costs the size of the stored
pivot column rather than the full row count.

Apparent pairs (a column that is the first cofacet of its own maximal facet)
are persistence pairs of the refined filtration order; the caller detects
them combinatorially and passes them in ``pre_pivot`` so their columns are
claimed as-is, never reduced. Adding such an unreduced column downstream is a
legal left-to-right operation because the claiming column always precedes any
column that can reach that pivot row.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def count_triangles(adj, edges_i, edges_j):
    """Common-neighbor counts per edge, restricted to k > j (sorted triples)."""
    n = adj.shape[0]
    counts = np.zeros(edges_i.size, np.int64)
    for e in range(edges_i.size):
        i, j = edges_i[e], edges_j[e]
        c = 0
        for k in range(j + 1, n):
            if adj[i, k] and adj[j, k]:
                c += 1
        counts[e] = c
    return counts


@njit(cache=True, nogil=True)
def fill_triangles(adj, dm, edges_i, edges_j, offsets, out_tris, out_diam):
    """Write (i, j, k) triples and their diameters into preallocated arrays."""
    n = adj.shape[0]
    for e in range(edges_i.size):
        i, j = edges_i[e], edges_j[e]
        w = offsets[e]
        dij = dm[i, j]
        for k in range(j + 1, n):
            if adj[i, k] and adj[j, k]:
                out_tris[w, 0] = i
                out_tris[w, 1] = j
                out_tris[w, 2] = k
                d = dij
                if dm[i, k] > d:
                    d = dm[i, k]
                if dm[j, k] > d:
                    d = dm[j, k]
                out_diam[w] = d
                w += 1


@njit(cache=True, nogil=True)
def fill_coboundary(tri_edges, n_edges, col_offsets, out_rows):
    """Bucket reversed-triangle row indices by reversed-edge column.

    Iterating triangles in reverse original order makes the reversed row
    indices land in each bucket already ascending, so no comparison sort is
    needed.
    """
    n_tri = tri_edges.shape[0]
    write = col_offsets[:-1].copy()
    for t in range(n_tri - 1, -1, -1):
        r = n_tri - 1 - t
        for c in range(3):
            col = n_edges - 1 - tri_edges[t, c]
            out_rows[write[col]] = r
            write[col] += 1


@njit(cache=True, nogil=True)
def reduce_columns(col_rows, col_offsets, n_rows, cleared, pre_pivot):
    """Reduce boundary columns given in filtration order.

    col j's boundary rows are col_rows[col_offsets[j]:col_offsets[j+1]]
    (row indices in the filtration order of the lower dimension). Columns
    flagged in ``cleared`` are treated as already zero (twist optimization);
    ``pre_pivot[j] >= 0`` claims that row for column j without reduction.

    Returns the pivot row of each column, -1 where the column reduced to zero.
    """
    n_cols = col_offsets.size - 1
    pivot_col_of_row = np.full(n_rows, -1, np.int64)
    pivot_row_of_col = np.full(n_cols, -1, np.int64)

    store_data = np.empty(max(16, col_rows.size), np.int64)
    store_start = np.zeros(n_cols, np.int64)
    store_len = np.zeros(n_cols, np.int64)
    store_ptr = 0

    for j in range(n_cols):
        r = pre_pivot[j]
        if r >= 0:
            pivot_col_of_row[r] = j
            pivot_row_of_col[j] = r
            store_start[j] = col_offsets[j]
            store_len[j] = -1  # sentinel: column lives in col_rows, unreduced

    bitmap = np.zeros(n_rows, np.uint8)
    touched = np.empty(n_rows, np.int64)
    in_touched = np.zeros(n_rows, np.uint8)

    for j in range(n_cols):
        if cleared[j] != 0 or pre_pivot[j] >= 0:
            continue
        nt = 0
        low = np.int64(-1)
        for idx in range(col_offsets[j], col_offsets[j + 1]):
            r = col_rows[idx]
            bitmap[r] ^= 1
            if in_touched[r] == 0:
                in_touched[r] = 1
                touched[nt] = r
                nt += 1
            if r > low:
                low = r
        while low >= 0:
            if bitmap[low] == 0:
                low -= 1
                continue
            k = pivot_col_of_row[low]
            if k < 0:
                break
            s = store_start[k]
            if store_len[k] < 0:
                end = col_offsets[k + 1]
                src = col_rows
            else:
                end = s + store_len[k]
                src = store_data
            for idx in range(s, end):
                r = src[idx]
                bitmap[r] ^= 1
                if in_touched[r] == 0:
                    in_touched[r] = 1
                    touched[nt] = r
                    nt += 1
            # the added column's pivot is exactly `low`, so bitmap[low] is now 0

        if low >= 0:
            count = 0
            for idx in range(nt):
                if bitmap[touched[idx]] == 1:
                    count += 1
            while store_ptr + count > store_data.size:
                grown = np.empty(store_data.size * 2, np.int64)
                grown[:store_ptr] = store_data[:store_ptr]
                store_data = grown
            store_start[j] = store_ptr
            store_len[j] = count
            for idx in range(nt):
                r = touched[idx]
                if bitmap[r] == 1:
                    store_data[store_ptr] = r
                    store_ptr += 1
            pivot_col_of_row[low] = j
            pivot_row_of_col[j] = low

        for idx in range(nt):
            r = touched[idx]
            bitmap[r] = 0
            in_touched[r] = 0

    return pivot_row_of_col
