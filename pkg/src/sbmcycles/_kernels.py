"""Compiled loops: the tuple-enumeration oracle and a CSR triangle counter."""
import numpy as np
from numba import njit


@njit(cache=True)
def distinct_cycle_sum(M, k):
    """Sum over ordered distinct tuples of ``M[i0,i1] M[i1,i2] ... M[i_{k-1},i0]``.

    Depth-first enumeration with Neumaier compensated summation.
    """
    n = M.shape[0]
    idx = np.full(k, -1, dtype=np.int64)
    used = np.zeros(n, dtype=np.bool_)
    prod = np.ones(k + 1)
    total = 0.0
    comp = 0.0
    depth = 0
    while depth >= 0:
        cur = idx[depth]
        if cur >= 0:
            used[cur] = False
        cur += 1
        while cur < n and used[cur]:
            cur += 1
        if cur >= n:
            idx[depth] = -1
            depth -= 1
            continue
        idx[depth] = cur
        used[cur] = True
        if depth == 0:
            prod[1] = 1.0
        else:
            prod[depth + 1] = prod[depth] * M[idx[depth - 1], cur]
        if depth == k - 1:
            term = prod[k] * M[cur, idx[0]]
            s = total + term
            if abs(total) >= abs(term):
                comp += (total - s) + term
            else:
                comp += (term - s) + total
            total = s
        else:
            depth += 1
    return total + comp


@njit(cache=True)
def triangle_count_csr(indptr, indices):
    """Number of triangles in a symmetric CSR adjacency with sorted rows."""
    n = indptr.size - 1
    count = 0
    for u in range(n):
        for a in range(indptr[u], indptr[u + 1]):
            v = indices[a]
            if v <= u:
                continue
            # merge-intersect neighbours w > v of u and v
            pu = a + 1
            pv = indptr[v]
            eu = indptr[u + 1]
            ev = indptr[v + 1]
            while pv < ev and indices[pv] <= v:
                pv += 1
            while pu < eu and pv < ev:
                x = indices[pu]
                y = indices[pv]
                if x == y:
                    count += 1
                    pu += 1
                    pv += 1
                elif x < y:
                    pu += 1
                else:
                    pv += 1
    return count
