# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled trial kernels.

Mirror of ``_mc_py`` — same random stream contract, same draw order, same
results bit for bit.  Keep the two lanes in lockstep when changing either.
"""

from libc.stdint cimport int64_t, uint64_t

import numpy as np

cdef uint64_t PHI64 = <uint64_t>0x9E3779B97F4A7C15
cdef uint64_t MUL1 = <uint64_t>0xBF58476D1CE4E5B9
cdef uint64_t MUL2 = <uint64_t>0x94D049BB133111EB
cdef double UNIT53 = 1.0 / 9007199254740992.0  # 2**-53


cdef inline uint64_t _mix64(uint64_t z) noexcept nogil:
    z ^= z >> 30
    z *= MUL1
    z ^= z >> 27
    z *= MUL2
    return z ^ (z >> 31)


cdef inline double _draw(uint64_t key, uint64_t index) noexcept nogil:
    return <double>(_mix64(key + (index + 1) * PHI64) >> 11) * UNIT53


def flood_counts(int node_count, long long[::1] edge_src, long long[::1] edge_dst,
                 double[::1] edge_p, long long[::1] pass_order,
                 int source, long long trials, unsigned long long seed):
    """Per-node hit counts over flooding trials."""
    cdef Py_ssize_t edge_count = edge_p.shape[0]
    hits_arr = np.zeros(node_count, dtype=np.int64)
    up_arr = np.zeros(max(edge_count, 1), dtype=np.uint8)
    reach_arr = np.zeros(node_count, dtype=np.uint8)
    cdef int64_t[::1] hits = hits_arr
    cdef unsigned char[::1] up = up_arr
    cdef unsigned char[::1] reached = reach_arr
    cdef long long t
    cdef Py_ssize_t e, v
    cdef long long o
    cdef uint64_t key
    for t in range(trials):
        key = _mix64(seed + (<uint64_t>t + 1) * PHI64)
        for e in range(edge_count):
            up[e] = _draw(key, <uint64_t>e) < edge_p[e]
        for v in range(node_count):
            reached[v] = 0
        reached[source] = 1
        for e in range(edge_count):
            o = pass_order[e]
            if up[o] and reached[edge_src[o]]:
                reached[edge_dst[o]] = 1
        for v in range(node_count):
            if reached[v]:
                hits[v] += 1
    return hits_arr


def unicast_counts(int node_count, long long[::1] out_offset, long long[::1] out_target,
                   long long[::1] out_edge, double[::1] edge_p,
                   int source, long long trials, unsigned long long seed, bint shuffle):
    """Per-node visit counts over unicast walks."""
    cdef Py_ssize_t edge_count = edge_p.shape[0]
    hits_arr = np.zeros(node_count, dtype=np.int64)
    up_arr = np.zeros(max(edge_count, 1), dtype=np.uint8)
    cdef int64_t[::1] hits = hits_arr
    cdef unsigned char[::1] up = up_arr
    cdef Py_ssize_t max_degree = 1, degree
    cdef Py_ssize_t v
    for v in range(node_count):
        degree = out_offset[v + 1] - out_offset[v]
        if degree > max_degree:
            max_degree = degree
    perm_arr = np.zeros(max_degree, dtype=np.int64)
    cdef int64_t[::1] perm = perm_arr
    cdef long long t, cur, nxt, lo, slot
    cdef uint64_t key, counter
    cdef Py_ssize_t e, i, j, k
    for t in range(trials):
        key = _mix64(seed + (<uint64_t>t + 1) * PHI64)
        for e in range(edge_count):
            up[e] = _draw(key, <uint64_t>e) < edge_p[e]
        counter = <uint64_t>edge_count
        cur = source
        hits[cur] += 1
        while True:
            lo = out_offset[cur]
            degree = out_offset[cur + 1] - lo
            if degree == 0:
                break
            for i in range(degree):
                perm[i] = i
            if shuffle and degree > 1:
                for i in range(degree - 1, 0, -1):
                    j = <Py_ssize_t>(_draw(key, counter) * (i + 1))
                    counter += 1
                    perm[i], perm[j] = perm[j], perm[i]
            nxt = -1
            for k in range(degree):
                slot = lo + perm[k]
                if up[out_edge[slot]]:
                    nxt = out_target[slot]
                    break
            if nxt < 0:
                break
            cur = nxt
            hits[cur] += 1
    return hits_arr
