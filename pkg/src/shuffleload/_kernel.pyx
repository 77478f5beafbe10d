# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled pair-enumeration kernel.

Must stay operation-for-operation identical to ``_kernel_py.pair_bytes``:
same loop order, same arithmetic, no fused multiply-add (see setup.py).
"""
cimport numpy as cnp

cnp.import_array()


def pair_bytes(const cnp.int64_t[::1] map_nodes,
               const cnp.int64_t[::1] reduce_nodes,
               const cnp.int64_t[::1] node_racks,
               const double[::1] weights,
               double per_map,
               double overhead,
               double cross_rack_weight):
    cdef Py_ssize_t m = map_nodes.shape[0]
    cdef Py_ssize_t r = reduce_nodes.shape[0]
    cdef Py_ssize_t i, j
    cdef cnp.int64_t a, b, rack_a
    cdef double nbytes, f
    cdef double data = 0.0
    cdef double ovh = 0.0
    cdef double local = 0.0
    if weights.shape[0] != r:
        raise ValueError("weights must have one entry per reduce task")
    with nogil:
        for i in range(m):
            a = map_nodes[i]
            rack_a = node_racks[a]
            for j in range(r):
                nbytes = per_map * weights[j]
                b = reduce_nodes[j]
                if a == b:
                    local += nbytes
                else:
                    f = cross_rack_weight if node_racks[b] != rack_a else 1.0
                    data += nbytes * f
                    ovh += overhead * f
    return data, ovh, local
