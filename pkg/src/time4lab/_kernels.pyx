# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the search enumeration and loss integration loops."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def lossless_assignments(weights, int num_edges, long long capacity):
    cdef cnp.int64_t[:] w = np.ascontiguousarray(weights, dtype=np.int64)
    cdef Py_ssize_t count = w.shape[0]
    if count == 0:
        return [()]
    cdef cnp.int64_t[:] loads = np.zeros(num_edges, dtype=np.int64)
    cdef cnp.int64_t[:] choice = np.full(count, -1, dtype=np.int64)
    cdef Py_ssize_t depth = 0
    cdef long long prev, nxt, wt
    cdef Py_ssize_t cap_rows = 1024, rows = 0, i
    buf = np.empty((cap_rows, count), dtype=np.int8)
    cdef cnp.int8_t[:, :] view = buf
    while depth >= 0:
        prev = choice[depth]
        if prev >= 0:
            loads[prev] -= w[depth]
        nxt = prev + 1
        wt = w[depth]
        while nxt < num_edges and loads[nxt] + wt > capacity:
            nxt += 1
        if nxt == num_edges:
            choice[depth] = -1
            depth -= 1
            continue
        choice[depth] = nxt
        loads[nxt] += wt
        if depth == count - 1:
            if rows == cap_rows:
                cap_rows *= 2
                buf = np.resize(buf, (cap_rows, count))
                view = buf
            for i in range(count):
                view[rows, i] = <cnp.int8_t>choice[i]
            rows += 1
        else:
            depth += 1
            choice[depth] = -1
    return [tuple(r) for r in buf[:rows].tolist()]


def excess_integral(times, loads, caps):
    cdef cnp.int64_t[:] t = np.ascontiguousarray(times, dtype=np.int64)
    cdef cnp.int64_t[:, :] ld = np.ascontiguousarray(loads, dtype=np.int64).reshape(-1, len(caps))
    cdef cnp.int64_t[:] cp = np.ascontiguousarray(caps, dtype=np.int64)
    cdef Py_ssize_t k, e, segs = t.shape[0] - 1, edges = cp.shape[0]
    cdef double total = 0.0, seg, dt
    cdef long long over
    for k in range(segs):
        dt = <double>(t[k + 1] - t[k])
        if dt <= 0.0:
            continue
        seg = 0.0
        for e in range(edges):
            over = ld[k, e] - cp[e]
            if over > 0:
                seg += <double>over
        total += seg * dt
    return total
