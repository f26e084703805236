# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kd-tree with exact (squared-distance, index) tie-breaking.

Algorithmic twin of ``_kdtree_py.KDTree``; answers must be identical. Only
the inner query loop differs: it runs in C.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

DEF LEAFSIZE = 16


cdef class KDTree:
    cdef readonly cnp.ndarray points
    cdef readonly Py_ssize_t n, d
    cdef cnp.ndarray perm
    cdef cnp.ndarray node_start, node_end, node_dim, node_left, node_right
    cdef cnp.ndarray node_val
    cdef Py_ssize_t n_nodes

    # typed views bound once after build
    cdef double[:, ::1] _pts
    cdef long long[::1] _perm
    cdef long long[::1] _start, _end, _dim, _left, _right
    cdef double[::1] _val

    def __init__(self, points, leafsize=LEAFSIZE):
        points = np.ascontiguousarray(points, dtype=np.float64)
        if points.ndim != 2:
            raise ValueError("points must be a 2-D array")
        self.points = points
        self.n, self.d = points.shape
        self.perm = np.arange(self.n, dtype=np.int64)
        cap = 2 * (self.n // (leafsize // 2) + 2)
        self.node_start = np.zeros(cap, dtype=np.int64)
        self.node_end = np.zeros(cap, dtype=np.int64)
        self.node_dim = np.full(cap, -1, dtype=np.int64)
        self.node_left = np.full(cap, -1, dtype=np.int64)
        self.node_right = np.full(cap, -1, dtype=np.int64)
        self.node_val = np.zeros(cap, dtype=np.float64)
        self.n_nodes = 0
        self._build(0, self.n, int(leafsize))
        self.node_start = self.node_start[: self.n_nodes].copy()
        self.node_end = self.node_end[: self.n_nodes].copy()
        self.node_dim = self.node_dim[: self.n_nodes].copy()
        self.node_left = self.node_left[: self.n_nodes].copy()
        self.node_right = self.node_right[: self.n_nodes].copy()
        self.node_val = self.node_val[: self.n_nodes].copy()
        self._pts = self.points
        self._perm = self.perm
        self._start = self.node_start
        self._end = self.node_end
        self._dim = self.node_dim
        self._left = self.node_left
        self._right = self.node_right
        self._val = self.node_val

    cdef Py_ssize_t _new_node(self, Py_ssize_t start, Py_ssize_t end):
        cdef Py_ssize_t node = self.n_nodes
        if node >= self.node_start.shape[0]:
            grow = node * 2 + 8
            self.node_start = np.resize(self.node_start, grow)
            self.node_end = np.resize(self.node_end, grow)
            self.node_dim = np.resize(self.node_dim, grow)
            self.node_left = np.resize(self.node_left, grow)
            self.node_right = np.resize(self.node_right, grow)
            self.node_val = np.resize(self.node_val, grow)
        self.node_start[node] = start
        self.node_end[node] = end
        self.node_dim[node] = -1
        self.node_left[node] = -1
        self.node_right[node] = -1
        self.n_nodes += 1
        return node

    cdef Py_ssize_t _build(self, Py_ssize_t start, Py_ssize_t end, int leafsize):
        cdef Py_ssize_t node = self._new_node(start, end)
        if end - start <= leafsize:
            return node
        sub = self.perm[start:end]
        coords = self.points[sub]
        spread = coords.max(axis=0) - coords.min(axis=0)
        cdef Py_ssize_t dim = int(np.argmax(spread))
        cdef Py_ssize_t mid = (end - start) // 2
        order = np.argpartition(coords[:, dim], mid)
        self.perm[start:end] = sub[order]
        self.node_dim[node] = dim
        self.node_val[node] = self.points[self.perm[start + mid], dim]
        cdef Py_ssize_t left = self._build(start, start + mid, leafsize)
        cdef Py_ssize_t right = self._build(start + mid, end, leafsize)
        self.node_left[node] = left
        self.node_right[node] = right
        return node

    cdef Py_ssize_t _visit(
        self,
        Py_ssize_t node,
        const double* q,
        Py_ssize_t k,
        long long exclude,
        double* heap_d,
        long long* heap_i,
        Py_ssize_t count,
    ) noexcept nogil:
        cdef Py_ssize_t start = self._start[node]
        cdef Py_ssize_t end = self._end[node]
        cdef Py_ssize_t dim = self._dim[node]
        cdef Py_ssize_t j, c, pos
        cdef long long i
        cdef double d2, diff, t
        cdef Py_ssize_t near, far
        if dim < 0:  # leaf
            for j in range(start, end):
                i = self._perm[j]
                if i == exclude:
                    continue
                d2 = 0.0
                for c in range(self.d):
                    t = self._pts[i, c] - q[c]
                    d2 += t * t
                if count == k:
                    if d2 > heap_d[k - 1] or (
                        d2 == heap_d[k - 1] and i > heap_i[k - 1]
                    ):
                        continue
                    count -= 1
                pos = count
                while pos > 0 and (
                    heap_d[pos - 1] > d2
                    or (heap_d[pos - 1] == d2 and heap_i[pos - 1] > i)
                ):
                    heap_d[pos] = heap_d[pos - 1]
                    heap_i[pos] = heap_i[pos - 1]
                    pos -= 1
                heap_d[pos] = d2
                heap_i[pos] = i
                count += 1
            return count
        diff = q[dim] - self._val[node]
        if diff < 0.0:
            near = self._left[node]
            far = self._right[node]
        else:
            near = self._right[node]
            far = self._left[node]
        count = self._visit(near, q, k, exclude, heap_d, heap_i, count)
        # <= keeps the far side reachable on exact distance ties
        if count < k or diff * diff <= heap_d[count - 1]:
            count = self._visit(far, q, k, exclude, heap_d, heap_i, count)
        return count

    def query(self, q, Py_ssize_t k, long long exclude_index=-1):
        """k nearest neighbors of q under (squared distance, index) order."""
        cdef cnp.ndarray[double, ndim=1] qa = np.ascontiguousarray(
            q, dtype=np.float64
        )
        cdef cnp.ndarray[double, ndim=1] heap_d = np.empty(k)
        cdef cnp.ndarray[long long, ndim=1] heap_i = np.empty(k, dtype=np.int64)
        cdef Py_ssize_t count = self._visit(
            0, &qa[0], k, exclude_index, &heap_d[0], &heap_i[0], 0
        )
        if count < k:
            raise ValueError(
                f"requested order {k} but only {count} points available"
            )
        return heap_d, heap_i

    def query_batch(self, queries, Py_ssize_t k, exclude_indices=None):
        """Query many points; exclude_indices (optional) is aligned with queries."""
        cdef cnp.ndarray[double, ndim=2] qa = np.ascontiguousarray(
            queries, dtype=np.float64
        )
        cdef Py_ssize_t nq = qa.shape[0]
        cdef cnp.ndarray[double, ndim=2] out_d = np.empty((nq, k))
        cdef cnp.ndarray[long long, ndim=2] out_i = np.empty((nq, k), dtype=np.int64)
        cdef cnp.ndarray[long long, ndim=1] ex
        if exclude_indices is None:
            ex = np.full(nq, -1, dtype=np.int64)
        else:
            ex = np.ascontiguousarray(exclude_indices, dtype=np.int64)
        cdef Py_ssize_t j, count
        for j in range(nq):
            count = self._visit(
                0, &qa[j, 0], k, ex[j], &out_d[j, 0], &out_i[j, 0], 0
            )
            if count < k:
                raise ValueError(
                    f"requested order {k} but only {count} points available"
                )
        return out_d, out_i
