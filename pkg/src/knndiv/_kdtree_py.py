"""Pure-Python kd-tree with exact (squared-distance, index) tie-breaking.

Fallback twin of the compiled kernel in ``_kdtree.pyx``; both implement the
same algorithm and must return identical answers. Queries compare candidates
by the pair (squared distance, original index), so ties at equal distance are
always resolved toward the smaller input index and results are deterministic
on adversarial inputs.
"""

import numpy as np

__all__ = ["KDTree"]

_LEAFSIZE = 16


class KDTree:
    def __init__(self, points, leafsize=_LEAFSIZE):
        points = np.ascontiguousarray(points, dtype=np.float64)
        if points.ndim != 2:
            raise ValueError("points must be a 2-D array")
        self.points = points
        self.n, self.d = points.shape
        self.leafsize = int(leafsize)
        self.perm = np.arange(self.n, dtype=np.int64)
        # node storage: parallel lists indexed by node id
        self._start = []
        self._end = []
        self._split_dim = []
        self._split_val = []
        self._left = []
        self._right = []
        self._build(0, self.n)

    def _new_node(self, start, end):
        self._start.append(start)
        self._end.append(end)
        self._split_dim.append(-1)
        self._split_val.append(0.0)
        self._left.append(-1)
        self._right.append(-1)
        return len(self._start) - 1

    def _build(self, start, end):
        node = self._new_node(start, end)
        if end - start <= self.leafsize:
            return node
        sub = self.perm[start:end]
        coords = self.points[sub]
        spread = coords.max(axis=0) - coords.min(axis=0)
        dim = int(np.argmax(spread))
        mid = (end - start) // 2
        order = np.argpartition(coords[:, dim], mid)
        self.perm[start:end] = sub[order]
        split_val = float(self.points[self.perm[start + mid], dim])
        self._split_dim[node] = dim
        self._split_val[node] = split_val
        self._left[node] = self._build(start, start + mid)
        self._right[node] = self._build(start + mid, end)
        return node

    def query(self, q, k, exclude_index=-1):
        """k nearest neighbors of q under (squared distance, index) order.

        Returns (sq_dists, indices), both length k, sorted best first.
        """
        q = np.asarray(q, dtype=np.float64)
        heap_d = np.empty(k)
        heap_i = np.empty(k, dtype=np.int64)
        count = self._visit(0, q, k, int(exclude_index), heap_d, heap_i, 0)
        if count < k:
            raise ValueError(
                f"requested order {k} but only {count} points available"
            )
        return heap_d, heap_i

    def _visit(self, node, q, k, exclude, heap_d, heap_i, count):
        start, end = self._start[node], self._end[node]
        dim = self._split_dim[node]
        if dim < 0:  # leaf
            idx = self.perm[start:end]
            # coordinate-sequential accumulation, bit-identical to the
            # compiled kernel and the brute-force oracle
            pts = self.points[idx]
            d2 = np.zeros(len(idx))
            for c in range(pts.shape[1]):
                diff = pts[:, c] - q[c]
                d2 += diff * diff
            for j in range(len(idx)):
                i = idx[j]
                if i == exclude:
                    continue
                count = _accept(heap_d, heap_i, count, k, d2[j], i)
            return count
        diff = q[dim] - self._split_val[node]
        if diff < 0.0:
            near, far = self._left[node], self._right[node]
        else:
            near, far = self._right[node], self._left[node]
        count = self._visit(near, q, k, exclude, heap_d, heap_i, count)
        # <= keeps the far side reachable on exact distance ties
        if count < k or diff * diff <= heap_d[count - 1]:
            count = self._visit(far, q, k, exclude, heap_d, heap_i, count)
        return count

    def query_batch(self, queries, k, exclude_indices=None):
        """Query many points; exclude_indices (optional) is aligned with queries."""
        queries = np.asarray(queries, dtype=np.float64)
        nq = queries.shape[0]
        out_d = np.empty((nq, k))
        out_i = np.empty((nq, k), dtype=np.int64)
        for j in range(nq):
            ex = -1 if exclude_indices is None else int(exclude_indices[j])
            out_d[j], out_i[j] = self.query(queries[j], k, ex)
        return out_d, out_i


def _accept(heap_d, heap_i, count, k, d2, i):
    """Insert candidate (d2, i) into the sorted bounded heap; return new count."""
    if count == k:
        if d2 > heap_d[k - 1] or (d2 == heap_d[k - 1] and i > heap_i[k - 1]):
            return count
        count -= 1
    pos = count
    while pos > 0 and (
        heap_d[pos - 1] > d2 or (heap_d[pos - 1] == d2 and heap_i[pos - 1] > i)
    ):
        heap_d[pos] = heap_d[pos - 1]
        heap_i[pos] = heap_i[pos - 1]
        pos -= 1
    heap_d[pos] = d2
    heap_i[pos] = i
    return count + 1
