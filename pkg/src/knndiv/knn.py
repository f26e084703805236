"""Exact k-nearest-neighbor queries with deterministic tie-breaking.

Neighbors are ordered by (Euclidean distance, original index): points at the
same distance from the query are ranked by increasing input index. Squared
distances are compared, so no square-root rounding can introduce or hide a
tie.

Two query paths exist: a kd-tree (compiled kernel when the extension is
built, pure-Python twin otherwise) and a brute-force full sort used as the
correctness oracle. Indices are 0-based here.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._kdtree_py import KDTree as PyKDTree
from .errors import CapacityError, DomainError

try:
    from ._kdtree import KDTree as CKDTree

    HAVE_COMPILED_KERNEL = True
except ImportError:
    CKDTree = None
    HAVE_COMPILED_KERNEL = False

BACKEND = "compiled" if HAVE_COMPILED_KERNEL else "python"

__all__ = [
    "BACKEND",
    "HAVE_COMPILED_KERNEL",
    "NeighborAnswer",
    "as_sample",
    "build_tree",
    "kth_neighbor",
    "brute_neighbors",
    "loo_radii",
    "cross_radii",
    "loo_radii_multi",
    "cross_radii_multi",
]


@dataclass(frozen=True)
class NeighborAnswer:
    neighbor_index: int
    distance: float


def as_sample(points):
    """Validate a point sample: 2-D, finite, at least one point."""
    arr = np.ascontiguousarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DomainError(f"sample must be a nonempty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("sample contains non-finite coordinates")
    return arr


def build_tree(points, method="auto"):
    """Build a query index over a validated sample."""
    if method == "auto":
        method = "compiled" if HAVE_COMPILED_KERNEL else "python"
    if method == "compiled":
        if not HAVE_COMPILED_KERNEL:
            raise RuntimeError("compiled kd-tree kernel is not available")
        return CKDTree(points)
    if method == "python":
        return PyKDTree(points)
    raise ValueError(f"unknown method {method!r}")


def _check_capacity(order, available, what):
    if order < 1:
        raise CapacityError(f"order must be >= 1, got {order}")
    if order > available:
        raise CapacityError(
            f"order {order} exceeds the {available} available points in {what}"
        )


def kth_neighbor(points, query_point, k, exclude_index=None, method="auto"):
    """The k-th nearest point to query_point under (distance, index) order."""
    pts = as_sample(points)
    q = np.asarray(query_point, dtype=np.float64).reshape(-1)
    if q.shape[0] != pts.shape[1]:
        raise DomainError(
            f"query dimension {q.shape[0]} does not match sample dimension {pts.shape[1]}"
        )
    if not np.all(np.isfinite(q)):
        raise DomainError("query point contains non-finite coordinates")
    n = pts.shape[0]
    ex = -1 if exclude_index is None else int(exclude_index)
    available = n - 1 if 0 <= ex < n else n
    _check_capacity(k, available, "the query set")
    if method == "brute":
        d2, idx = brute_neighbors(pts, q, k, ex)
    else:
        tree = build_tree(pts, method)
        d2, idx = tree.query(q, k, ex)
    return NeighborAnswer(int(idx[k - 1]), math.sqrt(float(d2[k - 1])))


def squared_distances(points, q):
    """Squared distances accumulated coordinate by coordinate, the canonical
    order shared by every query path (bit-identical across them)."""
    d2 = np.zeros(points.shape[0])
    for c in range(points.shape[1]):
        diff = points[:, c] - q[c]
        d2 += diff * diff
    return d2


def brute_neighbors(points, q, k, exclude_index=-1):
    """Full-sort oracle: all n candidates sorted by (squared distance, index)."""
    d2 = squared_distances(points, q)
    order = np.lexsort((np.arange(points.shape[0]), d2))
    if 0 <= exclude_index < points.shape[0]:
        order = order[order != exclude_index]
    order = order[:k]
    return d2[order], order.astype(np.int64)


def loo_radii(x, k, method="auto"):
    """Leave-one-out radii: distance from each point to its k-th neighbor
    among the other n-1 points of the same sample. Length-n array."""
    return loo_radii_multi(x, k, method=method)


def loo_radii_multi(x, ks, method="auto"):
    """Leave-one-out radii with a scalar or per-point neighbor order."""
    pts = as_sample(x)
    n = pts.shape[0]
    ks = np.broadcast_to(np.asarray(ks, dtype=np.int64), (n,))
    if ks.min() < 1:
        raise CapacityError(f"orders must be >= 1, got {int(ks.min())}")
    kmax = int(ks.max())
    _check_capacity(kmax, n - 1, "the sample (leave-one-out)")
    if method == "brute":
        d2 = np.empty((n, kmax))
        for i in range(n):
            d2[i], _ = brute_neighbors(pts, pts[i], kmax, i)
    else:
        tree = build_tree(pts, method)
        d2, _ = tree.query_batch(pts, kmax, np.arange(n, dtype=np.int64))
    return np.sqrt(d2[np.arange(n), ks - 1])


def cross_radii(x, y, l, method="auto"):
    """Cross radii: distance from each point of x to its l-th neighbor in the
    full sample y (no exclusion). Length-n array."""
    return cross_radii_multi(x, y, l, method=method)


def cross_radii_multi(x, y, ls, method="auto"):
    """Cross radii with a scalar or per-point neighbor order."""
    xs = as_sample(x)
    ys = as_sample(y)
    if xs.shape[1] != ys.shape[1]:
        raise DomainError(
            f"dimension mismatch: x has d={xs.shape[1]}, y has d={ys.shape[1]}"
        )
    n, m = xs.shape[0], ys.shape[0]
    ls = np.broadcast_to(np.asarray(ls, dtype=np.int64), (n,))
    if ls.min() < 1:
        raise CapacityError(f"orders must be >= 1, got {int(ls.min())}")
    lmax = int(ls.max())
    _check_capacity(lmax, m, "the reference sample")
    if method == "brute":
        d2 = np.empty((n, lmax))
        for i in range(n):
            d2[i], _ = brute_neighbors(ys, xs[i], lmax)
    else:
        tree = build_tree(ys, method)
        d2, _ = tree.query_batch(xs, lmax)
    return np.sqrt(d2[np.arange(n), ls - 1])
