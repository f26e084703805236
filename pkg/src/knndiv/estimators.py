"""k-NN estimators of KL divergence and Shannon differential entropy.

The divergence estimator combines leave-one-out radii within the first
sample with cross radii into the second sample; digamma terms correct the
bias of the log-radius statistics. Natural logarithms throughout. Per-point
terms are reduced with numpy's pairwise summation in input order, so results
are deterministic.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import knn
from .errors import CapacityError, DegenerateSampleError
from .special import digamma

__all__ = [
    "OrderSpec",
    "EstimateReport",
    "kl_estimate",
    "kl_estimate_equal_orders",
    "entropy_estimate",
]


@dataclass(frozen=True)
class OrderSpec:
    """Neighbor orders: uniform (k, l) or per-point sequences bounded by r.

    l (or ls) is only used by the divergence estimator; entropy ignores it.
    """

    k: int | None = None
    l: int | None = None
    ks: tuple | None = None
    ls: tuple | None = None

    @classmethod
    def uniform(cls, k, l=None):
        if k < 1 or (l is not None and l < 1):
            raise CapacityError(f"orders must be >= 1, got k={k}, l={l}")
        return cls(k=int(k), l=None if l is None else int(l))

    @classmethod
    def per_sample(cls, ks, ls=None):
        ks = tuple(int(v) for v in ks)
        if not ks or min(ks) < 1:
            raise CapacityError("per-sample orders must be a nonempty list of ints >= 1")
        if ls is not None:
            ls = tuple(int(v) for v in ls)
            if len(ls) != len(ks) or min(ls) < 1:
                raise CapacityError(
                    "per-sample order lists must have equal length and entries >= 1"
                )
        return cls(ks=ks, ls=ls)

    @property
    def is_uniform(self):
        return self.ks is None

    @property
    def r(self):
        """Bound on all orders."""
        if self.is_uniform:
            return max(self.k or 1, self.l or 1)
        return max(max(self.ks), max(self.ls) if self.ls else 1)


@dataclass
class EstimateReport:
    value: float
    n: int
    m: int | None
    orders: OrderSpec
    zero_distance_count: int = 0
    per_point_terms: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self, include_terms=False):
        out = {
            "value": self.value,
            "n": self.n,
            "m": self.m,
            "zero_distance_count": self.zero_distance_count,
        }
        if self.orders.is_uniform:
            out["k"] = self.orders.k
            out["l"] = self.orders.l
        else:
            out["k"] = list(self.orders.ks)
            out["l"] = None if self.orders.ls is None else list(self.orders.ls)
        if include_terms and self.per_point_terms is not None:
            out["per_point_terms"] = [float(t) for t in self.per_point_terms]
        return out


def _check_zero_radii(name, radii):
    zeros = np.flatnonzero(radii == 0.0)
    if zeros.size:
        raise DegenerateSampleError(
            f"zero {name} distance at indices {zeros.tolist()}: coincident points "
            "make the log-radius estimator undefined (consider jitter)",
            indices=zeros,
        )


def kl_estimate(x, y, orders, method="auto"):
    """KL divergence estimate of the law of x against the law of y.

    Uniform orders (k, l):
        psi(k) - psi(l) + mean_i log( m * V_i^d / ((n-1) * R_i^d) )
    Per-point orders:
        mean_i (psi(k_i) - psi(l_i)) + log(m/(n-1)) + (d/n) sum_i log(V_i/R_i)
    where R_i is the leave-one-out radius in x and V_i the cross radius into y.
    """
    xs = knn.as_sample(x)
    ys = knn.as_sample(y)
    n, d = xs.shape
    m = ys.shape[0]
    if orders.is_uniform:
        k, l = orders.k, orders.l
        if l is None:
            raise CapacityError("divergence estimation needs both orders k and l")
        r_loo = knn.loo_radii(xs, k, method=method)
        v_cross = knn.cross_radii(xs, ys, l, method=method)
        _check_zero_radii("leave-one-out", r_loo)
        _check_zero_radii("cross", v_cross)
        terms = np.log(m * v_cross**d / ((n - 1) * r_loo**d))
        value = digamma(k) - digamma(l) + float(np.sum(terms)) / n
    else:
        if orders.ls is None:
            raise CapacityError("divergence estimation needs both order lists")
        ks = np.asarray(orders.ks, dtype=np.int64)
        ls = np.asarray(orders.ls, dtype=np.int64)
        if ks.shape[0] != n:
            raise CapacityError(
                f"per-sample orders have length {ks.shape[0]}, sample has n={n}"
            )
        r_loo = knn.loo_radii_multi(xs, ks, method=method)
        v_cross = knn.cross_radii_multi(xs, ys, ls, method=method)
        _check_zero_radii("leave-one-out", r_loo)
        _check_zero_radii("cross", v_cross)
        psi_terms = np.array([digamma(a) - digamma(b) for a, b in zip(ks, ls)])
        log_ratio = np.log(v_cross / r_loo)
        terms = psi_terms + math.log(m / (n - 1)) + d * log_ratio
        value = float(np.sum(terms)) / n
    return EstimateReport(
        value=value, n=n, m=m, orders=orders, per_point_terms=terms
    )


def kl_estimate_equal_orders(x, y, k, method="auto"):
    """Equal-order form k = l: the digamma terms cancel and the estimate is
    (d/n) sum_i log(V_i/R_i) + log(m/(n-1))."""
    xs = knn.as_sample(x)
    ys = knn.as_sample(y)
    n, d = xs.shape
    m = ys.shape[0]
    r_loo = knn.loo_radii(xs, k, method=method)
    v_cross = knn.cross_radii(xs, ys, k, method=method)
    _check_zero_radii("leave-one-out", r_loo)
    _check_zero_radii("cross", v_cross)
    terms = d * np.log(v_cross / r_loo)
    value = float(np.sum(terms)) / n + math.log(m / (n - 1))
    return EstimateReport(
        value=value, n=n, m=m, orders=OrderSpec.uniform(k, k), per_point_terms=terms
    )


def entropy_estimate(x, orders, method="auto"):
    """Kozachenko-Leonenko entropy estimate from leave-one-out radii.

    Uniform order k:
        mean_i log( R_i^d * V_d * (n-1) / e^{psi(k)} )
    Per-point orders:
        -mean_i psi(k_i) + log V_d + log(n-1) + (d/n) sum_i log R_i
    """
    from .special import unit_ball_volume

    if isinstance(orders, int):
        orders = OrderSpec.uniform(orders)
    xs = knn.as_sample(x)
    n, d = xs.shape
    vd = unit_ball_volume(d)
    if orders.is_uniform:
        k = orders.k
        r_loo = knn.loo_radii(xs, k, method=method)
        _check_zero_radii("leave-one-out", r_loo)
        terms = np.log(r_loo**d * vd * (n - 1) / math.exp(digamma(k)))
        value = float(np.sum(terms)) / n
    else:
        ks = np.asarray(orders.ks, dtype=np.int64)
        if ks.shape[0] != n:
            raise CapacityError(
                f"per-sample orders have length {ks.shape[0]}, sample has n={n}"
            )
        r_loo = knn.loo_radii_multi(xs, ks, method=method)
        _check_zero_radii("leave-one-out", r_loo)
        psi_terms = np.array([digamma(a) for a in ks])
        terms = -psi_terms + math.log(vd) + math.log(n - 1) + d * np.log(r_loo)
        value = float(np.sum(terms)) / n
    return EstimateReport(
        value=value, n=n, m=None, orders=orders, per_point_terms=terms
    )
