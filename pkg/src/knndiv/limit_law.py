"""Goodness-of-fit diagnostic for the Erlang limit law.

For a fixed point x with q(x) > 0, the scaled l-th neighbor statistic
m * ||x - Y_(l)||^d over a sample of m draws from q converges in law to a
Gamma distribution with rate V_d * q(x) and integer shape l. The diagnostic
draws independent replicates of the statistic and runs a Kolmogorov-Smirnov
test against that Gamma law, whose CDF has the closed Erlang form
1 - sum_{s<l} (b u)^s e^{-b u} / s!.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DomainError
from .special import unit_ball_volume
from .streams import SeededStream

__all__ = ["KSReport", "erlang_cdf", "ks_statistic", "kolmogorov_pvalue",
           "diagnose_limit_law"]

_CHUNK = 256


@dataclass(frozen=True)
class KSReport:
    statistic: float
    p_value: float
    replicates: int
    rate: float
    shape: int
    seed: int


def erlang_cdf(u, rate, shape):
    """CDF of the Gamma law with the given rate and integer shape."""
    if rate <= 0:
        raise DomainError(f"rate must be positive, got {rate}")
    shape = int(shape)
    if shape < 1:
        raise DomainError(f"shape must be a positive integer, got {shape}")
    u = np.asarray(u, dtype=np.float64)
    bu = rate * np.maximum(u, 0.0)
    term = np.ones_like(bu)
    acc = np.ones_like(bu)
    for s in range(1, shape):
        term = term * bu / s
        acc += term
    out = 1.0 - acc * np.exp(-bu)
    return np.where(u > 0.0, out, 0.0)


def ks_statistic(sample, cdf):
    """Two-sided Kolmogorov-Smirnov statistic of a sample against a CDF."""
    x = np.sort(np.asarray(sample, dtype=np.float64))
    n = x.shape[0]
    f = cdf(x)
    grid = np.arange(n, dtype=np.float64)
    d_plus = np.max((grid + 1.0) / n - f)
    d_minus = np.max(f - grid / n)
    return float(max(d_plus, d_minus))


def kolmogorov_pvalue(statistic, n, terms=100):
    """Asymptotic KS p-value: the Kolmogorov series truncated after `terms`."""
    lam = math.sqrt(n) * statistic
    if lam <= 0.0:
        return 1.0
    total = 0.0
    for j in range(1, terms + 1):
        total += (-1.0) ** (j - 1) * math.exp(-2.0 * j * j * lam * lam)
    return float(min(1.0, max(0.0, 2.0 * total)))


def diagnose_limit_law(model_q, x, l, m, replicates, seed=0):
    """KS test of the scaled l-th neighbor statistic against its Gamma limit."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    d = model_q.d
    if x.shape[0] != d:
        raise DomainError(
            f"point dimension {x.shape[0]} does not match model dimension {d}"
        )
    l = int(l)
    m = int(m)
    if l < 1 or m < l:
        raise CapacityError(f"need m >= l >= 1, got m={m}, l={l}")
    if replicates < 1:
        raise DomainError(f"replicates must be >= 1, got {replicates}")
    qx = float(np.exp(model_q.logpdf(x[None, :])[0]))
    if qx <= 0.0:
        raise DomainError("q(x) = 0: the limit law is degenerate at this point")
    rate = unit_ball_volume(d) * qx

    xi = np.empty(int(replicates))
    done = 0
    chunk_id = 0
    while done < replicates:
        batch = min(_CHUNK, replicates - done)
        draws = model_q.sample(batch * m, SeededStream(seed, chunk_id))
        draws = draws.reshape(batch, m, d)
        dist = np.sqrt(np.sum((draws - x) ** 2, axis=2))
        kth = np.partition(dist, l - 1, axis=1)[:, l - 1]
        xi[done : done + batch] = m * kth**d
        done += batch
        chunk_id += 1

    stat = ks_statistic(xi, lambda u: erlang_cdf(u, rate, l))
    return KSReport(
        statistic=stat,
        p_value=kolmogorov_pvalue(stat, replicates),
        replicates=int(replicates),
        rate=rate,
        shape=l,
        seed=int(seed),
    )
