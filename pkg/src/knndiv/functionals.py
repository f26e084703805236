"""Monte-Carlo evaluation of the integral regularity functionals whose
finiteness drives asymptotic unbiasedness and L2-consistency of the k-NN
divergence estimator.

Four families: the gauge-weighted tail integral over pairs (K), the
maximal/minimal ball-average integrals over points (Q and T), and the plain
log-distance moment over pairs (L). All estimates are seeded and
deterministic; draws depend only on (models, budget, seed), never on the
functional's own parameters, so evaluations at different thresholds or
exponents share the identical sample (the basis for the exact pointwise
inequality checks in the tests).

Finiteness of an integral cannot be decided from a finite sample; the
verdicts emitted by ``condition_report`` are an explicitly labeled heuristic
(split-half stability of a finite estimate).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .special import g_n, iter_exp
from .streams import SeededStream, box_muller

__all__ = [
    "FunctionalParams",
    "FunctionalReport",
    "ball_mass_ratio",
    "max_min_ball_ratio",
    "k_functional",
    "q_functional",
    "t_functional",
    "l_functional",
    "condition_report",
]

DEFAULT_RADII_GRID = 64
DEFAULT_QUAD_BUDGET = 256

# substream ids for the independent draw roles
_STREAM_X = 0
_STREAM_Y = 1
_STREAM_BALL = 2


@dataclass(frozen=True)
class FunctionalParams:
    """Parameters of the regularity functionals.

    threshold defaults to e_[level], the canonical cutoff of the tail
    integral K.
    """

    nu: float = 1.0
    level: int = 1
    epsilon: float = 0.5
    radius: float = 1.0
    threshold: float | None = None

    def __post_init__(self):
        if self.nu <= 0 or self.epsilon < 0 or self.radius <= 0 or self.level < 1:
            raise DomainError(f"invalid functional parameters: {self}")
        if self.threshold is not None and self.threshold <= 0:
            raise DomainError(f"threshold must be positive, got {self.threshold}")

    @property
    def t(self):
        return iter_exp(self.level) if self.threshold is None else self.threshold


@dataclass
class FunctionalReport:
    estimate: float
    std_error: float
    count: int
    seed: int
    diverging: bool = False
    params: FunctionalParams | None = None
    half_estimates: tuple = field(default=(), repr=False)


def gauge_array(level, values):
    """Vectorized gauge function over a nonnegative array."""
    values = np.asarray(values, dtype=np.float64)
    out = np.zeros_like(values)
    mask = values > iter_exp(level - 1)
    if np.any(mask):
        inner = values[mask]
        logs = inner.copy()
        for _ in range(level):
            logs = np.log(logs)
        out[mask] = inner * logs
    return out


def _uniform_in_ball(rng, n, d):
    """n points uniform in the unit ball of dimension d."""
    z = box_muller(rng, n * d).reshape(n, d)
    norms = np.sqrt(np.sum(z * z, axis=1))
    norms[norms == 0.0] = 1.0
    radii = rng.random(n) ** (1.0 / d)
    return z * (radii / norms)[:, None]


def _pdf_values(model, pts):
    return np.exp(model.logpdf(pts))


def ball_mass_ratio(f, x, r, quad_budget=DEFAULT_QUAD_BUDGET, seed=0):
    """Average of density f over the closed ball B(x, r), by uniform-in-ball
    Monte Carlo (the integral over the ball divided by its volume)."""
    if r <= 0:
        raise DomainError(f"radius must be positive, got {r}")
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    rng = SeededStream(seed, _STREAM_BALL).generator()
    u = _uniform_in_ball(rng, int(quad_budget), x.shape[0])
    return float(np.mean(_pdf_values(f, x + r * u)))


def max_min_ball_ratio(
    f,
    x,
    R,
    radii_grid=DEFAULT_RADII_GRID,
    quad_budget=DEFAULT_QUAD_BUDGET,
    seed=0,
):
    """Sup and inf of the ball-average of f over radii in (0, R].

    The sup/inf is taken over a log-spaced radius grid. The r -> 0+ limit
    (the Lebesgue-point value of f at x) is approximated by the ball average
    at a radius far below the grid and appended to the candidate set; the
    pointwise value f(x) itself is not trusted, since at support boundaries
    it depends on the chosen version of the density.
    """
    if R <= 0:
        raise DomainError(f"radius bound must be positive, got {R}")
    if radii_grid < 2:
        raise DomainError(f"radius grid needs >= 2 points, got {radii_grid}")
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    d = x.shape[0]
    rng = SeededStream(seed, _STREAM_BALL).generator()
    u = _uniform_in_ball(rng, int(quad_budget), d)
    radii = np.append(R * 1e-6, np.geomspace(R * 1e-4, R, int(radii_grid)))
    pts = x[None, None, :] + radii[:, None, None] * u[None, :, :]
    vals = _pdf_values(f, pts.reshape(-1, d)).reshape(len(radii), -1)
    candidates = vals.mean(axis=1)
    return float(candidates.max()), float(candidates.min())


def _pair_distances(p, q, pairs, seed):
    xp = p.sample(pairs, SeededStream(seed, _STREAM_X))
    yq = q.sample(pairs, SeededStream(seed, _STREAM_Y))
    return np.sqrt(np.sum((xp - yq) ** 2, axis=1))


def _report(values, seed, params=None):
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[0]
    diverging = bool(np.any(~np.isfinite(values)))
    if diverging:
        return FunctionalReport(math.inf, math.inf, n, seed, True, params)
    est = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    half = n // 2
    halves = (
        (float(np.mean(values[:half])), float(np.mean(values[half:])))
        if half >= 1
        else ()
    )
    return FunctionalReport(est, se, n, seed, False, params, halves)


def k_functional(p, q, params, pairs, seed=0):
    """Tail integral over independent pairs: gauge of |log distance|^nu on
    the event distance > threshold."""
    if pairs < 1:
        raise DomainError(f"pairs must be >= 1, got {pairs}")
    dist = _pair_distances(p, q, int(pairs), seed)
    t = params.t
    vals = np.zeros(dist.shape[0])
    mask = dist > t
    if np.any(mask):
        vals[mask] = gauge_array(
            params.level, np.abs(np.log(dist[mask])) ** params.nu
        )
    return _report(vals, seed, params)


def _ball_extremes(p, q, params, points, seed):
    x = p.sample(int(points), SeededStream(seed, _STREAM_X))
    sup = np.empty(x.shape[0])
    inf = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        sup[i], inf[i] = max_min_ball_ratio(
            q, x[i], params.radius, seed=seed * 1_000_003 + i
        )
    return sup, inf


def q_functional(p, q, params, points, seed=0):
    """Mean over x ~ p of the supremal ball-average of q raised to epsilon."""
    if points < 1:
        raise DomainError(f"points must be >= 1, got {points}")
    sup, _ = _ball_extremes(p, q, params, points, seed)
    return _report(sup**params.epsilon, seed, params)


def t_functional(p, q, params, points, seed=0):
    """Mean over x ~ p of the infimal ball-average of q raised to -epsilon.

    A zero infimum at any sampled point means the integrand is infinite
    there (1/0 is taken as infinity); the report is flagged diverging.
    """
    if points < 1:
        raise DomainError(f"points must be >= 1, got {points}")
    _, inf = _ball_extremes(p, q, params, points, seed)
    with np.errstate(divide="ignore"):
        vals = np.where(
            inf > 0.0,
            inf ** (-params.epsilon) if params.epsilon else np.ones_like(inf),
            np.inf if params.epsilon else 1.0,
        )
    return _report(vals, seed, params)


def l_functional(p, q, nu, pairs, seed=0):
    """Moment of |log distance|^nu over independent pairs (x, y) ~ p x q."""
    if pairs < 1:
        raise DomainError(f"pairs must be >= 1, got {pairs}")
    dist = _pair_distances(p, q, int(pairs), seed)
    with np.errstate(divide="ignore"):
        logs = np.abs(np.log(dist))
    vals = logs**nu if nu else np.ones_like(logs)
    return _report(vals, seed)


def _verdict(report):
    if report.diverging or not math.isfinite(report.estimate):
        return "suspect-diverging"
    if not math.isfinite(report.std_error):
        return "suspect-diverging"
    if report.half_estimates:
        h1, h2 = report.half_estimates
        spread = abs(h1 - h2)
        scale = 4.0 * report.std_error * math.sqrt(2.0) + 1e-12
        if spread > max(scale, 0.5 * abs(report.estimate)):
            return "suspect-diverging"
    return "stable-finite"


def condition_report(p, q, params, budget, seed=0):
    """Evaluate every functional appearing in the consistency conditions.

    Returns an ordered dict name -> (FunctionalReport, verdict). Verdicts
    are heuristic: finiteness of an integral is not decidable from samples.
    """
    if budget < 1:
        raise DomainError(f"budget must be >= 1, got {budget}")
    pairs = int(budget)
    points = max(1, int(budget) // 16)  # ball extremes cost a grid per point
    entries = {}
    for tag, (a, b) in (("p,q", (p, q)), ("p,p", (p, p))):
        for nu in (1.0, 2.0):
            par = FunctionalParams(
                nu=nu,
                level=params.level,
                epsilon=params.epsilon,
                radius=params.radius,
                threshold=params.threshold,
            )
            entries[f"K[{tag}](nu={nu:g},N={params.level})"] = k_functional(
                a, b, par, pairs, seed
            )
        entries[f"Q[{tag}](eps={params.epsilon:g},R={params.radius:g})"] = q_functional(
            a, b, params, points, seed
        )
        entries[f"T[{tag}](eps={params.epsilon:g},R={params.radius:g})"] = t_functional(
            a, b, params, points, seed
        )
    entries[f"L[p,q](nu={params.nu:g})"] = l_functional(p, q, params.nu, pairs, seed)
    return {name: (rep, _verdict(rep)) for name, rep in entries.items()}
