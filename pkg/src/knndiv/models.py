"""Analytic density families: sampling, pdf evaluation, closed-form
divergence/entropy, and an independent Monte-Carlo divergence oracle.

Two families are supported, Gaussian and axis-aligned uniform box. Gaussian
sampling goes through the Cholesky factor of the covariance applied to
Box-Muller normals, so draws are reproducible bit-exactly per stream.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ModelParseError
from .streams import SeededStream, box_muller

__all__ = [
    "Gaussian",
    "UniformBox",
    "OracleEstimate",
    "kl_closed_form",
    "entropy_closed_form",
    "kl_numeric_oracle",
    "parse_model",
]


class Gaussian:
    family = "gauss"

    def __init__(self, mu, cov):
        self.mu = np.atleast_1d(np.asarray(mu, dtype=np.float64))
        cov = np.atleast_2d(np.asarray(cov, dtype=np.float64))
        self.d = self.mu.shape[0]
        if cov.shape != (self.d, self.d):
            raise DomainError(
                f"covariance shape {cov.shape} does not match dimension {self.d}"
            )
        if not np.allclose(cov, cov.T):
            raise DomainError("covariance must be symmetric")
        try:
            self.chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise DomainError("covariance must be positive definite") from None
        self.cov = cov
        # log det via the Cholesky diagonal: stable for ill-conditioned cov
        self.log_det = 2.0 * float(np.sum(np.log(np.diag(self.chol))))

    def sample(self, n, stream: SeededStream):
        if n < 1:
            raise DomainError(f"sample size must be >= 1, got {n}")
        z = box_muller(stream.generator(), n * self.d).reshape(n, self.d)
        return self.mu + z @ self.chol.T

    def logpdf(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.d:
            raise DomainError(
                f"point dimension {x.shape[1]} does not match model dimension {self.d}"
            )
        z = np.linalg.solve(self.chol, (x - self.mu).T)
        quad = np.sum(z * z, axis=0)
        return -0.5 * (self.d * math.log(2.0 * math.pi) + self.log_det + quad)

    def pdf(self, x):
        out = np.exp(self.logpdf(x))
        return out if out.size > 1 else float(out[0])

    def __repr__(self):
        return f"Gaussian(mu={self.mu.tolist()}, cov={self.cov.tolist()})"


class UniformBox:
    family = "uniform"

    def __init__(self, a, b):
        self.a = np.atleast_1d(np.asarray(a, dtype=np.float64))
        self.b = np.atleast_1d(np.asarray(b, dtype=np.float64))
        if self.a.shape != self.b.shape:
            raise DomainError("box bounds must have equal dimension")
        if not np.all(self.a < self.b):
            raise DomainError("box requires a < b componentwise")
        self.d = self.a.shape[0]
        self.log_volume = float(np.sum(np.log(self.b - self.a)))

    def sample(self, n, stream: SeededStream):
        if n < 1:
            raise DomainError(f"sample size must be >= 1, got {n}")
        u = stream.generator().random((n, self.d))
        return self.a + u * (self.b - self.a)

    def logpdf(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.d:
            raise DomainError(
                f"point dimension {x.shape[1]} does not match model dimension {self.d}"
            )
        inside = np.all((x >= self.a) & (x <= self.b), axis=1)
        out = np.where(inside, -self.log_volume, -np.inf)
        return out

    def pdf(self, x):
        out = np.exp(self.logpdf(x))
        return out if out.size > 1 else float(out[0])

    def __repr__(self):
        return f"UniformBox(a={self.a.tolist()}, b={self.b.tolist()})"


def kl_closed_form(px, qy):
    """Closed-form KL divergence between two Gaussians of equal dimension."""
    if not (isinstance(px, Gaussian) and isinstance(qy, Gaussian)):
        raise DomainError(
            "closed-form divergence is only available for a Gaussian pair"
        )
    if px.d != qy.d:
        raise DomainError(f"dimension mismatch: {px.d} vs {qy.d}")
    if np.array_equal(px.mu, qy.mu) and np.array_equal(px.cov, qy.cov):
        return 0.0
    d = px.d
    # tr(S_y^{-1} S_x) and the quadratic form via the Cholesky factor of S_y
    a = np.linalg.solve(qy.chol, px.chol)
    trace = float(np.sum(a * a))
    z = np.linalg.solve(qy.chol, qy.mu - px.mu)
    quad = float(z @ z)
    return 0.5 * (trace + quad - d + qy.log_det - px.log_det)


def entropy_closed_form(model):
    """Differential entropy: Gaussian d/2*log(2*pi*e) + logdet/2, box log-volume."""
    if isinstance(model, Gaussian):
        return 0.5 * model.d * math.log(2.0 * math.pi * math.e) + 0.5 * model.log_det
    if isinstance(model, UniformBox):
        return model.log_volume
    raise DomainError(f"unsupported model {model!r}")


@dataclass(frozen=True)
class OracleEstimate:
    value: float
    std_error: float
    infinite: bool = False


def kl_numeric_oracle(px, qy, budget, stream: SeededStream):
    """Independent Monte-Carlo divergence estimate: mean of log(p/q) over x ~ p.

    A draw with q(x) = 0 means absolute continuity fails on the evidence of
    the sample; the result is then flagged infinite.
    """
    if budget < 1:
        raise DomainError(f"budget must be >= 1, got {budget}")
    x = px.sample(budget, stream)
    vals = px.logpdf(x) - qy.logpdf(x)
    if np.any(np.isinf(vals)):
        return OracleEstimate(math.inf, math.inf, infinite=True)
    mean = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(budget)) if budget > 1 else math.inf
    return OracleEstimate(mean, se)


def _parse_floats(text, offset, what):
    parts = text.split(",")
    out = []
    for p in parts:
        try:
            out.append(float(p))
        except ValueError:
            raise ModelParseError(f"bad number {p!r} in {what}", offset) from None
    return out


def parse_model(spec):
    """Parse the model mini-language.

    Examples: ``gauss:d=2;mu=0,0;cov=1,0,0,1`` (row-major covariance) and
    ``uniform:d=1;a=0;b=1``. Whitespace is ignored everywhere.
    """
    original = spec
    spec = "".join(spec.split())
    if ":" not in spec:
        raise ModelParseError("expected 'family:fields'", 0)
    family, _, rest = spec.partition(":")
    fields = {}
    offset = len(family) + 1
    for item in rest.split(";"):
        if not item:
            offset += 1
            continue
        if "=" not in item:
            raise ModelParseError(f"expected key=value, got {item!r}", offset)
        key, _, value = item.partition("=")
        if key in fields:
            raise ModelParseError(f"duplicate field {key!r}", offset)
        fields[key] = (value, offset)
        offset += len(item) + 1

    def take(key):
        if key not in fields:
            raise ModelParseError(f"missing field {key!r}", len(original))
        return fields.pop(key)

    if family == "gauss":
        d_text, d_off = take("d")
        try:
            d = int(d_text)
        except ValueError:
            raise ModelParseError(f"bad dimension {d_text!r}", d_off) from None
        mu_text, mu_off = take("mu")
        cov_text, cov_off = take("cov")
        if fields:
            key = next(iter(fields))
            raise ModelParseError(f"unknown field {key!r}", fields[key][1])
        mu = _parse_floats(mu_text, mu_off, "mu")
        cov = _parse_floats(cov_text, cov_off, "cov")
        if len(mu) != d:
            raise ModelParseError(f"mu has {len(mu)} entries, expected {d}", mu_off)
        if len(cov) != d * d:
            raise ModelParseError(
                f"cov has {len(cov)} entries, expected {d * d}", cov_off
            )
        try:
            return Gaussian(mu, np.array(cov).reshape(d, d))
        except DomainError as exc:
            raise ModelParseError(str(exc), cov_off) from None
    if family == "uniform":
        d_text, d_off = take("d")
        try:
            d = int(d_text)
        except ValueError:
            raise ModelParseError(f"bad dimension {d_text!r}", d_off) from None
        a_text, a_off = take("a")
        b_text, b_off = take("b")
        if fields:
            key = next(iter(fields))
            raise ModelParseError(f"unknown field {key!r}", fields[key][1])
        a = _parse_floats(a_text, a_off, "a")
        b = _parse_floats(b_text, b_off, "b")
        if len(a) != d or len(b) != d:
            raise ModelParseError(
                f"bounds have {len(a)}/{len(b)} entries, expected {d}", a_off
            )
        try:
            return UniformBox(a, b)
        except DomainError as exc:
            raise ModelParseError(str(exc), a_off) from None
    raise ModelParseError(f"unknown family {family!r}", 0)
