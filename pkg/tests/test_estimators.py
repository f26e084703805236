import math

import numpy as np
import pytest

from knndiv import knn
from knndiv.errors import CapacityError, DegenerateSampleError
from knndiv.estimators import (
    OrderSpec,
    entropy_estimate,
    kl_estimate,
    kl_estimate_equal_orders,
)
from knndiv.special import EULER_GAMMA, digamma, unit_ball_volume
from knndiv.streams import SeededStream
from knndiv.models import Gaussian


X2 = np.array([[0.0], [1.0]])
Y1 = np.array([[0.5]])


def brute_kl(x, y, k, l):
    """Direct evaluation of the divergence formula from full-sort radii."""
    x, y = np.atleast_2d(x), np.atleast_2d(y)
    n, d = x.shape
    m = y.shape[0]
    total = 0.0
    for i in range(n):
        r = math.sqrt(knn.brute_neighbors(x, x[i], k, i)[0][k - 1])
        v = math.sqrt(knn.brute_neighbors(y, x[i], l)[0][l - 1])
        total += math.log(m * v**d / ((n - 1) * r**d))
    return digamma(k) - digamma(l) + total / n


def brute_entropy(x, k):
    x = np.atleast_2d(x)
    n, d = x.shape
    vd = unit_ball_volume(d)
    total = 0.0
    for i in range(n):
        r = math.sqrt(knn.brute_neighbors(x, x[i], k, i)[0][k - 1])
        total += math.log(r**d * vd * (n - 1) / math.exp(digamma(k)))
    return total / n


class TestHandExamples:
    def test_kl_two_point(self):
        report = kl_estimate(X2, Y1, OrderSpec.uniform(1, 1))
        assert report.value == pytest.approx(math.log(0.5), abs=1e-9)
        assert (report.n, report.m) == (2, 1)

    def test_kl_shifted_copy_brute_force(self):
        x = np.array([[0.0], [1.0]])
        y = x + 1e6
        report = kl_estimate(x, y, OrderSpec.uniform(1, 1))
        assert report.value == pytest.approx(brute_kl(x, y, 1, 1), abs=1e-12)

    def test_per_sample_constant_matches_uniform(self):
        report = kl_estimate(X2, Y1, OrderSpec.per_sample([1, 1], [1, 1]))
        assert report.value == pytest.approx(math.log(0.5), abs=1e-9)

    def test_entropy_two_point(self):
        report = entropy_estimate(X2, OrderSpec.uniform(1))
        assert report.value == pytest.approx(math.log(2.0) + EULER_GAMMA, abs=1e-9)

    def test_entropy_three_point_brute_force(self):
        x = np.array([[0.0], [1.0], [2.0]])
        report = entropy_estimate(x, OrderSpec.uniform(1))
        assert report.value == pytest.approx(brute_entropy(x, 1), abs=1e-12)

    def test_equal_orders_form(self):
        report = kl_estimate_equal_orders(X2, Y1, 1)
        assert report.value == pytest.approx(math.log(0.5), abs=1e-9)


class TestModeEquivalence:
    def test_random_inputs(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            n, m = int(rng.integers(6, 40)), int(rng.integers(4, 40))
            d = int(rng.integers(1, 4))
            x, y = rng.normal(size=(n, d)), rng.normal(size=(m, d))
            k = int(rng.integers(1, min(4, n - 1) + 1))
            l = int(rng.integers(1, min(4, m) + 1))
            uni = kl_estimate(x, y, OrderSpec.uniform(k, l)).value
            per = kl_estimate(
                x, y, OrderSpec.per_sample([k] * n, [l] * n)
            ).value
            eq = kl_estimate_equal_orders(x, y, k).value if k == l else None
            assert per == pytest.approx(uni, abs=1e-12)
            if eq is not None:
                assert eq == pytest.approx(uni, abs=1e-12)
            ent_u = entropy_estimate(x, OrderSpec.uniform(k)).value
            ent_p = entropy_estimate(x, OrderSpec.per_sample([k] * n)).value
            assert ent_p == pytest.approx(ent_u, abs=1e-12)

    def test_matches_brute_oracle(self):
        rng = np.random.default_rng(17)
        x, y = rng.normal(size=(15, 2)), rng.normal(size=(12, 2))
        assert kl_estimate(x, y, OrderSpec.uniform(2, 3)).value == pytest.approx(
            brute_kl(x, y, 2, 3), abs=1e-12
        )

    def test_report_recombination(self):
        rng = np.random.default_rng(8)
        x, y = rng.normal(size=(20, 2)), rng.normal(size=(18, 2))
        rep = kl_estimate(x, y, OrderSpec.uniform(2, 1))
        recombined = digamma(2) - digamma(1) + np.sum(rep.per_point_terms) / rep.n
        assert rep.value == pytest.approx(recombined, abs=1e-12)


class TestInvariances:
    def test_rigid_motion(self):
        rng = np.random.default_rng(23)
        x, y = rng.normal(size=(60, 3)), rng.normal(size=(50, 3))
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        shift = rng.normal(size=3)
        base = kl_estimate(x, y, OrderSpec.uniform(2, 2)).value
        moved = kl_estimate(x @ q.T + shift, y @ q.T + shift,
                            OrderSpec.uniform(2, 2)).value
        assert moved == pytest.approx(base, abs=1e-9)

    def test_entropy_scaling_law(self):
        rng = np.random.default_rng(29)
        x = rng.normal(size=(80, 2))
        c = 3.7
        base = entropy_estimate(x, OrderSpec.uniform(1)).value
        scaled = entropy_estimate(c * x, OrderSpec.uniform(1)).value
        assert scaled - base == pytest.approx(2 * math.log(c), abs=1e-9)

    def test_kl_scaling_cancellation(self):
        rng = np.random.default_rng(37)
        x, y = rng.normal(size=(40, 2)), rng.normal(size=(35, 2))
        c = 0.21
        base = kl_estimate(x, y, OrderSpec.uniform(1, 1)).value
        scaled = kl_estimate(c * x, c * y, OrderSpec.uniform(1, 1)).value
        assert scaled == pytest.approx(base, abs=1e-9)

    def test_same_law_near_zero(self):
        model = Gaussian([0.0], [[1.0]])
        x = model.sample(5000, SeededStream(101, 0))
        y = model.sample(5000, SeededStream(101, 1))
        value = kl_estimate_equal_orders(x, y, 1).value
        assert abs(value) <= 0.1


class TestErrors:
    def test_capacity(self):
        with pytest.raises(CapacityError):
            kl_estimate(X2, Y1, OrderSpec.uniform(2, 1))  # k > n-1
        with pytest.raises(CapacityError):
            kl_estimate(X2, Y1, OrderSpec.uniform(1, 2))  # l > m
        with pytest.raises(CapacityError):
            kl_estimate_equal_orders(X2, Y1, 2)
        with pytest.raises(CapacityError):
            entropy_estimate(X2, OrderSpec.uniform(2))

    def test_degenerate_duplicates_report_indices(self):
        x = np.array([[0.0], [0.0], [5.0]])
        with pytest.raises(DegenerateSampleError) as err:
            entropy_estimate(x, OrderSpec.uniform(1))
        assert set(err.value.indices) == {0, 1}
        y = np.array([[0.0], [9.0]])
        with pytest.raises(DegenerateSampleError):
            kl_estimate(x, y, OrderSpec.uniform(1, 1))

    def test_order_list_length_checked(self):
        with pytest.raises(CapacityError):
            kl_estimate(X2, Y1, OrderSpec.per_sample([1], [1]))
