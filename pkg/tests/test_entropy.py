import math

import numpy as np
import pytest

from marginforge.core import CapParams, check_distribution
from marginforge.entropy import (
    capped_entropy_projection,
    capped_min_linear,
    smoothed_conjugate,
)

from conftest import min_linear_over_cap, oracle_projection


def params(m, nu, eta):
    return CapParams(nu=nu, m=m, eta=eta, eps=1.0)


def test_projection_zero_theta_is_uniform():
    for nu in (1.0, 2.0, 3.5, 6.0):
        res = capped_entropy_projection(np.zeros(6), params(6, nu, 7.0))
        assert np.allclose(res.d, 1 / 6, atol=1e-12)
        assert res.objective == pytest.approx(0.0, abs=1e-12)


def test_projection_nu_equals_m_forces_uniform():
    rng = np.random.default_rng(2)
    theta = rng.uniform(-1, 1, 5)
    res = capped_entropy_projection(theta, params(5, 5.0, 40.0))
    assert np.allclose(res.d, 0.2, atol=1e-9)


def test_projection_frozen_instance():
    # oracle_projection([0.9, 0.1, -0.5], nu=1.5, eta=2) computed these
    res = capped_entropy_projection(np.array([0.9, 0.1, -0.5]), params(3, 1.5, 2.0))
    assert np.allclose(res.d, [0.055993871622, 0.277339461711, 0.666666666667], atol=1e-9)
    assert res.objective == pytest.approx(-0.099601063295, abs=1e-9)
    assert res.capped_count == 1


def test_projection_rejects_bad_theta():
    with pytest.raises(ValueError):
        capped_entropy_projection(np.array([1.0, np.inf]), params(2, 1.0, 1.0))


def test_projection_matches_subset_oracle():
    rng = np.random.default_rng(42)
    for _ in range(150):
        m = int(rng.integers(2, 7))
        nu = float(rng.choice([1.0, 1.5, 2.0, m]))
        nu = min(nu, m)
        eta = float(rng.choice([1.0, 10.0, 500.0]))
        theta = rng.uniform(-1, 1, m)
        res = capped_entropy_projection(theta, params(m, nu, eta))
        ref_d, ref_obj = oracle_projection(theta, nu, eta)
        assert np.max(np.abs(res.d - ref_d)) < 1e-6
        assert res.objective == pytest.approx(ref_obj, abs=1e-8)


def test_projection_kkt_certificate():
    rng = np.random.default_rng(9)
    for _ in range(60):
        m = int(rng.integers(2, 30))
        nu = float(rng.uniform(1.0, m))
        eta = float(rng.choice([1.0, 30.0, 800.0]))
        theta = rng.uniform(-1, 1, m)
        res = capped_entropy_projection(theta, params(m, nu, eta))
        d = check_distribution(res.d, nu)
        cap = 1.0 / nu
        capped = d >= cap * (1 - 1e-9)
        free = ~capped
        if np.any(capped) and np.any(free):
            # capped coordinates carry the smallest theta values
            assert theta[capped].max() <= theta[free].min() + 1e-12
        if np.count_nonzero(free) >= 2:
            # single normaliser Z: d_i == exp(-eta*theta_i)/Z on the free set
            # (anchored at the largest free weight so underflow compares 0 to 0)
            anchor = np.argmax(np.where(free, d, -1.0))
            log_z = -eta * theta[anchor] - math.log(d[anchor])
            reconstructed = np.exp(-eta * theta[free] - log_z)
            assert np.max(np.abs(d[free] - reconstructed)) <= 1e-8


def test_projection_monotone_in_theta():
    rng = np.random.default_rng(31)
    for _ in range(40):
        m = int(rng.integers(2, 10))
        p = params(m, float(rng.uniform(1, m)), float(rng.uniform(0.5, 50)))
        theta = rng.uniform(-1, 1, m)
        i = int(rng.integers(0, m))
        before = capped_entropy_projection(theta, p).d[i]
        theta[i] += float(rng.uniform(0.01, 0.5))
        after = capped_entropy_projection(theta, p).d[i]
        assert after <= before + 1e-12


def test_smoothed_conjugate_closed_form_at_nu_one():
    rng = np.random.default_rng(3)
    for _ in range(100):
        m = int(rng.integers(2, 12))
        eta = float(rng.choice([1.0, 10.0, 500.0]))
        theta = rng.uniform(-1, 1, m)
        p = params(m, 1.0, eta)
        expect = (np.logaddexp.reduce(eta * theta) - math.log(m)) / eta
        assert smoothed_conjugate(theta, p) == pytest.approx(expect, abs=1e-9)


def test_smoothed_conjugate_constant_theta():
    p = params(4, 2.0, 13.0)
    assert smoothed_conjugate(np.full(4, 0.37), p) == pytest.approx(0.37, abs=1e-12)


def test_smoothed_conjugate_frozen_instance():
    # -(oracle_projection objective at -theta), same instance as above
    value = smoothed_conjugate(np.array([-0.9, -0.1, 0.5]), params(3, 1.5, 2.0))
    assert value == pytest.approx(0.099601063295, abs=1e-9)


def test_conjugate_sandwich_around_support_function():
    # support function minus entropy slack <= smoothed <= support function
    rng = np.random.default_rng(8)
    for _ in range(80):
        m = int(rng.integers(2, 8))
        nu = float(rng.uniform(1.0, m))
        eta = float(rng.choice([2.0, 50.0, 700.0]))
        theta = rng.uniform(-1, 1, m)
        p = params(m, nu, eta)
        smoothed = smoothed_conjugate(theta, p)
        exact = -min_linear_over_cap(-theta, nu)  # max over the cap
        slack = math.log(m / nu) / eta
        assert exact - slack - 1e-8 <= smoothed <= exact + 1e-8


def test_capped_min_linear_examples():
    value, d = capped_min_linear(np.full(5, 0.8), 2.5)
    assert value == pytest.approx(0.8)

    value, d = capped_min_linear(np.array([0.5, -0.2, 0.3, 0.9]), 2.0)
    assert value == pytest.approx(0.05)
    assert np.allclose(d, [0.0, 0.5, 0.5, 0.0])

    value, _ = capped_min_linear(np.array([0.5, -0.2, 0.3, 0.9]), 4.0)
    assert value == pytest.approx(0.375)


def test_capped_min_linear_matches_vertex_enumeration():
    rng = np.random.default_rng(17)
    for _ in range(80):
        m = int(rng.integers(2, 7))
        nu = float(rng.choice([1.0, 1.5, 2.0, 2.5, m]))
        nu = min(nu, m)
        vec = rng.uniform(-1, 1, m)
        value, d = capped_min_linear(vec, nu)
        assert value == pytest.approx(min_linear_over_cap(vec, nu), abs=1e-10)
        check_distribution(d, nu)
        assert float(d @ vec) == pytest.approx(value, abs=1e-12)
