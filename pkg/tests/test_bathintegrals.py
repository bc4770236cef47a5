import math

import mpmath
import numpy as np
import pytest

from mixbath import (BathIntegralTable, BathSpec, DomainError, FrequencyMode, I_lambda_inf,
                     I_lambda_t, QuadratureSpec, Scenario, SystemSpec, solve_roots)
from mixbath import quadrature as qd
from mixbath.bathintegrals import asymptotic_integrand, bath_occ, occ_times_w

from conftest import reference, reference_roots, reference_table

# scipy.quad on [0, inf) with breakpoints, independent of the Gauss-panel tables
I_INF = {
    "ff1f2": [0.1450461598542317, 0.0497964583447847],
    "bb1b2": [0.24318201453308588, 0.05030094120548915],
}


def test_occupations():
    assert bath_occ(1.0, 1.0, -1) == pytest.approx(1 / (math.e + 1), rel=1e-15)
    assert bath_occ(1.0, 1.0, 1) == pytest.approx(1 / (math.e - 1), rel=1e-15)
    assert bath_occ(0.0, 2.0, -1) == 0.5
    assert bath_occ(3.0, 0.0, 1) == 0.0 and bath_occ(3.0, 0.0, -1) == 0.0
    with pytest.raises(DomainError):
        bath_occ(0.0, 1.0, 1)
    assert occ_times_w(0.0, 0.7, 1) == pytest.approx(0.7)
    assert occ_times_w(1e-12, 0.7, 1) == pytest.approx(0.7, rel=1e-11)


@pytest.mark.parametrize("name", ["ff1f2", "bb1b2"])
def test_asymptotic_integrals(name):
    sc, roots = reference(name), reference_roots(name)
    quad = [I_lambda_inf(roots, sc, lam) for lam in range(sc.N)]
    np.testing.assert_allclose(quad, I_INF[name], rtol=1e-9)
    np.testing.assert_allclose(reference_table(name).I_inf, quad, rtol=1e-8)
    I, _ = reference_table(name).evaluate([0.0, 50.0])
    np.testing.assert_allclose(I[0], 0.0, atol=1e-12)
    np.testing.assert_allclose(I[1], quad, atol=1e-4)


def test_zero_coupling_gives_zero():
    sc = Scenario(SystemSpec("bose", FrequencyMode.BARE, 2.0, 0.0),
                  (BathSpec("bose", 0.0, 7.0, 1.0),))
    roots = solve_roots(sc)
    I, dI = I_lambda_t(roots, sc, 0, np.linspace(0, 5, 11))
    assert np.all(I == 0) and np.all(dI == 0)
    assert I_lambda_inf(roots, sc, 0) == 0.0


@pytest.mark.parametrize("name", ["ff1f2", "bb1b2", "fb1f2", "bf1b2"])
def test_nonnegative(name):
    t = np.linspace(0, 50, 2001)
    I, _ = reference_table(name).evaluate(t)
    assert I.min() >= -1e-12


def test_derivative_matches_finite_difference():
    table = reference_table("fb1f2")
    t = np.array([0.2, 1.5, 7.0, 31.0])
    h = 1e-5
    _, dI = table.evaluate(t)
    Ip, _ = table.evaluate(t + h)
    Im, _ = table.evaluate(t - h)
    np.testing.assert_allclose((Ip - Im) / (2 * h), dI, rtol=1e-6, atol=1e-9)


def test_tolerance_and_cutoff_stability():
    sc, roots = reference("ff1f2"), reference_roots("ff1f2")
    base = reference_table("ff1f2")
    t = np.linspace(0, 50, 201)
    I0, _ = base.evaluate(t)
    tighter = BathIntegralTable(roots, sc, 50.0, QuadratureSpec(rel_tol=5e-9))
    I1, _ = tighter.evaluate(t)
    assert np.max(np.abs(I1 - I0), axis=0).max() <= base.error_estimate.max()
    wider = BathIntegralTable(roots, sc, 50.0, QuadratureSpec(w_max=2 * base.cutoff_w))
    I2, _ = wider.evaluate(t)
    assert np.all(np.max(np.abs(I2 - I0), axis=0) <= 1e-8 * np.max(np.abs(I0), axis=0))


def test_bose_small_frequency_regular():
    sc, roots = reference("bb1b2"), reference_roots("bb1b2")
    for lam, b in enumerate(sc.baths):
        ratio0 = np.prod(sc.gammas ** 2) / np.prod(np.abs(roots.roots) ** 2)
        limit = b.alpha / np.pi * 2 * sc.omega ** 2 * b.temperature * ratio0
        value = asymptotic_integrand(roots, sc, lam, np.array(1e-12))
        assert value == pytest.approx(limit, rel=1e-6)


def test_fourier_tail_against_mpmath():
    W, order = 37.0, 6
    t = np.array([0.0, 0.01, 0.05, 0.3, 2.0, 25.0])
    F = qd.fourier_tail(W, t, order)
    assert np.isinf(F[0, 1].real)
    for i, ti in enumerate(t[1:], start=1):
        for p in range(1, order + 1):
            exact = complex(W ** (1 - p) * mpmath.expint(p, -1j * W * ti))
            assert abs(F[i, p] - exact) <= 1e-12 * max(1.0, abs(exact)) * W ** (1 - p) + 1e-300
    for p in range(2, order + 1):
        assert F[0, p] == pytest.approx(W ** (1 - p) / (p - 1))


def test_fourier_sum_matches_direct(rng):
    w = rng.uniform(0, 20, 300)
    H = rng.normal(size=(300, 2)) + 1j * rng.normal(size=(300, 2))
    for t in (np.linspace(0, 5, 1200), np.sort(rng.uniform(0, 5, 50))):
        direct = np.exp(-1j * np.multiply.outer(t, w)) @ H
        np.testing.assert_allclose(qd.fourier_sum(w, H, t), direct, atol=1e-10)


def test_gauss_panels_integrate_polynomials():
    nodes, weights = qd.gauss_nodes(np.array([0.0, 0.5, 2.0, 3.0]), 12)
    assert np.dot(weights, nodes ** 9) == pytest.approx(3.0 ** 10 / 10, rel=1e-13)


def test_series_helpers():
    a = qd.geometric(0.5, 5)
    b = qd.linear(-0.5, 5)
    np.testing.assert_allclose(qd.series_mul(a, b), [1, 0, 0, 0, 0, 0], atol=1e-15)
    np.testing.assert_array_equal(qd.shift_power(np.arange(4.0), 2), [0, 0, 0, 1])
