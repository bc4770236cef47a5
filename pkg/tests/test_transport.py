import numpy as np
import pytest

from mixbath import (BathSpec, FrequencyMode, Scenario, SystemSpec, asymptotics, mixed_transport,
                     reference_scenario, solve_roots)
from mixbath.kernels import KernelSample
from mixbath.transport import friction_pure

from conftest import reference, reference_roots, reference_table

# frozen at t = 5 from the closed-form kernels and Gauss-panel tables
LAMBDA_5 = {"ff1f2": 0.7414963781655709, "bb1b2": 0.16907606813679601}
D_5 = {"ff1f2": 0.14540165903280594, "bb1b2": 0.05022795743601407}


def transport(name, t):
    return mixed_transport(reference(name), np.asarray(t, dtype=float), reference_roots(name),
                           reference_table(name))


@pytest.mark.parametrize("name", ["ff1f2", "bb1b2", "fb1f2", "bf1b2"])
def test_vanish_at_origin_and_real(name):
    ts = transport(name, np.linspace(0, 50, 501))
    assert abs(ts.lam[0]) <= 1e-9 and abs(ts.D[0]) <= 1e-9
    np.testing.assert_allclose(ts.D_partials[0], 0.0, atol=1e-9)
    for arr in (ts.lam, ts.D, ts.D_partials, ts.lambda_pure):
        assert np.isrealobj(arr) and np.all(np.isfinite(arr))
    assert not ts.flags.any()


@pytest.mark.parametrize("name", ["ff1f2", "bb1b2"])
def test_frozen_values(name):
    ts = transport(name, [5.0])
    assert ts.lam[0] == pytest.approx(LAMBDA_5[name], rel=1e-9)
    assert ts.D[0] == pytest.approx(D_5[name], rel=1e-7)


def test_zero_coupling():
    sc = Scenario(SystemSpec("fermi", FrequencyMode.BARE, 2.0, 0.0),
                  (BathSpec("fermi", 0.0, 7.0, 1.0),))
    ts = mixed_transport(sc, np.linspace(0, 10, 21))
    np.testing.assert_allclose(ts.lam, 0.0, atol=1e-12)
    np.testing.assert_allclose(ts.D, 0.0, atol=1e-12)


@pytest.mark.parametrize("name,column", [("ff1f2", 0), ("bb1b2", 1)])
def test_pure_limit_is_structural(name, column):
    ts = transport(name, np.linspace(0, 20, 201))
    assert np.array_equal(ts.lam, ts.lambda_pure[:, column])
    assert np.array_equal(ts.D, ts.D_partials.sum(axis=1))


@pytest.mark.parametrize("name", ["ff1f2", "bb1b2"])
def test_fluctuation_dissipation_at_late_time(name):
    ts = transport(name, [50.0])
    total = reference_table(name).I_inf.sum()
    assert abs(ts.ratio[0] - total) <= 1e-3 * total


def test_single_bose_bath_ratio():
    sc = Scenario(SystemSpec("bose", FrequencyMode.RENORMALIZED, 1.0, 0.0),
                  (BathSpec("bose", 0.1, 10.0, 1.0),))
    roots = solve_roots(sc)
    ts = mixed_transport(sc, np.array([50.0]), roots)
    assert abs(ts.ratio[0] - asymptotics(sc, roots).I_inf[0]) <= 1e-4


@pytest.mark.parametrize("name", ["fb1f2", "bf1b2"])
def test_mixed_combination(name):
    sc = reference(name)
    ts = transport(name, np.linspace(0, 20, 101))
    eps_a = sc.eps_a
    lam_a = ts.lambda_pure[:, 1 if eps_a == 1 else 0]
    lam_o = ts.lambda_pure[:, 0 if eps_a == 1 else 1]
    no = sc.n_opposite
    expected = sc.p * lam_o + (1 - sc.p) * lam_a - 2 * eps_a * ts.D_partials[:, :no].sum(axis=1)
    np.testing.assert_allclose(ts.lam, expected, rtol=1e-13, atol=1e-15)


def test_all_opposite_baths():
    sc = reference_scenario("fermi", ("bose", "bose"))
    assert sc.p == 1.0
    ts = mixed_transport(sc, np.linspace(0, 10, 51))
    expected = ts.lambda_pure[:, 1] + 2 * ts.D_partials.sum(axis=1)
    np.testing.assert_allclose(ts.lam, expected, rtol=1e-13, atol=1e-15)


def test_denominator_floor_flags():
    one = np.ones(3, dtype=complex)
    sample = KernelSample(t=np.arange(3.0), A=one, B=one.copy(),
                          B_components=one[:, None], dA_dt=0.1 * one, dB_dt=0.2 * one,
                          dB_components_dt=0.2 * one[:, None])
    lam, flagged = friction_pure(sample, -1)
    assert flagged.all() and np.isnan(lam).all()
    lam_b, flagged_b = friction_pure(sample, 1)
    assert not flagged_b.any() and np.allclose(lam_b, -0.5 * (0.2 + 0.4) / 2)
