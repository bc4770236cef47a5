import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from mixbath import (BathSpec, FrequencyMode, J_decomposition, Scenario, SystemSpec, UnstableRoots,
                     eval_AB, eval_MN, reference_scenario, solve_roots)
from mixbath.kernels import check_stable, eval_A_alternate, exp_roots
from mixbath.polyroots import RootData

from conftest import reference, reference_roots

# frozen from the production residue form; the coupling-weighted form below agrees to 1e-15
A_03 = 0.5636403899468279 - 0.7853038593125248j
B_03 = -0.33210304990894923j


def decoupled(omega=2.0, gammas=(7.0,)):
    sc = Scenario(SystemSpec("bose", FrequencyMode.BARE, omega, 0.0),
                  tuple(BathSpec("bose", 0.0, g, 1.0) for g in gammas))
    return sc, solve_roots(sc)


def test_initial_values():
    k = eval_AB(reference_roots("ff1f2"), reference("ff1f2"), [0.0])
    assert abs(k.A[0] - 1.0) < 1e-10 and abs(k.B[0]) < 1e-10


def test_frozen_values_and_alternate_form():
    sc, roots = reference("ff1f2"), reference_roots("ff1f2")
    k = eval_AB(roots, sc, [0.3])
    assert k.A[0] == pytest.approx(A_03, abs=1e-13)
    assert k.B[0] == pytest.approx(B_03, abs=1e-13)
    t = np.linspace(0, 10, 101)
    np.testing.assert_allclose(eval_A_alternate(roots, sc, t), eval_AB(roots, sc, t).A, atol=1e-12)


def test_decay_at_long_times():
    k = eval_AB(reference_roots("ff1f2"), reference("ff1f2"), [50.0])
    assert abs(k.A[0]) <= 1e-6 and abs(k.B[0]) <= 1e-6


def test_decoupled_kernels():
    sc, roots = decoupled()
    t = np.linspace(0, 20, 81)
    k = eval_AB(roots, sc, t)
    np.testing.assert_allclose(k.A, np.exp(-2j * t), atol=1e-12)
    np.testing.assert_allclose(k.B, 0.0, atol=1e-12)
    np.testing.assert_allclose(np.abs(k.A), 1.0, atol=1e-12)


def test_decoupled_MN_two_node_form():
    sc, roots = decoupled(omega=2.0)
    w = np.array([0.5, 1.3, 3.7])
    t = np.linspace(0, 6, 25)
    mn = eval_MN(roots, sc, w, t)
    ew = np.exp(-1j * np.multiply.outer(w, t))
    eo = np.exp(-2j * t)[None, :]
    M = (ew - eo) / (w - 2.0)[:, None]
    N = (np.exp(2j * t)[None, :] - ew) / (w + 2.0)[:, None]
    np.testing.assert_allclose(mn.M, M, atol=1e-12)
    np.testing.assert_allclose(mn.N, N, atol=1e-12)


def test_MN_vanish_at_origin_and_reach_asymptote():
    sc, roots = reference("ff1f2"), reference_roots("ff1f2")
    w = np.array([0.1, 2.2, 4.5, 30.0])
    mn0 = eval_MN(roots, sc, w, [0.0])
    assert np.max(np.abs(mn0.M)) < 1e-10 and np.max(np.abs(mn0.N)) < 1e-10
    late = eval_MN(roots, sc, w, [60.0])
    ratio = (np.prod(sc.gammas ** 2 + w[:, None] ** 2, axis=1)
             / np.prod(np.abs(roots.roots[None, :] + 1j * w[:, None]) ** 2, axis=1))
    np.testing.assert_allclose(np.abs(late.M[:, 0]) ** 2, (sc.omega + w) ** 2 * ratio, rtol=1e-10)
    np.testing.assert_allclose(np.abs(late.N[:, 0]) ** 2, (sc.omega - w) ** 2 * ratio, rtol=1e-10,
                               atol=1e-14)


def test_J_decomposition():
    sc, roots = reference("ff1f2"), reference_roots("ff1f2")
    k = eval_AB(roots, sc, np.linspace(0, 10, 201))
    J, _ = J_decomposition(k)
    np.testing.assert_allclose(J[0], 0.0, atol=1e-15)
    np.testing.assert_allclose(J.sum(axis=1), k.B2, atol=1e-15)
    single = Scenario(SystemSpec("bose", FrequencyMode.RENORMALIZED, 1.0, 0.0),
                      (BathSpec("bose", 0.1, 10.0, 1.0),))
    k1 = eval_AB(solve_roots(single), single, np.linspace(0, 5, 11))
    J1, _ = J_decomposition(k1)
    np.testing.assert_allclose(J1[:, 0], k1.B2, rtol=1e-12, atol=1e-15)


def test_underflow_flush():
    e = exp_roots(np.array([-10.0 + 1j]), np.array([0.0, 100.0]))
    assert e[1, 0] == 0 and e[0, 0] == 1


def test_unstable_roots_rejected():
    roots = RootData(np.array([0.5 + 1j, 0.5 - 1j]), np.array([-0.5j, 0.5j]), 2.0, 1e-8)
    with pytest.raises(UnstableRoots):
        check_stable(roots)


def test_shift_scales_kernels():
    sc, roots = reference("bb1b2"), reference_roots("bb1b2")
    t = np.array([1.0, 3.0])
    plain, scaled = eval_AB(roots, sc, t), eval_AB(roots, sc, t, shift=-0.7)
    np.testing.assert_allclose(scaled.A, plain.A * np.exp(0.7 * t), rtol=1e-12)


def distinct(gammas, gap=0.05):
    g = sorted(gammas)
    return all(b - a > gap for a, b in zip(g, g[1:]))


bath = st.tuples(st.sampled_from(["fermi", "bose"]), st.floats(0.0, 0.2), st.floats(5.0, 20.0))


@settings(max_examples=40, deadline=None)
@given(Omega=st.floats(0.3, 3.0), baths=st.lists(bath, min_size=1, max_size=4),
       t=st.floats(0.05, 8.0), w=st.floats(0.0, 30.0))
def test_kernel_properties(Omega, baths, t, w):
    assume(distinct([g for _, _, g in baths]))
    sc = Scenario(SystemSpec("fermi", FrequencyMode.RENORMALIZED, Omega, 0.0),
                  tuple(BathSpec(s, a, g, 1.0) for s, a, g in baths))
    roots = solve_roots(sc)
    k0 = eval_AB(roots, sc, [0.0])
    assert abs(k0.A[0] - 1) <= 1e-10 and abs(k0.B[0]) <= 1e-10
    h = 1e-5
    k, kp, km = (eval_AB(roots, sc, [x]) for x in (t, t + h, t - h))
    for exact, plus, minus in ((k.dA_dt, kp.A, km.A), (k.dB_dt, kp.B, km.B)):
        fd = (plus - minus) / (2 * h)
        assert abs(fd[0] - exact[0]) <= 1e-6 * max(abs(exact[0]), 1e-3)
    if np.min(np.abs(roots.roots + 1j * w)) > 1e-4:
        m, mp, mm = (eval_MN(roots, sc, [w], [x]) for x in (t, t + h, t - h))
        for exact, plus, minus in ((m.dM_dt, mp.M, mm.M), (m.dN_dt, mp.N, mm.N)):
            fd = (plus - minus) / (2 * h)
            assert abs(fd[0, 0] - exact[0, 0]) <= 1e-6 * max(abs(exact[0, 0]), 1e-2)
        mz = eval_MN(roots, sc, [w], [0.0])
        assert abs(mz.M[0, 0]) <= 1e-10 * max(1.0, w ** sc.N) and abs(mz.N[0, 0]) <= 1e-10 * max(1.0, w ** sc.N)
    J, _ = J_decomposition(k)
    assert abs(J.sum() - k.B2[0]) <= 1e-14 * max(1.0, k.B2[0])
