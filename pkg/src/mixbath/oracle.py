"""Independent reference solvers.

``volterra_solve`` integrates the memory-kernel rate equation

    dn/dt = int_0^t [W_plus(t - s) - W(t - s) n(s)] ds,   W = W_minus - e_a W_plus,

with stationary baths.  ``discrete_bath_solve`` replaces each bath by a
finite set of modes and propagates the exact linear Heisenberg dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from . import quadrature as qd
from .bathintegrals import QuadratureSpec, bath_occ, occ_times_w
from .errors import GridTooCoarse, PreconditionError, QuadratureNonConvergence, ResourceLimit
from .evolution import Method, Trajectory, uniform_step
from .scenario import Scenario

TAIL_ORDER = 14
MAX_DIMENSION = 10_000


@dataclass(frozen=True)
class MemoryKernels:
    """Rate kernels on a uniform tau grid.

    ``K1`` is the running integral of W and ``K2_plus`` the double running
    integral of W_plus; the march only needs these two, which stay finite
    although W_plus and W_minus diverge logarithmically at tau = 0.
    """

    tau: np.ndarray
    W_plus: np.ndarray
    W_minus: np.ndarray
    W: np.ndarray
    K1: np.ndarray
    K2_plus: np.ndarray
    eps_a: int
    error_estimate: float = 0.0


def _cutoff(scenario: Scenario) -> float:
    scale = max(float(scenario.gammas.max()), scenario.omega)
    return max(8.0 * scale, 40.0 * float(scenario.temperatures.max()))


def _weights(scenario: Scenario, w: np.ndarray, q: np.ndarray) -> dict:
    """Node weights multiplying cos((w - omega) tau) and cos((w + omega) tau)."""
    out = {key: np.zeros(len(w)) for key in ("plus_m", "plus_p", "minus_m", "minus_p")}
    for b in scenario.baths:
        if b.alpha == 0:
            continue
        base = q * (2.0 / np.pi) * b.alpha * b.gamma ** 2 / (b.gamma ** 2 + w ** 2)
        wn = occ_times_w(w, b.temperature, b.eps)
        emit = base * wn
        absorb = base * (w + b.eps * wn)
        out["plus_m"] += emit
        out["plus_p"] += absorb
        out["minus_m"] += absorb
        out["minus_p"] += emit
    return out


def _tail_series(scenario: Scenario, P: int) -> np.ndarray:
    rho = np.zeros(P + 1, dtype=complex)
    for b in scenario.baths:
        lor = np.zeros(P + 1)
        lor[0::2] = (-b.gamma ** 2) ** np.arange((P + 2) // 2)
        rho += (2.0 / np.pi) * b.alpha * b.gamma ** 2 * qd.shift_power(lor.astype(complex), 1)
    return rho


def _kernel_sums(scenario: Scenario, edges: np.ndarray, tau: np.ndarray, upper: float):
    omega = scenario.omega
    eps_a = scenario.eps_a
    w, q = qd.gauss_nodes(edges)
    wt = _weights(scenario, w, q)
    f_m = wt["minus_m"] - eps_a * wt["plus_m"]
    f_p = wt["minus_p"] - eps_a * wt["plus_p"]
    xm, xp = w - omega, w + omega
    cols = np.column_stack([
        wt["plus_m"], wt["plus_p"], wt["minus_m"], wt["minus_p"],
        f_m / xm, f_p / xp,
        wt["plus_m"] / xm ** 2, wt["plus_p"] / xp ** 2,
    ])
    S = qd.fourier_sum(w, cols, tau, sign=+1)
    em = np.exp(-1j * omega * tau)
    ep = np.conj(em)
    W_plus = np.real(em * S[:, 0] + ep * S[:, 1])
    W_minus = np.real(em * S[:, 2] + ep * S[:, 3])
    K1 = np.imag(em * S[:, 4] + ep * S[:, 5])
    K2 = (np.sum(cols[:, 6]) + np.sum(cols[:, 7])
          - np.real(em * S[:, 6] + ep * S[:, 7]))

    # analytic tail on [upper, inf), where bath occupations vanish
    P = TAIL_ORDER
    rho = _tail_series(scenario, P)
    F = qd.fourier_tail(upper, tau, P)
    moments = qd.power_moments(upper, P)
    gm = qd.shift_power(qd.geometric(omega, P), 1)
    gp = qd.shift_power(qd.geometric(-omega, P), 1)
    with np.errstate(invalid="ignore"):
        cos_tail = F[:, 1:] @ rho[1:]
    k1_m = qd.series_mul(rho, gm)
    k1_p = qd.series_mul(rho, gp)
    k2_m = qd.series_mul(k1_m, gm)
    k2_p = qd.series_mul(k1_p, gp)
    W_plus = W_plus + np.real(ep * cos_tail)
    W_minus = W_minus + np.real(em * cos_tail)
    K1 = K1 + np.imag(em * (F[:, 2:] @ k1_m[2:]) - eps_a * ep * (F[:, 2:] @ k1_p[2:]))
    K2 = K2 + np.real(np.sum(k2_p[2:] * moments[2:])) - np.real(ep * (F[:, 2:] @ k2_p[2:]))
    zero = tau == 0
    W_plus[zero] = np.inf
    W_minus[zero] = np.inf
    K1[zero] = 0.0
    K2[zero] = 0.0
    return W_plus, W_minus, K1, K2


def build_kernels(scenario: Scenario, tau, spec: QuadratureSpec | None = None) -> MemoryKernels:
    """Kernels on the grid ``tau`` (uniform, starting at 0)."""
    spec = spec or QuadratureSpec()
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    eps_a = scenario.eps_a
    if scenario.g0 == 0:
        z = np.zeros(len(tau))
        return MemoryKernels(tau, z, z.copy(), z.copy(), z.copy(), z.copy(), eps_a)
    upper = _cutoff(scenario)
    t_span = max(float(tau.max()), 1e-3)
    base = min(2.0 * np.pi / t_span, 0.5 * min(float(scenario.gammas.min()), scenario.omega))
    feats = [(0.0, T) for T in scenario.temperatures if T > 0]
    edges = qd.panel_edges(upper, base, feats, fixed=[scenario.omega])
    probes = np.linspace(0.0, t_span, 9)[1:]
    while True:
        fine_edges = qd.halve(edges)
        if len(fine_edges) - 1 > spec.max_subdivisions:
            raise QuadratureNonConvergence("memory kernels need too many panels")
        c = _kernel_sums(scenario, edges, probes, upper)
        f = _kernel_sums(scenario, fine_edges, probes, upper)
        err = max(np.max(np.abs(c[2] - f[2])), np.max(np.abs(c[3] - f[3])))
        scale = max(np.max(np.abs(f[2])), np.max(np.abs(f[3])))
        if err <= spec.rel_tol * scale + spec.abs_tol:
            break
        edges = fine_edges
    W_plus, W_minus, K1, K2 = _kernel_sums(scenario, fine_edges, tau, upper)
    with np.errstate(invalid="ignore"):
        W = W_minus - eps_a * W_plus
    W[tau == 0] = np.inf
    return MemoryKernels(tau, W_plus, W_minus, W, K1, K2, eps_a, float(err))


def _volterra_march(K1: np.ndarray, K2: np.ndarray, h: float, n0: float) -> np.ndarray:
    """Trapezoid history sum for n(t) = n0 + K2(t) - int_0^t K1(t - s) n(s) ds."""
    m_total = len(K1)
    n = np.empty(m_total)
    n[0] = n0
    for m in range(1, m_total):
        hist = 0.5 * K1[m] * n[0]
        if m > 1:
            hist += np.dot(K1[m - 1:0:-1], n[1:m])
        n[m] = n0 + K2[m] - h * hist
    return n


def volterra_solve(kernels: MemoryKernels, n0: float, times=None,
                   grid_tol: float = 1e-3, scenario_hash: str = "") -> Trajectory:
    """Second-order march of the integrated rate equation on the kernel grid."""
    times = kernels.tau if times is None else np.asarray(times, dtype=float)
    if len(times) != len(kernels.tau) or np.any(times != kernels.tau):
        raise PreconditionError("kernels must be sampled on the trajectory grid")
    h = uniform_step(times)
    n = _volterra_march(kernels.K1, kernels.K2_plus, h, n0)
    coarse = _volterra_march(kernels.K1[::2], kernels.K2_plus[::2], 2.0 * h, n0)
    change = float(np.max(np.abs(n[::2] - coarse)))
    if not change <= grid_tol:
        raise GridTooCoarse(f"step-halving change {change:.2e} exceeds {grid_tol:.1e}")
    return Trajectory(times, n, Method.VOLTERRA, scenario_hash,
                      np.zeros(len(times), dtype=bool),
                      {"step_halving_change": change,
                       "kernel_error_estimate": kernels.error_estimate})


def evolve_volterra(scenario: Scenario, times, spec: QuadratureSpec | None = None,
                    grid_tol: float = 1e-3) -> Trajectory:
    times = np.asarray(times, dtype=float)
    uniform_step(times)
    kernels = build_kernels(scenario, times, spec)
    return volterra_solve(kernels, scenario.n0, times, grid_tol, scenario.digest)


@dataclass(frozen=True)
class DiscreteBath:
    frequencies: np.ndarray
    couplings: np.ndarray
    occupations: np.ndarray
    signs: np.ndarray

    @property
    def spectral_sum(self) -> float:
        """sum_i alpha_i^2 / w_i; equals sum_l alpha_l gamma_l / 2 in the continuum."""
        return float(np.sum(self.couplings ** 2 / self.frequencies))


def sample_modes(scenario: Scenario, modes: int) -> DiscreteBath:
    """Modes at the equal-weight quantiles of the Lorentzian g/(g^2 + w^2).

    With w = g tan(theta) and theta on a midpoint grid of (0, pi/2), each mode
    carries the same share of the Lorentzian measure and the squared coupling
    absorbs the remaining factor of w.
    """
    if modes < 1:
        raise ValueError("modes must be positive")
    dtheta = 0.5 * np.pi / modes
    theta = (np.arange(modes) + 0.5) * dtheta
    ws, cs, occ, sg = [], [], [], []
    for b in scenario.baths:
        w = b.gamma * np.tan(theta)
        ws.append(w)
        cs.append(np.sqrt(b.alpha * b.gamma ** 2 / np.pi * np.tan(theta) * dtheta))
        occ.append(bath_occ(w, b.temperature, b.eps) * np.ones(modes))
        sg.append(np.full(modes, b.eps))
    return DiscreteBath(np.concatenate(ws), np.concatenate(cs),
                        np.concatenate(occ), np.concatenate(sg))


def heisenberg_matrix(omega: float, bath: DiscreteBath) -> np.ndarray:
    """Generator K of d/dt x = K x for x = (a, c_i, a^dag, c_i^dag)."""
    w, g = bath.frequencies, bath.couplings
    m = len(w) + 1
    K = np.zeros((2 * m, 2 * m), dtype=complex)
    idx = np.arange(1, m)
    K[0, 0] = -1j * omega
    K[m, m] = 1j * omega
    K[idx, idx] = -1j * w
    K[m + idx, m + idx] = 1j * w
    for row, sign in ((0, -1j), (m, 1j)):
        K[row, idx] = sign * g
        K[row, m + idx] = sign * g
    for off, sign in ((0, -1j), (m, 1j)):
        K[off + idx, 0] = sign * g
        K[off + idx, m] = sign * g
    return K


def discrete_bath_solve(scenario: Scenario, modes: int = 400, times=None) -> Trajectory:
    """Exact occupation for a discretized bath, pure statistics only."""
    if not scenario.is_pure:
        raise PreconditionError("discrete-bath oracle requires pure statistics")
    times = np.asarray(times, dtype=float)
    h = uniform_step(times)
    dim = 2 * (1 + modes * scenario.N)
    if dim > MAX_DIMENSION:
        raise ResourceLimit(f"matrix dimension {dim} exceeds {MAX_DIMENSION}")
    bath = sample_modes(scenario, modes)
    K = heisenberg_matrix(scenario.omega, bath)
    step = expm(K * h)
    eps_a, n0 = scenario.eps_a, scenario.n0
    occ = np.concatenate([[n0], bath.occupations, [1.0 + eps_a * n0],
                          1.0 + bath.signs * bath.occupations])
    row = np.zeros(dim, dtype=complex)
    row[0] = 1.0
    n = np.empty(len(times))
    for i in range(len(times)):
        n[i] = np.dot(np.abs(row) ** 2, occ)
        row = row @ step
    n[0] = n0
    return Trajectory(times, n, Method.DISCRETE, scenario.digest,
                      np.zeros(len(times), dtype=bool),
                      {"modes": modes, "dimension": dim, "spectral_sum": bath.spectral_sum})
