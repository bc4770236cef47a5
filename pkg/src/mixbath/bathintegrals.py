"""Bath occupations and the frequency integrals I_l(t) and I_l(inf).

With the spectral weight rho_l(w) = (a_l g_l^2 / pi) w / (g_l^2 + w^2),

    I_l(t)   = int rho_l(w) [n_l |M(w,t)|^2 + (1 + e_l n_l) |N(w,t)|^2] dw,
    I_l(inf) = int rho_l(w) [(w0 + w)^2 n_l + (w0 - w)^2 (1 + e_l n_l)] R(w) dw,

where R(w) = prod_mu (g_mu^2 + w^2) / prod_k |s_k + i w|^2.

Because M and N are exponential sums over the node set {-i w, s_k}, the
time dependence of I_l(t) separates into

    I_l(inf) + sum_jk C_jk exp((s_j + conj s_k) t)
             + 2 Re sum_k exp(conj s_k t) G_k(t),

with G_k(t) a Fourier sum over quadrature nodes.  The whole time grid is
then evaluated with a handful of matrix products.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import quadrature as qd
from .errors import DomainError, QuadratureNonConvergence
from .kernels import check_stable, exp_roots, mn_node_amplitudes
from .polyroots import RootData
from .scenario import Scenario

TAIL_ORDER = 14
SERIES_MARGIN = 8.0
THERMAL_MARGIN = 40.0


def bath_occ(w, T: float, eps: int):
    """Equilibrium occupation 1 / (exp(w/T) - eps) at zero chemical potential."""
    w = np.asarray(w, dtype=float)
    if T == 0:
        return np.zeros_like(w)[()]
    if eps == 1 and np.any(w == 0):
        raise DomainError("Bose occupation has a pole at w = 0; use occ_times_w")
    with np.errstate(over="ignore"):
        x = w / T
        if eps == 1:
            out = 1.0 / np.expm1(x)
        else:
            out = 1.0 / (np.exp(x) + 1.0)
    return out[()]


def occ_times_w(w, T: float, eps: int):
    """w * n(w), regular at w = 0 for both statistics."""
    w = np.asarray(w, dtype=float)
    if T == 0:
        return np.zeros_like(w)[()]
    with np.errstate(over="ignore", invalid="ignore"):
        x = w / T
        if eps == 1:
            out = np.where(x > 0, w / np.expm1(np.where(x > 0, x, 1.0)), T)
        else:
            out = w / (np.exp(x) + 1.0)
    return np.where(np.isfinite(out), out, 0.0)[()]


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    w_max: float | None = None
    max_subdivisions: int = 100_000
    order: int = qd.GL_ORDER

    def __post_init__(self):
        if not 0 < self.rel_tol <= 1e-3:
            raise ValueError("rel_tol must lie in (0, 1e-3]")
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be positive")

    def cutoff(self, scenario: Scenario, roots: RootData) -> float:
        """Split point between Gauss panels and the analytic tail."""
        scale = max(float(np.max(np.abs(roots.roots))), float(scenario.gammas.max()),
                    scenario.omega)
        auto = max(SERIES_MARGIN * scale, THERMAL_MARGIN * float(scenario.temperatures.max()))
        if self.w_max is None:
            return auto
        floor = max(float(scenario.gammas.max()), scenario.omega,
                    float(scenario.temperatures.max()))
        if not self.w_max > floor:
            raise ValueError("w_max must exceed every gamma, omega and temperature")
        return max(self.w_max, auto)


def _features(scenario: Scenario, roots: RootData) -> list:
    feats = []
    for s in roots.roots:
        if s.imag > 0:
            feats.append((s.imag, max(-s.real, 1e-12)))
        elif s.imag == 0:
            feats.append((0.0, max(-s.real, 1e-12)))
    for T in scenario.temperatures:
        if T > 0:
            feats.append((0.0, T))
    return feats


@dataclass
class _Tables:
    nodes: np.ndarray
    I_inf: np.ndarray  # (N,)
    C: np.ndarray  # (N, N0, N0)
    H: np.ndarray  # (nodes, N * N0)
    tail_H: np.ndarray  # (N, N0, P + 1) series coefficients
    tail_inf: np.ndarray
    tail_C: np.ndarray


@dataclass
class BathIntegralTable:
    """Precomputed quadrature for I_l(t) and dI_l/dt on times up to ``t_max``."""

    roots: RootData
    scenario: Scenario
    t_max: float
    spec: QuadratureSpec = field(default_factory=QuadratureSpec)

    def __post_init__(self):
        check_stable(self.roots)
        sc = self.scenario
        self.active = np.flatnonzero(sc.alphas > 0)
        self.cutoff_w = self.spec.cutoff(sc, self.roots)
        max_re = self.roots.max_real
        t_cut = np.log(1e17) / -max_re if max_re < 0 else np.inf
        self.t_resolve = max(min(self.t_max, t_cut), 1e-3)
        narrow = min(float(sc.gammas.min()), sc.omega)
        base = min(2.0 * np.pi / self.t_resolve, 0.5 * narrow)
        edges = qd.panel_edges(self.cutoff_w, base, _features(sc, self.roots), fixed=[sc.omega])
        self.error_estimate = np.zeros(sc.N)
        if len(self.active) == 0:
            self.edges = edges
            self._tables = None
            return
        probes = np.unique(np.concatenate([np.linspace(0.0, self.t_resolve, 7)[1:],
                                           [min(self.t_max, 2.0 * self.t_resolve)]]))
        while True:
            fine_edges = qd.halve(edges)
            if len(fine_edges) - 1 > self.spec.max_subdivisions:
                raise QuadratureNonConvergence(
                    f"bath integrals need more than {self.spec.max_subdivisions} panels")
            coarse = self._build(edges)
            fine = self._build(fine_edges)
            Ic, _ = self._evaluate(coarse, probes)
            If, _ = self._evaluate(fine, probes)
            err = np.max(np.abs(Ic - If), axis=0)
            err = np.maximum(err, np.abs(coarse.I_inf - fine.I_inf))
            err = np.maximum(err, self._tail_truncation(fine))
            scale = np.maximum(np.max(np.abs(If), axis=0), np.abs(fine.I_inf))
            if np.all(err <= self.spec.rel_tol * scale + self.spec.abs_tol):
                break
            edges = fine_edges
        self.edges = fine_edges
        self._tables = fine
        self.error_estimate = err

    @property
    def n_nodes(self) -> int:
        return (len(self.edges) - 1) * self.spec.order

    @property
    def I_inf(self) -> np.ndarray:
        if self._tables is None:
            return np.zeros(self.scenario.N)
        return self._tables.I_inf.copy()

    def _tail_series(self, P: int):
        """Series coefficients of the integrand pieces on [W, inf)."""
        sc, r = self.scenario, self.roots
        s, xi = r.roots, r.reduced_residues
        g = sc.gammas
        omega = sc.omega
        N0 = len(s)
        prod_all = np.prod(s[:, None] + g[None, :], axis=1)
        S0 = qd.linear(-omega, P)
        for sk in s:
            S0 = qd.series_mul(S0, qd.geometric(1j * sk, P))
        for gm in g:
            S0 = qd.series_mul(S0, qd.linear(1j * gm, P))
        n0 = -qd.shift_power(S0, 1)
        nk = np.empty((N0, P + 1), dtype=complex)
        for k in range(N0):
            nk[k] = xi[k] * (1j * s[k] - omega) * prod_all[k] * (-1j) * qd.shift_power(
                qd.geometric(1j * s[k], P), 1)
        return n0, nk

    def _tail(self, P: int):
        sc = self.scenario
        n0, nk = self._tail_series(P)
        N0 = len(nk)
        I_inf = np.zeros(sc.N)
        C = np.zeros((sc.N, N0, N0), dtype=complex)
        tail_H = np.zeros((sc.N, N0, P + 1), dtype=complex)
        moments = qd.power_moments(self.cutoff_w, P)
        for lam in self.active:
            a, g = sc.alphas[lam], sc.gammas[lam]
            lor = np.zeros(P + 1)
            lor[0::2] = (-g * g) ** np.arange((P + 2) // 2)
            weight = a * g * g / np.pi * qd.shift_power(lor.astype(complex), 1)
            wn0 = qd.series_mul(weight, n0)
            I_inf[lam] = np.real(np.nansum(qd.series_mul(wn0, np.conj(n0))[2:] * moments[2:]))
            for j in range(N0):
                wnj = qd.series_mul(weight, nk[j])
                for k in range(N0):
                    C[lam, j, k] = np.sum(qd.series_mul(wnj, np.conj(nk[k]))[2:] * moments[2:])
                tail_H[lam, j] = qd.series_mul(wn0, np.conj(nk[j]))
        return I_inf, C, tail_H

    def _tail_truncation(self, tables: _Tables) -> np.ndarray:
        lo_inf, lo_C, _ = self._tail(TAIL_ORDER - 4)
        return np.abs(tables.tail_inf - lo_inf) + np.abs(np.sum(tables.tail_C - lo_C, axis=(1, 2)))

    def _build(self, edges: np.ndarray) -> _Tables:
        sc = self.scenario
        w, q = qd.gauss_nodes(edges, self.spec.order)
        m, n = mn_node_amplitudes(self.roots, sc, w)
        m0, mk = m[:, 0], m[:, 1:]
        n0, nk = n[:, 0], n[:, 1:]
        N0 = mk.shape[1]
        I_inf = np.zeros(sc.N)
        C = np.zeros((sc.N, N0, N0), dtype=complex)
        H = np.zeros((len(w), sc.N * N0), dtype=complex)
        for lam in self.active:
            b = sc.baths[lam]
            base = q * b.alpha * b.gamma ** 2 / np.pi / (b.gamma ** 2 + w ** 2)
            wn = occ_times_w(w, b.temperature, b.eps)
            aM = base * wn
            aN = base * (w + b.eps * wn)
            I_inf[lam] = np.sum(aM * np.abs(m0) ** 2 + aN * np.abs(n0) ** 2)
            C[lam] = (mk.T * aM) @ mk.conj() + (nk.T * aN) @ nk.conj()
            H[:, lam * N0:(lam + 1) * N0] = ((aM * m0)[:, None] * mk.conj()
                                             + (aN * n0)[:, None] * nk.conj())
        tail_inf, tail_C, tail_H = self._tail(TAIL_ORDER)
        return _Tables(w, I_inf + tail_inf, C + tail_C, H, tail_H, tail_inf, tail_C)

    def _evaluate(self, tables: _Tables, t) -> tuple[np.ndarray, np.ndarray]:
        sc = self.scenario
        t = np.atleast_1d(np.asarray(t, dtype=float))
        s = self.roots.roots
        N0 = len(s)
        I = np.zeros((len(t), sc.N))
        dI = np.zeros((len(t), sc.N))
        if tables is None:
            return I, dI
        e = exp_roots(s, t)
        ec = np.conj(e)
        sc_ = np.conj(s)
        w = tables.nodes
        Hcols = tables.H[:, np.repeat(np.isin(np.arange(sc.N), self.active), N0)]
        Hd = (-1j * w)[:, None] * Hcols
        G_all = qd.fourier_sum(w, np.hstack([Hcols, Hd]), t, sign=-1)
        F = np.conj(qd.fourier_tail(self.cutoff_w, t, TAIL_ORDER))
        F_shift = np.zeros_like(F)
        F_shift[:, 1:] = F[:, :-1]
        na = len(self.active)
        for i, lam in enumerate(self.active):
            G = G_all[:, i * N0:(i + 1) * N0]
            Gd = G_all[:, (na + i) * N0:(na + i + 1) * N0]
            th = tables.tail_H[lam]  # (N0, P+1), powers >= 3
            G = G + np.nansum(F[:, None, 3:] * th[None, :, 3:], axis=2)
            Gd = Gd - 1j * np.nansum(F_shift[:, None, 3:] * th[None, :, 3:], axis=2)
            Cl = tables.C[lam]
            quad_form = np.einsum("tj,jk,tk->t", e, Cl, ec)
            dquad = np.einsum("tj,jk,tk->t", e * s, Cl, ec) + np.einsum("tj,jk,tk->t", e, Cl, ec * sc_)
            I[:, lam] = tables.I_inf[lam] + np.real(quad_form) + 2.0 * np.real(np.sum(ec * G, axis=1))
            dI[:, lam] = np.real(dquad) + 2.0 * np.real(np.sum(ec * (sc_ * G + Gd), axis=1))
        return I, dI

    def evaluate(self, t) -> tuple[np.ndarray, np.ndarray]:
        """I_l(t) and dI_l/dt, each of shape (len(t), N)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t < 0):
            raise ValueError("times must be nonnegative")
        return self._evaluate(self._tables, t)


def I_lambda_t(roots: RootData, scenario: Scenario, lam: int, t,
               spec: QuadratureSpec | None = None) -> tuple[np.ndarray, np.ndarray]:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    table = BathIntegralTable(roots, scenario, float(t.max()), spec or QuadratureSpec())
    I, dI = table.evaluate(t)
    return I[:, lam], dI[:, lam]


def asymptotic_integrand(roots: RootData, scenario: Scenario, lam: int, w):
    """Integrand of I_l(inf), using w n(w) so the Bose case is regular at w = 0."""
    w = np.asarray(w, dtype=float)
    b = scenario.baths[lam]
    omega = scenario.omega
    s = roots.roots
    g = scenario.gammas
    iw = 1j * w[..., None]
    denom = np.real(np.prod((s - iw) * (s + iw), axis=-1))
    ratio = np.prod(g * g + w[..., None] ** 2, axis=-1) / denom
    wn = occ_times_w(w, b.temperature, b.eps)
    body = (omega + w) ** 2 * wn + (omega - w) ** 2 * (w + b.eps * wn)
    return b.alpha * b.gamma ** 2 / np.pi / (b.gamma ** 2 + w * w) * body * ratio


def I_lambda_inf(roots: RootData, scenario: Scenario, lam: int,
                 spec: QuadratureSpec | None = None) -> float:
    """Asymptotic bath integral by adaptive quadrature (independent of the tables)."""
    spec = spec or QuadratureSpec()
    check_stable(roots)
    if scenario.alphas[lam] == 0:
        return 0.0
    upper = spec.cutoff(scenario, roots)
    points = sorted({abs(s.imag) for s in roots.roots if abs(s.imag) < upper}
                    | {T for T in scenario.temperatures if 0 < T < upper})

    def f(w):
        return float(asymptotic_integrand(roots, scenario, lam, np.array(w)))

    limit = int(min(spec.max_subdivisions, 10_000))
    total, err = 0.0, 0.0
    for lo, hi, pts in ((0.0, upper, points or None), (upper, np.inf, None)):
        kwargs = {"points": pts} if pts else {}
        val, e, info = integrate.quad(f, lo, hi, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
                                      limit=limit, full_output=1, **kwargs)[:3]
        total += val
        err += e
    if err > spec.rel_tol * abs(total) + spec.abs_tol:
        raise QuadratureNonConvergence(f"asymptotic integral error {err:.2e} above tolerance")
    return total
