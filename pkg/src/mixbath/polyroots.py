"""Characteristic polynomial of the coupled oscillator and its roots.

The polynomial is

    P(s) = (s^2 + w^2) prod_mu (s + g_mu) - 2 w sum_l a_l g_l^2 prod_{mu != l} (s + g_mu)

of degree N + 2.  Its roots and the reduced residue weights
``prod_{i != k} 1/(s_k - s_i)`` feed every kernel in the package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRoots, NodeCollision, NonConvergence
from .scenario import Scenario

MAX_ITER = 500
STEP_TOL = 1e-13
DEGENERACY = 1e-8
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class CharPoly:
    coefficients: np.ndarray  # descending powers, monic
    omega: float
    alphas: np.ndarray
    gammas: np.ndarray
    scenario_hash: str = ""

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, s):
        return np.polyval(self.coefficients, s)

    def factored(self, s):
        """Evaluate P(s) directly from its defining product form."""
        s = np.asarray(s, dtype=complex)
        lin = s[..., None] + self.gammas
        full = np.prod(lin, axis=-1)
        out = (s * s + self.omega ** 2) * full
        for lam in range(len(self.gammas)):
            others = np.prod(np.delete(lin, lam, axis=-1), axis=-1)
            out = out - 2.0 * self.omega * self.alphas[lam] * self.gammas[lam] ** 2 * others
        return out

    def factored_derivative(self, s):
        s = np.asarray(s, dtype=complex)
        lin = s[..., None] + self.gammas
        n = len(self.gammas)
        full = np.prod(lin, axis=-1)
        dfull = np.zeros_like(s)
        for nu in range(n):
            dfull = dfull + np.prod(np.delete(lin, nu, axis=-1), axis=-1)
        out = 2.0 * s * full + (s * s + self.omega ** 2) * dfull
        for lam in range(n):
            rest = [m for m in range(n) if m != lam]
            d_others = np.zeros_like(s)
            for nu in rest:
                keep = [m for m in rest if m != nu]
                d_others = d_others + np.prod(lin[..., keep], axis=-1)
            out = out - 2.0 * self.omega * self.alphas[lam] * self.gammas[lam] ** 2 * d_others
        return out


def build_char_poly(scenario: Scenario) -> CharPoly:
    omega = scenario.omega
    alphas, gammas = scenario.alphas, scenario.gammas
    full = np.array([1.0])
    for g in gammas:
        full = np.convolve(full, [1.0, g])
    coeffs = np.convolve([1.0, 0.0, omega ** 2], full)
    for lam in range(len(gammas)):
        others = np.array([1.0])
        for mu, g in enumerate(gammas):
            if mu != lam:
                others = np.convolve(others, [1.0, g])
        term = -2.0 * omega * alphas[lam] * gammas[lam] ** 2 * others
        coeffs[-len(term):] += term
    return CharPoly(coeffs, omega, alphas.copy(), gammas.copy(), scenario.digest)


@dataclass(frozen=True)
class RootData:
    roots: np.ndarray
    reduced_residues: np.ndarray
    min_separation: float
    threshold: float

    @property
    def n_roots(self) -> int:
        return len(self.roots)

    @property
    def stable(self) -> bool:
        return bool(np.all(self.roots.real < 0))

    @property
    def max_real(self) -> float:
        return float(self.roots.real.max())

    def full_residues(self, w):
        """Residue weights over the node set {-i w, s_1, ..., s_N0}.

        Returns an array of shape ``w.shape + (N0 + 1,)`` whose column 0 is
        the weight of the node ``-i w``.
        """
        w = np.asarray(w, dtype=float)
        s0 = -1j * w
        d = self.roots - s0[..., None]
        if np.any(np.abs(d) < self.threshold):
            raise NodeCollision("frequency node coincides with a characteristic root")
        xi0 = 1.0 / np.prod(-d, axis=-1)
        xik = self.reduced_residues / d
        return np.concatenate([xi0[..., None], xik], axis=-1)


def _aberth(coeffs: np.ndarray) -> tuple[np.ndarray, float]:
    n = len(coeffs) - 1
    radius = 1.0 + np.max(np.abs(coeffs))
    z = radius * np.exp(1j * (2.0 * np.pi * np.arange(n) / n + 0.4))
    dcoeffs = np.polyder(coeffs)
    for _ in range(MAX_ITER):
        p = np.polyval(coeffs, z)
        dp = np.polyval(dcoeffs, z)
        ratio = np.where(dp != 0, p / np.where(dp != 0, dp, 1), 0.0)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        step = ratio / (1.0 - ratio * inv.sum(axis=1))
        z = z - step
        if np.max(np.abs(step)) < STEP_TOL * radius:
            return z, radius
    raise NonConvergence(f"root iteration did not converge in {MAX_ITER} steps")


def _polish(poly: CharPoly, z: np.ndarray) -> np.ndarray:
    best = z
    best_res = np.abs(poly.factored(z))
    for _ in range(3):
        dp = poly.factored_derivative(best)
        cand = best - poly.factored(best) / np.where(dp != 0, dp, 1)
        res = np.abs(poly.factored(cand))
        better = res < best_res
        if not np.any(better):
            break
        best = np.where(better, cand, best)
        best_res = np.where(better, res, best_res)
    return best


def _conjugate_close(z: np.ndarray, snap: float) -> np.ndarray:
    out = np.array(z, dtype=complex)
    real_mask = np.abs(out.imag) <= snap
    out[real_mask] = out[real_mask].real
    upper = np.flatnonzero(out.imag > snap)
    lower = list(np.flatnonzero(out.imag < -snap))
    if len(upper) != len(lower):
        raise NonConvergence("root set is not closed under conjugation")
    for i in upper:
        j = min(lower, key=lambda k: abs(out[k] - np.conj(out[i])))
        lower.remove(j)
        mid = 0.5 * (out[i] + np.conj(out[j]))
        out[i], out[j] = mid, np.conj(mid)
    return out


def reduced_residues(roots: np.ndarray) -> np.ndarray:
    diff = roots[:, None] - roots[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


def find_roots(poly: CharPoly) -> RootData:
    coeffs = np.asarray(poly.coefficients, dtype=float)
    if len(coeffs) < 2:
        raise NonConvergence("polynomial degree must be at least 1")
    z, _ = _aberth(coeffs)
    z = _polish(poly, z)
    scale = float(np.max(np.abs(z)))
    threshold = DEGENERACY * scale
    z = _conjugate_close(z, 0.25 * threshold)
    order = np.lexsort((-z.imag, -z.real))
    z = z[order]
    residual = np.max(np.abs(poly(z))) / np.max(np.abs(coeffs))
    if residual > RESIDUAL_TOL:
        raise NonConvergence(f"root residual {residual:.3e} exceeds {RESIDUAL_TOL}")
    diff = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(diff, np.inf)
    min_sep = float(diff.min()) if len(z) > 1 else np.inf
    if min_sep < threshold:
        raise DegenerateRoots(f"roots closer than {threshold:.3e} (separation {min_sep:.3e})")
    return RootData(z, reduced_residues(z), min_sep, threshold)


def solve_roots(scenario: Scenario) -> RootData:
    return find_roots(build_char_poly(scenario))
