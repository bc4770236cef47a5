"""Dynamic kernels A(t), B(t), B_l(t) and the frequency-resolved M(w,t), N(w,t).

All kernels are finite sums of exponentials over the characteristic roots,
so time derivatives are the same sums with an extra root factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnstableRoots
from .polyroots import RootData
from .scenario import Scenario

FLUSH = -700.0
MARGINAL = 1e-12


def check_stable(roots: RootData) -> None:
    """Reject growing modes; purely imaginary roots (decoupled limit) pass."""
    scale = max(1.0, float(np.max(np.abs(roots.roots))))
    if np.any(roots.roots.real > MARGINAL * scale):
        raise UnstableRoots("characteristic root with positive real part")


def exp_roots(s: np.ndarray, t: np.ndarray, shift: float = 0.0) -> np.ndarray:
    """``exp((s_k - shift) t)`` with underflowing terms set to exactly zero."""
    t = np.asarray(t, dtype=float)
    arg = np.multiply.outer(t, s - shift)
    small = arg.real < FLUSH
    with np.errstate(under="ignore"):
        out = np.exp(np.where(small, 0.0, arg))
    out[small] = 0.0
    return out


@dataclass(frozen=True)
class KernelCoefficients:
    """Per-root amplitudes so that K(t) = sum_k c_k exp(s_k t)."""

    roots: np.ndarray
    cA: np.ndarray
    cB: np.ndarray
    cB_components: np.ndarray  # shape (N, N0)


def kernel_coefficients(roots: RootData, scenario: Scenario) -> KernelCoefficients:
    s = roots.roots
    xi = roots.reduced_residues
    a, g = scenario.alphas, scenario.gammas
    omega, Omega = scenario.omega, scenario.Omega
    lin = s[:, None] + g[None, :]
    prod_all = np.prod(lin, axis=1)
    n = len(g)
    # sum_l a_l g_l prod_{m != l}(s + g_m), written without dividing by s + g_l
    others = np.stack([np.prod(np.delete(lin, lam, axis=1), axis=1) for lam in range(n)])
    shift_prod = np.sum((a * g)[:, None] * others, axis=0)
    cA = 0.5 * xi * ((2.0 * s - 1j * (Omega + omega)) * prod_all - 2j * s * shift_prod)
    cB = 0.5j * xi * ((Omega - omega) * prod_all + 2.0 * s * shift_prod)
    cBl = -1j * (a * g ** 2)[:, None] * xi[None, :] * others
    return KernelCoefficients(s, cA, cB, cBl)


@dataclass(frozen=True)
class KernelSample:
    t: np.ndarray
    A: np.ndarray
    B: np.ndarray
    B_components: np.ndarray  # shape (len(t), N)
    dA_dt: np.ndarray
    dB_dt: np.ndarray
    dB_components_dt: np.ndarray
    shift: float = 0.0

    @property
    def A2(self):
        return np.abs(self.A) ** 2

    @property
    def B2(self):
        return np.abs(self.B) ** 2

    @property
    def dA2(self):
        return 2.0 * np.real(self.dA_dt * np.conj(self.A))

    @property
    def dB2(self):
        return 2.0 * np.real(self.dB_dt * np.conj(self.B))


def eval_AB(roots: RootData, scenario: Scenario, t, shift: float = 0.0) -> KernelSample:
    """Evaluate A, B, B_l and their time derivatives on the times ``t``.

    A nonzero ``shift`` returns every kernel multiplied by ``exp(-shift t)``,
    which keeps ratios such as the friction computable at long times.
    """
    check_stable(roots)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0):
        raise ValueError("times must be nonnegative")
    c = kernel_coefficients(roots, scenario)
    s = c.roots
    e = exp_roots(s, t, shift)
    es = e * s
    return KernelSample(
        t=t,
        A=e @ c.cA,
        B=e @ c.cB,
        B_components=e @ c.cB_components.T,
        dA_dt=es @ c.cA,
        dB_dt=es @ c.cB,
        dB_components_dt=es @ c.cB_components.T,
        shift=shift,
    )


def eval_A_alternate(roots: RootData, scenario: Scenario, t) -> np.ndarray:
    """A(t) from the coupling-weighted residue form, used as a self-check."""
    check_stable(roots)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    s = roots.roots
    xi = roots.reduced_residues
    a, g = scenario.alphas, scenario.gammas
    omega = scenario.omega
    lin = s[:, None] + g[None, :]
    coeff = np.zeros_like(s)
    for lam in range(len(g)):
        others = np.prod(np.delete(lin, lam, axis=1), axis=1)
        coeff = coeff + a[lam] * g[lam] ** 2 * others
    coeff = 1j * xi * coeff * (s - 1j * omega) / (s + 1j * omega)
    return exp_roots(s, t) @ coeff


def J_decomposition(sample: KernelSample) -> tuple[np.ndarray, np.ndarray]:
    """Per-bath split of |B|^2 and its time derivative, shape (len(t), N)."""
    Bc = np.conj(sample.B)[:, None]
    J = np.real(sample.B_components * Bc)
    dJ = np.real(sample.dB_components_dt * Bc
                 + sample.B_components * np.conj(sample.dB_dt)[:, None])
    return J, dJ


@dataclass(frozen=True)
class WKernelSample:
    w: np.ndarray
    t: np.ndarray
    M: np.ndarray  # shape (len(w), len(t))
    N: np.ndarray
    dM_dt: np.ndarray
    dN_dt: np.ndarray


def mn_node_amplitudes(roots: RootData, scenario: Scenario, w):
    """Amplitudes of M and N over the node set {-i w, s_1..s_N0}.

    Returns ``(m, n)`` each of shape ``w.shape + (N0 + 1,)`` such that
    ``M(w, t) = sum_k m_k exp(z_k t)`` with ``z_0 = -i w``, ``z_k = s_k``.
    """
    w = np.asarray(w, dtype=float)
    s = roots.roots
    g = scenario.gammas
    omega = scenario.omega
    xi = roots.full_residues(w)
    nodes = np.concatenate([(-1j * w)[..., None], np.broadcast_to(s, w.shape + s.shape)], axis=-1)
    prod = np.prod(nodes[..., None] + g, axis=-1)
    m = -xi * (1j * nodes + omega) * prod
    n = xi * (1j * nodes - omega) * prod
    return m, n


def eval_MN(roots: RootData, scenario: Scenario, w, t) -> WKernelSample:
    check_stable(roots)
    w = np.atleast_1d(np.asarray(w, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(w < 0):
        raise ValueError("frequencies must be nonnegative")
    m, n = mn_node_amplitudes(roots, scenario, w)
    s = roots.roots
    e_roots = exp_roots(s, t)  # (t, N0)
    e0 = np.exp(-1j * np.multiply.outer(w, t))  # (w, t)
    M = m[:, :1] * e0 + m[:, 1:] @ e_roots.T
    N = n[:, :1] * e0 + n[:, 1:] @ e_roots.T
    z0 = (-1j * w)[:, None]
    dM = m[:, :1] * z0 * e0 + (m[:, 1:] * s) @ e_roots.T
    dN = n[:, :1] * z0 * e0 + (n[:, 1:] * s) @ e_roots.T
    return WKernelSample(w, t, M, N, dM, dN)
