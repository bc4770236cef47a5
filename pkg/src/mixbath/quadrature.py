"""Shared numerics for frequency integrals.

Integrals over w in [0, inf) are split into a composite Gauss-Legendre rule
on [0, W] and an analytic tail on [W, inf).  On the tail the integrand is
expanded as a power series in u = 1/w, and oscillatory factors exp(+-i w t)
are integrated term by term through

    F_p(t) = int_W^inf exp(i w t) w^(-p) dw,

which equals W^(1-p) E_p(-i W t) with E_p the generalized exponential
integral.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import sici

GL_ORDER = 12
_BLOCK_ELEMENTS = 1 << 22


def gauss_nodes(edges: np.ndarray, order: int = GL_ORDER) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on consecutive panels."""
    edges = np.asarray(edges, dtype=float)
    x, wt = leggauss(order)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * wt).ravel()
    return nodes, weights


def panel_edges(upper: float, base_width: float, features=(), fixed=()) -> np.ndarray:
    """Panel boundaries on [0, upper].

    A uniform grid of spacing ``base_width`` is merged with geometric clusters
    ``c +- width * 2^j / 2`` around each ``(center, width)`` feature, so peaks
    of half-width ``width`` get panels of comparable size.
    """
    n_base = max(1, int(np.ceil(upper / base_width)))
    pts = [np.linspace(0.0, upper, n_base + 1)]
    for center, width in features:
        if not (width > 0 and np.isfinite(width)):
            continue
        if width >= base_width:
            continue
        steps = 0.5 * width * 2.0 ** np.arange(int(np.ceil(np.log2(2 * base_width / width))) + 1)
        pts.append(np.concatenate([[center], center - steps, center + steps]))
    pts.append(np.asarray(fixed, dtype=float))
    allp = np.concatenate(pts)
    allp = np.unique(allp[(allp >= 0.0) & (allp <= upper)])
    keep = np.concatenate([[True], np.diff(allp) > 1e-12 * upper])
    allp = allp[keep]
    allp[-1] = upper
    return allp


def halve(edges: np.ndarray) -> np.ndarray:
    mids = 0.5 * (edges[1:] + edges[:-1])
    out = np.empty(2 * len(edges) - 1)
    out[0::2] = edges
    out[1::2] = mids
    return out


# truncated power series in u, stored as coefficient arrays indexed by power

def series_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = len(a)
    return np.convolve(a, b)[:n]


def geometric(c: complex, order: int) -> np.ndarray:
    """Coefficients of 1 / (1 - c u)."""
    return np.asarray(c, dtype=complex) ** np.arange(order + 1)


def linear(c: complex, order: int) -> np.ndarray:
    """Coefficients of 1 + c u."""
    out = np.zeros(order + 1, dtype=complex)
    out[0] = 1.0
    if order >= 1:
        out[1] = c
    return out


def shift_power(a: np.ndarray, k: int) -> np.ndarray:
    """Multiply a series by u^k."""
    out = np.zeros_like(a)
    if k < len(a):
        out[k:] = a[: len(a) - k]
    return out


def power_moments(upper: float, order: int) -> np.ndarray:
    """int_W^inf u^p dw for p = 0..order (nan where divergent)."""
    p = np.arange(order + 1, dtype=float)
    out = np.full(order + 1, np.nan)
    out[2:] = upper ** (1.0 - p[2:]) / (p[2:] - 1.0)
    return out


def _expint_cf(n: int, z: np.ndarray, tol: float = 1e-15, max_iter: int = 5000) -> np.ndarray:
    """E_n(z) by the modified Lentz continued fraction, for |z| not small."""
    tiny = 1e-300
    b = z + n
    c = np.full_like(z, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(z.shape, dtype=bool)
    for i in range(1, max_iter + 1):
        a = -i * (n - 1 + i)
        b = b + 2.0
        d_new = 1.0 / (a * d + b)
        c_new = b + a / c
        delta = c_new * d_new
        d = np.where(active, d_new, d)
        c = np.where(active, c_new, c)
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) > tol
        if not active.any():
            break
    return h * np.exp(-z)


def fourier_tail(upper: float, t, order: int) -> np.ndarray:
    """F_p(t) = int_W^inf exp(i w t) w^(-p) dw, shape (len(t), order + 1).

    Column 0 is unused; column 1 is infinite at t = 0.  Small W t uses the
    upward recurrence seeded by the sine and cosine integrals; larger W t,
    where that recurrence loses accuracy, uses the continued fraction of
    F_p = W^(1-p) E_p(-i W t).
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.full((len(t), order + 1), np.nan, dtype=complex)
    x = upper * t
    zero = t == 0
    out[zero, 1] = np.inf
    for p in range(2, order + 1):
        out[zero, p] = upper ** (1.0 - p) / (p - 1.0)
    small = (~zero) & (x <= 2.0)
    if small.any():
        si, ci = sici(x[small])
        out[small, 1] = -ci + 1j * (0.5 * np.pi - si)
        phase = np.exp(1j * x[small])
        for p in range(2, order + 1):
            out[small, p] = (phase * upper ** (1.0 - p)
                             + 1j * t[small] * out[small, p - 1]) / (p - 1.0)
    large = x > 2.0
    if large.any():
        z = -1j * x[large]
        for p in range(1, order + 1):
            out[large, p] = upper ** (1.0 - p) * _expint_cf(p, z)
    return out


def _uniform_step(t: np.ndarray) -> float | None:
    if len(t) < 3:
        return None
    d = np.diff(t)
    h = (t[-1] - t[0]) / (len(t) - 1)
    if h > 0 and np.max(np.abs(d - h)) <= 1e-9 * h:
        return h
    return None


def fourier_sum(w: np.ndarray, H: np.ndarray, t, sign: int = -1) -> np.ndarray:
    """sum_n H[n, :] exp(sign i w_n t_m) for every time, shape (len(t), K).

    Uniform time grids reuse one block of phase factors, so the work per
    block is a single matrix product.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    w = np.asarray(w, dtype=float)
    H = np.asarray(H, dtype=complex)
    if H.ndim == 1:
        H = H[:, None]
    out = np.zeros((len(t), H.shape[1]), dtype=complex)
    if len(w) == 0 or len(t) == 0:
        return out
    node_chunk = min(len(w), 1 << 16)
    h = _uniform_step(t)
    for n0 in range(0, len(w), node_chunk):
        wc = w[n0:n0 + node_chunk]
        Hc = H[n0:n0 + node_chunk]
        block = int(max(8, min(512, _BLOCK_ELEMENTS // len(wc))))
        if h is not None:
            R = np.exp(sign * 1j * np.multiply.outer(h * np.arange(block), wc))
            for a in range(0, len(t), block):
                m = min(block, len(t) - a)
                scaled = np.exp(sign * 1j * wc * t[a])[:, None] * Hc
                out[a:a + m] += R[:m] @ scaled
        else:
            for a in range(0, len(t), block):
                tb = t[a:a + block]
                E = np.exp(sign * 1j * np.multiply.outer(tb, wc))
                out[a:a + block] += E @ Hc
    return out
