"""Time-dependent friction and diffusion coefficients.

For pure statistics with sign e,

    lambda_e(t) = -1/2 d/dt ln(|A|^2 + e |B|^2),
    D_l(t)      = lambda_e (J_l + I_l) + 1/2 d/dt (J_l + I_l).

With baths of both statistics, opposite-statistics baths are paired with
the friction of flipped sign and combined as

    lambda = p lambda_opp + (1 - p) lambda_a - 2 e_a sum_opp D_l,
    D      = sum_l D_l.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bathintegrals import BathIntegralTable, QuadratureSpec
from .kernels import KernelSample, eval_AB
from .polyroots import RootData, solve_roots
from .scenario import Scenario

FLOOR = 1e-14


def friction_pure(sample: KernelSample, eps: int) -> tuple[np.ndarray, np.ndarray]:
    """Friction for statistics sign ``eps`` and a mask of floored samples.

    The sample may be scaled by a common exponential (``sample.shift``),
    which cancels in the ratio.  Samples whose
    denominator falls below ``FLOOR`` relative to |A|^2 + |B|^2 are flagged
    and returned as nan.
    """
    A2, B2 = sample.A2, sample.B2
    X = A2 + eps * B2
    dX = sample.dA2 + eps * sample.dB2
    flagged = np.abs(X) < FLOOR * (A2 + B2)
    with np.errstate(invalid="ignore", divide="ignore"):
        lam = -0.5 * dX / X
    return np.where(flagged, np.nan, lam), flagged


def diffusion_partials(lam: np.ndarray, J: np.ndarray, dJ: np.ndarray,
                       I: np.ndarray, dI: np.ndarray) -> np.ndarray:
    """Per-bath diffusion D_l, shape (len(t), N)."""
    return lam[:, None] * (J + I) + 0.5 * (dJ + dI)


@dataclass(frozen=True)
class TransportSample:
    t: np.ndarray
    lam: np.ndarray
    D: np.ndarray
    lambda_pure: np.ndarray  # columns (lambda_fermi, lambda_bose)
    D_partials: np.ndarray
    denominators: np.ndarray  # columns (|A|^2 + |B|^2, |A|^2 - |B|^2)
    flags: np.ndarray
    I: np.ndarray = field(repr=False)
    J: np.ndarray = field(repr=False)

    @property
    def ratio(self) -> np.ndarray:
        """D / lambda."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return self.D / self.lam


def _scaled_sample(roots: RootData, scenario: Scenario, t: np.ndarray) -> KernelSample:
    shift = min(roots.max_real, 0.0)
    return eval_AB(roots, scenario, t, shift=shift)


def mixed_transport(scenario: Scenario, t, roots: RootData | None = None,
                    table: BathIntegralTable | None = None,
                    spec: QuadratureSpec | None = None) -> TransportSample:
    """Friction and diffusion on the times ``t`` for any mix of statistics."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if roots is None:
        roots = solve_roots(scenario)
    sample = _scaled_sample(roots, scenario, t)
    if table is None:
        table = BathIntegralTable(roots, scenario, float(t.max()), spec or QuadratureSpec())
    I, dI = table.evaluate(t)

    growth = np.exp(2.0 * sample.shift * t)
    Bc = np.conj(sample.B)[:, None]
    J = np.real(sample.B_components * Bc) * growth[:, None]
    dJ = np.real(sample.dB_components_dt * Bc
                 + sample.B_components * np.conj(sample.dB_dt)[:, None]) * growth[:, None]

    lam_f, flag_f = friction_pure(sample, -1)
    lam_b, flag_b = friction_pure(sample, +1)
    eps_a = scenario.eps_a
    lam_a, flag_a = (lam_b, flag_b) if eps_a == 1 else (lam_f, flag_f)
    lam_o, flag_o = (lam_f, flag_f) if eps_a == 1 else (lam_b, flag_b)

    n_opp = scenario.n_opposite
    partials = np.empty_like(I)
    partials[:, n_opp:] = diffusion_partials(lam_a, J[:, n_opp:], dJ[:, n_opp:],
                                             I[:, n_opp:], dI[:, n_opp:])
    if n_opp == 0:
        lam = lam_a
        flags = flag_a
    else:
        partials[:, :n_opp] = diffusion_partials(lam_o, J[:, :n_opp], dJ[:, :n_opp],
                                                 I[:, :n_opp], dI[:, :n_opp])
        p = scenario.p
        lam = p * lam_o + (1.0 - p) * lam_a - 2.0 * eps_a * partials[:, :n_opp].sum(axis=1)
        flags = flag_a | flag_o
    D = partials.sum(axis=1)
    A2 = sample.A2 * growth
    B2 = sample.B2 * growth
    return TransportSample(
        t=t, lam=lam, D=D,
        lambda_pure=np.column_stack([lam_f, lam_b]),
        D_partials=partials,
        denominators=np.column_stack([A2 + B2, A2 - B2]),
        flags=flags, I=I, J=J,
    )
