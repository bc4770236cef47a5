"""Occupation trajectories and asymptotic predictions."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .bathintegrals import BathIntegralTable, I_lambda_inf, QuadratureSpec, bath_occ
from .errors import DenominatorFloor, DomainError, GridTooCoarse, PreconditionError
from .kernels import eval_AB
from .polyroots import RootData, solve_roots
from .scenario import Scenario
from .transport import TransportSample, mixed_transport

DEFAULT_DT = 0.005
DEFAULT_T_MAX = 50.0


class Method(enum.Enum):
    CLOSED_FORM = "closed-form"
    DIFFUSION = "diffusion"
    VOLTERRA = "volterra"
    DISCRETE = "discrete"


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    n: np.ndarray
    method: Method
    scenario_hash: str
    flags: np.ndarray
    info: dict = field(default_factory=dict)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0


def time_grid(t_max: float = DEFAULT_T_MAX, dt: float = DEFAULT_DT) -> np.ndarray:
    """Uniform grid 0, dt, ..., t_max (t_max rounded to a whole number of steps)."""
    if not dt > 0 or not t_max > 0:
        raise ValueError("dt and t_max must be positive")
    steps = int(round(t_max / dt))
    if steps < 2:
        raise ValueError("grid needs at least two steps")
    return dt * np.arange(steps + 1)


def uniform_step(times: np.ndarray) -> float:
    times = np.asarray(times, dtype=float)
    if len(times) < 3 or times[0] != 0:
        raise PreconditionError("grid must start at t = 0 and hold at least three points")
    h = (times[-1] - times[0]) / (len(times) - 1)
    if np.max(np.abs(np.diff(times) - h)) > 1e-9 * h:
        raise PreconditionError("grid must be uniform")
    return h


def evolve_closed_form(scenario: Scenario, times, roots: RootData | None = None,
                       table: BathIntegralTable | None = None,
                       spec: QuadratureSpec | None = None) -> Trajectory:
    """n(t) = n0 |A|^2 + (1 + e n0) |B|^2 + sum_l I_l(t), pure statistics only."""
    if not scenario.is_pure:
        raise PreconditionError("closed form requires every bath to share the system statistics")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if roots is None:
        roots = solve_roots(scenario)
    k = eval_AB(roots, scenario, times)
    if table is None:
        table = BathIntegralTable(roots, scenario, float(times.max()), spec or QuadratureSpec())
    I, _ = table.evaluate(times)
    n0 = scenario.n0
    n = n0 * k.A2 + (1.0 + scenario.eps_a * n0) * k.B2 + I.sum(axis=1)
    n[times == 0] = n0
    return Trajectory(times, n, Method.CLOSED_FORM, scenario.digest,
                      np.zeros(len(times), dtype=bool),
                      {"quadrature_error": table.error_estimate.tolist(),
                       "quadrature_nodes": table.n_nodes})


def _march(lam: np.ndarray, D: np.ndarray, h: float, n0: float) -> np.ndarray:
    """Trapezoid solution of dn/dt = -2 lam n + 2 D in overflow-safe form."""
    decay = np.exp(-h * (lam[:-1] + lam[1:]))
    n = np.empty(len(lam))
    n[0] = n0
    for m in range(len(lam) - 1):
        n[m + 1] = decay[m] * (n[m] + h * D[m]) + h * D[m + 1]
    return n


def integrate_diffusion(lam: np.ndarray, D: np.ndarray, h: float, n0: float,
                        grid_tol: float = 1e-3) -> tuple[np.ndarray, float]:
    """Trapezoid march on steps h and 2h, combined by Richardson extrapolation.

    Returns the extrapolated occupation and the step-halving estimate of the
    plain trapezoid error.  Raises GridTooCoarse when that estimate exceeds
    ``grid_tol``.
    """
    fine = _march(lam, D, h, n0)
    coarse = _march(lam[::2], D[::2], 2.0 * h, n0)
    corr_even = (fine[::2] - coarse) / 3.0
    corr = np.empty_like(fine)
    corr[::2] = corr_even
    odd = corr[1::2]
    right = corr_even[1:len(odd) + 1]
    if len(right) < len(odd):
        right = np.append(right, corr_even[-1])
    corr[1::2] = 0.5 * (corr_even[:len(odd)] + right)
    estimate = float(np.max(np.abs(corr_even)))
    if not estimate <= grid_tol:
        raise GridTooCoarse(f"step-halving change {3 * estimate:.2e} exceeds tolerance; reduce dt")
    return fine + corr, estimate


HEAD_STEPS = 8
HEAD_REFINE = 32


def evolve_diffusion(scenario: Scenario, times, roots: RootData | None = None,
                     table: BathIntegralTable | None = None,
                     spec: QuadratureSpec | None = None,
                     transport: TransportSample | None = None,
                     grid_tol: float = 1e-3, zero_diffusion: bool = False) -> Trajectory:
    """n(t) from the local equation dn/dt = -2 lambda n + 2 D for any statistics.

    The coefficients behave like t log t at the origin, so the first
    ``HEAD_STEPS`` steps are integrated on a sub-grid ``HEAD_REFINE`` times
    finer before the march continues on the requested grid.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    h = uniform_step(times)
    if roots is None:
        roots = solve_roots(scenario)
    if table is None:
        table = BathIntegralTable(roots, scenario, float(times.max()), spec or QuadratureSpec())
    if transport is None:
        transport = mixed_transport(scenario, times, roots, table)
    _check_flags(transport)
    head = min(HEAD_STEPS, (len(times) - 3) // 2 * 2)
    n0 = scenario.n0
    n = np.empty(len(times))
    if head > 0:
        sub_t = (h / HEAD_REFINE) * np.arange(head * HEAD_REFINE + 1)
        sub = mixed_transport(scenario, sub_t, roots, table)
        _check_flags(sub)
        D_sub = np.zeros_like(sub.D) if zero_diffusion else sub.D
        n_sub, _ = integrate_diffusion(sub.lam, D_sub, h / HEAD_REFINE, n0, grid_tol)
        n[:head + 1] = n_sub[::HEAD_REFINE]
    else:
        n[0] = n0
    D = np.zeros_like(transport.D) if zero_diffusion else transport.D
    n_tail, estimate = integrate_diffusion(transport.lam[head:], D[head:], h, n[head], grid_tol)
    n[head:] = n_tail
    n[0] = n0
    return Trajectory(times, n, Method.DIFFUSION, scenario.digest, transport.flags.copy(),
                      {"trapezoid_error_estimate": estimate})


def _check_flags(transport: TransportSample) -> None:
    if np.any(transport.flags):
        first = float(transport.t[np.argmax(transport.flags)])
        raise DenominatorFloor(f"friction denominator below floor near t = {first:.6g}")


@dataclass(frozen=True)
class AsymptoticReport:
    I_inf: np.ndarray
    n_inf_pure: float | None
    n_inf_opposite: float | None
    markov_limit: float
    stationarity_residual: float
    is_stationary_predicted: bool

    def as_dict(self) -> dict:
        return {
            "I_inf": [float(x) for x in self.I_inf],
            "n_inf_pure": self.n_inf_pure,
            "n_inf_opposite": self.n_inf_opposite,
            "markov_limit": self.markov_limit,
            "stationarity_residual": self.stationarity_residual,
            "is_stationary_predicted": self.is_stationary_predicted,
        }


def markov_limit(scenario: Scenario) -> float:
    """Coupling-weighted bath occupations at the bare frequency."""
    if scenario.g0 == 0:
        return float("nan")
    occ = [b.alpha * bath_occ(scenario.omega, b.temperature, b.eps) for b in scenario.baths]
    return float(np.sum(occ) / scenario.g0)


def stationarity_residual(scenario: Scenario, I_inf: np.ndarray) -> float:
    """Balance between opposite and same statistics integrals; 0 when p is 0 or 1."""
    p = scenario.p
    if scenario.is_pure or scenario.is_all_opposite:
        return 0.0
    n_opp = scenario.n_opposite
    opp = float(np.sum(I_inf[:n_opp]))
    same = float(np.sum(I_inf[n_opp:]))
    left = opp / p
    right = (same / (1.0 - p)) / (1.0 + 2.0 * scenario.eps_a * same / (1.0 - p))
    return left - right


def asymptotics(scenario: Scenario, roots: RootData | None = None,
                spec: QuadratureSpec | None = None, tol: float = 1e-6) -> AsymptoticReport:
    if roots is None:
        roots = solve_roots(scenario)
    I_inf = np.array([I_lambda_inf(roots, scenario, lam, spec) for lam in range(scenario.N)])
    n_pure = float(I_inf.sum()) if scenario.is_pure else None
    n_opp = None
    if scenario.is_all_opposite:
        total = float(I_inf.sum())
        den = 1.0 - 2.0 * scenario.eps_a * total
        if abs(den) < 1e-12:
            raise DomainError("opposite-statistics asymptote has a vanishing denominator")
        n_opp = total / den
    residual = stationarity_residual(scenario, I_inf)
    stationary = scenario.is_pure or scenario.is_all_opposite or abs(residual) < tol
    return AsymptoticReport(I_inf, n_pure, n_opp, markov_limit(scenario), residual, bool(stationary))
