"""scikit-learn style wrapper: fit a scenario's dynamics, predict n(t)."""

from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicSpline
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .analysis import classify
from .bathintegrals import BathIntegralTable, QuadratureSpec
from .errors import PreconditionError
from .evolution import Method, asymptotics, evolve_closed_form, evolve_diffusion, time_grid
from .oracle import discrete_bath_solve, evolve_volterra
from .polyroots import solve_roots
from .scenario import Scenario
from .transport import mixed_transport


def check_times(X) -> np.ndarray:
    """Flatten an (n,) or (n, 1) array of nonnegative finite times."""
    t = np.asarray(X, dtype=float)
    if t.ndim == 2 and t.shape[1] == 1:
        t = t[:, 0]
    if t.ndim != 1 or len(t) == 0:
        raise PreconditionError("times must be a non-empty vector or single column")
    if not np.all(np.isfinite(t)) or np.any(t < 0):
        raise PreconditionError("times must be finite and nonnegative")
    return t


class OccupationModel(RegressorMixin, BaseEstimator):
    """Occupation n(t) of the oscillator described by ``scenario``.

    ``fit`` solves the characteristic roots, builds the bath-integral tables
    and integrates the chosen method on a uniform grid of step ``dt`` up to
    the largest requested time.  ``predict`` returns n at arbitrary times:
    exact evaluation for the closed form, spline interpolation otherwise.
    """

    def __init__(self, scenario: Scenario | None = None, method: str = "auto",
                 dt: float = 0.005, rel_tol: float = 1e-8, grid_tol: float = 1e-3,
                 modes: int = 400):
        self.scenario = scenario
        self.method = method
        self.dt = dt
        self.rel_tol = rel_tol
        self.grid_tol = grid_tol
        self.modes = modes

    def _resolve_method(self) -> Method:
        if self.method == "auto":
            return Method.CLOSED_FORM if self.scenario.is_pure else Method.DIFFUSION
        return Method(self.method)

    def fit(self, X, y=None):
        if not isinstance(self.scenario, Scenario):
            raise PreconditionError("scenario must be a Scenario")
        t = check_times(X)
        self.method_ = self._resolve_method()
        self.spec_ = QuadratureSpec(rel_tol=self.rel_tol)
        self.roots_ = solve_roots(self.scenario)
        t_max = max(float(t.max()), 2 * self.dt)
        grid = time_grid(self.dt * np.ceil(t_max / self.dt), self.dt)
        self.table_ = None
        if self.method_ in (Method.CLOSED_FORM, Method.DIFFUSION):
            self.table_ = BathIntegralTable(self.roots_, self.scenario, float(grid[-1]), self.spec_)
        if self.method_ is Method.CLOSED_FORM:
            traj = evolve_closed_form(self.scenario, grid, self.roots_, self.table_)
        elif self.method_ is Method.DIFFUSION:
            traj = evolve_diffusion(self.scenario, grid, self.roots_, self.table_,
                                    grid_tol=self.grid_tol)
        elif self.method_ is Method.VOLTERRA:
            traj = evolve_volterra(self.scenario, grid, self.spec_, self.grid_tol)
        else:
            traj = discrete_bath_solve(self.scenario, self.modes, grid)
        self.trajectory_ = traj
        self._spline = CubicSpline(traj.times, traj.n)
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "trajectory_")
        t = check_times(X)
        if t.max() > self.trajectory_.times[-1] * (1 + 1e-12):
            raise PreconditionError("prediction times exceed the fitted horizon")
        if self.method_ is Method.CLOSED_FORM:
            return evolve_closed_form(self.scenario, t, self.roots_, self.table_).n
        return self._spline(t)

    def transport(self, X):
        """Friction and diffusion coefficients at the given times."""
        check_is_fitted(self, "roots_")
        return mixed_transport(self.scenario, check_times(X), self.roots_, self.table_)

    def asymptotics(self):
        check_is_fitted(self, "roots_")
        return asymptotics(self.scenario, self.roots_, self.spec_)

    def classify(self, window_fraction: float = 0.4, threshold: float = 1e-4):
        check_is_fitted(self, "trajectory_")
        return classify(self.trajectory_, window_fraction, threshold)
