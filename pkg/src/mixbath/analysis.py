"""Late-time classification of trajectories and parameter scans."""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .errors import MixbathError, PreconditionError, WindowTooShort
from .evolution import Trajectory, evolve_closed_form, evolve_diffusion, time_grid
from .scenario import BathSpec, FrequencyMode, Scenario

STATIONARY_THRESHOLD = 1e-4
WINDOW_FRACTION = 0.4
MIN_PERIODS = 3.0
# windows varying less than this (relative to max(1, |mean|)) are treated as constant
NOISE_FLOOR = 1e-8


@dataclass(frozen=True)
class OscillationInfo:
    window: tuple
    mean: float
    amplitude: float
    frequency: float  # angular
    fit_residual: float
    stationary: bool
    low_confidence: bool = False

    @property
    def cyclic_frequency(self) -> float:
        return self.frequency / (2.0 * np.pi)

    def as_dict(self) -> dict:
        return {
            "window_start": self.window[0], "window_end": self.window[1],
            "mean": self.mean, "amplitude": self.amplitude,
            "frequency": self.frequency, "cyclic_frequency": self.cyclic_frequency,
            "fit_residual": self.fit_residual, "stationary": self.stationary,
            "low_confidence": self.low_confidence,
        }


def _spectral_peak(t: np.ndarray, y: np.ndarray) -> float:
    """Angular frequency of the largest periodogram bin (zero-padded x8)."""
    h = t[1] - t[0]
    size = 8 * len(y)
    spec = np.abs(np.fft.rfft(y * np.hanning(len(y)), n=size))
    spec[0] = 0.0
    k = int(np.argmax(spec))
    return 2.0 * np.pi * k / (size * h)


def fit_sinusoid(t: np.ndarray, y: np.ndarray, omega0: float) -> tuple[float, float, float, float]:
    """Least-squares fit of mean + a cos(w t) + b sin(w t) starting at w = omega0.

    Returns (mean, amplitude, angular frequency, rms residual).
    """
    t0 = t[0]
    x = t - t0

    def linear(w):
        basis = np.column_stack([np.ones_like(x), np.cos(w * x), np.sin(w * x)])
        coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
        return coef, basis

    def resid(params):
        coef, basis = linear(params[0])
        return basis @ coef - y

    scale = max(omega0, 1e-12)
    sol = least_squares(resid, [omega0], x_scale=[scale], xtol=1e-15, ftol=1e-15, gtol=1e-15)
    w = float(abs(sol.x[0]))
    coef, basis = linear(w)
    r = basis @ coef - y
    return float(coef[0]), float(np.hypot(coef[1], coef[2])), w, float(np.sqrt(np.mean(r * r)))


def classify(trajectory: Trajectory, window_fraction: float = WINDOW_FRACTION,
             threshold: float = STATIONARY_THRESHOLD) -> OscillationInfo:
    """Stationary vs persistent oscillation over the final window of a trajectory."""
    if not 0 < window_fraction <= 0.5:
        raise PreconditionError("window fraction must lie in (0, 0.5]")
    t = np.asarray(trajectory.times, dtype=float)
    y = np.asarray(trajectory.n, dtype=float)
    start = t[-1] - window_fraction * (t[-1] - t[0])
    mask = t >= start - 1e-12 * max(1.0, abs(start))
    tw, yw = t[mask], y[mask]
    if len(tw) < 8:
        raise PreconditionError("analysis window holds too few samples")
    half_ptp = 0.5 * float(yw.max() - yw.min())
    window = (float(tw[0]), float(tw[-1]))
    stationary = half_ptp < threshold
    mean = float(yw.mean())
    if half_ptp <= NOISE_FLOOR * max(1.0, abs(mean)):
        return OscillationInfo(window, mean, half_ptp, 0.0,
                               float(np.sqrt(np.mean((yw - mean) ** 2))), True)
    # a stationary window can still carry a resolvable small oscillation; report its frequency
    omega0 = _spectral_peak(tw, yw - mean)
    fit_mean, amp, freq, res = fit_sinusoid(tw, yw, omega0)
    if stationary:
        return OscillationInfo(window, mean, half_ptp, freq, res, True)
    periods = freq * (tw[-1] - tw[0]) / (2.0 * np.pi)
    low = bool(periods < MIN_PERIODS)
    if low:
        warnings.warn(f"only {periods:.2f} periods in the analysis window", WindowTooShort,
                      stacklevel=2)
    return OscillationInfo(window, fit_mean, amp, freq, res, False, low)


def dominant_frequency(t: np.ndarray, y: np.ndarray) -> float:
    """Angular frequency of the best single-sinusoid fit to a series."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    omega0 = _spectral_peak(t, y - y.mean())
    return fit_sinusoid(t, y, omega0)[2]


@dataclass(frozen=True)
class ScanResult:
    parameter: str
    values: np.ndarray
    infos: list
    hashes: list
    errors: list = field(default_factory=list)

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([i.frequency if i is not None else np.nan for i in self.infos])

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([i.amplitude if i is not None else np.nan for i in self.infos])


def with_parameter(template: Scenario, parameter: str, value: float) -> Scenario:
    """Copy of ``template`` with one parameter changed.

    ``parameter`` is ``Omega``, ``n0`` or ``alpha.k``, ``gamma.k``, ``T.k``
    with k a 1-based index into the scenario's bath order.  Changing Omega
    keeps every bath parameter fixed in absolute units.
    """
    if parameter == "Omega":
        return template.replace(frequency_mode=FrequencyMode.RENORMALIZED, frequency_value=value)
    if parameter == "n0":
        return template.replace(n0=value)
    name, _, index = parameter.partition(".")
    fields = {"alpha": "alpha", "gamma": "gamma", "T": "temperature",
              "temperature": "temperature"}
    if name not in fields or not index.isdigit():
        raise PreconditionError(f"unknown scan parameter {parameter!r}")
    k = int(index) - 1
    if not 0 <= k < template.N:
        raise PreconditionError(f"bath index {index} out of range")
    baths = list(template.baths)
    b = baths[k]
    kwargs = {"statistics": b.statistics, "alpha": b.alpha, "gamma": b.gamma,
              "temperature": b.temperature}
    kwargs[fields[name]] = value
    baths[k] = BathSpec(**kwargs)
    return template.replace(baths=tuple(baths))


def worker_count() -> int:
    env = os.environ.get("MIXBATH_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise PreconditionError("MIXBATH_THREADS must be a positive integer") from None
        if n < 1:
            raise PreconditionError("MIXBATH_THREADS must be a positive integer")
        return n
    return max(1, os.cpu_count() or 1)


def scan(template: Scenario, parameter: str, values, t_max: float = 50.0, dt: float = 0.005,
         window_fraction: float = WINDOW_FRACTION, threshold: float = STATIONARY_THRESHOLD,
         workers: int | None = None) -> ScanResult:
    """Run the full pipeline at every parameter value and classify the late window."""
    values = np.asarray(values, dtype=float)
    if len(values) > 1 and not (np.all(np.diff(values) > 0) or np.all(np.diff(values) < 0)):
        raise PreconditionError("scan values must be strictly monotone")
    times = time_grid(t_max, dt)

    def run(value):
        try:
            sc = with_parameter(template, parameter, value)
            if sc.is_pure:
                traj = evolve_closed_form(sc, times)
            else:
                traj = evolve_diffusion(sc, times)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", WindowTooShort)
                info = classify(traj, window_fraction, threshold)
            return info, sc.digest, None
        except MixbathError as exc:
            return None, "", f"{type(exc).__name__}: {exc}"

    n_workers = workers or worker_count()
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(run, values))
    else:
        results = [run(v) for v in values]
    return ScanResult(parameter, values, [r[0] for r in results], [r[1] for r in results],
                      [r[2] for r in results])
