"""Randomized invariant suite behind ``mixbath verify``."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .bathintegrals import BathIntegralTable, QuadratureSpec
from .errors import UnstableRoots
from .evolution import evolve_closed_form, time_grid
from .kernels import check_stable, eval_AB, eval_MN
from .polyroots import solve_roots
from .scenario import BathSpec, FrequencyMode, Scenario, SystemSpec

RESIDUE_TOL = 1e-9
CONJUGATE_TOL = 1e-9
INITIAL_TOL = 1e-10
FD_TOL = 1e-6
RANGE_TOL = 1e-8


@dataclass
class CheckResult:
    name: str
    passed: int = 0
    failed: int = 0
    worst: float = 0.0
    details: list = field(default_factory=list)

    def record(self, ok: bool, value: float, detail: str = "") -> None:
        self.worst = max(self.worst, float(value))
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            if detail and len(self.details) < 5:
                self.details.append(detail)

    @property
    def ok(self) -> bool:
        return self.failed == 0


def random_scenario(rng: np.random.Generator, max_baths: int = 4) -> Scenario:
    """Stable scenario with alpha in [0, 0.2], gamma in [5, 20], Omega in [0.5, 2]."""
    while True:
        n = int(rng.integers(1, max_baths + 1))
        stats = ["fermi", "bose"]
        system = SystemSpec(stats[rng.integers(2)], FrequencyMode.RENORMALIZED,
                            float(rng.uniform(0.5, 2.0)), float(rng.choice([0.0, 0.5, 1.0])))
        baths = tuple(BathSpec(stats[rng.integers(2)], float(rng.uniform(0.0, 0.2)),
                               float(rng.uniform(5.0, 20.0)), float(rng.uniform(0.0, 2.0)))
                      for _ in range(n))
        sc = Scenario(system, baths)
        if sc.system.statistics.value == "fermi" and sc.n0 > 1:
            continue
        try:
            check_stable(solve_roots(sc))
        except UnstableRoots:
            continue
        return sc


def _residue_identity(roots) -> float:
    w = np.array([0.0, 0.7, 3.1])
    xi = roots.full_residues(w)
    nodes = np.concatenate([(-1j * w)[:, None], np.broadcast_to(roots.roots, (len(w), roots.n_roots))],
                           axis=1)
    n0 = roots.n_roots
    worst = 0.0
    for m in range(n0 + 1):
        terms = xi * nodes ** m
        total = terms.sum(axis=1)
        target = 1.0 if m == n0 else 0.0
        scale = np.maximum(np.abs(terms).sum(axis=1), 1.0)
        worst = max(worst, float(np.max(np.abs(total - target) / scale)))
    return worst


def _conjugation(roots) -> float:
    r = roots.roots
    return float(max(np.min(np.abs(np.conj(z) - r)) for z in r))


def _fd_derivatives(roots, sc) -> float:
    t = np.array([0.3, 1.1, 2.7])
    h = 1e-5
    k = eval_AB(roots, sc, t)
    kp = eval_AB(roots, sc, t + h)
    km = eval_AB(roots, sc, t - h)
    worst = 0.0
    for exact, plus, minus in ((k.dA_dt, kp.A, km.A), (k.dB_dt, kp.B, km.B)):
        fd = (plus - minus) / (2 * h)
        scale = np.maximum(np.abs(exact), 1e-3)
        worst = max(worst, float(np.max(np.abs(fd - exact) / scale)))
    return worst


def run_suite(n_scenarios: int = 50, seed: int = 20240601, with_trajectories: bool = True,
              t_max: float = 20.0, dt: float = 0.02) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    names = ["residue identity", "root conjugation", "A(0)=1, B(0)=0", "M(w,0)=N(w,0)=0",
             "derivatives vs finite difference", "quadrature step-halving",
             "occupation range"]
    checks = {n: CheckResult(n) for n in names}
    times = time_grid(t_max, dt)
    for i in range(n_scenarios):
        sc = random_scenario(rng)
        tag = f"scenario {i} ({sc.digest})"
        roots = solve_roots(sc)
        v = _residue_identity(roots)
        checks["residue identity"].record(v <= RESIDUE_TOL, v, tag)
        v = _conjugation(roots)
        checks["root conjugation"].record(v <= CONJUGATE_TOL, v, tag)
        k0 = eval_AB(roots, sc, np.array([0.0]))
        v = max(abs(k0.A[0] - 1.0), abs(k0.B[0]))
        checks["A(0)=1, B(0)=0"].record(v <= INITIAL_TOL, v, tag)
        mn = eval_MN(roots, sc, np.array([0.1, 1.0, 5.0, 30.0]), np.array([0.0]))
        v = float(max(np.max(np.abs(mn.M)), np.max(np.abs(mn.N))))
        checks["M(w,0)=N(w,0)=0"].record(v <= INITIAL_TOL, v, tag)
        v = _fd_derivatives(roots, sc)
        checks["derivatives vs finite difference"].record(v <= FD_TOL, v, tag)
        if not with_trajectories:
            continue
        spec = QuadratureSpec()
        table = BathIntegralTable(roots, sc, t_max, spec)
        scale = np.maximum(np.abs(table.I_inf), 1.0)
        v = float(np.max(table.error_estimate / (spec.rel_tol * scale + spec.abs_tol)))
        checks["quadrature step-halving"].record(v <= 1.0, v, tag)
        if sc.is_pure:
            n = evolve_closed_form(sc, times, roots, table).n
            if sc.eps_a == -1:
                v = float(max(-n.min(), n.max() - 1.0, 0.0))
            else:
                v = float(max(-n.min(), 0.0))
            checks["occupation range"].record(v <= RANGE_TOL, v, tag)
    return list(checks.values())


def format_report(results: list[CheckResult], elapsed: float | None = None) -> str:
    lines = []
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        lines.append(f"{status}  {r.name:<34} passed={r.passed:<3d} failed={r.failed:<3d} "
                     f"worst={r.worst:.3e}")
        lines += [f"      {d}" for d in r.details]
    if elapsed is not None:
        lines.append(f"elapsed {elapsed:.1f} s")
    return "\n".join(lines)


def verify(quick: bool = False, seed: int = 20240601) -> tuple[bool, list[CheckResult], float]:
    start = time.perf_counter()
    results = run_suite(10 if quick else 50, seed)
    return all(r.ok for r in results), results, time.perf_counter() - start
