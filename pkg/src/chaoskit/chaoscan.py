"""Parameter-space scanning: sections, bifurcation sweeps, exponent maps,
and bisection onto the stability boundary.

Grid scans farm cells out to a thread pool (kernels drop the GIL); the pool
size comes from ``CHAOS_THREADS`` or the CPU count.  Results are keyed by
cell index before assembly, so output is deterministic and independent of
evaluation order.  Exponents within ``NOISE_FLOOR`` of zero are reported as
indeterminate rather than forced to a side.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass

import numpy as np

from .analysis import lyapunov_two_trajectory, lyapunov_variational
from .errors import (
    DivergedTrajectory,
    Indeterminate,
    NoBracket,
    SectionMismatch,
    ValidationError,
)
from .integrate import (
    COMPLETED,
    IntegratorConfig,
    Stroboscopic,
    Trajectory,
    VelocityZeroCrossing,
    integrate_with_events,
)
from .model import FORM_B, State, SystemSpec, with_param

NOISE_FLOOR = 0.01
CLUSTER_RADIUS = 1e-2

CELL_OK = "ok"
CELL_DIVERGED = "diverged"
CELL_EMPTY = "empty"

_ESTIMATORS = {
    "two_trajectory": lyapunov_two_trajectory,
    "variational": lyapunov_variational,
}


def max_workers() -> int:
    """Thread-pool width: CHAOS_THREADS if set, else the CPU count."""
    raw = os.environ.get("CHAOS_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _run_indexed(tasks, order=None):
    """Evaluate callables, preserving index association regardless of order."""
    if order is None:
        order = range(len(tasks))
    order = list(order)
    results = [None] * len(tasks)
    workers = min(max_workers(), max(len(tasks), 1))
    if workers <= 1:
        for i in order:
            results[i] = tasks[i]()
        return results
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(tasks[i]): i for i in order}
        for fut in as_completed(futures):
            results[futures[fut]] = fut.result()
    return results


@dataclass(frozen=True)
class Axis:
    """Evenly spaced scan over one named parameter."""

    name: str
    lo: float
    hi: float
    steps: int

    def __post_init__(self):
        if self.steps < 2:
            raise ValidationError([f"axis {self.name!r} needs at least 2 steps, got {self.steps}"])
        if not self.hi > self.lo:
            raise ValidationError([f"axis {self.name!r} needs hi > lo, got [{self.lo}, {self.hi}]"])

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.steps)


@dataclass(frozen=True)
class PoincareSection:
    """Post-transient section hits.

    points has two columns: (x, v) for stroboscopic sections, (t, x) for
    velocity-zero sections.
    """

    spec: SystemSpec
    section: object
    points: np.ndarray
    transient_fraction: float
    status: str

    def __len__(self):
        return len(self.points)

    def x_coords(self) -> np.ndarray:
        """Position coordinate of each hit, whichever column that is."""
        if isinstance(self.section, Stroboscopic):
            return self.points[:, 0]
        return self.points[:, 1]


def poincare(
    spec: SystemSpec,
    initial: State,
    cfg: IntegratorConfig,
    section,
    transient_fraction: float = 0.1,
) -> PoincareSection:
    """Section hits after discarding the leading transient_fraction of the run.

    Stroboscopic sections only make sense against the periodic forcing of
    form B, so they require form B with delta != 0; anything else raises
    SectionMismatch.  A diverged run still returns its (possibly empty)
    post-transient hits, flagged by status.
    """
    if isinstance(section, Stroboscopic):
        if spec.form != FORM_B or spec.params.delta == 0.0:
            raise SectionMismatch(
                "stroboscopic sections need the periodically forced form B with delta != 0"
            )
    elif not isinstance(section, VelocityZeroCrossing):
        raise TypeError(f"unsupported section type {type(section).__name__}")
    if not 0.0 <= transient_fraction < 1.0:
        raise ValueError(f"transient_fraction must be in [0, 1), got {transient_fraction}")
    traj, events = integrate_with_events(spec, initial, cfg, section)
    t_cut = initial.t + transient_fraction * (cfg.t_end - initial.t)
    keep = events.t >= t_cut
    if isinstance(section, Stroboscopic):
        points = np.column_stack((events.x[keep], events.v[keep]))
    else:
        points = np.column_stack((events.t[keep], events.x[keep]))
    if traj.status != COMPLETED:
        status = CELL_DIVERGED
    elif len(points) == 0:
        status = CELL_EMPTY
    else:
        status = CELL_OK
    return PoincareSection(spec, section, points, transient_fraction, status)


def cluster_count(points: np.ndarray, radius: float = CLUSTER_RADIUS) -> int:
    """Number of single-linkage clusters at the given merge radius.

    Points are bucketed on a grid of cell size ``radius`` so only neighbors
    are compared; exact duplicates are collapsed first.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be an (n, 2) array")
    if len(pts) == 0:
        return 0
    pts = np.unique(pts, axis=0)
    n = len(pts)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[rj] = ri

    cells: dict[tuple[int, int], list[int]] = {}
    keys = np.floor(pts / radius).astype(np.int64)
    for i, key in enumerate(map(tuple, keys)):
        cells.setdefault(key, []).append(i)
    r2 = radius * radius
    for (ci, cj), idx in cells.items():
        for di in (0, 1):
            for dj in (-1, 0, 1):
                if di == 0 and dj < 0:
                    continue
                nb = cells.get((ci + di, cj + dj))
                if nb is None:
                    continue
                same = di == 0 and dj == 0
                for a in idx:
                    cand = np.array(nb, dtype=np.int64)
                    if same:
                        cand = cand[cand > a]
                    if len(cand) == 0:
                        continue
                    d2 = np.sum((pts[cand] - pts[a]) ** 2, axis=1)
                    for b in cand[d2 <= r2]:
                        union(a, int(b))
    return len({find(i) for i in range(n)})


@dataclass(frozen=True)
class BifurcationDiagram:
    """Section x-coordinates per parameter value.

    cells[i] holds the post-transient x-coordinates for values()[i]; a
    diverged cell carries an empty array and the "diverged" status so plots
    can mark escape explicitly.
    """

    spec: SystemSpec
    axis: Axis
    values: np.ndarray
    cells: list[np.ndarray]
    statuses: list[str]


def bifurcation_sweep(
    spec: SystemSpec,
    axis: Axis,
    initial: State,
    cfg: IntegratorConfig,
    section,
    transient_fraction: float = 0.1,
    eval_order=None,
) -> BifurcationDiagram:
    """Poincare sections across an axis, one independent run per cell.

    Every cell starts from the same initial state and integrator settings;
    there is no continuation between neighboring cells, so hysteresis cannot
    leak across the sweep.
    """
    values = axis.values()

    def cell(val):
        def run():
            sec = poincare(
                with_param(spec, axis.name, val), initial, cfg, section, transient_fraction
            )
            return sec.x_coords().copy(), sec.status

        return run

    results = _run_indexed([cell(float(v)) for v in values], eval_order)
    cells = [r[0] for r in results]
    statuses = [r[1] for r in results]
    return BifurcationDiagram(spec, axis, values, cells, statuses)


@dataclass(frozen=True)
class LambdaMap:
    """Largest-exponent estimates over a two-axis grid.

    lam is indexed [i, j] for (axis1.values()[i], axis2.values()[j]); cells
    whose trajectory escaped hold NaN and the "diverged" status.
    """

    spec: SystemSpec
    axis1: Axis
    axis2: Axis
    lam: np.ndarray
    statuses: list[list[str]]
    estimator: str


def lambda_map(
    spec: SystemSpec,
    axis1: Axis,
    axis2: Axis,
    initial: State,
    cfg: IntegratorConfig,
    estimator: str = "variational",
    transient_fraction: float = 0.1,
    eval_order=None,
    **estimator_kwargs,
) -> LambdaMap:
    """Exponent estimates over the product grid of two axes."""
    if estimator not in _ESTIMATORS:
        raise ValueError(f"unknown estimator {estimator!r}; expected one of {sorted(_ESTIMATORS)}")
    est = _ESTIMATORS[estimator]
    v1 = axis1.values()
    v2 = axis2.values()

    def cell(val1, val2):
        def run():
            s = with_param(with_param(spec, axis1.name, val1), axis2.name, val2)
            try:
                lam = est(
                    s, initial, cfg, transient_fraction=transient_fraction, **estimator_kwargs
                ).lam
                return lam, CELL_OK
            except DivergedTrajectory:
                return math.nan, CELL_DIVERGED

        return run

    tasks = [cell(float(a), float(b)) for a in v1 for b in v2]
    results = _run_indexed(tasks, eval_order)
    lam = np.empty((axis1.steps, axis2.steps))
    statuses = []
    k = 0
    for i in range(axis1.steps):
        row = []
        for j in range(axis2.steps):
            lam[i, j] = results[k][0]
            row.append(results[k][1])
            k += 1
        statuses.append(row)
    return LambdaMap(spec, axis1, axis2, lam, statuses, estimator)


@dataclass(frozen=True)
class CriticalSet:
    """Bisection record for one crossing of the stability boundary.

    probes lists every (value, lambda) pair in evaluation order; the final
    bracket [lo, hi] has opposite-signed exponents and width <= the requested
    tolerance, and boundary is its midpoint.
    """

    spec: SystemSpec
    axis: str
    boundary: float
    lo: float
    hi: float
    lam_lo: float
    lam_hi: float
    tolerance: float
    probes: list[tuple[float, float]]
    estimator: str


def critical_bisect(
    spec: SystemSpec,
    axis: str,
    lo: float,
    hi: float,
    tol: float,
    initial: State,
    cfg: IntegratorConfig,
    estimator: str = "variational",
    transient_fraction: float = 0.1,
    **estimator_kwargs,
) -> CriticalSet:
    """Bisect a parameter interval onto the sign change of the exponent.

    Both endpoint exponents must clear twice the noise floor (|lam| >
    2*NOISE_FLOOR), otherwise the sign is untrustworthy and Indeterminate is
    raised; equal signs raise NoBracket.  A probe whose trajectory escapes
    counts as unstable.
    """
    if estimator not in _ESTIMATORS:
        raise ValueError(f"unknown estimator {estimator!r}; expected one of {sorted(_ESTIMATORS)}")
    if not hi > lo:
        raise ValidationError([f"need hi > lo, got [{lo}, {hi}]"])
    if not tol > 0.0:
        raise ValidationError([f"tolerance must be > 0, got {tol}"])
    est = _ESTIMATORS[estimator]

    def probe(val):
        s = with_param(spec, axis, val)
        try:
            return est(s, initial, cfg, transient_fraction=transient_fraction, **estimator_kwargs).lam
        except DivergedTrajectory:
            return math.inf

    probes: list[tuple[float, float]] = []
    lam_lo = probe(lo)
    probes.append((lo, lam_lo))
    lam_hi = probe(hi)
    probes.append((hi, lam_hi))
    for val, lam in probes:
        if abs(lam) <= 2.0 * NOISE_FLOOR:
            raise Indeterminate(
                f"lambda({val:g}) = {lam:.4g} sits within the noise floor "
                f"(+/-{2.0 * NOISE_FLOOR:g}); widen the interval or lengthen the run"
            )
    if (lam_lo > 0.0) == (lam_hi > 0.0):
        raise NoBracket(
            f"lambda has the same sign at both ends: lambda({lo:g}) = {lam_lo:.4g}, "
            f"lambda({hi:g}) = {lam_hi:.4g}"
        )
    a, fa = lo, lam_lo
    b, fb = hi, lam_hi
    while b - a > tol:
        mid = 0.5 * (a + b)
        fm = probe(mid)
        probes.append((mid, fm))
        if (fm > 0.0) == (fa > 0.0):
            a, fa = mid, fm
        else:
            b, fb = mid, fm
    return CriticalSet(
        spec=spec,
        axis=axis,
        boundary=0.5 * (a + b),
        lo=a,
        hi=b,
        lam_lo=fa,
        lam_hi=fb,
        tolerance=b - a,
        probes=probes,
        estimator=estimator,
    )
