"""Annealed gradient descent on the relaxed conditional entropy.

One call optimizes a single free region (center and radius) against a fixed
dataset, label vector, and frozen-region set.  The sigmoid sharpness alpha
follows a geometric annealing schedule: small alpha smooths the objective
so distant structure pulls on the gradient, large alpha approaches the hard
indicator.  The iterate with the lowest *hard* conditional entropy seen
anywhere along the run is returned, so late-stage wandering cannot lose an
earlier optimum.

Scale-derived defaults use s_bar, the median over trajectories of the
minimum squared distance to the initial center, broadened by the squared
initial radius: alpha0 = 4 / s_bar, alpha_max = 1e4 / s_bar,
lr = 0.03 * sqrt(s_bar).  Broadening matters on dense long-horizon corpora
where the median alone collapses and would start the anneal already hard.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .core import Dataset, Region, dataset_min_sq_dists
from .entropy import RelaxedObjective
from .errors import (
    DegenerateLabelsError,
    InvalidParameterError,
    OptimizationError,
)

DEFAULT_MAX_STEPS = 400
DEFAULT_TOL = 1e-4
DEFAULT_GROWTH = 2.0
# annealing reaches alpha_max (a factor 1e4 over alpha0) well before
# max_steps: 2^(400/25 - 1) > 1e4
DEFAULT_PERIOD_FRACTION = 16
DEFAULT_LR_SCALE = 0.03
DEFAULT_ALPHA0_FACTOR = 4.0
DEFAULT_ALPHA_MAX_FACTOR = 1e4
DEFAULT_MAX_STEP_SCALE = 0.5
# a "stable" stop additionally requires the relaxation to have collapsed
# onto the hard objective (or the schedule to be exhausted); see
# optimize_region
STABLE_GAP_FACTOR = 10.0


@dataclass(frozen=True)
class AnnealSchedule:
    """Geometric annealing of the sigmoid sharpness.

    alpha(step) = min(alpha0 * growth ** (step // period), alpha_max)
    """

    alpha0: float
    alpha_max: float
    growth: float = DEFAULT_GROWTH
    period: int = 25

    def __post_init__(self):
        if not np.isfinite(self.alpha0) or self.alpha0 <= 0.0:
            raise InvalidParameterError(f"alpha0 must be > 0, got {self.alpha0!r}")
        if not np.isfinite(self.alpha_max) or self.alpha_max < self.alpha0:
            raise InvalidParameterError(
                f"alpha_max must be finite and >= alpha0, got {self.alpha_max!r}"
            )
        if not np.isfinite(self.growth) or self.growth < 1.0:
            raise InvalidParameterError(f"growth must be >= 1, got {self.growth!r}")
        if int(self.period) < 1:
            raise InvalidParameterError(f"period must be >= 1, got {self.period!r}")
        object.__setattr__(self, "period", int(self.period))

    def alpha_at(self, step: int) -> float:
        return float(min(self.alpha0 * self.growth ** (step // self.period),
                         self.alpha_max))


@dataclass
class OptimTrace:
    """Per-step history of one optimization run.

    Parallel lists; ``center`` entries are (d,) arrays.  Exportable as CSV
    for plotting.
    """

    step: list = field(default_factory=list)
    alpha: list = field(default_factory=list)
    h_soft: list = field(default_factory=list)
    h_hard: list = field(default_factory=list)
    grad_norm: list = field(default_factory=list)
    center: list = field(default_factory=list)
    radius: list = field(default_factory=list)

    def append(self, step, alpha, h_soft, h_hard, grad_norm, center, radius):
        self.step.append(int(step))
        self.alpha.append(float(alpha))
        self.h_soft.append(float(h_soft))
        self.h_hard.append(float(h_hard))
        self.grad_norm.append(float(grad_norm))
        self.center.append(np.array(center, dtype=float))
        self.radius.append(float(radius))

    def __len__(self):
        return len(self.step)

    def write_csv(self, path) -> None:
        dim = self.center[0].shape[0] if self.center else 0
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "alpha", "h_soft", "h_hard", "grad_norm", "radius"]
                       + [f"c{i}" for i in range(dim)])
            for i in range(len(self.step)):
                w.writerow([self.step[i], repr(self.alpha[i]), repr(self.h_soft[i]),
                            repr(self.h_hard[i]), repr(self.grad_norm[i]),
                            repr(self.radius[i])] + [repr(c) for c in self.center[i]])


@dataclass(frozen=True)
class OptimResult:
    """Outcome of :func:`optimize_region`.

    ``region`` is the iterate with the lowest hard conditional entropy seen
    (earliest such step on ties); ``hard_value`` its entropy in nats.
    """

    region: Region
    hard_value: float
    best_step: int
    n_steps: int
    stop_reason: str
    init: Region
    s_bar: float
    schedule: AnnealSchedule
    trace: OptimTrace


def scale_from_init(dataset: Dataset, center, radius: float | None = None) -> float:
    """Median over trajectories of min squared distance to ``center``.

    When ``radius`` is given the result is at least ``radius ** 2``, so the
    starting sigmoid stays smooth at the scale of the region actually being
    fit.  Guards against a zero median (center sitting on most trajectories)
    by falling back to the mean, then to a tiny positive floor.
    """
    values, _ = dataset_min_sq_dists(dataset, center)
    s = float(np.median(values))
    if s <= 0.0:
        s = float(values.mean())
    if s <= 0.0:
        s = 1e-12
    if radius is not None:
        s = max(s, float(radius) ** 2)
    return s


def epsilon_bounds(dataset: Dataset) -> tuple[float, float]:
    """Default radius bounds: (1e-3 * diameter, diameter)."""
    diam = dataset.workspace_diameter()
    return 1e-3 * diam, diam


def optimize_region(dataset: Dataset, labels, frozen, init: Region, *,
                    eps_bounds: tuple[float, float] | None = None,
                    schedule: AnnealSchedule | None = None,
                    lr: float | None = None,
                    max_steps: int = DEFAULT_MAX_STEPS,
                    tol: float = DEFAULT_TOL,
                    max_step: float | None = None,
                    radius_lr_scale: float = 1.0,
                    n_labels: int | None = None,
                    ctx: RelaxedObjective | None = None) -> OptimResult:
    """Gradient descent on the relaxed conditional entropy of one region.

    Parameters
    ----------
    dataset, labels : the corpus and its discrete reward labels.
    frozen : sequence of Region
        Already-found regions, kept hard during optimization.
    init : Region
        Starting center and radius.  The radius must lie within
        ``eps_bounds``.
    eps_bounds : (float, float), optional
        Radius box constraint; defaults to
        (1e-3 * workspace diameter, workspace diameter).
    schedule : AnnealSchedule, optional
        Defaults to alpha0 = 4/s_bar doubling every max_steps // 16 steps,
        capped at 1e4 / s_bar.
    lr : float, optional
        Step size; defaults to 0.03 * sqrt(s_bar).
    max_steps : int
        Maximum number of gradient updates.
    tol : float
        Stability threshold in nats.  The run stops early when both the
        hard and the relaxed entropy varied by less than ``tol`` over one
        full annealing period (the window always spans an alpha increase)
        and, additionally, the relaxation has collapsed onto the hard
        objective: |H_soft - H_hard| <= 10 * tol, or alpha has reached
        alpha_max.  Without the collapse gate a run still early in the
        anneal looks flat simply because alpha is too small to move
        anything yet.  Non-positive tol disables early stopping.
    max_step : float, optional
        Norm clip for a single update; defaults to 0.5 * sqrt(s_bar).
        Late in the anneal the objective is nearly piecewise-constant with
        steep sigmoid walls, and one boundary-straddling trajectory can
        otherwise throw the iterate across the workspace.
    radius_lr_scale : float
        Multiplier on the radius step size.
    ctx : RelaxedObjective, optional
        Prepared evaluator to reuse across restarts.

    Returns
    -------
    OptimResult

    Raises
    ------
    DegenerateLabelsError
        If all trajectories carry the same label.
    InvalidParameterError
        If the initial radius violates ``eps_bounds``.
    OptimizationError
        If the objective or gradient goes non-finite (partial trace
        attached).
    """
    if ctx is None:
        ctx = RelaxedObjective(dataset, labels, frozen=frozen, n_labels=n_labels)
    if ctx.degenerate_labels:
        raise DegenerateLabelsError(
            "all trajectories share one reward label; conditional entropy is "
            "identically zero"
        )
    if eps_bounds is None:
        eps_bounds = epsilon_bounds(dataset)
    eps_min, eps_max = float(eps_bounds[0]), float(eps_bounds[1])
    if not (0.0 < eps_min <= eps_max) or not np.isfinite(eps_max):
        raise InvalidParameterError(
            f"epsilon bounds must satisfy 0 < eps_min <= eps_max, got {eps_bounds!r}"
        )
    if init.dim != dataset.dim:
        raise InvalidParameterError(
            f"init region has dim {init.dim}, dataset has dim {dataset.dim}"
        )
    if not (eps_min <= init.radius <= eps_max):
        raise InvalidParameterError(
            f"initial radius {init.radius:.6g} outside "
            f"[{eps_min:.6g}, {eps_max:.6g}]"
        )
    if max_steps < 1:
        raise InvalidParameterError(f"max_steps must be >= 1, got {max_steps}")

    s_bar = scale_from_init(dataset, init.center, init.radius)
    if schedule is None:
        period = max(1, max_steps // DEFAULT_PERIOD_FRACTION)
        schedule = AnnealSchedule(
            alpha0=DEFAULT_ALPHA0_FACTOR / s_bar,
            alpha_max=DEFAULT_ALPHA_MAX_FACTOR / s_bar,
            growth=DEFAULT_GROWTH,
            period=period,
        )
    if lr is None:
        lr = DEFAULT_LR_SCALE * float(np.sqrt(s_bar))
    if lr <= 0.0 or not np.isfinite(lr):
        raise InvalidParameterError(f"lr must be finite and > 0, got {lr!r}")
    if max_step is None:
        max_step = DEFAULT_MAX_STEP_SCALE * float(np.sqrt(s_bar))

    center = np.array(init.center, dtype=float, copy=True)
    radius = float(init.radius)
    trace = OptimTrace()
    window = schedule.period + 1

    best_h = np.inf
    best_center = center.copy()
    best_radius = radius
    best_step = 0
    stop_reason = "max_steps"
    n_updates = 0

    for step in range(max_steps + 1):
        alpha = schedule.alpha_at(step)
        ev = ctx.evaluate(center, radius, alpha)
        gnorm = float(np.sqrt((ev.grad_center ** 2).sum() + ev.grad_radius ** 2))
        trace.append(step, alpha, ev.value, ev.hard_value, gnorm, center, radius)

        if not np.isfinite(ev.value) or not np.isfinite(gnorm):
            raise OptimizationError(
                f"non-finite objective or gradient at step {step}", trace=trace
            )
        if ev.hard_value < best_h:
            best_h = ev.hard_value
            best_center = center.copy()
            best_radius = radius
            best_step = step

        if tol > 0.0 and len(trace) >= window:
            hh = trace.h_hard[-window:]
            hs = trace.h_soft[-window:]
            collapsed = (alpha >= schedule.alpha_max
                         or abs(ev.value - ev.hard_value) <= STABLE_GAP_FACTOR * tol)
            if (collapsed and (max(hh) - min(hh) < tol)
                    and (max(hs) - min(hs) < tol)):
                stop_reason = "stable"
                break
        if step == max_steps:
            break

        delta_c = lr * ev.grad_center
        norm = float(np.sqrt((delta_c ** 2).sum()))
        if norm > max_step:
            delta_c *= max_step / norm
        delta_r = lr * radius_lr_scale * ev.grad_radius
        if abs(delta_r) > max_step:
            delta_r = np.sign(delta_r) * max_step
        center = center - delta_c
        radius = float(np.clip(radius - delta_r, eps_min, eps_max))
        n_updates += 1

    return OptimResult(
        region=Region(center=best_center, radius=best_radius),
        hard_value=float(best_h),
        best_step=best_step,
        n_steps=n_updates,
        stop_reason=stop_reason,
        init=init,
        s_bar=s_bar,
        schedule=schedule,
        trace=trace,
    )
