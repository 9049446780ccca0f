"""Multi-stage discovery of reward-explaining regions.

Regions are found greedily.  Each stage freezes everything found so far,
seeds ``n_restarts`` candidate spheres from the success-state density (plus
a uniform radius draw), optimizes each with annealed gradient descent, and
keeps the candidate whose *hard* conditional entropy is lowest.  A
degenerate floor candidate — the whole workspace as one sphere — is always
scored too; it changes nothing (its indicator is constant 1), so the
per-stage conditional entropy can never increase.

Reports are deterministic functions of (corpus, config, seed): restarts get
independent seed-sequence substreams keyed by (stage, restart), and results
are collected by restart index, so running with more worker threads changes
wall time only, never bytes.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import Dataset, Region, assignment_indices, membership_matrix
from .entropy import (
    LN2,
    JointTable,
    RelaxedObjective,
    estimate_joint,
    majority_readout,
    marginal_entropy,
)
from .errors import DegenerateLabelsError, InvalidParameterError, SeedingError
from .kde import InitConfig, sample_center
from . import optimize as _opt
from .optimize import (
    DEFAULT_MAX_STEPS,
    DEFAULT_TOL,
    AnnealSchedule,
    OptimResult,
    epsilon_bounds,
    optimize_region,
    scale_from_init,
)
from .rewards import RewardAlphabet, discretize_rewards

SCHEMA_VERSION = 1

# a stage explaining less than this many nats is flagged as no-structure
NO_STRUCTURE_IG = 0.05

# initial radii are drawn from [eps_min, eps_max * this]; radii larger than
# a quarter of the workspace diameter swallow nearly every trajectory and
# start the optimizer on a flat plateau (the projection bound stays eps_max).
# Even restarts draw uniformly, odd restarts square-law (small-biased):
# growing an undersized sphere onto a tight reward pocket works far more
# reliably than shrinking an oversized one (whose relaxed objective prefers
# staying fat at every smooth alpha), while conjunctive stages still need
# the occasional wide ball that reaches a second structure from afar.
INIT_RADIUS_FRACTION = 0.25


@dataclass(frozen=True)
class DiscoveryConfig:
    """All knobs for :func:`discover`.

    ``None`` means "derive from the data": epsilon bounds come from the
    workspace diameter, the learning rate and annealing endpoints from
    s_bar (median squared distance to the restart's initial center), and
    ``reward_clusters`` from the number of distinct rewards (capped at 2).

    ``jobs`` parallelizes restarts within a stage and never affects
    results, only wall time.
    """

    n_regions: int = 1
    n_restarts: int = 8
    seed: int = 0
    reward_clusters: int | None = None
    jobs: int = 1
    ig_floor: float | None = None

    # optimizer
    lr: float | None = None
    max_steps: int = DEFAULT_MAX_STEPS
    tol: float = DEFAULT_TOL
    alpha0: float | None = None
    growth: float = _opt.DEFAULT_GROWTH
    period: int | None = None
    alpha_max: float | None = None
    max_step: float | None = None
    radius_lr_scale: float = 1.0
    eps_min: float | None = None
    eps_max: float | None = None

    # center seeding
    init_samples: int = 64
    bandwidth: float | None = None
    success_labels: tuple | None = None
    weighted_sampling: bool = False

    def validate(self) -> None:
        if self.n_regions < 1:
            raise InvalidParameterError(
                f"n_regions must be >= 1, got {self.n_regions}"
            )
        if self.n_restarts < 1:
            raise InvalidParameterError(
                f"n_restarts must be >= 1, got {self.n_restarts}"
            )
        if self.jobs < 1:
            raise InvalidParameterError(f"jobs must be >= 1, got {self.jobs}")
        if self.reward_clusters is not None and self.reward_clusters < 1:
            raise InvalidParameterError(
                f"reward_clusters must be >= 1, got {self.reward_clusters}"
            )

    def to_dict(self) -> dict:
        """Serializable snapshot.  Excludes ``jobs`` (execution detail, must
        not change report bytes)."""
        d = {
            "n_regions": self.n_regions,
            "n_restarts": self.n_restarts,
            "seed": self.seed,
            "reward_clusters": self.reward_clusters,
            "ig_floor": self.ig_floor,
            "lr": self.lr,
            "max_steps": self.max_steps,
            "tol": self.tol,
            "alpha0": self.alpha0,
            "growth": self.growth,
            "period": self.period,
            "alpha_max": self.alpha_max,
            "max_step": self.max_step,
            "radius_lr_scale": self.radius_lr_scale,
            "eps_min": self.eps_min,
            "eps_max": self.eps_max,
            "init_samples": self.init_samples,
            "bandwidth": self.bandwidth,
            "success_labels": (list(self.success_labels)
                               if self.success_labels is not None else None),
            "weighted_sampling": self.weighted_sampling,
        }
        return d


@dataclass(frozen=True)
class RestartRecord:
    restart: int
    init: Region
    region: Region
    h_hard: float
    best_step: int
    n_steps: int
    stop_reason: str
    s_bar: float

    def to_dict(self) -> dict:
        return {
            "restart": self.restart,
            "init": self.init.to_dict(),
            "region": self.region.to_dict(),
            "h_hard_nats": self.h_hard,
            "best_step": self.best_step,
            "n_steps": self.n_steps,
            "stop_reason": self.stop_reason,
            "s_bar": self.s_bar,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RestartRecord":
        return cls(
            restart=int(d["restart"]),
            init=Region.from_dict(d["init"]),
            region=Region.from_dict(d["region"]),
            h_hard=float(d["h_hard_nats"]),
            best_step=int(d["best_step"]),
            n_steps=int(d["n_steps"]),
            stop_reason=str(d["stop_reason"]),
            s_bar=float(d["s_bar"]),
        )


@dataclass(frozen=True)
class StageRecord:
    stage: int
    h_before: float
    h_after: float
    region: Region
    chosen_kind: str            # "restart" | "floor"
    chosen_restart: int | None
    floor_h: float
    no_structure: bool
    restarts: tuple = ()

    @property
    def information_gain(self) -> float:
        return self.h_before - self.h_after

    def to_dict(self) -> dict:
        ig = self.information_gain
        return {
            "stage": self.stage,
            "h_before_nats": self.h_before,
            "h_after_nats": self.h_after,
            "ig_nats": ig,
            "ig_bits": ig / LN2,
            "region": self.region.to_dict(),
            "chosen": {"kind": self.chosen_kind, "restart": self.chosen_restart},
            "floor_h_nats": self.floor_h,
            "no_structure": self.no_structure,
            "restarts": [r.to_dict() for r in self.restarts],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StageRecord":
        return cls(
            stage=int(d["stage"]),
            h_before=float(d["h_before_nats"]),
            h_after=float(d["h_after_nats"]),
            region=Region.from_dict(d["region"]),
            chosen_kind=str(d["chosen"]["kind"]),
            chosen_restart=(None if d["chosen"]["restart"] is None
                            else int(d["chosen"]["restart"])),
            floor_h=float(d["floor_h_nats"]),
            no_structure=bool(d["no_structure"]),
            restarts=tuple(RestartRecord.from_dict(r) for r in d.get("restarts", [])),
        )


@dataclass(frozen=True)
class DiscoveryReport:
    """Everything one discovery run produced.

    ``h_*`` values are nats.  ``to_json`` is byte-stable: keys are sorted
    and no timestamps or host details are embedded.
    """

    seed: int
    config: dict
    n_trajectories: int
    dim: int
    eps_min: float
    eps_max: float
    alphabet: RewardAlphabet
    h_marginal: float
    stages: tuple
    stopped_early: bool

    @property
    def regions(self) -> tuple:
        return tuple(s.region for s in self.stages)

    @property
    def h_final(self) -> float:
        return self.stages[-1].h_after if self.stages else self.h_marginal

    @property
    def ig_total(self) -> float:
        return self.h_marginal - self.h_final

    @property
    def no_structure(self) -> bool:
        return self.ig_total < NO_STRUCTURE_IG

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "region-discovery-report",
            "seed": self.seed,
            "config": self.config,
            "data": {
                "n_trajectories": self.n_trajectories,
                "dim": self.dim,
                "eps_min": self.eps_min,
                "eps_max": self.eps_max,
            },
            "alphabet": self.alphabet.to_dict(),
            "h_marginal_nats": self.h_marginal,
            "h_marginal_bits": self.h_marginal / LN2,
            "stages": [s.to_dict() for s in self.stages],
            "regions": [r.to_dict() for r in self.regions],
            "h_final_nats": self.h_final,
            "h_final_bits": self.h_final / LN2,
            "ig_total_nats": self.ig_total,
            "ig_total_bits": self.ig_total / LN2,
            "no_structure": self.no_structure,
            "stopped_early": self.stopped_early,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "DiscoveryReport":
        if d.get("kind") != "region-discovery-report":
            raise InvalidParameterError(
                f"not a discovery report (kind={d.get('kind')!r})"
            )
        if int(d.get("schema_version", -1)) != SCHEMA_VERSION:
            raise InvalidParameterError(
                f"unsupported report schema_version {d.get('schema_version')!r}"
            )
        return cls(
            seed=int(d["seed"]),
            config=dict(d["config"]),
            n_trajectories=int(d["data"]["n_trajectories"]),
            dim=int(d["data"]["dim"]),
            eps_min=float(d["data"]["eps_min"]),
            eps_max=float(d["data"]["eps_max"]),
            alphabet=RewardAlphabet.from_dict(d["alphabet"]),
            h_marginal=float(d["h_marginal_nats"]),
            stages=tuple(StageRecord.from_dict(s) for s in d["stages"]),
            stopped_early=bool(d["stopped_early"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "DiscoveryReport":
        return cls.from_dict(json.loads(text))

    def to_table(self) -> str:
        """Human-readable stage summary."""
        lines = []
        lines.append(
            f"reward alphabet: {[round(float(v), 6) for v in self.alphabet.values]} "
            f"counts {[int(c) for c in self.alphabet.counts]}"
        )
        lines.append(
            f"H(R) = {self.h_marginal:.4f} nats ({self.h_marginal / LN2:.4f} bits)"
        )
        header = (f"{'stage':>5}  {'H_before':>9}  {'H_after':>9}  {'IG_nats':>8}  "
                  f"{'IG_bits':>8}  {'chosen':>9}  {'radius':>9}  center")
        lines.append(header)
        for s in self.stages:
            chosen = ("floor" if s.chosen_kind == "floor"
                      else f"restart {s.chosen_restart}")
            center = "(" + ", ".join(f"{c:.4f}" for c in s.region.center) + ")"
            flag = "  [no-structure]" if s.no_structure else ""
            lines.append(
                f"{s.stage:>5}  {s.h_before:>9.4f}  {s.h_after:>9.4f}  "
                f"{s.information_gain:>8.4f}  {s.information_gain / LN2:>8.4f}  "
                f"{chosen:>9}  {s.region.radius:>9.4f}  {center}{flag}"
            )
        lines.append(
            f"total: H(R|M) = {self.h_final:.4f} nats, "
            f"IG = {self.ig_total:.4f} nats ({self.ig_total / LN2:.4f} bits)"
        )
        if self.no_structure:
            lines.append("flag: no structure found (total IG below "
                         f"{NO_STRUCTURE_IG} nats)")
        if self.stopped_early:
            lines.append("flag: stopped early (stage gain below ig_floor)")
        return "\n".join(lines) + "\n"


def resolve_labels(dataset: Dataset, rewards=None, labels=None,
                   alphabet: RewardAlphabet | None = None,
                   reward_clusters: int | None = None):
    """Produce (labels, alphabet) from whichever the caller supplied."""
    if labels is not None:
        lab = np.asarray(labels, dtype=int)
        if lab.shape[0] != len(dataset):
            raise InvalidParameterError(
                f"labels have {lab.shape[0]} entries for {len(dataset)} trajectories"
            )
        if alphabet is None:
            k = int(lab.max()) + 1
            counts = np.bincount(lab, minlength=k)
            alphabet = RewardAlphabet(values=np.arange(k, dtype=float), counts=counts)
        return lab, alphabet
    if rewards is None:
        rewards = dataset.rewards
    rewards = np.asarray(rewards, dtype=float)
    n_distinct = np.unique(rewards).shape[0]
    k = reward_clusters if reward_clusters is not None else min(2, n_distinct)
    return discretize_rewards(rewards, k=k)


def _run_restart(dataset, labels, frozen, ctx, alphabet, cfg, eps_lo, eps_hi,
                 stage: int, restart: int) -> OptimResult:
    ss = np.random.SeedSequence(entropy=cfg.seed, spawn_key=(stage, restart))
    center_ss, eps_ss = ss.spawn(2)
    init_cfg = InitConfig(
        n_samples=cfg.init_samples,
        bandwidth=cfg.bandwidth,
        success_labels=cfg.success_labels,
        weighted=cfg.weighted_sampling,
    )
    center0, _ = sample_center(
        dataset, labels, found_regions=frozen, config=init_cfg,
        alphabet=alphabet, rng=np.random.default_rng(center_ss),
    )
    init_hi = max(eps_lo, eps_hi * INIT_RADIUS_FRACTION)
    u = float(np.random.default_rng(eps_ss).uniform())
    if restart % 2:
        u *= u
    radius0 = eps_lo + (init_hi - eps_lo) * u
    init = Region(center=center0, radius=radius0)

    s_bar = scale_from_init(dataset, center0, radius0)
    period = cfg.period if cfg.period is not None else max(
        1, cfg.max_steps // _opt.DEFAULT_PERIOD_FRACTION)
    alpha0 = cfg.alpha0 if cfg.alpha0 is not None else (
        _opt.DEFAULT_ALPHA0_FACTOR / s_bar)
    alpha_max = cfg.alpha_max if cfg.alpha_max is not None else (
        _opt.DEFAULT_ALPHA_MAX_FACTOR / s_bar)
    schedule = AnnealSchedule(alpha0=alpha0, alpha_max=max(alpha_max, alpha0),
                              growth=cfg.growth, period=period)
    lr = cfg.lr if cfg.lr is not None else (
        _opt.DEFAULT_LR_SCALE * float(np.sqrt(s_bar)))
    max_step = cfg.max_step if cfg.max_step is not None else (
        _opt.DEFAULT_MAX_STEP_SCALE * float(np.sqrt(s_bar)))

    return optimize_region(
        dataset, labels, frozen, init,
        eps_bounds=(eps_lo, eps_hi),
        schedule=schedule,
        lr=lr,
        max_steps=cfg.max_steps,
        tol=cfg.tol,
        max_step=max_step,
        radius_lr_scale=cfg.radius_lr_scale,
        n_labels=ctx.n_labels,
        ctx=ctx,
    )


def discover(dataset: Dataset, rewards=None, *, labels=None,
             alphabet: RewardAlphabet | None = None,
             config: DiscoveryConfig | None = None,
             trace_dir: str | None = None) -> DiscoveryReport:
    """Discover up to ``config.n_regions`` reward-explaining regions.

    Parameters
    ----------
    dataset : Dataset
    rewards : array-like, optional
        Raw terminal rewards; defaults to the rewards stored on the
        trajectories.  Ignored when ``labels`` is given.
    labels, alphabet : optional
        Pre-discretized labels (and their alphabet) to skip clustering.
    config : DiscoveryConfig
    trace_dir : str, optional
        Directory to dump one optimization-trace CSV per (stage, restart).

    Returns
    -------
    DiscoveryReport

    Raises
    ------
    DegenerateLabelsError
        If every trajectory carries the same label.
    SeedingError
        If a stage has no success states left outside found regions (the
        message names the stage).
    """
    cfg = config if config is not None else DiscoveryConfig()
    cfg.validate()
    lab, alphabet = resolve_labels(dataset, rewards, labels, alphabet,
                                   cfg.reward_clusters)
    n_labels = alphabet.size

    eps_lo, eps_hi = epsilon_bounds(dataset)
    if cfg.eps_min is not None:
        eps_lo = float(cfg.eps_min)
    if cfg.eps_max is not None:
        eps_hi = float(cfg.eps_max)
    if not (0.0 < eps_lo <= eps_hi):
        raise InvalidParameterError(
            f"epsilon bounds must satisfy 0 < eps_min <= eps_max, "
            f"got ({eps_lo!r}, {eps_hi!r})"
        )

    probe = RelaxedObjective(dataset, lab, frozen=(), n_labels=n_labels)
    if probe.degenerate_labels:
        raise DegenerateLabelsError(
            "all trajectories share one reward label; nothing to explain"
        )
    h_marginal = probe.frozen_conditional_entropy()

    centroid = dataset.centroid()
    frozen: list[Region] = []
    stages: list[StageRecord] = []
    stopped_early = False

    for stage in range(1, cfg.n_regions + 1):
        ctx = RelaxedObjective(dataset, lab, frozen=tuple(frozen), n_labels=n_labels)
        h_before = ctx.frozen_conditional_entropy()

        def task(j: int) -> OptimResult:
            try:
                return _run_restart(dataset, lab, tuple(frozen), ctx, alphabet,
                                    cfg, eps_lo, eps_hi, stage, j)
            except SeedingError as e:
                raise SeedingError(f"stage {stage}: {e}") from e

        if cfg.jobs > 1:
            with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
                results = list(pool.map(task, range(cfg.n_restarts)))
        else:
            results = [task(j) for j in range(cfg.n_restarts)]

        # degenerate floor: the whole workspace as one sphere; its indicator
        # is constant so its conditional entropy equals h_before
        floor_region = Region(center=centroid, radius=eps_hi)
        floor_ev = ctx.evaluate(floor_region.center, floor_region.radius, alpha=1.0)
        floor_h = float(floor_ev.hard_value)

        chosen_kind, chosen_idx = "floor", None
        best_h = floor_h
        region = floor_region
        for j, res in enumerate(results):
            if res.hard_value < best_h or (
                res.hard_value == best_h and chosen_kind == "floor"
            ):
                chosen_kind, chosen_idx = "restart", j
                best_h = res.hard_value
                region = res.region

        if trace_dir is not None:
            os.makedirs(trace_dir, exist_ok=True)
            for j, res in enumerate(results):
                res.trace.write_csv(
                    os.path.join(trace_dir, f"stage{stage}_restart{j}.csv")
                )

        restart_records = tuple(
            RestartRecord(
                restart=j,
                init=res.init,
                region=res.region,
                h_hard=float(res.hard_value),
                best_step=res.best_step,
                n_steps=res.n_steps,
                stop_reason=res.stop_reason,
                s_bar=float(res.s_bar),
            )
            for j, res in enumerate(results)
        )
        ig = h_before - best_h
        stages.append(StageRecord(
            stage=stage,
            h_before=float(h_before),
            h_after=float(best_h),
            region=region,
            chosen_kind=chosen_kind,
            chosen_restart=chosen_idx,
            floor_h=floor_h,
            no_structure=ig < NO_STRUCTURE_IG,
            restarts=restart_records,
        ))
        frozen.append(region)

        if cfg.ig_floor is not None and ig < cfg.ig_floor and stage < cfg.n_regions:
            stopped_early = True
            break

    return DiscoveryReport(
        seed=cfg.seed,
        config=cfg.to_dict(),
        n_trajectories=len(dataset),
        dim=dataset.dim,
        eps_min=float(eps_lo),
        eps_max=float(eps_hi),
        alphabet=alphabet,
        h_marginal=float(h_marginal),
        stages=tuple(stages),
        stopped_early=stopped_early,
    )


# ---------------------------------------------------------------------------
# prediction from discovered regions
# ---------------------------------------------------------------------------


def fit_readout(dataset: Dataset, labels, regions, n_labels: int | None = None
                ) -> tuple[JointTable, np.ndarray]:
    """Joint table and majority-label readout for a fixed region set."""
    mem = membership_matrix(dataset, regions)
    table = estimate_joint(mem, labels, n_labels)
    return table, majority_readout(table)


def predict_labels(dataset: Dataset, regions, readout: np.ndarray) -> np.ndarray:
    """Apply an assignment -> label readout to a dataset."""
    idx = assignment_indices(dataset, regions)
    readout = np.asarray(readout, dtype=int)
    return readout[idx]


def evaluate_report(report: DiscoveryReport, dataset: Dataset,
                    truth: dict | None = None) -> dict:
    """Score a report's regions against a corpus (and optional ground truth).

    Rewards are mapped onto the report's alphabet by nearest value — on the
    corpus the report was fitted to this reproduces the original labels.
    ``accuracy`` is majority-readout reward prediction: each assignment of
    the region-visit indicators predicts its most likely label.

    When ``truth`` carries planted regions, the prediction is also scored
    against the noiseless labels those regions induce
    (``truth_label_agreement``), and each planted region is matched to its
    nearest discovered one.
    """
    if dataset.dim != report.dim:
        raise InvalidParameterError(
            f"corpus dim {dataset.dim} does not match report dim {report.dim}"
        )
    alphabet = report.alphabet
    labels = np.array([alphabet.index_of(r) for r in dataset.rewards], dtype=int)
    k = alphabet.size
    h_marg = marginal_entropy(labels, k)
    table, readout = fit_readout(dataset, labels, report.regions, k)
    h_final = float(table.conditional_entropy())
    predicted = predict_labels(dataset, report.regions, readout)
    accuracy = float(np.mean(predicted == labels))

    out = {
        "n_trajectories": len(dataset),
        "h_marginal_nats": h_marg,
        "h_final_nats": h_final,
        "ig_nats": h_marg - h_final,
        "ig_bits": (h_marg - h_final) / LN2,
        "accuracy": accuracy,
        "consistent_with_report": bool(abs(h_final - report.h_final) <= 1e-9),
    }

    if truth is not None and truth.get("regions"):
        from .synth import true_labels  # local import avoids a module cycle

        t_labels = true_labels(dataset, truth)
        success_index = alphabet.index_of(1.0)
        pred_success = (predicted == success_index).astype(int)
        matches = []
        for td in truth["regions"]:
            t_region = Region.from_dict(td)
            dists = [float(np.sqrt(((r.center - t_region.center) ** 2).sum()))
                     for r in report.regions]
            j = int(np.argmin(dists))
            matches.append({
                "true_center": [float(c) for c in t_region.center],
                "true_radius": float(t_region.radius),
                "matched_stage": report.stages[j].stage,
                "center_distance": dists[j],
                "radius_error": float(report.regions[j].radius - t_region.radius),
            })
        out["truth_label_agreement"] = float(np.mean(pred_success == t_labels))
        out["region_matches"] = matches
    return out
