"""Synthetic benchmark corpora with known ground truth.

Trajectories are reflected Gaussian random walks inside the unit box
[0, 1]^d.  Three task kinds:

- ``paint``: reward 1 iff the trajectory visits one planted sphere
  (think: the brush touched the paint pot).
- ``door``: reward 1 iff the trajectory visits *both* planted spheres, in
  any order (the key pickup and the door).
- ``null``: reward is a fair coin, independent of the states; nothing to
  discover.

Each trajectory draws from its own seed-sequence substream, so corpus
prefixes are stable when ``n_traj`` grows and generation parallelizes
trivially.  Optional label noise flips each reward with fixed probability.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, Region, Trajectory, hard_membership
from .errors import InvalidParameterError

KINDS = ("paint", "door", "null")

# planted success must be neither ubiquitous nor vanishing
SUCCESS_FRACTION_RANGE = (0.05, 0.95)

TRUTH_FORMAT = "synthetic-truth"
TRUTH_VERSION = 1


@dataclass(frozen=True)
class TaskSpec:
    """Full recipe for one synthetic corpus."""

    kind: str
    dim: int = 2
    n_traj: int = 200
    horizon: int = 40
    step_scale: float = 0.08
    label_noise: float = 0.0
    seed: int = 0
    regions: tuple = ()
    with_actions: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameterError(
                f"unknown task kind {self.kind!r}, expected one of {KINDS}"
            )
        if self.dim < 1:
            raise InvalidParameterError(f"dim must be >= 1, got {self.dim}")
        if self.n_traj < 1:
            raise InvalidParameterError(f"n_traj must be >= 1, got {self.n_traj}")
        if self.horizon < 1:
            raise InvalidParameterError(f"horizon must be >= 1, got {self.horizon}")
        if not (np.isfinite(self.step_scale) and self.step_scale > 0):
            raise InvalidParameterError(
                f"step_scale must be > 0, got {self.step_scale!r}"
            )
        if not (0.0 <= self.label_noise <= 1.0):
            raise InvalidParameterError(
                f"label_noise must lie in [0, 1], got {self.label_noise!r}"
            )
        regions = tuple(self.regions)
        if self.kind == "null":
            if regions:
                raise InvalidParameterError("the null task plants no regions")
        else:
            expected = 1 if self.kind == "paint" else 2
            if len(regions) != expected:
                raise InvalidParameterError(
                    f"{self.kind} plants exactly {expected} region(s), "
                    f"got {len(regions)}"
                )
            for r in regions:
                if r.dim != self.dim:
                    raise InvalidParameterError(
                        f"planted region has dim {r.dim}, task dim is {self.dim}"
                    )
                if (r.center < 0).any() or (r.center > 1).any():
                    raise InvalidParameterError(
                        "planted region centers must lie inside the unit box"
                    )
        object.__setattr__(self, "regions", regions)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "dim": self.dim,
            "n_traj": self.n_traj,
            "horizon": self.horizon,
            "step_scale": self.step_scale,
            "label_noise": self.label_noise,
            "seed": self.seed,
            "regions": [r.to_dict() for r in self.regions],
            "with_actions": self.with_actions,
        }


def default_regions(kind: str, dim: int) -> tuple:
    """Planted spheres used when the caller does not supply any."""
    if kind == "paint":
        return (Region(center=np.full(dim, 0.7), radius=0.1),)
    if kind == "door":
        return (Region(center=np.full(dim, 0.25), radius=0.12),
                Region(center=np.full(dim, 0.75), radius=0.12))
    return ()


def make_spec(kind: str, dim: int = 2, regions=None, **kwargs) -> TaskSpec:
    """TaskSpec with per-kind planted-region defaults filled in."""
    if regions is None:
        regions = default_regions(kind, dim)
    defaults = {"horizon": 40, "step_scale": 0.08}
    if kind == "door":
        defaults = {"horizon": 60, "step_scale": 0.1}
    defaults.update(kwargs)
    return TaskSpec(kind=kind, dim=dim, regions=tuple(regions), **defaults)


def reflect_unit(x: np.ndarray) -> np.ndarray:
    """Fold unbounded coordinates into [0, 1] by elastic reflection."""
    z = np.abs(np.asarray(x, dtype=float)) % 2.0
    return np.where(z > 1.0, 2.0 - z, z)


def _walk(rng: np.random.Generator, spec: TaskSpec) -> tuple[np.ndarray, np.ndarray]:
    start = rng.uniform(0.0, 1.0, spec.dim)
    steps = rng.normal(0.0, spec.step_scale, (spec.horizon - 1, spec.dim))
    raw = start + np.vstack([np.zeros((1, spec.dim)), np.cumsum(steps, axis=0)])
    return reflect_unit(raw), steps


def generate(spec: TaskSpec) -> tuple[Dataset, dict]:
    """Generate a corpus and its ground-truth sidecar.

    Returns
    -------
    dataset : Dataset
    truth : dict
        Serializable record of the task spec plus the achieved pre-noise
        success fraction.

    Raises
    ------
    InvalidParameterError
        If the planted task is degenerate: the pre-noise success fraction
        falls outside [0.05, 0.95] (adjust horizon, step_scale, or the
        planted regions).
    """
    root = np.random.SeedSequence(spec.seed)
    children = root.spawn(spec.n_traj)
    width = max(4, len(str(spec.n_traj - 1)))

    trajectories = []
    n_success = 0
    for i, child in enumerate(children):
        rng = np.random.default_rng(child)
        states, steps = _walk(rng, spec)
        if spec.kind == "null":
            reward = float(rng.integers(0, 2))
        else:
            visited = all(hard_membership(states, r) for r in spec.regions)
            n_success += int(visited)
            reward = 1.0 if visited else 0.0
            if spec.label_noise > 0.0 and rng.random() < spec.label_noise:
                reward = 1.0 - reward
        trajectories.append(Trajectory(
            id=f"t{i:0{width}d}",
            states=states,
            reward=reward,
            actions=steps if spec.with_actions else None,
        ))

    success_fraction = n_success / spec.n_traj
    if spec.kind != "null":
        lo, hi = SUCCESS_FRACTION_RANGE
        if not (lo <= success_fraction <= hi):
            raise InvalidParameterError(
                f"degenerate task: pre-noise success fraction "
                f"{success_fraction:.3f} outside [{lo}, {hi}]; adjust horizon, "
                f"step_scale, or the planted regions"
            )

    truth = {
        "format": TRUTH_FORMAT,
        "version": TRUTH_VERSION,
        "success_fraction": success_fraction,
    }
    truth.update(spec.to_dict())
    return Dataset(trajectories), truth


def true_labels(dataset: Dataset, truth: dict) -> np.ndarray:
    """Noiseless success labels recomputed from the planted regions."""
    regions = [Region.from_dict(r) for r in truth.get("regions", [])]
    if not regions:
        raise InvalidParameterError(
            f"truth record for kind {truth.get('kind')!r} has no planted regions"
        )
    out = np.empty(len(dataset), dtype=int)
    for i, t in enumerate(dataset.trajectories):
        out[i] = int(all(hard_membership(t.states, r) for r in regions))
    return out
