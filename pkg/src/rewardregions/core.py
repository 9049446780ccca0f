"""Core data model: trajectories, datasets, spherical regions, memberships.

A *state* is a point in R^d.  A *trajectory* is the ordered sequence of
states an agent visited during one episode, together with the scalar reward
it received at the end.  A *region* is a hyper-sphere in state space; a
trajectory is *inside* the region when any of its states is, i.e. when the
minimum squared distance from its states to the center is at most the
squared radius.

All types are immutable after construction and safe to share across worker
threads.  Arrays are copied in and marked read-only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, InvalidParameterError

# Exponent clamp for the sigmoid membership.  exp(+-500) is finite in
# float64, so the relaxation saturates to exactly 0.0 / 1.0 beyond it.
EXP_CLAMP = 500.0


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out.flags.writeable = False
    return out


def validate_states(states, *, name: str = "states") -> np.ndarray:
    """Coerce ``states`` to a read-only (h, d) float array or raise.

    Raises
    ------
    InvalidParameterError
        If the array is not 2-D, is empty, or contains non-finite values.
    """
    arr = np.asarray(states, dtype=float)
    if arr.ndim != 2:
        raise InvalidParameterError(
            f"{name} must be a 2-D array of shape (n_states, dim), got ndim={arr.ndim}"
        )
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InvalidParameterError(f"{name} must be non-empty, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise InvalidParameterError(f"{name} contains non-finite values")
    return _readonly(arr)


def validate_center(center, *, dim: int | None = None) -> np.ndarray:
    """Coerce a region center to a read-only (d,) float array or raise."""
    arr = np.asarray(center, dtype=float)
    if arr.ndim != 1 or arr.shape[0] == 0:
        raise InvalidParameterError(
            f"center must be a 1-D array of shape (dim,), got shape {arr.shape}"
        )
    if not np.isfinite(arr).all():
        raise InvalidParameterError("center contains non-finite values")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatchError(
            f"center has dim {arr.shape[0]}, expected {dim}"
        )
    return _readonly(arr)


@dataclass(frozen=True)
class Trajectory:
    """One episode: an id, visited states, terminal reward, optional actions.

    Parameters
    ----------
    id : str
        Unique identifier within a dataset.
    states : ndarray of shape (n_states, dim)
        Visited states, in order.  Must be finite and non-empty.
    reward : float
        Terminal (episode-level) reward.
    actions : ndarray, optional
        Actions aligned with states; first dimension must be n_states or
        n_states - 1 (step-aligned).  Carried through IO, unused by the
        discovery math.
    """

    id: str
    states: np.ndarray
    reward: float
    actions: np.ndarray | None = None

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise InvalidParameterError("trajectory id must be a non-empty string")
        states = validate_states(self.states, name=f"trajectory {self.id!r} states")
        object.__setattr__(self, "states", states)
        reward = float(self.reward)
        if not np.isfinite(reward):
            raise InvalidParameterError(
                f"trajectory {self.id!r} reward must be finite, got {self.reward!r}"
            )
        object.__setattr__(self, "reward", reward)
        if self.actions is not None:
            acts = np.asarray(self.actions, dtype=float)
            if acts.ndim == 0 or acts.shape[0] not in (len(states), len(states) - 1):
                raise InvalidParameterError(
                    f"trajectory {self.id!r} actions must align with states "
                    f"(got {acts.shape[0] if acts.ndim else 0} for {len(states)} states)"
                )
            if not np.isfinite(acts).all():
                raise InvalidParameterError(
                    f"trajectory {self.id!r} actions contain non-finite values"
                )
            object.__setattr__(self, "actions", _readonly(acts))

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def __len__(self) -> int:
        return self.states.shape[0]


@dataclass(frozen=True)
class Region:
    """A hyper-sphere in state space: center point and positive radius."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", validate_center(self.center))
        radius = float(self.radius)
        if not np.isfinite(radius) or radius <= 0.0:
            raise InvalidParameterError(
                f"region radius must be finite and > 0, got {self.radius!r}"
            )
        object.__setattr__(self, "radius", radius)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def to_dict(self) -> dict:
        return {"center": [float(c) for c in self.center], "radius": float(self.radius)}

    @classmethod
    def from_dict(cls, d: dict) -> "Region":
        return cls(center=np.asarray(d["center"], dtype=float), radius=float(d["radius"]))


class Dataset:
    """An immutable collection of trajectories with consistent dimension.

    Ids must be unique.  Exposes cached, padded state tensors so membership
    for every trajectory can be computed in one vectorized pass.
    """

    def __init__(self, trajectories):
        trajs = tuple(trajectories)
        if not trajs:
            raise InvalidParameterError("dataset must contain at least one trajectory")
        dim = trajs[0].dim
        seen: set[str] = set()
        for t in trajs:
            if t.dim != dim:
                raise DimensionMismatchError(
                    f"trajectory {t.id!r} has dim {t.dim}, expected {dim}"
                )
            if t.id in seen:
                raise InvalidParameterError(f"duplicate trajectory id {t.id!r}")
            seen.add(t.id)
        self._trajectories = trajs
        self._dim = dim
        self._padded: np.ndarray | None = None
        self._diameter: float | None = None

    @property
    def trajectories(self) -> tuple:
        return self._trajectories

    @property
    def dim(self) -> int:
        return self._dim

    def __len__(self) -> int:
        return len(self._trajectories)

    def __iter__(self):
        return iter(self._trajectories)

    def __getitem__(self, i) -> Trajectory:
        return self._trajectories[i]

    @property
    def rewards(self) -> np.ndarray:
        return np.array([t.reward for t in self._trajectories], dtype=float)

    @property
    def ids(self) -> list[str]:
        return [t.id for t in self._trajectories]

    def all_states(self) -> np.ndarray:
        """All states of all trajectories stacked into one (N, d) array."""
        return np.concatenate([t.states for t in self._trajectories], axis=0)

    def padded_states(self) -> np.ndarray:
        """States as one (L, h_max, d) tensor, padded with +inf.

        Padding with +inf keeps the padded rows out of every minimum and
        argmin (all real states are finite).
        """
        if self._padded is None:
            h_max = max(len(t) for t in self._trajectories)
            out = np.full((len(self), h_max, self._dim), np.inf)
            for i, t in enumerate(self._trajectories):
                out[i, : len(t)] = t.states
            out.flags.writeable = False
            self._padded = out
        return self._padded

    def centroid(self) -> np.ndarray:
        return self.all_states().mean(axis=0)

    def workspace_diameter(self) -> float:
        """Diagonal of the axis-aligned bounding box of all states.

        Falls back to 1.0 when every state coincides, so radius bounds
        derived from the diameter stay usable.
        """
        if self._diameter is None:
            pts = self.all_states()
            span = pts.max(axis=0) - pts.min(axis=0)
            diag = float(np.sqrt((span ** 2).sum()))
            self._diameter = diag if diag > 0.0 else 1.0
        return self._diameter


# ---------------------------------------------------------------------------
# membership operations
# ---------------------------------------------------------------------------


def min_sq_dist(states, center) -> tuple[float, int]:
    """Minimum squared distance from a set of states to a center.

    Returns ``(value, argmin_index)``.  Ties resolve to the lowest index.

    Examples
    --------
    >>> min_sq_dist([[1.0, 0.0], [0.0, 2.0]], [0.0, 0.0])
    (1.0, 0)
    """
    s = np.asarray(states, dtype=float)
    c = np.asarray(center, dtype=float)
    if s.ndim != 2:
        raise InvalidParameterError(f"states must be 2-D, got ndim={s.ndim}")
    if c.ndim != 1 or c.shape[0] != s.shape[1]:
        raise DimensionMismatchError(
            f"center has dim {c.shape[0] if c.ndim == 1 else c.shape}, "
            f"states have dim {s.shape[1]}"
        )
    d2 = ((s - c) ** 2).sum(axis=1)
    idx = int(np.argmin(d2))
    return float(d2[idx]), idx


def hard_membership(states, region: Region) -> int:
    """1 if any state lies inside the closed sphere, else 0."""
    value, _ = min_sq_dist(states, region.center)
    return int(value <= region.radius ** 2)


def soft_membership(states, region: Region, alpha: float) -> float:
    """Sigmoid-relaxed membership of a trajectory in a region.

    Computes ``1 / (1 + exp(alpha * (min_sq_dist - radius^2)))`` with the
    exponent clamped to +-500, so extreme inputs give exactly 0.0 or 1.0.
    ``alpha`` controls the sharpness; the hard indicator is the alpha ->
    infinity limit.
    """
    if not np.isfinite(alpha) or alpha <= 0.0:
        raise InvalidParameterError(f"alpha must be finite and > 0, got {alpha!r}")
    value, _ = min_sq_dist(states, region.center)
    u = np.clip(alpha * (value - region.radius ** 2), -EXP_CLAMP, EXP_CLAMP)
    return float(1.0 / (1.0 + np.exp(u)))


def dataset_min_sq_dists(dataset: Dataset, center) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``min_sq_dist`` over every trajectory of a dataset.

    Returns ``(values, argmins)``, both of shape (L,).  Argmin indices are
    positions within each trajectory, ties resolved to the lowest index.
    """
    c = validate_center(center, dim=dataset.dim)
    padded = dataset.padded_states()
    d2 = ((padded - c) ** 2).sum(axis=2)
    argmins = d2.argmin(axis=1)
    values = d2[np.arange(len(dataset)), argmins]
    return values, argmins


def dataset_hard_memberships(dataset: Dataset, region: Region) -> np.ndarray:
    """Hard 0/1 membership of every trajectory, shape (L,)."""
    values, _ = dataset_min_sq_dists(dataset, region.center)
    return (values <= region.radius ** 2).astype(float)


def dataset_soft_memberships(dataset: Dataset, region: Region, alpha: float) -> np.ndarray:
    """Soft membership of every trajectory, shape (L,)."""
    if not np.isfinite(alpha) or alpha <= 0.0:
        raise InvalidParameterError(f"alpha must be finite and > 0, got {alpha!r}")
    values, _ = dataset_min_sq_dists(dataset, region.center)
    u = np.clip(alpha * (values - region.radius ** 2), -EXP_CLAMP, EXP_CLAMP)
    return 1.0 / (1.0 + np.exp(u))


def membership_matrix(dataset: Dataset, regions) -> np.ndarray:
    """Hard membership of every trajectory in every region, shape (L, m).

    Column j corresponds to regions[j] (bit j of the assignment index).
    """
    regions = tuple(regions)
    out = np.zeros((len(dataset), len(regions)))
    for j, region in enumerate(regions):
        out[:, j] = dataset_hard_memberships(dataset, region)
    return out


def assignment_indices(dataset: Dataset, regions) -> np.ndarray:
    """Little-endian assignment index per trajectory, shape (L,), ints."""
    regions = tuple(regions)
    idx = np.zeros(len(dataset), dtype=int)
    for j, region in enumerate(regions):
        idx += dataset_hard_memberships(dataset, region).astype(int) << j
    return idx
