"""Terminal-reward discretization.

Raw rewards are real numbers; the entropy machinery needs a small finite
alphabet.  Rewards are clustered with 1-D k-means using a deterministic
quantile initialization (initial centers sit on order statistics of the
distinct sorted values), so the same input always yields the same alphabet.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError

_MAX_LLOYD_ITER = 200


@dataclass(frozen=True)
class RewardAlphabet:
    """The discrete reward alphabet produced by :func:`discretize_rewards`.

    ``values`` are the cluster means, sorted ascending; label ``j`` in a
    label array refers to ``values[j]``.  ``counts`` records how many
    rewards fell into each cluster.
    """

    values: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).copy()
        cnts = np.asarray(self.counts, dtype=int).copy()
        vals.flags.writeable = False
        cnts.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "counts", cnts)

    @property
    def size(self) -> int:
        return int(self.values.shape[0])

    def index_of(self, value: float) -> int:
        """Index of the alphabet value nearest to ``value`` (ties go low)."""
        return int(np.argmin(np.abs(self.values - float(value))))

    def to_dict(self) -> dict:
        return {
            "values": [float(v) for v in self.values],
            "counts": [int(c) for c in self.counts],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RewardAlphabet":
        return cls(values=np.asarray(d["values"], dtype=float),
                   counts=np.asarray(d["counts"], dtype=int))


def discretize_rewards(rewards, k: int = 2) -> tuple[np.ndarray, RewardAlphabet]:
    """Cluster scalar rewards into ``k`` labels with deterministic 1-D k-means.

    Parameters
    ----------
    rewards : array-like of shape (L,)
        Raw terminal rewards, finite.
    k : int
        Number of clusters.  Must satisfy ``1 <= k <= n_distinct``.

    Returns
    -------
    labels : ndarray of shape (L,), dtype int
        Cluster index per reward, referring to ``alphabet.values``.
    alphabet : RewardAlphabet
        Cluster means sorted ascending, with per-cluster counts.

    Notes
    -----
    Initial centers are placed on order statistics of the distinct sorted
    values (indices ``round(linspace(0, n_distinct - 1, k))``), which makes
    the procedure deterministic and reproduces exact clusterings such as
    ``{0.0, 0.1, 0.9, 1.0} -> {0.0, 0.1} | {0.9, 1.0}``.  Nearest-center
    ties during assignment resolve to the lower cluster index.
    """
    r = np.asarray(rewards, dtype=float)
    if r.ndim != 1 or r.size == 0:
        raise InvalidParameterError(
            f"rewards must be a non-empty 1-D array, got shape {r.shape}"
        )
    if not np.isfinite(r).all():
        raise InvalidParameterError("rewards contain non-finite values")
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise InvalidParameterError(f"k must be an integer >= 1, got {k!r}")

    distinct, inverse, dcounts = np.unique(r, return_inverse=True, return_counts=True)
    n_distinct = distinct.shape[0]
    if k > n_distinct:
        raise InvalidParameterError(
            f"k={k} exceeds the number of distinct rewards ({n_distinct})"
        )

    if k == n_distinct:
        # each distinct value is its own cluster; unique() already sorts
        alphabet = RewardAlphabet(values=distinct, counts=dcounts)
        return inverse.astype(int), alphabet

    init_idx = np.round(np.linspace(0, n_distinct - 1, k)).astype(int)
    centers = distinct[init_idx].astype(float)

    assign = None
    for _ in range(_MAX_LLOYD_ITER):
        dist = np.abs(distinct[:, None] - centers[None, :])
        new_assign = np.argmin(dist, axis=1)
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for j in range(k):
            mask = assign == j
            w = dcounts[mask]
            if w.sum() > 0:
                centers[j] = float(np.average(distinct[mask], weights=w))
            # empty cluster keeps its previous center

    # drop clusters that ended empty (rare; k <= n_distinct keeps most alive)
    occupied = np.array([np.any(assign == j) for j in range(k)])
    if not occupied.all():
        remap = -np.ones(k, dtype=int)
        remap[occupied] = np.arange(int(occupied.sum()))
        assign = remap[assign]
        centers = centers[occupied]
        k = int(occupied.sum())

    # order clusters by center, relabel accordingly
    order = np.argsort(centers, kind="stable")
    rank = np.empty(k, dtype=int)
    rank[order] = np.arange(k)
    assign = rank[assign]
    centers = centers[order]

    labels = assign[inverse].astype(int)
    counts = np.bincount(labels, minlength=k)
    alphabet = RewardAlphabet(values=centers, counts=counts)
    return labels, alphabet
