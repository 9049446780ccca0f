"""Density-based seeding of region centers.

Gradient descent on the relaxed objective only moves a candidate sphere
locally, so where it starts matters.  Successful trajectories concentrate
around whatever spatial feature explains the reward, so initial centers are
drawn from the states of successful trajectories and ranked by a Gaussian
kernel density estimate over that same set of states: the densest sampled
state wins.

States already inside previously found regions are excluded from the
sampling pool (they are explained); density is still evaluated against the
full pre-exclusion success set so rankings stay comparable across stages.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset
from .errors import InvalidParameterError, SeedingError
from .rewards import RewardAlphabet

_CHUNK = 512


@dataclass(frozen=True)
class InitConfig:
    """Configuration for center seeding.

    Parameters
    ----------
    n_samples : int
        How many pool states to draw (uniformly, without replacement) as
        candidates.  The whole pool is used when it is smaller.  The
        default is deliberately modest: independent draws across restarts
        then rank *different* subsets, so restart centers spread over
        several density modes instead of all collapsing onto the single
        global argmax.
    bandwidth : float, optional
        Gaussian kernel bandwidth.  None selects the data-driven rule
        ``N ** (-1 / (d + 4)) * mean_per_dim_std`` over the success states.
    success_labels : tuple, optional
        Which reward labels count as successful, either as alphabet values
        (floats, resolved against the alphabet) or label indices (ints).
        None selects every label except the most frequent one (ties broken
        toward the lowest-valued label).
    weighted : bool
        Draw candidates with probability proportional to their density
        instead of uniformly.  Off by default.
    rng_seed : int or numpy SeedSequence, optional
        Seed for the candidate draw.
    """

    n_samples: int = 64
    bandwidth: float | None = None
    success_labels: tuple | None = None
    weighted: bool = False
    rng_seed: object = None

    def __post_init__(self):
        if self.n_samples < 1:
            raise InvalidParameterError(
                f"n_samples must be >= 1, got {self.n_samples}"
            )
        if self.bandwidth is not None and (
            not np.isfinite(self.bandwidth) or self.bandwidth <= 0.0
        ):
            raise InvalidParameterError(
                f"bandwidth must be finite and > 0, got {self.bandwidth!r}"
            )


def scott_bandwidth(points: np.ndarray) -> float:
    """Data-driven bandwidth: N**(-1/(d+4)) times the mean per-dim std.

    Degenerate point sets (zero spread) fall back to 1.0; any positive
    bandwidth ranks a single repeated point identically.
    """
    pts = np.asarray(points, dtype=float)
    n, d = pts.shape
    sigma = float(pts.std(axis=0).mean())
    if sigma <= 0.0:
        return 1.0
    return float(n ** (-1.0 / (d + 4))) * sigma


def kde_density(queries, points, bandwidth: float) -> np.ndarray:
    """Gaussian KDE evaluated at each query point.

    density(q) = (1 / (N (2 pi)^(d/2) b^d)) * sum_p exp(-||q - p||^2 / (2 b^2))

    Parameters
    ----------
    queries : array-like, shape (Q, d) or (d,)
    points : array-like, shape (N, d)
    bandwidth : float

    Returns
    -------
    ndarray of shape (Q,) (scalar input still yields shape (1,))
    """
    if not np.isfinite(bandwidth) or bandwidth <= 0.0:
        raise InvalidParameterError(
            f"bandwidth must be finite and > 0, got {bandwidth!r}"
        )
    q = np.asarray(queries, dtype=float)
    if q.ndim == 1:
        q = q[None, :]
    p = np.asarray(points, dtype=float)
    if p.ndim != 2 or p.shape[0] == 0:
        raise InvalidParameterError("points must be a non-empty 2-D array")
    if q.shape[1] != p.shape[1]:
        raise InvalidParameterError(
            f"queries have dim {q.shape[1]}, points have dim {p.shape[1]}"
        )
    n, d = p.shape
    norm = n * (2.0 * np.pi) ** (d / 2.0) * bandwidth ** d
    out = np.empty(q.shape[0])
    for start in range(0, q.shape[0], _CHUNK):
        block = q[start:start + _CHUNK]
        d2 = ((block[:, None, :] - p[None, :, :]) ** 2).sum(axis=2)
        out[start:start + _CHUNK] = np.exp(-d2 / (2.0 * bandwidth ** 2)).sum(axis=1)
    return out / norm


def resolve_success_labels(labels: np.ndarray, n_labels: int,
                           success_labels=None,
                           alphabet: RewardAlphabet | None = None) -> np.ndarray:
    """Resolve the success-label set to a sorted array of label indices."""
    if success_labels is None:
        counts = np.bincount(labels, minlength=n_labels)
        # argmax takes the first maximum; labels are sorted by reward value,
        # so ties name the lowest-valued label as the frequent (failure) one
        frequent = int(np.argmax(counts))
        idx = np.array([j for j in range(n_labels) if j != frequent and counts[j] > 0],
                       dtype=int)
    else:
        resolved = []
        for v in success_labels:
            if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
                j = int(v)
                if not 0 <= j < n_labels:
                    raise InvalidParameterError(
                        f"success label index {j} outside [0, {n_labels})"
                    )
            elif alphabet is not None:
                j = alphabet.index_of(float(v))
            else:
                raise InvalidParameterError(
                    "success_labels given as values require an alphabet"
                )
            resolved.append(j)
        idx = np.unique(np.array(resolved, dtype=int))
    if idx.size == 0:
        raise SeedingError("success-label set is empty; nothing to seed from")
    return idx


def success_state_pool(dataset: Dataset, labels, success_idx) -> np.ndarray:
    """All states of trajectories whose label is in the success set."""
    labels = np.asarray(labels, dtype=int)
    mask = np.isin(labels, success_idx)
    if not mask.any():
        raise SeedingError("no trajectory carries a success label")
    return np.concatenate(
        [t.states for t, m in zip(dataset.trajectories, mask) if m], axis=0
    )


def sample_center(dataset: Dataset, labels, found_regions=(), config: InitConfig | None = None,
                  alphabet: RewardAlphabet | None = None,
                  rng: np.random.Generator | None = None
                  ) -> tuple[np.ndarray, np.ndarray]:
    """Pick an initial region center by KDE-ranked sampling.

    Draws ``config.n_samples`` candidate states from the success pool
    (minus states already inside found regions), ranks them by density
    under a Gaussian KDE fitted to the full success pool, and returns
    ``(center, candidates)``: the highest-density candidate and the whole
    candidate set sorted by density, best first.

    Raises
    ------
    SeedingError
        If no success states remain outside the found regions.
    """
    if config is None:
        config = InitConfig()
    if rng is None:
        rng = np.random.default_rng(config.rng_seed)
    lab = np.asarray(labels, dtype=int)
    if lab.shape[0] != len(dataset):
        raise InvalidParameterError(
            f"labels have {lab.shape[0]} entries for {len(dataset)} trajectories"
        )
    n_labels = int(lab.max()) + 1
    success_idx = resolve_success_labels(lab, n_labels, config.success_labels, alphabet)
    reference = success_state_pool(dataset, lab, success_idx)

    pool = reference
    for region in found_regions:
        r2 = region.radius ** 2
        d2 = ((pool - region.center) ** 2).sum(axis=1)
        pool = pool[d2 > r2]
    if pool.shape[0] == 0:
        raise SeedingError(
            f"all {reference.shape[0]} success states lie inside the "
            f"{len(tuple(found_regions))} already-found regions"
        )

    bandwidth = config.bandwidth if config.bandwidth is not None else scott_bandwidth(reference)

    if config.weighted:
        dens_pool = kde_density(pool, reference, bandwidth)
        total = dens_pool.sum()
        if total <= 0.0:
            raise SeedingError("density is zero over the whole pool")
        k = min(config.n_samples, pool.shape[0])
        chosen = rng.choice(pool.shape[0], size=k, replace=False, p=dens_pool / total)
        candidates = pool[chosen]
        densities = dens_pool[chosen]
    elif pool.shape[0] <= config.n_samples:
        candidates = pool
        densities = kde_density(candidates, reference, bandwidth)
    else:
        chosen = rng.choice(pool.shape[0], size=config.n_samples, replace=False)
        candidates = pool[chosen]
        densities = kde_density(candidates, reference, bandwidth)

    order = np.argsort(-densities, kind="stable")
    ranked = candidates[order].copy()
    return ranked[0].copy(), ranked
