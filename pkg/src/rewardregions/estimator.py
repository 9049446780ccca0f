"""Scikit-learn style wrapper around region discovery.

``RegionDiscovery`` is a transformer/predictor: ``fit`` discovers regions
from labeled trajectories, ``transform`` turns trajectories into hard
region-visit indicator features, and ``predict`` reads a reward value off
the fitted (assignment -> majority label) table.

X can be a :class:`~rewardregions.core.Dataset`, a sequence of Trajectory
objects, a sequence of (h_i, d) state arrays (ragged is fine), a single
(n, h, d) stack of equal-length trajectories, or an (n, d) matrix, which is
treated as n single-state trajectories.  Scikit-learn's own ``check_array``
cannot validate ragged trajectory lists, so validation is custom.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .core import Dataset, Trajectory, membership_matrix
from .discovery import (
    DiscoveryConfig,
    discover,
    fit_readout,
    predict_labels,
)
from .errors import InvalidParameterError


def as_dataset(X, rewards=None) -> Dataset:
    """Coerce any accepted X (and optional rewards) into a Dataset.

    Missing rewards default to 0.0 (fine for transform/predict, which never
    look at them).
    """
    if isinstance(X, Dataset):
        if rewards is None:
            return X
        rewards = np.asarray(rewards, dtype=float)
        if rewards.shape[0] != len(X):
            raise InvalidParameterError(
                f"y has {rewards.shape[0]} entries for {len(X)} trajectories"
            )
        return Dataset([
            Trajectory(id=t.id, states=t.states, reward=float(r), actions=t.actions)
            for t, r in zip(X.trajectories, rewards)
        ])

    if isinstance(X, np.ndarray) and X.ndim == 2:
        X = [X[i:i + 1] for i in range(X.shape[0])]  # n single-state trajectories
    elif isinstance(X, np.ndarray) and X.ndim == 3:
        X = list(X)

    try:
        items = list(X)
    except TypeError:
        raise InvalidParameterError(
            f"X must be a Dataset or a sequence of trajectories, got {type(X)!r}"
        ) from None
    if not items:
        raise InvalidParameterError("X is empty")

    if rewards is not None:
        rewards = np.asarray(rewards, dtype=float).ravel()
        if rewards.shape[0] != len(items):
            raise InvalidParameterError(
                f"y has {rewards.shape[0]} entries for {len(items)} trajectories"
            )

    trajectories = []
    width = max(4, len(str(len(items) - 1)))
    for i, item in enumerate(items):
        if isinstance(item, Trajectory):
            if rewards is None:
                trajectories.append(item)
            else:
                trajectories.append(Trajectory(
                    id=item.id, states=item.states,
                    reward=float(rewards[i]), actions=item.actions,
                ))
        else:
            reward = float(rewards[i]) if rewards is not None else 0.0
            trajectories.append(Trajectory(
                id=f"t{i:0{width}d}", states=np.asarray(item, dtype=float),
                reward=reward,
            ))
    return Dataset(trajectories)


class RegionDiscovery(TransformerMixin, BaseEstimator):
    """Discover reward-explaining spherical regions; featurize by visits.

    Parameters mirror :class:`~rewardregions.discovery.DiscoveryConfig`;
    ``None`` means "derive from the data".

    Attributes (after fit)
    ----------------------
    regions_ : list of Region
    report_ : DiscoveryReport
    alphabet_ : RewardAlphabet
    readout_ : ndarray mapping assignment index -> label index
    dim_ : int

    Examples
    --------
    >>> est = RegionDiscovery(n_regions=1, n_restarts=4, random_state=0)
    >>> est.fit(list_of_state_arrays, rewards)       # doctest: +SKIP
    >>> features = est.transform(list_of_state_arrays)   # doctest: +SKIP
    """

    def __init__(self, n_regions: int = 1, n_restarts: int = 8,
                 reward_clusters: int | None = None, random_state: int = 0,
                 n_jobs: int = 1, ig_floor: float | None = None,
                 lr: float | None = None, max_steps: int = 400,
                 tol: float = 1e-4, alpha0: float | None = None,
                 growth: float = 2.0, period: int | None = None,
                 alpha_max: float | None = None, max_step: float | None = None,
                 radius_lr_scale: float = 1.0,
                 eps_min: float | None = None, eps_max: float | None = None,
                 init_samples: int = 64, bandwidth: float | None = None,
                 success_labels: tuple | None = None,
                 weighted_sampling: bool = False):
        self.n_regions = n_regions
        self.n_restarts = n_restarts
        self.reward_clusters = reward_clusters
        self.random_state = random_state
        self.n_jobs = n_jobs
        self.ig_floor = ig_floor
        self.lr = lr
        self.max_steps = max_steps
        self.tol = tol
        self.alpha0 = alpha0
        self.growth = growth
        self.period = period
        self.alpha_max = alpha_max
        self.max_step = max_step
        self.radius_lr_scale = radius_lr_scale
        self.eps_min = eps_min
        self.eps_max = eps_max
        self.init_samples = init_samples
        self.bandwidth = bandwidth
        self.success_labels = success_labels
        self.weighted_sampling = weighted_sampling

    def _config(self) -> DiscoveryConfig:
        return DiscoveryConfig(
            n_regions=self.n_regions,
            n_restarts=self.n_restarts,
            seed=self.random_state,
            reward_clusters=self.reward_clusters,
            jobs=self.n_jobs,
            ig_floor=self.ig_floor,
            lr=self.lr,
            max_steps=self.max_steps,
            tol=self.tol,
            alpha0=self.alpha0,
            growth=self.growth,
            period=self.period,
            alpha_max=self.alpha_max,
            max_step=self.max_step,
            radius_lr_scale=self.radius_lr_scale,
            eps_min=self.eps_min,
            eps_max=self.eps_max,
            init_samples=self.init_samples,
            bandwidth=self.bandwidth,
            success_labels=self.success_labels,
            weighted_sampling=self.weighted_sampling,
        )

    def fit(self, X, y=None):
        """Discover regions from trajectories X and terminal rewards y.

        y may be omitted when X is a Dataset (or Trajectory sequence) that
        already carries rewards.
        """
        dataset = as_dataset(X, rewards=y)
        report = discover(dataset, config=self._config())
        self.report_ = report
        self.regions_ = list(report.regions)
        self.alphabet_ = report.alphabet
        self.dim_ = dataset.dim
        labels = np.array(
            [self.alphabet_.index_of(r) for r in dataset.rewards], dtype=int
        )
        self.joint_, self.readout_ = fit_readout(
            dataset, labels, self.regions_, self.alphabet_.size
        )
        return self

    def transform(self, X) -> np.ndarray:
        """Hard region-visit indicators, shape (n_trajectories, n_regions)."""
        check_is_fitted(self, "regions_")
        dataset = as_dataset(X)
        if dataset.dim != self.dim_:
            raise InvalidParameterError(
                f"X has dim {dataset.dim}, fitted on dim {self.dim_}"
            )
        return membership_matrix(dataset, self.regions_)

    def predict(self, X) -> np.ndarray:
        """Reward value (alphabet value) predicted per trajectory."""
        check_is_fitted(self, "regions_")
        dataset = as_dataset(X)
        if dataset.dim != self.dim_:
            raise InvalidParameterError(
                f"X has dim {dataset.dim}, fitted on dim {self.dim_}"
            )
        idx = predict_labels(dataset, self.regions_, self.readout_)
        return self.alphabet_.values[idx]

    def score(self, X, y) -> float:
        """Label-prediction accuracy after snapping y onto the alphabet."""
        check_is_fitted(self, "regions_")
        y = np.asarray(y, dtype=float).ravel()
        predicted = self.predict(X)
        pred_idx = np.array([self.alphabet_.index_of(v) for v in predicted])
        true_idx = np.array([self.alphabet_.index_of(v) for v in y])
        return float(np.mean(pred_idx == true_idx))

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "regions_")
        return np.array([f"region{j}_visit" for j in range(len(self.regions_))],
                        dtype=object)
