"""Entropy of rewards conditioned on region-visit indicator variables.

Given L trajectories with discrete reward labels and m regions, each
trajectory l gets a membership vector (m_l1, ..., m_lm).  The joint
distribution over (assignment mu in {0,1}^m, label k) is estimated by
frequency counting; soft memberships spread each trajectory's 1/L mass over
assignments with the product weight prod_j (m_lj if mu_j else 1 - m_lj).

The quantity everything else minimizes is the conditional entropy

    H(R | M^1..M^m) = H(mu, R) - H(mu)

in nats (natural log; 0 * log 0 = 0).  Assignments are indexed
little-endian: variable j (0-based column j of the membership matrix) is
bit j of the assignment index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, Region, dataset_hard_memberships, dataset_min_sq_dists
from .core import EXP_CLAMP
from .errors import InvalidParameterError

LN2 = float(np.log(2.0))

_MAX_VARIABLES = 16
_SUM_ATOL = 1e-9
_ENTRY_ATOL = 1e-12


def nats_to_bits(x: float) -> float:
    return float(x) / LN2


def _entropy(p: np.ndarray) -> float:
    """Shannon entropy in nats with the 0 log 0 = 0 convention."""
    p = np.asarray(p, dtype=float)
    terms = np.where(p > 0.0, p * np.log(np.where(p > 0.0, p, 1.0)), 0.0)
    return float(-terms.sum())


def validate_labels(labels, n_labels: int | None = None) -> tuple[np.ndarray, int]:
    """Coerce labels to a 1-D int array and resolve the alphabet size."""
    lab = np.asarray(labels)
    if lab.ndim != 1 or lab.size == 0:
        raise InvalidParameterError(
            f"labels must be a non-empty 1-D array, got shape {lab.shape}"
        )
    if not np.issubdtype(lab.dtype, np.integer):
        cast = lab.astype(int)
        if not np.array_equal(cast, lab):
            raise InvalidParameterError("labels must be integers (alphabet indices)")
        lab = cast
    lab = lab.astype(int)
    if lab.min() < 0:
        raise InvalidParameterError("labels must be non-negative")
    k = int(lab.max()) + 1
    if n_labels is None:
        n_labels = k
    elif n_labels < k:
        raise InvalidParameterError(
            f"n_labels={n_labels} is smaller than max label + 1 ({k})"
        )
    return lab, int(n_labels)


def validate_memberships(memberships, n_rows: int | None = None) -> np.ndarray:
    """Coerce memberships to an (L, m) float array with entries in [0, 1].

    A 1-D input is treated as a single variable (m = 1).  Entries may
    stray from [0, 1] by at most 1e-12 (float noise) and are clipped.
    """
    m = np.asarray(memberships, dtype=float)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2:
        raise InvalidParameterError(
            f"memberships must be 1-D or 2-D, got ndim={m.ndim}"
        )
    if n_rows is not None and m.shape[0] != n_rows:
        raise InvalidParameterError(
            f"memberships have {m.shape[0]} rows, expected {n_rows}"
        )
    if m.shape[1] > _MAX_VARIABLES:
        raise InvalidParameterError(
            f"too many membership variables ({m.shape[1]} > {_MAX_VARIABLES})"
        )
    if not np.isfinite(m).all():
        raise InvalidParameterError("memberships contain non-finite values")
    if m.min() < -_ENTRY_ATOL or m.max() > 1.0 + _ENTRY_ATOL:
        raise InvalidParameterError(
            f"memberships must lie in [0, 1], got range "
            f"[{m.min():.6g}, {m.max():.6g}]"
        )
    return np.clip(m, 0.0, 1.0)


@dataclass(frozen=True)
class JointTable:
    """Estimated joint distribution P(assignment, label).

    ``probs`` has shape (2**n_variables, n_labels); row index is the
    little-endian assignment, column index the reward label.
    """

    probs: np.ndarray
    n_variables: int
    n_labels: int

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).copy()
        expected = (2 ** self.n_variables, self.n_labels)
        if p.shape != expected:
            raise InvalidParameterError(
                f"joint table has shape {p.shape}, expected {expected}"
            )
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    def validate(self, atol: float = _SUM_ATOL) -> None:
        """Raise unless entries are non-negative and total mass is 1."""
        if self.probs.min() < -_ENTRY_ATOL:
            raise InvalidParameterError(
                f"joint table has negative entries (min {self.probs.min():.3g})"
            )
        total = float(self.probs.sum())
        if abs(total - 1.0) > atol:
            raise InvalidParameterError(
                f"joint table mass is {total!r}, expected 1 within {atol}"
            )

    @property
    def assignment_marginal(self) -> np.ndarray:
        return self.probs.sum(axis=1)

    @property
    def label_marginal(self) -> np.ndarray:
        return self.probs.sum(axis=0)

    def joint_entropy(self) -> float:
        return _entropy(self.probs)

    def assignment_entropy(self) -> float:
        return _entropy(self.assignment_marginal)

    def label_entropy(self) -> float:
        return _entropy(self.label_marginal)

    def conditional_entropy(self) -> float:
        """H(label | assignment) = H(assignment, label) - H(assignment)."""
        return self.joint_entropy() - self.assignment_entropy()

    def information_gain(self) -> float:
        return self.label_entropy() - self.conditional_entropy()


def estimate_joint(memberships, labels, n_labels: int | None = None) -> JointTable:
    """Frequency-count the joint distribution of assignments and labels.

    Each trajectory contributes mass 1/L, split across the 2**m assignments
    with weight prod_j (m_lj if bit j set else 1 - m_lj).  Hard memberships
    put all mass on a single assignment.

    Parameters
    ----------
    memberships : array-like, shape (L,) or (L, m)
        Membership values in [0, 1]; column j is variable j (bit j).
    labels : array-like of int, shape (L,)
        Reward label per trajectory.
    n_labels : int, optional
        Alphabet size; defaults to ``labels.max() + 1``.

    Returns
    -------
    JointTable
    """
    lab, k = validate_labels(labels, n_labels)
    mem = validate_memberships(memberships, n_rows=lab.shape[0])
    n, m = mem.shape

    weights = np.ones((n, 1))
    for j in range(m):
        col = mem[:, j:j + 1]
        weights = np.concatenate([weights * (1.0 - col), weights * col], axis=1)

    onehot = np.zeros((n, k))
    onehot[np.arange(n), lab] = 1.0
    probs = weights.T @ onehot / n

    table = JointTable(probs=probs, n_variables=m, n_labels=k)
    table.validate()
    return table


def label_probabilities(labels, n_labels: int | None = None) -> np.ndarray:
    lab, k = validate_labels(labels, n_labels)
    return np.bincount(lab, minlength=k) / lab.shape[0]


def marginal_entropy(labels, n_labels: int | None = None) -> float:
    """H(R) of the empirical reward-label distribution, in nats."""
    return _entropy(label_probabilities(labels, n_labels))


def conditional_entropy(memberships, labels, n_labels: int | None = None) -> float:
    """H(R | M^1..M^m) of the frequency-estimated joint, in nats."""
    return estimate_joint(memberships, labels, n_labels).conditional_entropy()


def information_gain(memberships, labels, n_labels: int | None = None) -> float:
    """H(R) - H(R | M^1..M^m), in nats.  Non-negative up to float noise."""
    return estimate_joint(memberships, labels, n_labels).information_gain()


def majority_readout(table: JointTable) -> np.ndarray:
    """Most likely label per assignment, shape (2^m,), ints.

    Assignments with zero mass fall back to the global majority label.
    Ties resolve to the lower label index.
    """
    fallback = int(np.argmax(table.label_marginal))
    readout = np.argmax(table.probs, axis=1)
    readout[table.assignment_marginal <= 0.0] = fallback
    return readout.astype(int)


# ---------------------------------------------------------------------------
# relaxed objective with analytic gradient
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ObjectiveEval:
    """One evaluation of the relaxed objective at (center, radius, alpha).

    ``value`` is the sigmoid-relaxed conditional entropy; ``hard_value`` is
    the conditional entropy with the free region's membership hardened at
    the same parameters (frozen regions are always hard).  Gradients are of
    ``value`` with respect to the free region's center and radius.
    """

    value: float
    grad_center: np.ndarray
    grad_radius: float
    hard_value: float
    degenerate_labels: bool
    memberships: np.ndarray


class RelaxedObjective:
    """Prepared evaluator for one dataset / label vector / frozen-region set.

    Precomputes the padded state tensor, the frozen regions' hard
    memberships, and the per-trajectory (frozen assignment, label) group
    index, so each call only touches the free region.
    """

    def __init__(self, dataset: Dataset, labels, frozen=(), n_labels: int | None = None):
        self.dataset = dataset
        lab, k = validate_labels(labels, n_labels)
        if lab.shape[0] != len(dataset):
            raise InvalidParameterError(
                f"labels have {lab.shape[0]} entries for {len(dataset)} trajectories"
            )
        self.labels = lab
        self.n_labels = k
        frozen = tuple(frozen)
        if len(frozen) + 1 > _MAX_VARIABLES:
            raise InvalidParameterError(
                f"too many regions ({len(frozen)} frozen + 1 free)"
            )
        self.frozen = frozen
        self.n_frozen = len(frozen)

        fidx = np.zeros(len(dataset), dtype=int)
        for j, region in enumerate(frozen):
            bits = dataset_hard_memberships(dataset, region).astype(int)
            fidx += bits << j
        self._fidx = fidx
        self._n_assign_frozen = 2 ** self.n_frozen
        # group = frozen assignment * K + label, one bincount bucket per joint cell
        self._group = fidx * k + lab
        self._n_groups = self._n_assign_frozen * k
        self._padded = dataset.padded_states()
        self._rows = np.arange(len(dataset))
        self.degenerate_labels = _entropy(label_probabilities(lab, k)) == 0.0

    def frozen_conditional_entropy(self) -> float:
        """H(R | frozen regions only), hard memberships."""
        outside = np.bincount(self._group, minlength=self._n_groups)
        probs = outside.reshape(self._n_assign_frozen, self.n_labels) / len(self.dataset)
        table = JointTable(probs=probs, n_variables=self.n_frozen, n_labels=self.n_labels)
        return table.conditional_entropy()

    def _table_from_soft(self, g: np.ndarray) -> np.ndarray:
        """Joint probs (2^(f+1), K) with the free region as the last bit."""
        inside = np.bincount(self._group, weights=g, minlength=self._n_groups)
        outside = np.bincount(self._group, weights=1.0 - g, minlength=self._n_groups)
        k = self.n_labels
        f_rows = self._n_assign_frozen
        probs = np.concatenate(
            [outside.reshape(f_rows, k), inside.reshape(f_rows, k)], axis=0
        )
        return probs / len(self.dataset)

    def evaluate(self, center, radius: float, alpha: float) -> ObjectiveEval:
        """Relaxed conditional entropy and its gradient at one candidate.

        The free region's membership is the clamped sigmoid of
        ``alpha * (min_sq_dist - radius^2)``; frozen regions stay hard.
        Gradient chain: at argmin ties the lowest-index state is used, and
        fully saturated trajectories (membership exactly 0 or 1 after the
        exponent clamp) contribute zero gradient.
        """
        if not np.isfinite(alpha) or alpha <= 0.0:
            raise InvalidParameterError(f"alpha must be finite and > 0, got {alpha!r}")
        radius = float(radius)
        if not np.isfinite(radius) or radius <= 0.0:
            raise InvalidParameterError(f"radius must be finite and > 0, got {radius!r}")
        c = np.asarray(center, dtype=float)
        d2, argmins = dataset_min_sq_dists(self.dataset, c)
        u = d2 - radius ** 2
        g = 1.0 / (1.0 + np.exp(np.clip(alpha * u, -EXP_CLAMP, EXP_CLAMP)))

        n = len(self.dataset)
        probs = self._table_from_soft(g)
        pmu = probs.sum(axis=1)
        value = _entropy(probs) - _entropy(pmu)

        gh = (u <= 0.0).astype(float)
        probs_h = self._table_from_soft(gh)
        hard_value = _entropy(probs_h) - _entropy(probs_h.sum(axis=1))

        # dH/dg_l touches the two cells (frozen bits of l, free bit 0/1, label of l)
        gcoef = g * (1.0 - g)
        live = gcoef > 0.0
        s = np.zeros(n)
        if live.any():
            a0 = self._fidx[live]
            a1 = a0 + self._n_assign_frozen
            kl = self.labels[live]
            # all four probabilities are >= min(g, 1-g)/L > 0 on live rows
            s[live] = (np.log(pmu[a1]) - np.log(probs[a1, kl])
                       - np.log(pmu[a0]) + np.log(probs[a0, kl]))

        t = s * gcoef * alpha / n
        nearest = self._padded[self._rows, argmins]
        grad_center = 2.0 * (t[:, None] * (nearest - c)).sum(axis=0)
        grad_radius = 2.0 * radius * float(t.sum())

        return ObjectiveEval(
            value=float(value),
            grad_center=grad_center,
            grad_radius=float(grad_radius),
            hard_value=float(hard_value),
            degenerate_labels=self.degenerate_labels,
            memberships=g,
        )


def objective_with_gradient(dataset: Dataset, labels, frozen, free: Region,
                            alpha: float, n_labels: int | None = None) -> ObjectiveEval:
    """One-shot evaluation of the relaxed objective.

    Convenience wrapper around :class:`RelaxedObjective` for callers that do
    not reuse the prepared evaluator across steps.
    """
    ctx = RelaxedObjective(dataset, labels, frozen=frozen, n_labels=n_labels)
    return ctx.evaluate(free.center, free.radius, alpha)
