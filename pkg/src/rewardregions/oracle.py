"""Exhaustive reference search over a (center, radius) grid.

Scores every candidate sphere by exact hard conditional entropy.  On small
corpora this is the ground truth that gradient-descent discovery is judged
against; it is also exposed on the command line for certifying that no
single region can explain a corpus better than some bound.

Candidates are canonically ordered before scanning (radius ascending, then
center lexicographic), and the first strict minimum wins, so the result
does not depend on how the caller happened to enumerate the grid.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .core import Dataset, Region, assignment_indices
from .entropy import marginal_entropy, validate_labels
from .errors import InvalidParameterError
from .optimize import epsilon_bounds

DEFAULT_N_RADII = 32
_CENTER_CHUNK = 256


@dataclass(frozen=True)
class OracleResult:
    """Grid-search outcome: the best sphere plus the full scored table.

    ``h_table[i, j]`` is the hard conditional entropy of
    ``Region(centers[i], radii[j])`` together with the frozen regions.
    """

    region: Region
    value: float
    h_marginal: float
    centers: np.ndarray
    radii: np.ndarray
    h_table: np.ndarray

    @property
    def information_gain(self) -> float:
        return self.h_marginal - self.value


def default_centers(dataset: Dataset) -> np.ndarray:
    """Every distinct observed state, lexicographically sorted."""
    return np.unique(dataset.all_states(), axis=0)


def default_radii(dataset: Dataset, n_radii: int = DEFAULT_N_RADII) -> np.ndarray:
    """Geometric ladder of radii across the default epsilon bounds."""
    if n_radii < 1:
        raise InvalidParameterError(f"n_radii must be >= 1, got {n_radii}")
    lo, hi = epsilon_bounds(dataset)
    if n_radii == 1:
        return np.array([hi])
    return np.geomspace(lo, hi, n_radii)


def _entropy_nd(p: np.ndarray, axis) -> np.ndarray:
    terms = np.where(p > 0.0, p * np.log(np.where(p > 0.0, p, 1.0)), 0.0)
    return -terms.sum(axis=axis)


def grid_search(dataset: Dataset, labels, *, centers=None, radii=None,
                n_radii: int = DEFAULT_N_RADII, frozen=(),
                n_labels: int | None = None) -> OracleResult:
    """Score every (center, radius) candidate; return the best and the table.

    Parameters
    ----------
    dataset, labels : corpus and discrete reward labels.
    centers : array-like (C, d), optional
        Candidate centers; defaults to every distinct observed state.
        Deduplicated and canonically sorted either way.
    radii : array-like (R,), optional
        Candidate radii; defaults to ``n_radii`` geometric steps across the
        epsilon bounds.
    frozen : sequence of Region
        Regions held fixed (hard) while each candidate is scored as one
        additional variable.

    Notes
    -----
    Ties on the entropy resolve to the smallest radius, then the
    lexicographically smallest center, so the outcome is invariant to the
    enumeration order of the grid.
    """
    lab, k = validate_labels(labels, n_labels)
    if lab.shape[0] != len(dataset):
        raise InvalidParameterError(
            f"labels have {lab.shape[0]} entries for {len(dataset)} trajectories"
        )

    if centers is None:
        centers = default_centers(dataset)
    else:
        centers = np.asarray(centers, dtype=float)
        if centers.ndim != 2:
            raise InvalidParameterError("centers must be a 2-D array")
        if centers.shape[1] != dataset.dim:
            raise InvalidParameterError(
                f"centers have dim {centers.shape[1]}, dataset has {dataset.dim}"
            )
        if not np.isfinite(centers).all():
            raise InvalidParameterError("centers contain non-finite values")
        centers = np.unique(centers, axis=0)

    if radii is None:
        radii = default_radii(dataset, n_radii)
    else:
        radii = np.asarray(radii, dtype=float)
        if radii.ndim != 1 or radii.size == 0:
            raise InvalidParameterError("radii must be a non-empty 1-D array")
        if not np.isfinite(radii).all() or (radii <= 0).any():
            raise InvalidParameterError("radii must be finite and > 0")
        radii = np.unique(radii)

    frozen = tuple(frozen)
    n_frozen = len(frozen)
    fidx = assignment_indices(dataset, frozen)
    n_assign = 2 ** n_frozen
    group = fidx * k + lab
    n_groups = n_assign * k
    onehot = np.zeros((len(dataset), n_groups))
    onehot[np.arange(len(dataset)), group] = 1.0
    totals = onehot.sum(axis=0)

    flat = dataset.all_states()
    lengths = np.array([len(t) for t in dataset.trajectories])
    starts = np.concatenate([[0], np.cumsum(lengths)[:-1]])
    flat_sq = (flat ** 2).sum(axis=1)
    r2 = radii ** 2
    n = len(dataset)

    h_table = np.empty((centers.shape[0], radii.shape[0]))
    for lo in range(0, centers.shape[0], _CENTER_CHUNK):
        cc = centers[lo:lo + _CENTER_CHUNK]
        d2 = flat_sq[:, None] - 2.0 * (flat @ cc.T) + (cc ** 2).sum(axis=1)[None, :]
        np.maximum(d2, 0.0, out=d2)
        d2min = np.minimum.reduceat(d2, starts, axis=0)
        inside_mask = (d2min[:, :, None] <= r2[None, None, :]).astype(float)
        inside = np.einsum("lcr,lg->crg", inside_mask, onehot)
        outside = totals[None, None, :] - inside
        probs = np.concatenate(
            [outside.reshape(cc.shape[0], r2.shape[0], n_assign, k),
             inside.reshape(cc.shape[0], r2.shape[0], n_assign, k)],
            axis=2,
        ) / n
        pmu = probs.sum(axis=3)
        h_table[lo:lo + _CENTER_CHUNK] = (
            _entropy_nd(probs, axis=(2, 3)) - _entropy_nd(pmu, axis=2)
        )

    # first strict minimum in radius-major canonical order
    flat_idx = int(np.argmin(h_table.T.ravel()))
    r_i, c_i = divmod(flat_idx, centers.shape[0])
    best = Region(center=centers[c_i], radius=float(radii[r_i]))

    return OracleResult(
        region=best,
        value=float(h_table[c_i, r_i]),
        h_marginal=marginal_entropy(lab, k),
        centers=centers,
        radii=radii,
        h_table=h_table,
    )


def write_csv(result: OracleResult, path, meta: dict | None = None,
              top: int | None = None) -> None:
    """Write the scored grid as CSV (radius-major canonical order).

    A leading ``#`` comment line records the effective configuration.
    ``top`` keeps only the best-scoring rows (stable order on ties).
    """
    dim = result.centers.shape[1]
    h_flat = result.h_table.T.ravel()
    order = np.arange(h_flat.shape[0])
    if top is not None:
        if top < 1:
            raise InvalidParameterError(f"top must be >= 1, got {top}")
        order = np.argsort(h_flat, kind="stable")[:top]
    n_centers = result.centers.shape[0]
    with open(path, "w", newline="") as fh:
        header = {"kind": "oracle-grid", "n_centers": int(n_centers),
                  "n_radii": int(result.radii.shape[0]),
                  "h_marginal_nats": result.h_marginal}
        if meta:
            header.update(meta)
        fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        w = csv.writer(fh)
        w.writerow([f"c{i}" for i in range(dim)] + ["radius", "h_nats", "ig_nats"])
        for idx in order:
            r_i, c_i = divmod(int(idx), n_centers)
            row = [repr(float(x)) for x in result.centers[c_i]]
            row.append(repr(float(result.radii[r_i])))
            h = float(h_flat[idx])
            row.append(repr(h))
            row.append(repr(result.h_marginal - h))
            w.writerow(row)
