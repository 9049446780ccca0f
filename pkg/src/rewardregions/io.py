"""Corpus, truth, and report file formats.

A corpus is JSON-lines: a header line then one record per trajectory.

    {"format": "trajectory-corpus", "version": 1, "dim": 2, "meta": {...}}
    {"id": "t0001", "states": [[0.1, 0.2], ...], "reward": 1.0}
    {"id": "t0002", "states": [...], "reward": 0.0, "actions": [[...], ...]}

``meta`` is optional and ignored by the reader (generators record their
effective configuration there).  Schema violations raise
:class:`~rewardregions.errors.SchemaError` naming the file, line, and — when
known — the trajectory id.  Floats round-trip exactly (JSON uses repr).
"""

from __future__ import annotations

import csv
import json

import numpy as np

from .core import Dataset, Trajectory
from .discovery import DiscoveryReport
from .errors import InvalidParameterError, SchemaError
from .synth import TRUTH_FORMAT

CORPUS_FORMAT = "trajectory-corpus"
CORPUS_VERSION = 1


def _require(record: dict, key: str, where: str):
    if key not in record:
        raise SchemaError(f"{where}: missing required key {key!r}")
    return record[key]


def write_corpus(path, dataset: Dataset, meta: dict | None = None) -> None:
    """Write a dataset as a corpus file (JSON lines)."""
    header = {"format": CORPUS_FORMAT, "version": CORPUS_VERSION,
              "dim": dataset.dim}
    if meta is not None:
        header["meta"] = meta
    with open(path, "w") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for t in dataset.trajectories:
            rec = {
                "id": t.id,
                "states": [[float(x) for x in row] for row in t.states],
                "reward": float(t.reward),
            }
            if t.actions is not None:
                rec["actions"] = [[float(x) for x in row] for row in t.actions]
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_corpus_header(path) -> dict:
    """Parse and validate only the corpus header line."""
    with open(path) as fh:
        first = fh.readline()
    if not first.strip():
        raise SchemaError(f"{path}:1: empty file, expected a corpus header")
    try:
        header = json.loads(first)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}:1: header is not valid JSON ({e})") from e
    if not isinstance(header, dict) or header.get("format") != CORPUS_FORMAT:
        raise SchemaError(
            f"{path}:1: expected header with format={CORPUS_FORMAT!r}"
        )
    if header.get("version") != CORPUS_VERSION:
        raise SchemaError(
            f"{path}:1: unsupported corpus version {header.get('version')!r}"
        )
    dim = header.get("dim")
    if not isinstance(dim, int) or dim < 1:
        raise SchemaError(f"{path}:1: header dim must be a positive integer")
    return header


def read_corpus(path) -> Dataset:
    """Read a corpus file into a Dataset.

    Raises
    ------
    SchemaError
        On any schema violation; the message names the file, the 1-based
        line number, and the trajectory id when one is available.
    """
    header = read_corpus_header(path)
    dim = header["dim"]
    trajectories = []
    seen_ids = set()
    with open(path) as fh:
        fh.readline()
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise SchemaError(f"{where}: not valid JSON ({e})") from e
            if not isinstance(rec, dict):
                raise SchemaError(f"{where}: expected a JSON object")
            tid = _require(rec, "id", where)
            if not isinstance(tid, str) or not tid:
                raise SchemaError(f"{where}: id must be a non-empty string")
            if tid in seen_ids:
                raise SchemaError(f"{where}: duplicate trajectory id {tid!r}")
            seen_ids.add(tid)
            where = f"{where} (trajectory {tid!r})"
            states = _require(rec, "states", where)
            reward = _require(rec, "reward", where)
            if not isinstance(reward, (int, float)) or isinstance(reward, bool):
                raise SchemaError(f"{where}: reward must be a number")
            try:
                arr = np.asarray(states, dtype=float)
            except (ValueError, TypeError) as e:
                raise SchemaError(f"{where}: states are not numeric ({e})") from e
            if arr.ndim != 2:
                raise SchemaError(
                    f"{where}: states must be a list of {dim}-dimensional "
                    f"points (rows have inconsistent lengths or are nested "
                    f"incorrectly)"
                )
            if arr.shape[1] != dim:
                raise SchemaError(
                    f"{where}: states have dim {arr.shape[1]}, header says {dim}"
                )
            actions = rec.get("actions")
            if actions is not None:
                try:
                    actions = np.asarray(actions, dtype=float)
                except (ValueError, TypeError) as e:
                    raise SchemaError(f"{where}: actions are not numeric ({e})") from e
            try:
                trajectories.append(
                    Trajectory(id=tid, states=arr, reward=float(reward),
                               actions=actions)
                )
            except InvalidParameterError as e:
                raise SchemaError(f"{where}: {e}") from e
    if not trajectories:
        raise SchemaError(f"{path}: corpus contains no trajectories")
    try:
        return Dataset(trajectories)
    except InvalidParameterError as e:
        raise SchemaError(f"{path}: {e}") from e


def write_truth(path, truth: dict) -> None:
    with open(path, "w") as fh:
        fh.write(json.dumps(truth, indent=2, sort_keys=True) + "\n")


def read_truth(path) -> dict:
    with open(path) as fh:
        try:
            truth = json.load(fh)
        except json.JSONDecodeError as e:
            raise SchemaError(f"{path}: not valid JSON ({e})") from e
    if not isinstance(truth, dict) or truth.get("format") != TRUTH_FORMAT:
        raise SchemaError(
            f"{path}: expected a truth file with format={TRUTH_FORMAT!r}"
        )
    return truth


def write_report(path, report: DiscoveryReport) -> None:
    with open(path, "w") as fh:
        fh.write(report.to_json())


def read_report(path) -> DiscoveryReport:
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as e:
            raise SchemaError(f"{path}: not valid JSON ({e})") from e
    try:
        return DiscoveryReport.from_dict(d)
    except (InvalidParameterError, KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"{path}: malformed report ({e})") from e


def write_points_csv(path, dataset: Dataset) -> None:
    """One row per state: trajectory id, coordinates, terminal reward."""
    dim = dataset.dim
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id"] + [f"x{i}" for i in range(dim)] + ["reward"])
        for t in dataset.trajectories:
            for row in t.states:
                w.writerow([t.id] + [repr(float(x)) for x in row]
                           + [repr(float(t.reward))])


def write_regions_csv(path, report: DiscoveryReport) -> None:
    """One row per discovered region, in stage order."""
    dim = report.dim
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["stage"] + [f"c{i}" for i in range(dim)]
                   + ["radius", "h_after_nats", "ig_nats"])
        for s in report.stages:
            w.writerow([s.stage] + [repr(float(c)) for c in s.region.center]
                       + [repr(float(s.region.radius)), repr(float(s.h_after)),
                          repr(float(s.information_gain))])
