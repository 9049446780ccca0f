"""File formats: exact round-trips and line-numbered schema errors."""

import json

import numpy as np
import pytest

from rewardregions import Dataset, SchemaError, Trajectory, discover
from rewardregions.discovery import DiscoveryConfig
from rewardregions.io import (
    read_corpus,
    read_corpus_header,
    read_report,
    read_truth,
    write_corpus,
    write_points_csv,
    write_regions_csv,
    write_report,
    write_truth,
)
from rewardregions.synth import generate, make_spec


def ragged_dataset():
    rng = np.random.default_rng(0)
    trajs = [
        Trajectory(id="a", states=np.array([[1 / 3, np.pi]]), reward=0.1),
        Trajectory(id="b", states=rng.uniform(size=(3, 2)), reward=1.0,
                   actions=rng.normal(size=(2, 2))),
        Trajectory(id="c", states=rng.uniform(size=(5, 2)), reward=0.0),
    ]
    return Dataset(trajs)


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n")
    return path


HEADER = json.dumps({"format": "trajectory-corpus", "version": 1, "dim": 2})


def record(tid="t0", states=((0.0, 0.0),), reward=0.0, **extra):
    rec = {"id": tid, "states": [list(s) for s in states], "reward": reward}
    rec.update(extra)
    return json.dumps(rec)


def test_corpus_round_trip_is_exact(tmp_path):
    ds = ragged_dataset()
    path = tmp_path / "corpus.jsonl"
    write_corpus(path, ds, meta={"source": "unit", "n": 3})
    header = read_corpus_header(path)
    assert header["dim"] == 2
    assert header["meta"] == {"source": "unit", "n": 3}
    back = read_corpus(path)
    assert len(back) == 3
    for orig, rt in zip(ds.trajectories, back.trajectories):
        assert rt.id == orig.id
        assert np.array_equal(rt.states, orig.states)  # bit-exact floats
        assert rt.reward == orig.reward
        if orig.actions is None:
            assert rt.actions is None
        else:
            assert np.array_equal(rt.actions, orig.actions)


def test_blank_lines_are_skipped(tmp_path):
    path = write_lines(tmp_path / "c.jsonl",
                       [HEADER, record("t0"), "", record("t1", reward=1.0)])
    assert len(read_corpus(path)) == 2


@pytest.mark.parametrize("first_line,fragment", [
    ("", "empty file"),
    ("{not json", "not valid JSON"),
    (json.dumps({"format": "something-else", "version": 1, "dim": 2}),
     "format"),
    (json.dumps({"format": "trajectory-corpus", "version": 9, "dim": 2}),
     "version"),
    (json.dumps({"format": "trajectory-corpus", "version": 1}),
     "dim must be a positive integer"),
    (json.dumps({"format": "trajectory-corpus", "version": 1, "dim": 0}),
     "dim must be a positive integer"),
    (json.dumps({"format": "trajectory-corpus", "version": 1, "dim": 2.0}),
     "dim must be a positive integer"),
])
def test_header_errors(tmp_path, first_line, fragment):
    path = write_lines(tmp_path / "bad.jsonl", [first_line, record()])
    with pytest.raises(SchemaError, match=fragment) as exc:
        read_corpus_header(path)
    assert ":1:" in str(exc.value)


@pytest.mark.parametrize("bad_record,fragment", [
    ("{oops", "not valid JSON"),
    ("[1, 2]", "expected a JSON object"),
    (json.dumps({"states": [[0.0, 0.0]], "reward": 0.0}), "missing required key 'id'"),
    (json.dumps({"id": "", "states": [[0.0, 0.0]], "reward": 0.0}),
     "non-empty string"),
    (record("t1"), "duplicate trajectory id 't1'"),
    (json.dumps({"id": "t9", "reward": 0.0}), "missing required key 'states'"),
    (json.dumps({"id": "t9", "states": [[0.0, 0.0]]}),
     "missing required key 'reward'"),
    (record("t9", reward=True), "reward must be a number"),
    (record("t9", reward="high"), "reward must be a number"),
    (json.dumps({"id": "t9", "states": [["x", "y"]], "reward": 0.0}),
     "not numeric"),
    (json.dumps({"id": "t9", "states": [[0.0, 0.0], [0.5]], "reward": 0.0}),
     "not numeric"),
    (json.dumps({"id": "t9", "states": [0.0, 0.0], "reward": 0.0}),
     "inconsistent"),
    (record("t9", states=((0.0, 0.0, 0.0),)), "states have dim 3, header says 2"),
])
def test_record_errors_carry_line_numbers(tmp_path, bad_record, fragment):
    lines = [HEADER, record("t1", reward=1.0), bad_record]
    path = write_lines(tmp_path / "bad.jsonl", lines)
    with pytest.raises(SchemaError, match=fragment) as exc:
        read_corpus(path)
    assert ":3" in str(exc.value)  # 1-based: header is line 1


def test_non_finite_states_rejected(tmp_path):
    rec = json.dumps({"id": "t9", "states": [[0.0, None]], "reward": 0.0})
    path = write_lines(tmp_path / "nan.jsonl", [HEADER, rec])
    with pytest.raises(SchemaError, match="non-finite") as exc:
        read_corpus(path)
    assert "(trajectory 't9')" in str(exc.value)


def test_empty_corpus_rejected(tmp_path):
    path = write_lines(tmp_path / "empty.jsonl", [HEADER])
    with pytest.raises(SchemaError, match="no trajectories"):
        read_corpus(path)


def test_truth_round_trip(tmp_path):
    _, truth = generate(make_spec("paint", n_traj=30, seed=1))
    path = tmp_path / "truth.json"
    write_truth(path, truth)
    assert read_truth(path) == truth


def test_truth_errors(tmp_path):
    path = tmp_path / "t.json"
    path.write_text("{broken")
    with pytest.raises(SchemaError, match="not valid JSON"):
        read_truth(path)
    path.write_text(json.dumps({"format": "nope"}))
    with pytest.raises(SchemaError, match="synthetic-truth"):
        read_truth(path)


def test_report_round_trip(tmp_path):
    ds, _ = generate(make_spec("paint", n_traj=60, seed=2))
    report = discover(ds, config=DiscoveryConfig(n_regions=1, n_restarts=2, seed=0))
    path = tmp_path / "report.json"
    write_report(path, report)
    back = read_report(path)
    assert back.to_json() == report.to_json()


def test_report_errors(tmp_path):
    path = tmp_path / "r.json"
    path.write_text("not json at all")
    with pytest.raises(SchemaError, match="not valid JSON"):
        read_report(path)
    path.write_text(json.dumps({"kind": "region-discovery-report"}))
    with pytest.raises(SchemaError, match="malformed report"):
        read_report(path)


def test_points_csv(tmp_path):
    ds = ragged_dataset()
    path = tmp_path / "points.csv"
    write_points_csv(path, ds)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "id,x0,x1,reward"
    assert len(lines) == 1 + sum(len(t) for t in ds.trajectories)
    first = lines[1].split(",")
    assert first[0] == "a"
    assert float(first[1]) == 1 / 3  # repr round-trips exactly
    assert float(first[2]) == np.pi


def test_regions_csv(tmp_path):
    ds, _ = generate(make_spec("paint", n_traj=60, seed=2))
    report = discover(ds, config=DiscoveryConfig(n_regions=2, n_restarts=2, seed=0))
    path = tmp_path / "regions.csv"
    write_regions_csv(path, report)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "stage,c0,c1,radius,h_after_nats,ig_nats"
    assert len(lines) == 1 + len(report.stages)
    row = lines[1].split(",")
    assert row[0] == "1"
    assert float(row[3]) == report.stages[0].region.radius
