"""Multi-stage discovery driver: staging, floor candidate, reports."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from rewardregions import (
    Dataset,
    DegenerateLabelsError,
    DiscoveryConfig,
    DiscoveryReport,
    InvalidParameterError,
    SeedingError,
    Trajectory,
    discover,
    evaluate_report,
    fit_readout,
    generate,
    make_spec,
    predict_labels,
)
from rewardregions.discovery import NO_STRUCTURE_IG, resolve_labels


@pytest.fixture(scope="module")
def paint_corpus():
    spec = make_spec("paint", n_traj=200, seed=0)
    return generate(spec)


def point_dataset(points, labels):
    return Dataset([
        Trajectory(id=f"t{i}", states=np.asarray(p, dtype=float)[None, :],
                   reward=float(l))
        for i, (p, l) in enumerate(zip(points, labels))
    ])


def tight_cluster_dataset(seed=0):
    # all success states inside one tiny blob; failures spread around it
    rng = np.random.default_rng(seed)
    wins = rng.normal([0.7, 0.7], 0.01, size=(15, 2))
    losses = rng.uniform(0.0, 0.45, size=(45, 2))
    pts = np.vstack([wins, losses])
    return point_dataset(pts, [1] * 15 + [0] * 45)


def test_paint_single_region_explains_reward(paint_corpus):
    """Planted single region: discovery reaches IG >= 0.95 H(R)."""
    dataset, _ = paint_corpus
    cfg = DiscoveryConfig(n_regions=1, n_restarts=4, seed=0)
    report = discover(dataset, config=cfg)
    assert report.h_final <= 0.05
    assert report.ig_total >= 0.95 * report.h_marginal
    assert not report.no_structure
    stage = report.stages[0]
    assert stage.chosen_kind == "restart"
    # chosen candidate beats every restart
    assert all(stage.h_after <= r.h_hard + 1e-15 for r in stage.restarts)


def test_stage_entropies_never_increase(paint_corpus):
    dataset, _ = paint_corpus
    cfg = DiscoveryConfig(n_regions=3, n_restarts=2, seed=1)
    report = discover(dataset, config=cfg)
    hs = [report.h_marginal] + [s.h_after for s in report.stages]
    assert all(b <= a + 1e-9 for a, b in zip(hs, hs[1:]))
    for s in report.stages:
        assert s.information_gain >= -1e-9
        # the all-inside floor candidate pins the stage at h_before
        assert_allclose(s.floor_h, s.h_before, atol=1e-12)


def test_floor_candidate_wins_when_restarts_cannot_help():
    # labels independent of states: no region helps, floor is chosen or tied
    rng = np.random.default_rng(5)
    pts = rng.uniform(0, 1, size=(80, 2))
    labels = np.arange(80) % 2
    ds = point_dataset(pts, labels)
    cfg = DiscoveryConfig(n_regions=1, n_restarts=2, seed=0)
    report = discover(ds, config=cfg)
    stage = report.stages[0]
    assert stage.information_gain <= NO_STRUCTURE_IG
    assert stage.no_structure
    assert report.no_structure


def test_report_json_round_trip(paint_corpus):
    dataset, _ = paint_corpus
    cfg = DiscoveryConfig(n_regions=2, n_restarts=2, seed=3)
    report = discover(dataset, config=cfg)
    text = report.to_json()
    back = DiscoveryReport.from_json(text)
    assert back.to_json() == text
    assert back.h_final == report.h_final
    assert len(back.stages) == len(report.stages)
    assert back.stages[0].restarts[0].stop_reason == \
        report.stages[0].restarts[0].stop_reason


def test_jobs_do_not_change_report_bytes(paint_corpus):
    dataset, _ = paint_corpus
    serial = discover(dataset, config=DiscoveryConfig(
        n_regions=2, n_restarts=4, seed=7, jobs=1))
    threaded = discover(dataset, config=DiscoveryConfig(
        n_regions=2, n_restarts=4, seed=7, jobs=3))
    assert serial.to_json() == threaded.to_json()


def test_rerun_is_byte_identical(paint_corpus):
    dataset, _ = paint_corpus
    cfg = DiscoveryConfig(n_regions=1, n_restarts=3, seed=11)
    assert discover(dataset, config=cfg).to_json() == \
        discover(dataset, config=cfg).to_json()


def test_ig_floor_stops_early(paint_corpus):
    dataset, _ = paint_corpus
    # stage 1 explains everything, stage 2 gains ~0 and trips the floor
    cfg = DiscoveryConfig(n_regions=3, n_restarts=2, seed=0, ig_floor=0.01)
    report = discover(dataset, config=cfg)
    assert report.stopped_early
    assert len(report.stages) < 3


def test_seeding_failure_names_the_stage():
    ds = tight_cluster_dataset()
    cfg = DiscoveryConfig(n_regions=2, n_restarts=2, seed=0)
    with pytest.raises(SeedingError, match="stage 2"):
        discover(ds, config=cfg)


def test_degenerate_labels_rejected():
    ds = point_dataset(np.random.default_rng(0).uniform(size=(10, 2)),
                       [1.0] * 10)
    with pytest.raises(DegenerateLabelsError):
        discover(ds, config=DiscoveryConfig(n_regions=1, n_restarts=1))


def test_trace_dir_writes_csvs(tmp_path, paint_corpus):
    dataset, _ = paint_corpus
    cfg = DiscoveryConfig(n_regions=1, n_restarts=2, seed=0)
    discover(dataset, config=cfg, trace_dir=str(tmp_path))
    files = sorted(p.name for p in tmp_path.iterdir())
    assert files == ["stage1_restart0.csv", "stage1_restart1.csv"]


def test_config_validation():
    for bad in (
        DiscoveryConfig(n_regions=0),
        DiscoveryConfig(n_restarts=0),
        DiscoveryConfig(jobs=0),
        DiscoveryConfig(reward_clusters=0),
    ):
        with pytest.raises(InvalidParameterError):
            bad.validate()
    with pytest.raises(InvalidParameterError):
        discover(point_dataset(np.zeros((2, 1)), [0, 1]),
                 config=DiscoveryConfig(eps_min=0.5, eps_max=0.1))


def test_resolve_labels_paths():
    ds = point_dataset(np.zeros((4, 2)), [0.0, 0.1, 0.9, 1.0])
    labels, alphabet = resolve_labels(ds)
    assert list(labels) == [0, 0, 1, 1]
    assert_allclose(alphabet.values, [0.05, 0.95])
    # explicit labels path
    given = np.array([1, 0, 1, 0])
    labels2, alphabet2 = resolve_labels(ds, labels=given)
    assert np.array_equal(labels2, given)
    assert alphabet2.size == 2
    with pytest.raises(InvalidParameterError):
        resolve_labels(ds, labels=[0, 1])


def test_report_to_table_mentions_stages(paint_corpus):
    dataset, _ = paint_corpus
    report = discover(dataset, config=DiscoveryConfig(
        n_regions=1, n_restarts=2, seed=0))
    table = report.to_table()
    assert "H(R)" in table
    assert "stage" in table
    assert "nats" in table


# ---------------------------------------------------------------------------
# evaluation and prediction
# ---------------------------------------------------------------------------


def test_evaluate_report_against_truth(paint_corpus):
    dataset, truth = paint_corpus
    cfg = DiscoveryConfig(n_regions=1, n_restarts=4, seed=0)
    report = discover(dataset, config=cfg)
    scores = evaluate_report(report, dataset, truth)
    assert scores["accuracy"] >= 0.95
    assert scores["truth_label_agreement"] >= 0.95
    assert scores["consistent_with_report"]
    match = scores["region_matches"][0]
    assert match["center_distance"] < 0.1
    assert abs(match["radius_error"]) < 0.1


def test_evaluate_report_dim_mismatch(paint_corpus):
    dataset, _ = paint_corpus
    report = discover(dataset, config=DiscoveryConfig(
        n_regions=1, n_restarts=2, seed=0))
    other = point_dataset(np.zeros((3, 3)), [0, 1, 0])
    with pytest.raises(InvalidParameterError):
        evaluate_report(report, other)


def test_fit_readout_and_predict(paint_corpus):
    dataset, _ = paint_corpus
    report = discover(dataset, config=DiscoveryConfig(
        n_regions=1, n_restarts=4, seed=0))
    labels = np.array([report.alphabet.index_of(r) for r in dataset.rewards])
    table, readout = fit_readout(dataset, labels, report.regions,
                                 report.alphabet.size)
    predicted = predict_labels(dataset, report.regions, readout)
    assert predicted.shape == (len(dataset),)
    assert float(np.mean(predicted == labels)) >= 0.95
