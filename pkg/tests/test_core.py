"""Data model and membership tests: distances, indicators, relaxations."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from rewardregions import (
    Dataset,
    DimensionMismatchError,
    InvalidParameterError,
    Region,
    Trajectory,
    assignment_indices,
    hard_membership,
    membership_matrix,
    min_sq_dist,
    soft_membership,
)
from rewardregions.core import (
    dataset_hard_memberships,
    dataset_min_sq_dists,
    dataset_soft_memberships,
)


def make_dataset(state_lists, rewards=None):
    rewards = rewards if rewards is not None else [0.0] * len(state_lists)
    return Dataset([
        Trajectory(id=f"t{i}", states=np.asarray(s, dtype=float), reward=r)
        for i, (s, r) in enumerate(zip(state_lists, rewards))
    ])


# ---------------------------------------------------------------------------
# min_sq_dist
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "states,center,expected_d2,expected_idx",
    [
        ([[0.0, 0.0], [3.0, 4.0]], [0.0, 0.0], 0.0, 0),
        ([[1.0, 0.0], [0.0, 2.0]], [0.0, 0.0], 1.0, 0),
        ([[3.0, 4.0], [0.5, 0.5]], [0.5, 0.5], 0.0, 1),
        ([[2.0], [5.0], [4.0]], [4.5], 0.25, 1),
    ],
)
def test_min_sq_dist_values(states, center, expected_d2, expected_idx):
    d2, idx = min_sq_dist(states, center)
    assert_allclose(d2, expected_d2)
    assert idx == expected_idx


def test_min_sq_dist_tie_breaks_to_lowest_index():
    # both states at distance 1; index 0 must win
    d2, idx = min_sq_dist([[1.0, 0.0], [-1.0, 0.0]], [0.0, 0.0])
    assert_allclose(d2, 1.0)
    assert idx == 0


def test_min_sq_dist_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        min_sq_dist([[1.0, 0.0]], [0.0, 0.0, 0.0])


def test_min_sq_dist_rotation_invariant():
    """A common rigid rotation of states and center leaves the value alone."""
    rng = np.random.default_rng(7)
    for _ in range(20):
        states = rng.normal(size=(5, 2))
        center = rng.normal(size=2)
        theta = rng.uniform(0, 2 * np.pi)
        rot = np.array([[np.cos(theta), -np.sin(theta)],
                        [np.sin(theta), np.cos(theta)]])
        d2, idx = min_sq_dist(states, center)
        d2r, idxr = min_sq_dist(states @ rot.T, rot @ center)
        assert_allclose(d2r, d2, rtol=1e-12, atol=1e-12)
        assert idxr == idx


# ---------------------------------------------------------------------------
# hard / soft membership
# ---------------------------------------------------------------------------


def test_hard_membership_boundary_is_inside():
    traj = [[1.0, 0.0]]
    assert hard_membership(traj, Region(center=[0.0, 0.0], radius=0.5)) == 0
    assert hard_membership(traj, Region(center=[0.0, 0.0], radius=1.0)) == 1


def test_hard_membership_zero_distance():
    region = Region(center=[0.3, 0.4], radius=1e-6)
    assert hard_membership([[0.3, 0.4], [9.0, 9.0]], region) == 1


def test_hard_membership_monotone_in_radius():
    rng = np.random.default_rng(3)
    for _ in range(50):
        states = rng.uniform(-1, 1, size=(4, 3))
        center = rng.uniform(-1, 1, size=3)
        r1, r2 = sorted(rng.uniform(0.05, 2.0, size=2))
        m1 = hard_membership(states, Region(center=center, radius=r1))
        m2 = hard_membership(states, Region(center=center, radius=r2))
        assert m1 <= m2


def test_soft_membership_half_at_boundary():
    # min_sq_dist == radius^2 gives exactly 0.5 for any alpha
    region = Region(center=[0.0, 0.0], radius=1.0)
    for alpha in (0.1, 1.0, 50.0):
        assert_allclose(soft_membership([[1.0, 0.0]], region, alpha), 0.5)


def test_soft_membership_ln3_value():
    # min_sq_dist - radius^2 = -1 at alpha = ln 3 gives 1/(1 + 1/3) = 0.75
    region = Region(center=[0.0, 0.0], radius=np.sqrt(2.0))
    g = soft_membership([[1.0, 0.0]], region, alpha=np.log(3.0))
    assert_allclose(g, 0.75, rtol=1e-12)


def test_soft_membership_saturates_far_outside():
    # u = +50 at alpha = 10 is deep in the clamp regime
    region = Region(center=[0.0], radius=1.0)
    g = soft_membership([[np.sqrt(51.0)]], region, alpha=10.0)
    assert g < 1e-6


def test_soft_membership_rejects_bad_alpha():
    region = Region(center=[0.0], radius=1.0)
    for alpha in (0.0, -1.0, np.nan, np.inf):
        with pytest.raises(InvalidParameterError):
            soft_membership([[0.5]], region, alpha)


def test_soft_membership_permutation_invariant():
    rng = np.random.default_rng(11)
    states = rng.normal(size=(6, 2))
    region = Region(center=[0.1, -0.2], radius=0.7)
    g = soft_membership(states, region, alpha=3.0)
    for _ in range(5):
        perm = rng.permutation(len(states))
        assert_allclose(soft_membership(states[perm], region, alpha=3.0), g)


def test_soft_approaches_hard_with_alpha():
    """|g - I| <= 1/(1 + exp(alpha * delta)) whenever the margin is delta."""
    rng = np.random.default_rng(23)
    for _ in range(100):
        states = rng.uniform(-1, 1, size=(5, 2))
        center = rng.uniform(-1, 1, size=2)
        radius = rng.uniform(0.2, 1.5)
        region = Region(center=center, radius=radius)
        d2, _ = min_sq_dist(states, center)
        delta = abs(d2 - radius ** 2)
        if delta < 1e-3:
            continue
        mu = hard_membership(states, region)
        for alpha in (1.0, 10.0, 100.0, 1000.0):
            g = soft_membership(states, region, alpha)
            bound = 1.0 / (1.0 + np.exp(min(alpha * delta, 500.0)))
            assert abs(g - mu) <= bound + 1e-15


# ---------------------------------------------------------------------------
# Trajectory / Region / Dataset validation
# ---------------------------------------------------------------------------


def test_trajectory_rejects_empty_and_nonfinite():
    with pytest.raises(InvalidParameterError):
        Trajectory(id="a", states=np.zeros((0, 2)), reward=0.0)
    with pytest.raises(InvalidParameterError):
        Trajectory(id="a", states=[[np.nan, 0.0]], reward=0.0)
    with pytest.raises(InvalidParameterError):
        Trajectory(id="a", states=[[0.0, 0.0]], reward=np.inf)
    with pytest.raises(InvalidParameterError):
        Trajectory(id="", states=[[0.0, 0.0]], reward=0.0)


def test_trajectory_actions_alignment():
    states = np.zeros((4, 2))
    # length h and h - 1 both allowed
    Trajectory(id="a", states=states, reward=0.0, actions=np.zeros((4, 2)))
    Trajectory(id="a", states=states, reward=0.0, actions=np.zeros((3, 2)))
    with pytest.raises(InvalidParameterError):
        Trajectory(id="a", states=states, reward=0.0, actions=np.zeros((2, 2)))


def test_trajectory_arrays_are_readonly():
    t = Trajectory(id="a", states=[[1.0, 2.0]], reward=0.0)
    with pytest.raises(ValueError):
        t.states[0, 0] = 9.0


def test_region_validation():
    with pytest.raises(InvalidParameterError):
        Region(center=[0.0, 0.0], radius=0.0)
    with pytest.raises(InvalidParameterError):
        Region(center=[0.0, 0.0], radius=-1.0)
    with pytest.raises(InvalidParameterError):
        Region(center=[np.inf, 0.0], radius=1.0)
    region = Region(center=[1, 2], radius=3)
    assert region.dim == 2
    assert isinstance(region.radius, float)


def test_region_dict_round_trip():
    region = Region(center=[0.25, -1.5], radius=0.125)
    back = Region.from_dict(region.to_dict())
    assert_allclose(back.center, region.center)
    assert back.radius == region.radius


def test_dataset_rejects_duplicates_and_mixed_dims():
    t0 = Trajectory(id="a", states=[[0.0, 0.0]], reward=0.0)
    with pytest.raises(InvalidParameterError):
        Dataset([t0, Trajectory(id="a", states=[[1.0, 1.0]], reward=0.0)])
    with pytest.raises(DimensionMismatchError):
        Dataset([t0, Trajectory(id="b", states=[[1.0, 1.0, 1.0]], reward=0.0)])
    with pytest.raises(InvalidParameterError):
        Dataset([])


def test_dataset_padded_states_use_inf():
    ds = make_dataset([[[0.0, 0.0]], [[1.0, 1.0], [2.0, 2.0]]])
    padded = ds.padded_states()
    assert padded.shape == (2, 2, 2)
    assert np.isinf(padded[0, 1]).all()
    # padding never wins a minimum
    values, argmins = dataset_min_sq_dists(ds, [0.0, 0.0])
    assert_allclose(values, [0.0, 2.0])
    assert list(argmins) == [0, 0]


def test_dataset_workspace_diameter():
    ds = make_dataset([[[0.0, 0.0]], [[3.0, 4.0]]])
    assert_allclose(ds.workspace_diameter(), 5.0)
    degenerate = make_dataset([[[1.0, 1.0]], [[1.0, 1.0], [1.0, 1.0]]])
    assert degenerate.workspace_diameter() == 1.0


# ---------------------------------------------------------------------------
# vectorized memberships and assignment indexing
# ---------------------------------------------------------------------------


def test_vectorized_matches_scalar_membership():
    rng = np.random.default_rng(5)
    lists = [rng.normal(size=(rng.integers(1, 7), 3)) for _ in range(12)]
    ds = make_dataset(lists)
    region = Region(center=[0.2, -0.1, 0.4], radius=0.9)
    hard = dataset_hard_memberships(ds, region)
    soft = dataset_soft_memberships(ds, region, alpha=4.0)
    for i, t in enumerate(ds):
        assert hard[i] == hard_membership(t.states, region)
        assert_allclose(soft[i], soft_membership(t.states, region, 4.0),
                        rtol=1e-12)


def test_assignment_indices_little_endian():
    # trajectory 0 in region 0 only, 1 in region 1 only, 2 in both, 3 in none
    ds = make_dataset([
        [[0.0, 0.0]],
        [[10.0, 0.0]],
        [[0.0, 0.0], [10.0, 0.0]],
        [[5.0, 5.0]],
    ])
    regions = [
        Region(center=[0.0, 0.0], radius=1.0),
        Region(center=[10.0, 0.0], radius=1.0),
    ]
    mat = membership_matrix(ds, regions)
    assert_allclose(mat, [[1, 0], [0, 1], [1, 1], [0, 0]])
    # region j is bit j
    assert list(assignment_indices(ds, regions)) == [1, 2, 3, 0]


def test_assignment_indices_empty_region_list():
    ds = make_dataset([[[0.0, 0.0]], [[1.0, 1.0]]])
    assert list(assignment_indices(ds, [])) == [0, 0]
    assert membership_matrix(ds, []).shape == (2, 0)
