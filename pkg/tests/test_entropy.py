"""Joint estimation and entropy identities.

All entropies in nats. Reference values were hand-derived from the
frequency-counting definition with the 0 log 0 = 0 convention.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from rewardregions import (
    InvalidParameterError,
    JointTable,
    conditional_entropy,
    estimate_joint,
    information_gain,
    marginal_entropy,
    nats_to_bits,
)
from rewardregions.entropy import label_probabilities, majority_readout

LN2 = np.log(2.0)


# ---------------------------------------------------------------------------
# estimate_joint worked cases
# ---------------------------------------------------------------------------


def test_joint_perfect_separation():
    table = estimate_joint([1.0, 0.0], [0, 1])
    assert_allclose(table.probs, [[0.0, 0.5], [0.5, 0.0]])
    assert_allclose(table.conditional_entropy(), 0.0, atol=1e-15)


def test_joint_single_soft_row():
    # one trajectory with membership 0.25 splits its 1/L mass 0.75 / 0.25
    table = estimate_joint([0.25], [0])
    assert_allclose(table.probs, [[0.75], [0.25]])


def test_joint_two_variable_product():
    mem = np.array([[1, 1], [1, 0], [0, 1], [0, 0]], dtype=float)
    table = estimate_joint(mem, [0, 0, 0, 0])
    # little-endian: assignment = bit0 + 2 * bit1
    assert_allclose(table.probs[:, 0], [0.25, 0.25, 0.25, 0.25])
    assert table.probs.shape == (4, 1)


def test_joint_soft_mass_conservation():
    rng = np.random.default_rng(0)
    mem = rng.uniform(size=(30, 3))
    labels = rng.integers(0, 2, size=30)
    table = estimate_joint(mem, labels)
    assert_allclose(table.probs.sum(), 1.0, atol=1e-12)
    assert_allclose(table.label_marginal,
                    label_probabilities(labels, 2), atol=1e-12)


def test_joint_rejects_bad_inputs():
    with pytest.raises(InvalidParameterError):
        estimate_joint([0.5, 1.5], [0, 1])  # membership above 1
    with pytest.raises(InvalidParameterError):
        estimate_joint([0.5], [0, 1])  # row mismatch
    with pytest.raises(InvalidParameterError):
        estimate_joint([0.5, 0.5], [0.5, 1.0])  # non-integer labels
    with pytest.raises(InvalidParameterError):
        estimate_joint([0.5, 0.5], [-1, 0])  # negative label


def test_joint_table_shape_validation():
    with pytest.raises(InvalidParameterError):
        JointTable(probs=np.full((3, 2), 1 / 6), n_variables=1, n_labels=2)


# ---------------------------------------------------------------------------
# entropy values
# ---------------------------------------------------------------------------


def test_conditional_entropy_independent_uniform():
    # membership independent of the label, both fair coins
    mem = [1.0, 1.0, 0.0, 0.0]
    labels = [0, 1, 0, 1]
    assert_allclose(conditional_entropy(mem, labels), LN2, rtol=1e-12)
    assert_allclose(information_gain(mem, labels), 0.0, atol=1e-12)


def test_conditional_entropy_half_ln2():
    """[1,1,0,0] vs [r1,r1,r2,r1]: the inside half is pure, outside is 50/50."""
    value = conditional_entropy([1.0, 1.0, 0.0, 0.0], [0, 0, 1, 0])
    assert_allclose(value, 0.5 * LN2, rtol=1e-12)
    gain = information_gain([1.0, 1.0, 0.0, 0.0], [0, 0, 1, 0])
    assert_allclose(gain, marginal_entropy([0, 0, 1, 0]) - 0.5 * LN2, rtol=1e-12)


@pytest.mark.parametrize(
    "labels,expected",
    [
        ([0, 0, 0, 0], 0.0),
        ([0, 1, 0, 1], LN2),
        ([0, 0, 0, 1], -(0.75 * np.log(0.75) + 0.25 * np.log(0.25))),
    ],
)
def test_marginal_entropy_values(labels, expected):
    assert_allclose(marginal_entropy(labels), expected, rtol=1e-12, atol=1e-15)


def test_marginal_entropy_three_to_one():
    assert_allclose(marginal_entropy([0, 0, 0, 1]), 0.5623351446188083,
                    rtol=1e-12)


def test_nats_to_bits():
    assert_allclose(nats_to_bits(LN2), 1.0, rtol=1e-15)
    assert_allclose(nats_to_bits(0.0), 0.0)


# ---------------------------------------------------------------------------
# identity sweeps
# ---------------------------------------------------------------------------


def test_entropy_identities_random_sweep():
    """1000 random membership matrices: bounds, IG sign, chain rule."""
    rng = np.random.default_rng(314)
    for _ in range(1000):
        n = int(rng.integers(1, 12))
        m = int(rng.integers(1, 4))
        k = int(rng.integers(2, 4))
        mem = rng.uniform(size=(n, m))
        if rng.random() < 0.3:
            mem = (mem > 0.5).astype(float)
        labels = rng.integers(0, k, size=n)
        table = estimate_joint(mem, labels, n_labels=k)
        h_cond = table.conditional_entropy()
        h_marg = table.label_entropy()
        assert -1e-9 <= h_cond <= h_marg + 1e-9
        assert table.information_gain() >= -1e-9
        # chain rule: H(R|M) = H(M,R) - H(M)
        assert_allclose(h_cond,
                        table.joint_entropy() - table.assignment_entropy(),
                        atol=1e-9)


def test_single_variable_expansion_matches_general_formula():
    """For m=1 hard memberships the two-term expansion is exact."""
    rng = np.random.default_rng(99)
    for _ in range(1000):
        n = int(rng.integers(1, 20))
        mem = (rng.uniform(size=n) > 0.5).astype(float)
        labels = rng.integers(0, 3, size=n)
        general = conditional_entropy(mem, labels, n_labels=3)

        # direct two-term single-variable computation
        total = 0.0
        for mu in (0.0, 1.0):
            w = mem if mu == 1.0 else 1.0 - mem
            p_mu = w.sum() / n
            if p_mu <= 0.0:
                continue
            term = p_mu * np.log(p_mu)
            for k in range(3):
                p_mu_k = w[labels == k].sum() / n
                if p_mu_k > 0.0:
                    term -= p_mu_k * np.log(p_mu_k)
            total += term
        assert_allclose(general, total, atol=1e-12)


def test_permutation_invariance_of_joint():
    rng = np.random.default_rng(8)
    mem = rng.uniform(size=(15, 2))
    labels = rng.integers(0, 2, size=15)
    base = estimate_joint(mem, labels)
    perm = rng.permutation(15)
    permuted = estimate_joint(mem[perm], labels[perm])
    assert_allclose(permuted.probs, base.probs, atol=1e-12)


def test_column_swap_reindexes_assignments():
    rng = np.random.default_rng(12)
    mem = (rng.uniform(size=(20, 2)) > 0.4).astype(float)
    labels = rng.integers(0, 2, size=20)
    base = estimate_joint(mem, labels)
    swapped = estimate_joint(mem[:, ::-1], labels)
    # swapping columns swaps bits: assignments 1 and 2 trade places
    reorder = [0, 2, 1, 3]
    assert_allclose(swapped.probs, base.probs[reorder], atol=1e-12)
    assert_allclose(swapped.conditional_entropy(), base.conditional_entropy(),
                    atol=1e-12)


def test_majority_readout():
    mem = [1.0, 1.0, 0.0, 0.0, 0.0]
    labels = [1, 1, 0, 0, 1]
    table = estimate_joint(mem, labels)
    readout = majority_readout(table)
    assert list(readout) == [0, 1]
