import itertools
import math

import numpy as np
import pytest

import structdist as sd
from structdist import oracle
from structdist.alignment import collapse
from structdist.errors import UnsupportedInference, VacuousDistribution

from helpers import NEG_INF, rand_alignment, rand_ctc, rand_matching, zero_alignment


def test_single_cell_grid_has_three_paths():
    assert sd.log_partition(zero_alignment(1, 1)) == pytest.approx(math.log(3))


def test_two_by_two_grid_path_count():
    # independently derivable by enumerating lattice paths; D(2,2) = 13
    a = zero_alignment(2, 2)
    ef = oracle.enumerate_structures(a)
    assert len(ef) == 13
    assert sd.log_partition(a) == pytest.approx(math.log(13))


@pytest.mark.parametrize("n,m,seed", [(3, 3, 0), (2, 4, 1), (4, 2, 2)])
def test_alignment_matches_path_enumeration(n, m, seed):
    a = rand_alignment(seed, n=n, m=m)
    ef = oracle.enumerate_structures(a)
    assert sd.log_partition(a) == pytest.approx(
        oracle.oracle_log_partition(ef, a.potentials()), abs=1e-7
    )


def test_alignment_marginals_match_enumeration():
    a = rand_alignment(5, n=3, m=2)
    ef = oracle.enumerate_structures(a)
    marg = sd.marginals(a)["move_potentials"]
    marg_o = oracle.oracle_marginals(ef, a.potentials())["move_potentials"]
    assert np.max(np.abs(marg - marg_o)) < 1e-6


# ---------------------------------------------------------------------------
# CTC
# ---------------------------------------------------------------------------


def test_ctc_two_frames_single_label():
    c = sd.CTCDist(np.zeros((2, 2)), (1,))
    assert sd.log_partition(c) == pytest.approx(math.log(3))


def test_ctc_uniform_normalized_frames():
    c = sd.CTCDist(np.full((2, 2), math.log(0.5)), (1,))
    assert sd.log_partition(c) == pytest.approx(math.log(3 / 4))


def test_collapse_merges_repeats_then_drops_blanks():
    assert collapse((1, 1, 0, 1, 2, 2)) == (1, 1, 2)
    assert collapse((0, 0, 0)) == ()


@pytest.mark.parametrize("frames,vocab,target_len,seed", [(5, 3, 2, 0), (4, 3, 3, 1), (6, 2, 2, 2)])
def test_ctc_matches_collapse_enumeration(frames, vocab, target_len, seed):
    c = rand_ctc(seed, num_frames=frames, vocab=vocab, target_len=target_len)
    ef = oracle.enumerate_structures(c)
    assert sd.log_partition(c) == pytest.approx(
        oracle.oracle_log_partition(ef, c.potentials()), abs=1e-7
    )


def test_ctc_empty_support_is_neg_inf():
    # two repeated labels need at least three frames
    c = sd.CTCDist(np.zeros((2, 2)), (1, 1))
    assert sd.log_partition(c) == NEG_INF


def test_ctc_partitions_sum_to_one_over_targets():
    # with row-normalized frames, exp(logZ) summed over every possible
    # target (of any length) is 1
    rng = np.random.default_rng(9)
    frames, vocab = 4, 2
    theta = rng.normal(size=(frames, vocab))
    theta = theta - sd.logsumexp(theta, axis=1)[:, None]
    total = 0.0
    for length in range(0, frames + 1):
        for target in itertools.product(range(1, vocab), repeat=length):
            if any(a == b for a, b in zip(target, target[1:])):
                # repeated labels need separating blanks; still valid targets
                pass
            c = sd.CTCDist(theta, target)
            log_z = sd.log_partition(c)
            if log_z > NEG_INF:
                total += math.exp(log_z)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_ctc_frame_marginals_sum_to_one():
    c = rand_ctc(3, num_frames=5, vocab=3, target_len=2)
    marg = sd.marginals(c)["frame_potentials"]
    assert np.allclose(marg.sum(axis=1), 1.0, atol=1e-9)


# ---------------------------------------------------------------------------
# one-to-one matching
# ---------------------------------------------------------------------------


def test_identity_dominant_assignment():
    match = sd.OneToOneMatching(np.array([[1.0, 0.0], [0.0, 1.0]]))
    ind = sd.argmax(match)["scores"]
    assert np.array_equal(ind, np.eye(2))


def test_anti_diagonal_dominant_assignment():
    match = sd.OneToOneMatching(np.array([[0.0, 1.0], [1.0, 0.0]]))
    ind = sd.argmax(match)["scores"]
    assert np.array_equal(ind, np.array([[0.0, 1.0], [1.0, 0.0]]))


@pytest.mark.parametrize("seed", range(8))
def test_assignment_matches_brute_force(seed):
    match = rand_matching(seed, n=5)
    ind, score, algo = sd.argmax_info(match)
    assert algo == "jonker-volgenant"
    best = max(
        sum(match.scores[i, p[i]] for i in range(5))
        for p in itertools.permutations(range(5))
    )
    assert score == pytest.approx(best, abs=1e-9)


def test_assignment_tie_break_prefers_smallest_column():
    # all-zero scores: every permutation ties; the identity is
    # lexicographically first by column choice per row
    match = sd.OneToOneMatching(np.zeros((4, 4)))
    ind = sd.argmax(match)["scores"]
    assert np.array_equal(ind, np.eye(4))


def test_assignment_invariant_to_row_and_column_shifts():
    match = rand_matching(77, n=5)
    base = sd.argmax(match)["scores"]
    shifted = match.scores.copy()
    shifted[2, :] += 10.0
    shifted[:, 3] -= 4.0
    ind = sd.argmax(sd.OneToOneMatching(shifted))["scores"]
    assert np.array_equal(ind, base)


def test_assignment_respects_forbidden_entries():
    scores = np.array([[0.0, NEG_INF], [NEG_INF, 0.0]])
    ind = sd.argmax(sd.OneToOneMatching(scores))["scores"]
    assert np.array_equal(ind, np.eye(2))


def test_assignment_with_no_finite_permutation_errors():
    scores = np.array([[NEG_INF, 0.0], [NEG_INF, 0.0]])
    with pytest.raises(VacuousDistribution):
        sd.argmax(sd.OneToOneMatching(scores))


def test_one_to_one_partition_family_is_unsupported():
    match = rand_matching(0, n=3)
    for op in (sd.log_partition, sd.marginals, sd.entropy):
        with pytest.raises(UnsupportedInference, match="intractable"):
            op(match)
    with pytest.raises(UnsupportedInference):
        sd.sample(match, seed=0)
    with pytest.raises(UnsupportedInference):
        sd.cross_entropy(match, match)
    with pytest.raises(UnsupportedInference):
        sd.log_prob(match, {"scores": np.eye(3)})
