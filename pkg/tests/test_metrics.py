import itertools
import math

import numpy as np
import pytest

from ktrr.kmeans import Labeling
from ktrr.metrics import accuracy, ari, contingency_table, fscore, nmi


def _acc_by_bijection(pred, truth):
    """Accuracy the slow way: best over all injective cluster-name maps."""
    pvals = sorted(set(pred))
    tvals = sorted(set(truth))
    counts = {
        (p, t): sum(1 for a, b in zip(pred, truth) if a == p and b == t)
        for p in pvals
        for t in tvals
    }
    k = max(len(pvals), len(tvals))
    best = 0
    for perm in itertools.permutations(range(k)):
        matched = 0
        for pi, p in enumerate(pvals):
            ti = perm[pi]
            if ti < len(tvals):
                matched += counts[(p, tvals[ti])]
        best = max(best, matched)
    return best / len(pred)


def _pair_confusion(pred, truth):
    tp = fp = fn = 0
    n = len(pred)
    for i in range(n):
        for j in range(i + 1, n):
            same_p = pred[i] == pred[j]
            same_t = truth[i] == truth[j]
            tp += same_p and same_t
            fp += same_p and not same_t
            fn += same_t and not same_p
    return tp, fp, fn


def _ari_by_pairs(pred, truth):
    tp, fp, fn = _pair_confusion(pred, truth)
    a = tp + fp  # same-cluster pairs in pred
    b = tp + fn  # same-cluster pairs in truth
    total = len(pred) * (len(pred) - 1) / 2
    expected = a * b / total
    maximum = (a + b) / 2
    if maximum == expected:
        return 1.0
    return (tp - expected) / (maximum - expected)


def _fscore_by_pairs(pred, truth):
    tp, fp, fn = _pair_confusion(pred, truth)
    if tp + fp == 0 and tp + fn == 0:
        return 0.0
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _nmi_by_probabilities(pred, truth, norm="sqrt"):
    n = len(pred)
    pvals, tvals = sorted(set(pred)), sorted(set(truth))
    pp = {v: sum(1 for x in pred if x == v) / n for v in pvals}
    pt = {v: sum(1 for x in truth if x == v) / n for v in tvals}
    hp = -sum(q * math.log(q) for q in pp.values() if q > 0)
    ht = -sum(q * math.log(q) for q in pt.values() if q > 0)
    if hp == 0 and ht == 0:
        return 1.0
    if hp == 0 or ht == 0:
        return 0.0
    mi = 0.0
    for p in pvals:
        for t in tvals:
            joint = sum(1 for a, b in zip(pred, truth) if a == p and b == t) / n
            if joint > 0:
                mi += joint * math.log(joint / (pp[p] * pt[t]))
    denom = {"sqrt": math.sqrt(hp * ht), "max": max(hp, ht), "min": min(hp, ht)}[norm]
    return mi / denom


def _random_cases(count, n_range=(2, 8), alphabet=4, seed=0):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        yield (
            rng.integers(0, alphabet, size=n).tolist(),
            rng.integers(0, alphabet, size=n).tolist(),
        )


def test_all_metrics_equal_one_on_identical_partitions():
    labels = [0, 1, 1, 2, 0, 2, 1]
    assert accuracy(labels, labels) == 1.0
    assert nmi(labels, labels) == 1.0
    assert ari(labels, labels) == 1.0
    assert fscore(labels, labels) == 1.0


def test_accuracy_matches_bijection_search():
    for pred, truth in _random_cases(200, seed=1):
        assert accuracy(pred, truth) == pytest.approx(_acc_by_bijection(pred, truth))


def test_accuracy_exhaustive_small():
    for pred in itertools.product(range(2), repeat=4):
        for truth in itertools.product(range(2), repeat=4):
            got = accuracy(list(pred), list(truth))
            assert got == pytest.approx(_acc_by_bijection(list(pred), list(truth)))


def test_ari_matches_pair_enumeration():
    for pred, truth in _random_cases(200, seed=2):
        want = _ari_by_pairs(pred, truth)
        assert ari(pred, truth) == pytest.approx(want, abs=1e-12)


def test_fscore_matches_pair_enumeration():
    for pred, truth in _random_cases(200, seed=3):
        assert fscore(pred, truth) == pytest.approx(
            _fscore_by_pairs(pred, truth), abs=1e-12
        )


@pytest.mark.parametrize("norm", ["sqrt", "max", "min"])
def test_nmi_matches_probability_sums(norm):
    for pred, truth in _random_cases(150, seed=4):
        want = _nmi_by_probabilities(pred, truth, norm)
        got = nmi(pred, truth, norm=norm)
        assert got == pytest.approx(min(1.0, max(0.0, want)), abs=1e-10)


def test_crossed_pairs_give_exact_minus_half():
    assert ari([0, 0, 1, 1], [0, 1, 0, 1]) == -0.5


def test_relabeling_invariance():
    rng = np.random.default_rng(5)
    for pred, truth in _random_cases(1000, seed=6):
        pred = np.array(pred)
        truth = np.array(truth)
        # a random injective renaming of both sides
        pmap = rng.permutation(100)[:10]
        tmap = rng.permutation(100)[:10]
        pr = pmap[pred]
        tr = tmap[truth]
        assert accuracy(pr, tr) == pytest.approx(accuracy(pred, truth))
        assert nmi(pr, tr) == pytest.approx(nmi(pred, truth))
        assert ari(pr, tr) == pytest.approx(ari(pred, truth))
        assert fscore(pr, tr) == pytest.approx(fscore(pred, truth))


def test_swapping_sides_keeps_symmetric_metrics():
    for pred, truth in _random_cases(100, seed=7):
        assert ari(pred, truth) == pytest.approx(ari(truth, pred))
        assert nmi(pred, truth) == pytest.approx(nmi(truth, pred))
        assert accuracy(pred, truth) == pytest.approx(accuracy(truth, pred))


def test_nmi_hand_computed_example():
    pred = [0, 0, 1, 1]
    truth = [0, 1, 1, 1]
    # H(pred) = log 2; H(truth) = -(1/4 log 1/4 + 3/4 log 3/4)
    # MI = 1/4 log(2) + 1/4 log(2/3) + 2/4 log(4/3)
    hp = math.log(2)
    ht = -(0.25 * math.log(0.25) + 0.75 * math.log(0.75))
    mi = 0.25 * math.log(2) + 0.25 * math.log(2 / 3) + 0.5 * math.log(4 / 3)
    assert nmi(pred, truth) == pytest.approx(mi / math.sqrt(hp * ht))
    assert nmi(pred, truth, norm="max") == pytest.approx(mi / max(hp, ht))
    assert nmi(pred, truth, norm="min") == pytest.approx(mi / min(hp, ht))


def test_degenerate_partition_conventions():
    flat = [0, 0, 0, 0]
    split = [0, 1, 2, 3]
    mixed = [0, 0, 1, 1]
    assert nmi(flat, flat) == 1.0
    assert nmi(flat, mixed) == 0.0
    assert nmi(mixed, flat) == 0.0
    assert ari(flat, flat) == 1.0
    assert ari(split, split) == 1.0  # expected == maximum, defined as perfect
    assert fscore(split, split) == 0.0  # no same-cluster pairs on either side
    assert fscore(flat, split) == 0.0
    assert accuracy(flat, split) == 0.25


def test_random_labelings_score_near_zero_on_average():
    # chance correction: ARI and NMI should hover around zero, not at it
    rng = np.random.default_rng(8)
    aris, nmis = [], []
    for _ in range(300):
        pred = rng.integers(0, 3, size=60)
        truth = rng.integers(0, 3, size=60)
        aris.append(ari(pred, truth))
        nmis.append(nmi(pred, truth))
    assert abs(np.mean(aris)) < 0.02
    assert np.mean(nmis) < 0.1


def test_accepts_labeling_objects():
    lab = Labeling(labels=np.array([0, 1, 0, 1]), inertia=0.0)
    assert accuracy(lab, [0, 1, 0, 1]) == 1.0
    assert ari(lab, np.array([1, 0, 1, 0])) == 1.0


def test_contingency_table_counts():
    ct = contingency_table([0, 0, 1, 1, 1], [0, 1, 1, 1, 2])
    assert ct.n == 5
    assert ct.counts.tolist() == [[1, 1, 0], [0, 2, 1]]
    assert ct.counts.sum() == 5


def test_float_labels_must_be_integral():
    assert accuracy([0.0, 1.0], [0, 1]) == 1.0
    with pytest.raises(ValueError):
        accuracy([0.5, 1.0], [0, 1])


def test_input_validation():
    with pytest.raises(ValueError):
        accuracy([0, 1], [0, 1, 2])
    with pytest.raises(ValueError):
        accuracy([], [])
    with pytest.raises(ValueError):
        accuracy(np.zeros((2, 2)), np.zeros(4))
    with pytest.raises(ValueError):
        nmi([0, 1], [0, 1], norm="arith")
    with pytest.raises(ValueError):
        ari([0], [0])
    with pytest.raises(ValueError):
        fscore([1], [1])
