import itertools
import math
from collections import defaultdict

import pytest

from btreehist import btree as B
from btreehist import historic as H
from btreehist import permutations as P

WORKED_PERM = (6, 1, 2, 4, 7, 5, 9, 8, 3)


def worked_setup():
    tree, hist, _ = B.run_permutation(1, WORKED_PERM)
    return tree, hist, H.history_to_historic(hist)


def grouped_by_history(m, n):
    groups = defaultdict(set)
    for p in itertools.permutations(range(1, n + 1)):
        _, hist, _ = B.run_permutation(m, p)
        groups[hist].add(p)
    return groups


# ---- psi / psi_hat -------------------------------------------------------


def test_psi_worked_example():
    rec = P.psi(WORKED_PERM, 1)
    assert rec.split_times == (3, 5, 8, 9)
    assert rec.pushed_key_values == (2, 6, 8, 4)
    assert rec.standardized == (1, 3, 4, 2)


def test_psi_no_splits():
    assert P.psi((2, 1), 1) == P.AscentRecord((), (), ())
    assert P.psi((1, 2, 3), 2).standardized == ()


def test_psi_single_split():
    rec = P.psi((1, 2, 3), 1)
    assert rec.pushed_key_values == (2,)
    assert rec.standardized == (1,)


def test_psi_hat_worked_example():
    _, hist, _ = B.run_permutation(1, WORKED_PERM)
    assert P.psi_hat(hist) == (1, 3, 4, 2)


def test_psi_hat_empty():
    assert P.psi_hat(B.History(1, 2, (1,))) == ()


@pytest.mark.parametrize("m,nmax", [(1, 7), (2, 7)])
def test_psi_coherence_exhaustive(m, nmax):
    """psi from real keys and psi_hat from the bare shape history agree."""
    for n in range(1, nmax + 1):
        for p in itertools.permutations(range(1, n + 1)):
            _, hist, _ = B.run_permutation(m, p)
            assert P.psi(p, m).standardized == P.psi_hat(hist)


def test_pushed_values_are_trimmed_keys():
    tree, _, _ = B.run_permutation(1, WORKED_PERM)
    rec = P.psi(WORKED_PERM, 1)
    assert sorted(rec.pushed_key_values) == B.nonleaf_keys(tree)


# ---- step 1 --------------------------------------------------------------


def test_iota_worked_example():
    tree, _, _ = worked_setup()
    assert P.iota(tree) == (2, 4, 6, 8)
    assert P.lift((1, 3, 4, 2), tree) == (2, 6, 8, 4)


def test_iota_single_root_key():
    t = B.KeyedBTree(1, B.KNode((2,), (B.KNode((1,)), B.KNode((3,)))))
    assert P.iota(t) == (2,)


def test_iota_needs_height():
    with pytest.raises(ValueError):
        P.iota(B.new_keyed_singleton(1, 1))


def test_iota_strictly_increasing():
    for n in range(3, 8):
        for p in itertools.permutations(range(1, n + 1)):
            tree, _, _ = B.run_permutation(1, p)
            if B.height(tree) < 1:
                continue
            inj = P.iota(tree)
            assert all(a < b for a, b in zip(inj, inj[1:]))


# ---- step 2 --------------------------------------------------------------


def test_dag_worked_example():
    tree, hist, target = worked_setup()
    dag = P.build_dag(tree, (1, 3, 4, 2))
    assert dag.n == 9
    labellings = list(P.topological_labellings(dag))
    assert len(labellings) == 3
    assert len(set(labellings)) == 3
    assert target in labellings


def test_dag_path_single_labelling():
    tree, _, _ = B.run_permutation(1, (1, 2, 3))
    dag = P.build_dag(tree, (1,))
    assert dag.n == 3
    assert len(list(P.topological_labellings(dag))) == 1


def test_dag_vertex_count_identity():
    for n in range(3, 8):
        for p in itertools.permutations(range(1, n + 1)):
            tree, hist, _ = B.run_permutation(1, p)
            if B.height(tree) < 1:
                continue
            pi1 = P.psi_hat(hist)
            dag = P.build_dag(tree, pi1)
            s_total = sum(size - 1 for size in B.leaf_sizes(tree))
            assert dag.n == len(pi1) * 2 + 1 + s_total == n


def test_dag_rejects_bad_inputs():
    tree, _, _ = worked_setup()
    with pytest.raises(ValueError):
        P.build_dag(tree, (1, 2))  # wrong length
    with pytest.raises(ValueError):
        P.build_dag(tree, (1, 1, 2, 2))  # not a permutation


@pytest.mark.parametrize("m,nmax", [(1, 7), (2, 7)])
def test_labellings_are_exactly_the_compatible_histories(m, nmax):
    """For each (final tree, ascent permutation) pair, the DAG labellings
    coincide with the historic trees of histories mapping to that pair."""
    for n in range(2 * m + 1, nmax + 1):
        by_pair = defaultdict(set)
        for hist in B.iter_histories(m, n):
            shape = B.replay_history(hist)[-1]
            key = (repr(shape.root), P.psi_hat(hist))
            by_pair[key].add(H.history_to_historic(hist))
        for (shape_repr, pi1), expected in by_pair.items():
            hist = next(iter(expected))
            keyed = _keyed_of(B.replay_history(H.historic_to_history(hist))[-1])
            got = set(P.topological_labellings(P.build_dag(keyed, pi1)))
            assert got == expected, (m, n, pi1)


def _keyed_of(shape: B.BTreeShape) -> B.KeyedBTree:
    perm = next(iter(_perms_of_shape(shape)))
    return B.run_permutation(shape.m, perm)[0]


def _perms_of_shape(shape: B.BTreeShape):
    n = B.total_keys(shape)
    for p in itertools.permutations(range(1, n + 1)):
        t, _, _ = B.run_permutation(shape.m, p)
        if B.shape_of(t) == shape:
            yield p


# ---- step 3 --------------------------------------------------------------


def test_enumerate_worked_example():
    _, _, target = worked_setup()
    perms = set(P.enumerate_perms(target, (2, 6, 8, 4)))
    assert len(perms) == 1296
    assert WORKED_PERM in perms


def test_documented_choice_sequence_regenerates_pi():
    _, _, target = worked_setup()
    choices = [
        ("place", 3, (2,)),  # pushed key 2 to position 3; position 2 small
        ("order", (1,)),     # small side: just the value 1
        ("place", 1, (2,)),  # pushed key 6 first among the large side
        ("place", 1, (3,)),  # pushed key 4 first among {3,4,5}; slot 3 small
        ("order", (3,)),
        ("order", (5,)),
        ("place", 3, (1,)),  # pushed key 8 third among {7,8,9}; slot 1 small
        ("order", (7,)),
        ("order", (9,)),
    ]
    assert P.rebuild_with_choices(target, (2, 6, 8, 4), choices) == WORKED_PERM


def test_rebuild_rejects_bad_choices():
    _, _, target = worked_setup()
    with pytest.raises(ValueError):
        P.rebuild_with_choices(target, (2, 6, 8, 4), [("place", 9, (2,))])
    with pytest.raises(ValueError):
        P.rebuild_with_choices(target, (2, 6, 8, 4), [("order", (1, 2))])


def test_enumerate_base_case():
    t = H.HistoricTree(1, (0, 1), ("only", "only"))
    assert set(P.enumerate_perms(t, ())) == {(1, 2), (2, 1)}


def test_enumerate_rejects_inconsistent_inputs():
    _, _, target = worked_setup()
    with pytest.raises(ValueError):
        list(P.enumerate_perms(target, (2, 6)))  # |K| != branchings


@pytest.mark.parametrize("m,nmax", [(1, 7), (2, 7)])
def test_partition_of_sn(m, nmax):
    """The permutation sets of the historic trees on n vertices partition
    S_n, with sizes given by the closed-form count."""
    for n in range(1, nmax + 1):
        groups = grouped_by_history(m, n)
        total = 0
        for hist, members in groups.items():
            t = H.history_to_historic(hist)
            final = B.run_permutation(m, sorted(members)[0])[0]
            pi1 = P.psi_hat(hist)
            pi_iota = P.lift(pi1, final) if pi1 else ()
            stream = list(P.enumerate_perms(t, pi_iota))
            assert len(stream) == len(set(stream)) == P.count_perms(t)
            assert set(stream) == members
            total += len(members)
        assert total == math.factorial(n)


def test_count_perms_examples():
    _, _, target = worked_setup()
    assert P.count_perms(target) == 6**4 == 1296
    unique3 = H.history_to_historic(B.History(1, 3, (1, 1)))
    assert P.count_perms(unique3) == 6
    two = H.HistoricTree(1, (0, 1), ("only", "only"))
    assert P.count_perms(two) == 2


def test_count_sums_to_factorial_at_n9():
    total = sum(P.count_perms(t) for t in H.iter_historic_trees(1, 9))
    assert total == math.factorial(9)


def test_pushed_key_splits_later_insertions_by_side():
    """Keys inserted after a split exceed the pushed key exactly when their
    vertex sits to the right of the splitting branching."""
    for p in itertools.permutations(range(1, 8)):
        _, hist, _ = B.run_permutation(1, p)
        rec = P.psi(p, 1)
        t = H.history_to_historic(hist)
        for when, pushed in zip(rec.split_times, rec.pushed_key_values):
            for j in range(when + 1, t.n + 1):
                assert (p[j - 1] > pushed) == H.is_right_of(t, j, when)


# ---- the full recursion --------------------------------------------------


def test_underline_pi_height_zero():
    t = B.KeyedBTree(2, B.KNode((1, 2, 3)))
    assert sorted(P.underline_pi(t)) == sorted(itertools.permutations((1, 2, 3)))


def test_underline_pi_three_keys():
    tree, _, _ = B.run_permutation(1, (1, 2, 3))
    assert len(set(P.underline_pi(tree))) == 6


def test_underline_pi_contains_worked_perm():
    tree, _, _ = worked_setup()
    assert WORKED_PERM in set(P.underline_pi(tree))


@pytest.mark.parametrize("m", [1, 2])
def test_underline_pi_matches_brute_force(m):
    for n in range(1, 7):
        by_shape = defaultdict(set)
        for p in itertools.permutations(range(1, n + 1)):
            t, _, _ = B.run_permutation(m, p)
            by_shape[repr(B.shape_of(t).root)].add(p)
        for shape_repr, members in by_shape.items():
            t0 = B.run_permutation(m, sorted(members)[0])[0]
            stream = list(P.underline_pi(t0))
            assert len(stream) == len(set(stream))
            assert set(stream) == members


def test_underline_pi_standardizes_keys():
    """Arbitrary key values are compared by rank."""
    tree, _, _ = B.run_permutation(1, (1, 2, 3))
    shifted = B.relabel_keys(tree, {1: 10, 2: 20, 3: 30})
    assert set(P.underline_pi(shifted)) == set(P.underline_pi(tree))


def test_standardize():
    assert P.standardize((2, 6, 8, 4)) == (1, 3, 4, 2)
    assert P.standardize(()) == ()
