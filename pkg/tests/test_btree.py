import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from btreehist import btree as B

WORKED_PERM = (6, 1, 2, 4, 7, 5, 9, 8, 3)


def test_new_singleton():
    for m in (1, 2, 3):
        t = B.new_singleton(m)
        assert t.root == 1
        assert B.leaf_count(t) == 1
    with pytest.raises(ValueError):
        B.new_singleton(0)


def test_first_root_split_shape():
    t, trace = B.insert_at_leaf(B.BTreeShape(1, 2), 1)
    assert t.root == (1, 1)
    assert trace.splits_propagated == 1
    assert trace.root_split


def test_no_overflow_shape():
    t, trace = B.insert_at_leaf(B.BTreeShape(1, 1), 1)
    assert t.root == 2
    assert trace.splits_propagated == 0
    assert not trace.root_split


def test_leaf_index_out_of_range():
    with pytest.raises(ValueError):
        B.insert_at_leaf(B.new_singleton(1), 2)


def test_first_keyed_split():
    t = B.KeyedBTree(1, B.KNode((1, 2)))
    t, trace = B.insert_key(t, 3)
    assert t.root.keys == (2,)
    assert [c.keys for c in t.root.children] == [(1,), (3,)]
    assert trace.pushed_keys == (2,)


def test_duplicate_key_rejected():
    t = B.KeyedBTree(1, B.KNode((1, 2)))
    with pytest.raises(ValueError):
        B.insert_key(t, 2)


def test_m2_ascending():
    t = B.new_keyed_singleton(2, 1)
    for k in (2, 3, 4, 5):
        t, trace = B.insert_key(t, k)
    assert t.root.keys == (3,)
    assert [c.keys for c in t.root.children] == [(1, 2), (4, 5)]
    assert trace.pushed_keys == (3,)


def test_worked_example_run():
    tree, hist, traces = B.run_permutation(1, WORKED_PERM)
    assert B.leaf_sizes(tree) == [1, 1, 1, 1, 1]
    assert B.all_keys(tree) == list(range(1, 10))
    assert B.nonleaf_keys(tree) == [2, 4, 6, 8]
    assert hist.leaf_choices == (1, 1, 2, 2, 2, 3, 3, 2)
    # the double split when key 8 arrives: leaf pushes 8, old root pushes 6
    t8 = traces[6]
    assert t8.pushed_keys == (8, 6)
    assert t8.root_split


def test_run_permutation_rejects_non_permutation():
    with pytest.raises(ValueError):
        B.run_permutation(1, (1, 3))


def test_singleton_history():
    _, hist, traces = B.run_permutation(2, (1,))
    assert hist.leaf_choices == ()
    assert traces == ()


def test_all_s3_permutations_collapse():
    results = {
        (B.shape_of(B.run_permutation(1, p)[0]).root, B.run_permutation(1, p)[1])
        for p in itertools.permutations((1, 2, 3))
    }
    assert len(results) == 1
    shape, hist = results.pop()
    assert shape == (1, 1)
    assert hist.leaf_choices == (1, 1)


def test_trim_worked_example():
    tree, _, _ = B.run_permutation(1, WORKED_PERM)
    t1 = B.trim(tree)
    assert B.all_keys(t1) == [2, 4, 6, 8]
    t2 = B.trim(t1)
    assert B.all_keys(t2) == [6]
    with pytest.raises(ValueError):
        B.trim(t2)


def test_trim_simple():
    t = B.KeyedBTree(1, B.KNode((2,), (B.KNode((1,)), B.KNode((3,)))))
    assert B.trim(t).root == B.KNode((2,))


def test_validate_examples():
    tree, _, _ = B.run_permutation(1, WORKED_PERM)
    assert B.validate(tree) == []
    # internal root with one child
    bad = B.BTreeShape(1, (1,))
    assert any("keys outside" in p for p in B.validate(bad))
    # m=1 leaf with 3 keys
    assert B.validate(B.BTreeShape(1, 3))
    # unequal leaf depths
    lopsided = B.BTreeShape(1, (1, (1, 1)))
    assert any("unequal depths" in p for p in B.validate(lopsided))


def test_leaf_sizes_examples():
    assert B.leaf_sizes(B.BTreeShape(1, 2)) == [2]
    t = B.new_keyed_singleton(1, 1)
    for k in (2, 3, 4):
        t, _ = B.insert_key(t, k)
    assert B.leaf_sizes(t) == [1, 2]


@pytest.mark.parametrize("m,nmax", [(1, 8), (2, 7)])
def test_replay_closure(m, nmax):
    """Every intermediate tree of every history is a valid B-tree."""
    for n in range(1, nmax + 1):
        for hist in B.iter_histories(m, n):
            for shape in B.replay_history(hist):
                assert B.validate(shape) == []


@given(st.integers(1, 2), st.permutations(list(range(1, 9))))
@settings(max_examples=60, deadline=None)
def test_keyed_shape_coherence(m, pi):
    """Replaying the recorded leaf choices at shape level reproduces the
    shape of the keyed tree, step by step."""
    tree, hist, traces = B.run_permutation(m, pi)
    shape = B.new_singleton(m)
    kt = B.new_keyed_singleton(m, pi[0])
    for key, trace in zip(pi[1:], traces):
        shape, strace = B.insert_at_leaf(shape, trace.receiving_leaf_index)
        kt, ktrace = B.insert_key(kt, key)
        assert strace.splits_propagated == ktrace.splits_propagated
        assert strace.root_split == ktrace.root_split
        assert B.shape_of(kt) == shape
    assert shape == B.shape_of(tree)


@given(st.integers(1, 3), st.integers(1, 40), st.randoms())
@settings(max_examples=40, deadline=None)
def test_split_accounting_and_conservation(m, n, rnd):
    pi = list(range(1, n + 1))
    rnd.shuffle(pi)
    tree, _, _ = B.run_permutation(m, pi)
    sizes = B.leaf_sizes(tree)
    assert sum(sizes) + (len(sizes) - 1) == n  # non-leaf keys = leaves - 1
    assert B.total_keys(tree) == n


def test_json_round_trips():
    tree, hist, _ = B.run_permutation(1, WORKED_PERM)
    shape = B.shape_of(tree)
    assert B.shape_from_dict(B.shape_to_dict(shape)) == shape
    assert B.keyed_from_dict(B.keyed_to_dict(tree)) == tree
    assert B.history_from_dict(B.history_to_dict(hist)) == hist


def test_shape_json_is_nested_ints():
    shape = B.BTreeShape(1, ((1, 1), (2,) * 2))
    d = B.shape_to_dict(shape)
    assert d == {"m": 1, "root": [[1, 1], [2, 2]]}


def test_malformed_shape_json():
    with pytest.raises(ValueError):
        B.shape_from_dict({"m": 1, "root": []})


def test_dot_smoke():
    tree, _, _ = B.run_permutation(1, WORKED_PERM)
    dot = B.btree_dot(tree)
    assert dot.startswith("digraph") and dot.count("->") == 7
