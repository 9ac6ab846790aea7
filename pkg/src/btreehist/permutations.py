"""Recovering key-insertion orders from trees.

For a keyed B-tree T with keys 1..n, the set of permutations that build
T decomposes by insertion history.  The machinery here walks that
decomposition in both directions:

*  ``psi`` runs a permutation and records which keys ascend out of the
   leaf level, in order; standardising them gives a shorter permutation
   that builds the trimmed tree.
*  ``psi_hat`` recovers the same shorter permutation from the shape
   history alone, without ever seeing key values.
*  ``build_dag`` + ``topological_labellings`` enumerate, for a fixed
   shorter permutation, exactly the histories of T compatible with it:
   a two-coloured DAG whose black edges sketch the tree and whose red
   path orders the branchings; each topological labelling of the DAG is
   one historic tree.
*  ``enumerate_perms`` expands one historic tree into the full set of
   permutations realising it, by the recursive small/large split, and
   ``count_perms`` counts that set in closed form.
*  ``underline_pi`` chains everything recursively over trimmed trees.

Streams are deterministic: choice points iterate with the pushed key's
position ascending, then small-position subsets in lexicographic order,
then the small recursion before the large one; size-limited base cases
emit bijections in lexicographic order.
"""

from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass
from math import factorial
from typing import Iterator, Sequence

from .btree import (
    History,
    KeyedBTree,
    all_keys,
    height,
    insert_at_leaf,
    insert_key,
    leaf_sizes,
    new_keyed_singleton,
    new_singleton,
    nonleaf_keys,
    relabel_keys,
    trim,
)
from .historic import HistoricTree, branchings, children_by_slot, is_historic, s_values


def standardize(values: Sequence[int]) -> tuple[int, ...]:
    """Replace each entry by its rank within the sequence (1 = smallest)."""
    order = sorted(values)
    return tuple(bisect.bisect_left(order, v) + 1 for v in values)


@dataclass(frozen=True)
class AscentRecord:
    """Keys that ascended above the leaf level, in split-time order."""

    split_times: tuple[int, ...]
    pushed_key_values: tuple[int, ...]
    standardized: tuple[int, ...]


def psi(pi: Sequence[int], m: int) -> AscentRecord:
    """Run the insertion of ``pi`` and record every leaf-level ascent."""
    n = len(pi)
    if sorted(pi) != list(range(1, n + 1)):
        raise ValueError("input is not a permutation of 1..n")
    times: list[int] = []
    values: list[int] = []
    tree = new_keyed_singleton(m, pi[0])
    for t, key in enumerate(pi[1:], start=2):
        tree, trace = insert_key(tree, key)
        if trace.splits_propagated:
            times.append(t)
            values.append(trace.pushed_keys[0])
    return AscentRecord(tuple(times), tuple(values), standardize(values))


def psi_hat(h: History) -> tuple[int, ...]:
    """The standardized ascent permutation, computed from the shape history.

    Bookkeeping (keys of the current tree relabelled 1..t at all times):
    an insertion into leaf l raises every above-leaf key to the right of
    that leaf by one; if the leaf splits, a new above-leaf key K+m+1
    appears, K being the largest above-leaf key left of the leaf (0 if
    none).  Above-leaf keys left of leaf l are exactly the l-1 smallest.
    """
    shape = new_singleton(h.m)
    values: list[int] = []  # above-leaf key values, kept sorted
    births: list[int] = []  # values index in order of first ascent
    for t, choice in enumerate(h.leaf_choices, start=2):
        shape, trace = insert_at_leaf(shape, choice)
        l = trace.receiving_leaf_index
        for i in range(l - 1, len(values)):
            values[i] += 1
        if trace.splits_propagated:
            biggest_left = values[l - 2] if l >= 2 else 0
            values.insert(l - 1, biggest_left + h.m + 1)
            for i, b in enumerate(births):
                if b >= l - 1:
                    births[i] += 1
            births.append(l - 1)
    return standardize([values[b] for b in births])


# ---------------------------------------------------------------------------
# step 1: lifting


def iota(t: KeyedBTree) -> tuple[int, ...]:
    """Monotone injection sending i to the rank, among all keys, of the
    i-th smallest key stored above the leaves."""
    if height(t) < 1:
        raise ValueError("height-0 tree stores no keys above the leaves")
    everything = all_keys(t)
    return tuple(bisect.bisect_left(everything, k) + 1 for k in nonleaf_keys(t))


def lift(pi1: Sequence[int], t: KeyedBTree) -> tuple[int, ...]:
    """Rewrite a trimmed-tree permutation as key ranks of the full tree."""
    inj = iota(t)
    return tuple(inj[v - 1] for v in pi1)


# ---------------------------------------------------------------------------
# step 2: the two-coloured DAG


@dataclass(frozen=True)
class InsertionDag:
    """Unlabelled historic-tree skeleton (black) plus the branching path (red).

    ``parent``/``slot`` describe the black tree over vertex ids 1..n in
    the same format as :class:`~btreehist.historic.HistoricTree`; ids
    carry no label meaning.  ``red_edges`` chain the branching ids in
    ascent order.  ``s_chains[i]`` is the number of dangling vertices
    above external slot i+1.
    """

    m: int
    parent: tuple[int, ...]
    slot: tuple[str, ...]
    red_edges: tuple[tuple[int, int], ...]
    branching_ids: tuple[int, ...]  # indexed by above-leaf key rank (1-based)
    s_chains: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.parent)


def build_dag(t: KeyedBTree, pi1: Sequence[int]) -> InsertionDag:
    """Construct the DAG whose topological labellings are the histories of
    ``t`` with ascent permutation ``pi1``.

    ``pi1`` is trusted to be realisable for the trimmed tree; garbage in,
    garbage out.  Leaf sizes inconsistent with the implied skeleton raise.
    """
    m = t.m
    n1 = len(pi1)
    if sorted(pi1) != list(range(1, n1 + 1)):
        raise ValueError("ascent permutation must be a permutation of 1..n1")
    if n1 != len(nonleaf_keys(t)):
        raise ValueError("ascent permutation length does not match the tree")
    sizes = leaf_sizes(t)
    if len(sizes) != n1 + 1:
        raise ValueError(f"{len(sizes)} leaves cannot match {n1} above-leaf keys")
    chains = [size - m for size in sizes]
    if any(not 0 <= s <= m for s in chains):
        raise ValueError(f"leaf sizes {sizes} out of range [m, 2m] for m={m}")

    # binary search tree on the values 1..n1, in insertion order
    bst_left = [0] * (n1 + 1)
    bst_right = [0] * (n1 + 1)
    root = pi1[0]
    for v in pi1[1:]:
        cur = root
        while True:
            if v < cur:
                if bst_left[cur]:
                    cur = bst_left[cur]
                else:
                    bst_left[cur] = v
                    break
            else:
                if bst_right[cur]:
                    cur = bst_right[cur]
                else:
                    bst_right[cur] = v
                    break

    parent: list[int] = []
    slot: list[str] = []

    def new_vertex(p: int, s: str) -> int:
        parent.append(p)
        slot.append(s)
        return len(parent)

    def chain(p: int, s: str, length: int) -> int:
        """Append a chain of ``length`` vertices; returns its lowest id."""
        for _ in range(length):
            p = new_vertex(p, s)
            s = "only"
        return p

    branch_id = [0] * (n1 + 1)

    def embed(value: int, p: int, s: str, stem: int):
        anchor = chain(p, s, stem)
        b = new_vertex(anchor, s if stem == 0 else "only")
        branch_id[value] = b
        if bst_left[value]:
            embed(bst_left[value], b, "left", m)
        if bst_right[value]:
            embed(bst_right[value], b, "right", m)

    embed(root, 0, "only", 2 * m)

    # Gap i sits between in-order values i and i+1; exactly one of
    # (i misses its right child), (i+1 misses its left child) holds,
    # and that free side is where external slot i+1 hangs.
    for gap in range(n1 + 1):
        if gap == 0:
            owner, side = 1, "left"
        elif gap == n1:
            owner, side = n1, "right"
        elif not bst_right[gap]:
            owner, side = gap, "right"
        else:
            owner, side = gap + 1, "left"
        chain(branch_id[owner], side, chains[gap])

    red = tuple(
        (branch_id[a], branch_id[b]) for a, b in zip(pi1, pi1[1:])
    )
    dag = InsertionDag(
        m,
        tuple(parent),
        tuple(slot),
        red,
        tuple(branch_id[1:]),
        tuple(chains),
    )
    expected = n1 * (m + 1) + m + sum(chains)
    if dag.n != expected:
        raise AssertionError(f"built {dag.n} vertices, expected {expected}")
    return dag


def topological_labellings(g: InsertionDag) -> Iterator[HistoricTree]:
    """Every labelling of the DAG with all edges pointing to larger labels,
    each mapped to the historic tree its black edges induce.

    Duplicate-free and exhaustive; labels are assigned by repeatedly
    picking any currently available vertex, trying ids in ascending order.
    """
    n = g.n
    succs: list[list[int]] = [[] for _ in range(n + 1)]
    indeg = [0] * (n + 1)
    for v in range(1, n + 1):
        p = g.parent[v - 1]
        if p:
            succs[p].append(v)
            indeg[v] += 1
    for a, b in g.red_edges:
        succs[a].append(b)
        indeg[b] += 1

    # Kahn pass: a cycle would mean inconsistent inputs
    live = [v for v in range(1, n + 1) if indeg[v] == 0]
    deg = list(indeg)
    seen = 0
    while live:
        v = live.pop()
        seen += 1
        for w in succs[v]:
            deg[w] -= 1
            if deg[w] == 0:
                live.append(w)
    if seen != n:
        raise ValueError("DAG contains a cycle; inputs are inconsistent")

    label = [0] * (n + 1)
    avail = sorted(v for v in range(1, n + 1) if indeg[v] == 0)

    def rec(step: int) -> Iterator[HistoricTree]:
        if step > n:
            new_parent = [0] * n
            new_slot = ["only"] * n
            for v in range(1, n + 1):
                lv = label[v]
                p = g.parent[v - 1]
                new_parent[lv - 1] = label[p] if p else 0
                new_slot[lv - 1] = g.slot[v - 1]
            yield HistoricTree(g.m, tuple(new_parent), tuple(new_slot))
            return
        for i in range(len(avail)):
            v = avail[i]
            label[v] = step
            opened = []
            for w in succs[v]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    opened.append(w)
            rest = avail[:i] + avail[i + 1 :] + opened
            rest.sort()
            saved = avail[:]
            avail[:] = rest
            yield from rec(step + 1)
            avail[:] = saved
            for w in succs[v]:
                indeg[w] += 1
            label[v] = 0

    yield from rec(1)


# ---------------------------------------------------------------------------
# step 3: expanding one historic tree


def _top_subtrees(h: HistoricTree) -> tuple[list[int], list[int]]:
    """Sorted labels of the left and right subtrees of the topmost branching."""
    m = h.m
    top = 2 * m + 1
    kids = children_by_slot(h)
    sides = {"left": [], "right": []}
    for side in ("left", "right"):
        c = kids[top - 1].get(side)
        if c is None:
            continue
        stack = [c]
        while stack:
            v = stack.pop()
            sides[side].append(v)
            stack.extend(kids[v - 1].values())
    return sorted(sides["left"]), sorted(sides["right"])


def _carve(h: HistoricTree, labels: list[int]) -> HistoricTree:
    """Fresh m-vertex stem with the subtree spanned by ``labels`` below it,
    relabelled 1..m+len(labels) preserving relative order."""
    m = h.m
    new_of = {old: m + i + 1 for i, old in enumerate(labels)}
    parents = [0] + list(range(1, m))
    slots = ["only"] * m
    label_set = set(labels)
    for old in labels:
        p = h.parent[old - 1]
        if p in label_set:
            parents.append(new_of[p])
            slots.append(h.slot[old - 1])
        else:
            parents.append(m)
            slots.append("only")
    return HistoricTree(m, tuple(parents), tuple(slots))


def _split_positions(
    h: HistoricTree, values: tuple[int, ...], keys: tuple[int, ...]
):
    """Shared frame for one recursion step: everything that does not depend
    on the choice of pushed-key position and small subset."""
    m = h.m
    k1 = keys[0]
    idx = bisect.bisect_left(values, k1)
    if idx == len(values) or values[idx] != k1:
        raise ValueError(f"pushed key {k1} is not in the admissible range")
    left_labels, right_labels = _top_subtrees(h)
    if m + len(left_labels) != idx:
        raise ValueError(
            "historic tree and key sequence disagree on the small/large split"
        )
    frame = {
        "k1": k1,
        "values_minus": values[:idx],
        "values_plus": values[idx + 1 :],
        "keys_minus": tuple(k for k in keys[1:] if k < k1),
        "keys_plus": tuple(k for k in keys[1:] if k > k1),
        "tree_minus": _carve(h, left_labels),
        "tree_plus": _carve(h, right_labels),
        "tail_minus": left_labels,
        "tail_plus": right_labels,
    }
    return frame


def _check_problem(h: HistoricTree, values: tuple[int, ...], keys: tuple[int, ...]):
    if len(values) != h.n:
        raise ValueError(f"{h.n} vertices cannot place {len(values)} values")
    if len(keys) != len(branchings(h)):
        raise ValueError(
            f"{len(keys)} pushed keys vs {len(branchings(h))} branchings"
        )


def _perm_stream(
    h: HistoricTree, values: tuple[int, ...], keys: tuple[int, ...]
) -> Iterator[tuple[int, ...]]:
    m = h.m
    _check_problem(h, values, keys)
    if len(values) <= 2 * m:
        yield from itertools.permutations(values)
        return
    frame = _split_positions(h, values, keys)
    head = list(range(1, 2 * m + 2))
    for j1 in head:
        others = [p for p in head if p != j1]
        for small_head in itertools.combinations(others, m):
            small_pos = list(small_head) + frame["tail_minus"]
            small_set = set(small_pos) | {j1}
            large_pos = [p for p in range(1, len(values) + 1) if p not in small_set]
            for q_minus in _perm_stream(
                frame["tree_minus"], frame["values_minus"], frame["keys_minus"]
            ):
                for q_plus in _perm_stream(
                    frame["tree_plus"], frame["values_plus"], frame["keys_plus"]
                ):
                    out = [0] * len(values)
                    out[j1 - 1] = frame["k1"]
                    for pos, v in zip(small_pos, q_minus):
                        out[pos - 1] = v
                    for pos, v in zip(large_pos, q_plus):
                        out[pos - 1] = v
                    yield tuple(out)


def enumerate_perms(
    h: HistoricTree, pi_iota: Sequence[int]
) -> Iterator[tuple[int, ...]]:
    """All permutations of 1..n realising the history encoded by ``h``,
    given the lifted pushed-key sequence (see :func:`lift`)."""
    ok, why = is_historic(h)
    if not ok:
        raise ValueError(f"not a historic tree: {why}")
    yield from _perm_stream(h, tuple(range(1, h.n + 1)), tuple(pi_iota))


def rebuild_with_choices(
    h: HistoricTree, pi_iota: Sequence[int], choices: Sequence
) -> tuple[int, ...]:
    """Replay one explicit choice sequence through the recursion.

    Choices are consumed depth first, small branch before large branch:
    ``("place", j1, small_positions)`` fixes the pushed key's position
    among the first 2m+1 and the extra small positions there;
    ``("order", values)`` resolves a base case outright.
    """
    pending = list(choices)

    def rec(tree, values, keys) -> tuple[int, ...]:
        m = tree.m
        _check_problem(tree, values, keys)
        if not pending:
            raise ValueError("ran out of choices")
        kind, *payload = pending.pop(0)
        if len(values) <= 2 * m:
            if kind != "order":
                raise ValueError(f"expected an 'order' choice, got {kind!r}")
            (order,) = payload
            if sorted(order) != sorted(values):
                raise ValueError(f"order {order!r} does not cover {values!r}")
            return tuple(order)
        if kind != "place":
            raise ValueError(f"expected a 'place' choice, got {kind!r}")
        j1, small_head = payload
        if not 1 <= j1 <= 2 * m + 1:
            raise ValueError(f"pushed-key position {j1} out of range")
        if (
            len(set(small_head)) != m
            or j1 in small_head
            or not all(1 <= p <= 2 * m + 1 for p in small_head)
        ):
            raise ValueError(f"small positions {small_head!r} invalid")
        frame = _split_positions(tree, values, keys)
        small_pos = sorted(small_head) + frame["tail_minus"]
        small_set = set(small_pos) | {j1}
        large_pos = [p for p in range(1, len(values) + 1) if p not in small_set]
        q_minus = rec(frame["tree_minus"], frame["values_minus"], frame["keys_minus"])
        q_plus = rec(frame["tree_plus"], frame["values_plus"], frame["keys_plus"])
        out = [0] * len(values)
        out[j1 - 1] = frame["k1"]
        for pos, v in zip(small_pos, q_minus):
            out[pos - 1] = v
        for pos, v in zip(large_pos, q_plus):
            out[pos - 1] = v
        return tuple(out)

    result = rec(h, tuple(range(1, h.n + 1)), tuple(pi_iota))
    if pending:
        raise ValueError(f"{len(pending)} unused choices")
    return result


def count_perms(h: HistoricTree) -> int:
    """Closed-form size of the permutation set of ``h``.

    Each branching contributes (2m+1)!/(m!)^2 placement choices and each
    external slot a factor (m+s)!.  A branching-free tree (n <= 2m)
    absorbs every one of the n! insertion orders.
    """
    m = h.m
    b = len(branchings(h))
    if b == 0:
        return factorial(h.n)
    per_branching = factorial(2 * m + 1) // (factorial(m) ** 2)
    total = per_branching**b
    for s in s_values(h):
        total *= factorial(m + s)
    return total


# ---------------------------------------------------------------------------
# the full recursion over trimmed trees


def _standardized(t: KeyedBTree) -> KeyedBTree:
    keys = all_keys(t)
    return relabel_keys(t, {k: i + 1 for i, k in enumerate(keys)})


def underline_pi(t: KeyedBTree) -> Iterator[tuple[int, ...]]:
    """Every permutation of 1..n that builds a tree isomorphic to ``t``
    (keys are compared by rank).  Lazily produced, duplicate-free."""
    t = _standardized(t)
    n = len(all_keys(t))
    if height(t) == 0:
        yield from itertools.permutations(range(1, n + 1))
        return
    trimmed = _standardized(trim(t))
    for pi1 in underline_pi(trimmed):
        pi_iota = lift(pi1, t)
        dag = build_dag(t, pi1)
        for h in topological_labellings(dag):
            yield from _perm_stream(h, tuple(range(1, n + 1)), pi_iota)
