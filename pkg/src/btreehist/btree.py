"""B-trees of odd order 2m+1 with the split-on-overflow insertion algorithm.

Two levels of detail are supported: shapes, which record only key counts
(isomorphism classes of trees), and keyed trees, which store sorted
integer keys.  Every node holds between m and 2m keys (the root may hold
as few as one) and all leaves sit at the same depth.  Inserting into a
full node splits it into two m-key nodes and pushes the median key into
the parent; a splitting root grows the tree by one level.

All values are immutable; operations are pure functions returning new
values together with a :class:`SplitTrace` describing what happened.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence, Union

ShapeNode = Union[int, tuple]
"""A leaf is its key count; an internal node is a tuple of children."""


@dataclass(frozen=True)
class BTreeShape:
    """Isomorphism class of a B-tree of order 2m+1 (key counts only)."""

    m: int
    root: ShapeNode

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("order parameter m must be >= 1")


@dataclass(frozen=True)
class KNode:
    """One node of a keyed B-tree; ``children == ()`` marks a leaf."""

    keys: tuple[int, ...]
    children: tuple["KNode", ...] = ()

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass(frozen=True)
class KeyedBTree:
    """B-tree with explicit distinct integer keys."""

    m: int
    root: KNode

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("order parameter m must be >= 1")


@dataclass(frozen=True)
class SplitTrace:
    """Record of a single insertion: where it went and what it split."""

    receiving_leaf_index: int
    splits_propagated: int
    root_split: bool
    pushed_keys: tuple[int, ...] = ()

    def __post_init__(self):
        if self.root_split and self.splits_propagated < 1:
            raise ValueError("root_split implies at least one split")


@dataclass(frozen=True)
class History:
    """Canonical record of an insertion history.

    ``leaf_choices[t-2]`` is the 1-based index (left to right) of the
    leaf of the tree with t-1 keys that receives the t-th key, counted
    before any splits.  The tree sequence itself is recovered by replay.
    """

    m: int
    n: int
    leaf_choices: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a history holds at least one key")
        if len(self.leaf_choices) != self.n - 1:
            raise ValueError("leaf_choices must have length n-1")


# ---------------------------------------------------------------------------
# construction and insertion


def new_singleton(m: int) -> BTreeShape:
    """The unique one-key tree, a single leaf."""
    return BTreeShape(m, 1)


def new_keyed_singleton(m: int, key: int) -> KeyedBTree:
    return KeyedBTree(m, KNode((key,)))


@lru_cache(maxsize=None)
def _shape_leaves(node: ShapeNode) -> int:
    if isinstance(node, int):
        return 1
    return sum(_shape_leaves(c) for c in node)


def _node_leaves(node: KNode) -> int:
    if node.is_leaf:
        return 1
    return sum(_node_leaves(c) for c in node.children)


def leaf_count(t: BTreeShape | KeyedBTree) -> int:
    if isinstance(t, BTreeShape):
        return _shape_leaves(t.root)
    return _node_leaves(t.root)


def height(t: BTreeShape | KeyedBTree) -> int:
    h = 0
    node = t.root
    if isinstance(t, BTreeShape):
        while not isinstance(node, int):
            node = node[0]
            h += 1
    else:
        while not node.is_leaf:
            node = node.children[0]
            h += 1
    return h


def _shape_insert(node: ShapeNode, idx: int, m: int) -> tuple[list, int]:
    """Insert into the idx-th leaf below ``node``.

    Returns (parts, splits) where parts holds one node, or two when this
    node itself split.
    """
    if isinstance(node, int):
        k = node + 1
        if k == 2 * m + 1:
            return [m, m], 1
        return [k], 0
    acc = 0
    for i, child in enumerate(node):
        c = _shape_leaves(child)
        if idx <= acc + c:
            parts, splits = _shape_insert(child, idx - acc, m)
            merged = node[:i] + tuple(parts) + node[i + 1 :]
            if len(merged) == 2 * m + 2:
                return [merged[: m + 1], merged[m + 1 :]], splits + 1
            return [merged], splits
        acc += c
    raise AssertionError("leaf index out of range after validation")


def insert_at_leaf(t: BTreeShape, leaf_index: int) -> tuple[BTreeShape, SplitTrace]:
    """Add one key to the leaf_index-th leaf (1-based, left to right)."""
    if not 1 <= leaf_index <= leaf_count(t):
        raise ValueError(f"leaf index {leaf_index} out of range 1..{leaf_count(t)}")
    parts, splits = _shape_insert(t.root, leaf_index, t.m)
    root_split = len(parts) == 2
    root: ShapeNode = tuple(parts) if root_split else parts[0]
    trace = SplitTrace(leaf_index, splits, root_split)
    return BTreeShape(t.m, root), trace


def _keyed_insert(node: KNode, key: int, m: int) -> tuple[list, list[int]]:
    """Returns (parts, pushed): one KNode, or [left, median, right]."""
    pos = bisect.bisect_left(node.keys, key)
    if pos < len(node.keys) and node.keys[pos] == key:
        raise ValueError(f"duplicate key {key}")
    if node.is_leaf:
        ks = node.keys[:pos] + (key,) + node.keys[pos:]
        if len(ks) == 2 * m + 1:
            return [KNode(ks[:m]), ks[m], KNode(ks[m + 1 :])], [ks[m]]
        return [KNode(ks)], []
    parts, pushed = _keyed_insert(node.children[pos], key, m)
    if len(parts) == 1:
        children = node.children[:pos] + (parts[0],) + node.children[pos + 1 :]
        return [KNode(node.keys, children)], pushed
    left, median, right = parts
    ks = node.keys[:pos] + (median,) + node.keys[pos:]
    children = node.children[:pos] + (left, right) + node.children[pos + 1 :]
    if len(ks) == 2 * m + 1:
        lnode = KNode(ks[:m], children[: m + 1])
        rnode = KNode(ks[m + 1 :], children[m + 1 :])
        return [lnode, ks[m], rnode], pushed + [ks[m]]
    return [KNode(ks, children)], pushed


def _receiving_leaf(node: KNode, key: int) -> int:
    """1-based index of the leaf that will absorb ``key``, pre-split."""
    idx = 1
    while not node.is_leaf:
        pos = bisect.bisect_left(node.keys, key)
        if pos < len(node.keys) and node.keys[pos] == key:
            raise ValueError(f"duplicate key {key}")
        idx += sum(_node_leaves(c) for c in node.children[:pos])
        node = node.children[pos]
    return idx


def insert_key(t: KeyedBTree, key: int) -> tuple[KeyedBTree, SplitTrace]:
    """Standard B-tree insertion of a fresh key.

    ``pushed_keys`` in the returned trace lists every key that moved up
    out of its node, lowest level first.
    """
    leaf_index = _receiving_leaf(t.root, key)
    parts, pushed = _keyed_insert(t.root, key, t.m)
    if len(parts) == 1:
        root = parts[0]
        root_split = False
    else:
        left, median, right = parts
        root = KNode((median,), (left, right))
        root_split = True
    trace = SplitTrace(leaf_index, len(pushed), root_split, tuple(pushed))
    return KeyedBTree(t.m, root), trace


def run_permutation(
    m: int, pi: Sequence[int]
) -> tuple[KeyedBTree, History, tuple[SplitTrace, ...]]:
    """Insert pi(1), ..., pi(n) in order and record the history."""
    n = len(pi)
    if sorted(pi) != list(range(1, n + 1)):
        raise ValueError("input is not a permutation of 1..n")
    tree = new_keyed_singleton(m, pi[0])
    choices: list[int] = []
    traces: list[SplitTrace] = []
    for key in pi[1:]:
        tree, trace = insert_key(tree, key)
        choices.append(trace.receiving_leaf_index)
        traces.append(trace)
    return tree, History(m, n, tuple(choices)), tuple(traces)


def replay_history(h: History) -> list[BTreeShape]:
    """All intermediate shapes T_1..T_n of a history; raises if invalid."""
    shapes = [new_singleton(h.m)]
    for t, choice in enumerate(h.leaf_choices, start=2):
        nxt, _ = insert_at_leaf(shapes[-1], choice)
        shapes.append(nxt)
    return shapes


def iter_histories(m: int, n: int) -> Iterator[History]:
    """All insertion histories of length n, by depth-first replay."""
    if n < 1:
        raise ValueError("histories have length >= 1")

    def rec(shape: BTreeShape, choices: list[int]) -> Iterator[History]:
        if len(choices) == n - 1:
            yield History(m, n, tuple(choices))
            return
        for leaf in range(1, leaf_count(shape) + 1):
            nxt, _ = insert_at_leaf(shape, leaf)
            choices.append(leaf)
            yield from rec(nxt, choices)
            choices.pop()

    yield from rec(new_singleton(m), [])


# ---------------------------------------------------------------------------
# projections and structural edits


def shape_of(t: KeyedBTree) -> BTreeShape:
    def conv(node: KNode) -> ShapeNode:
        if node.is_leaf:
            return len(node.keys)
        return tuple(conv(c) for c in node.children)

    return BTreeShape(t.m, conv(t.root))


def leaf_sizes(t: BTreeShape | KeyedBTree) -> list[int]:
    """Key counts of the leaves, left to right."""
    out: list[int] = []
    if isinstance(t, BTreeShape):

        def walk(node: ShapeNode):
            if isinstance(node, int):
                out.append(node)
            else:
                for c in node:
                    walk(c)

        walk(t.root)
    else:

        def kwalk(node: KNode):
            if node.is_leaf:
                out.append(len(node.keys))
            else:
                for c in node.children:
                    kwalk(c)

        kwalk(t.root)
    return out


def all_keys(t: KeyedBTree) -> list[int]:
    """Every key in the tree, in increasing (in-order) order."""
    out: list[int] = []

    def walk(node: KNode):
        if node.is_leaf:
            out.extend(node.keys)
            return
        for i, c in enumerate(node.children):
            walk(c)
            if i < len(node.keys):
                out.append(node.keys[i])

    walk(t.root)
    return out


def nonleaf_keys(t: KeyedBTree) -> list[int]:
    """Keys stored above the leaf level, in increasing order."""
    out: list[int] = []

    def walk(node: KNode):
        if node.is_leaf:
            return
        for i, c in enumerate(node.children):
            walk(c)
            if i < len(node.keys):
                out.append(node.keys[i])

    walk(t.root)
    return out


def trim(t: KeyedBTree) -> KeyedBTree:
    """Delete all leaves; the level above them becomes the new leaf level."""
    if t.root.is_leaf:
        raise ValueError("cannot trim a height-0 tree")

    def conv(node: KNode) -> KNode:
        if all(c.is_leaf for c in node.children):
            return KNode(node.keys)
        return KNode(node.keys, tuple(conv(c) for c in node.children))

    return KeyedBTree(t.m, conv(t.root))


def relabel_keys(t: KeyedBTree, mapping: dict[int, int]) -> KeyedBTree:
    def conv(node: KNode) -> KNode:
        keys = tuple(mapping[k] for k in node.keys)
        if node.is_leaf:
            return KNode(keys)
        return KNode(keys, tuple(conv(c) for c in node.children))

    return KeyedBTree(t.m, conv(t.root))


# ---------------------------------------------------------------------------
# validation


def validate(t: BTreeShape | KeyedBTree) -> list[str]:
    """Every violated invariant, empty iff the tree is valid."""
    problems: list[str] = []
    m = t.m

    if isinstance(t, KeyedBTree):
        keys = all_keys(t)
        if any(a >= b for a, b in zip(keys, keys[1:])):
            problems.append("in-order key sequence is not strictly increasing")
        shape = shape_of(t)
    else:
        shape = t

    depths: list[int] = []

    def walk(node: ShapeNode, depth: int, is_root: bool):
        if isinstance(node, int):
            lo = 1 if is_root else m
            if not lo <= node <= 2 * m:
                problems.append(
                    f"leaf with {node} keys outside [{lo}, {2 * m}] at depth {depth}"
                )
            depths.append(depth)
            return
        nkeys = len(node) - 1
        lo = 1 if is_root else m
        if not lo <= nkeys <= 2 * m:
            problems.append(
                f"internal node with {nkeys} keys outside [{lo}, {2 * m}] at depth {depth}"
            )
        for c in node:
            walk(c, depth + 1, False)

    walk(shape.root, 0, True)
    if len(set(depths)) > 1:
        problems.append("leaves at unequal depths " + str(sorted(set(depths))))
    return problems


def total_keys(t: BTreeShape | KeyedBTree) -> int:
    if isinstance(t, KeyedBTree):
        return len(all_keys(t))
    sizes = leaf_sizes(t)
    nonleaf = 0

    def walk(node: ShapeNode):
        nonlocal nonleaf
        if isinstance(node, int):
            return
        nonleaf += len(node) - 1
        for c in node:
            walk(c)

    walk(t.root)
    return sum(sizes) + nonleaf


# ---------------------------------------------------------------------------
# serialization

_SHAPE_DOC = "leaf = integer key count, internal node = list of children"


def shape_to_dict(t: BTreeShape) -> dict:
    def conv(node: ShapeNode):
        if isinstance(node, int):
            return node
        return [conv(c) for c in node]

    return {"m": t.m, "root": conv(t.root)}


def shape_from_dict(d: dict) -> BTreeShape:
    def conv(node) -> ShapeNode:
        if isinstance(node, int):
            return node
        if isinstance(node, list) and node:
            return tuple(conv(c) for c in node)
        raise ValueError(f"malformed shape node {node!r}; expected {_SHAPE_DOC}")

    return BTreeShape(int(d["m"]), conv(d["root"]))


def keyed_to_dict(t: KeyedBTree) -> dict:
    def conv(node: KNode):
        if node.is_leaf:
            return {"keys": list(node.keys)}
        return {"keys": list(node.keys), "children": [conv(c) for c in node.children]}

    return {"m": t.m, "root": conv(t.root)}


def keyed_from_dict(d: dict) -> KeyedBTree:
    def conv(node) -> KNode:
        if not isinstance(node, dict) or "keys" not in node:
            raise ValueError(f"malformed keyed node {node!r}")
        keys = tuple(int(k) for k in node["keys"])
        if "children" in node:
            return KNode(keys, tuple(conv(c) for c in node["children"]))
        return KNode(keys)

    return KeyedBTree(int(d["m"]), conv(d["root"]))


def history_to_dict(h: History) -> dict:
    return {"m": h.m, "n": h.n, "leaf_choices": list(h.leaf_choices)}


def history_from_dict(d: dict) -> History:
    return History(int(d["m"]), int(d["n"]), tuple(int(c) for c in d["leaf_choices"]))


def btree_dot(t: BTreeShape | KeyedBTree) -> str:
    """Graphviz rendering; nodes show their keys (or key counts)."""
    lines = ["digraph btree {", "  node [shape=box];"]
    counter = [0]

    def fresh() -> str:
        counter[0] += 1
        return f"n{counter[0]}"

    def label(node) -> str:
        if isinstance(node, KNode):
            return " | ".join(str(k) for k in node.keys)
        nkeys = node if isinstance(node, int) else len(node) - 1
        return " | ".join(["*"] * nkeys)

    def walk(node) -> str:
        name = fresh()
        lines.append(f'  {name} [label="{label(node)}"];')
        children = ()
        if isinstance(node, KNode) and not node.is_leaf:
            children = node.children
        elif isinstance(node, tuple):
            children = node
        for c in children:
            cname = walk(c)
            lines.append(f"  {name} -> {cname};")
        return name

    walk(t.root)
    lines.append("}")
    return "\n".join(lines)
