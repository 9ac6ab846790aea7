"""Increasing plane trees that encode B-tree insertion histories.

Vertices are labelled 1..n with labels increasing away from the root
(the root is vertex 1, at height 0).  For order parameter m, only
vertices at heights 2m, 3m+1, 4m+2, ... may carry two children; we call
vertices at those heights *branchings* whether or not they actually
have two children.  Each child of a branching occupies an explicit
``left`` or ``right`` slot (a branching with a single child on the left
is a different plane tree from one with its child on the right), while
children of all other vertices sit in a single ``only`` slot.

Unfilled attachment positions are *external slots*: a branching exposes
one per unused side, any other childless vertex exposes one.  External
slots, read left to right, correspond one-to-one with the leaves of the
B-tree reached by replaying the encoded history, and attaching vertex
n+1 at slot i is the same move as inserting a key into leaf i.

*Reduced* trees arise by deleting the m forced topmost vertices and
shifting labels down; their branching heights are m, 2m+1, 3m+2, ...
(that is, congruent to -1 mod m+1).  A reduced tree may be empty, which
stands for a single external slot.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .btree import History, leaf_count, leaf_sizes, replay_history

_SLOTS = ("left", "right", "only")


@dataclass(frozen=True)
class HistoricTree:
    """Labelled increasing plane tree obeying the branching-height rule.

    ``parent[i]`` is the parent of vertex i+1 (0 for the root), and
    ``slot[i]`` its plane position under that parent.  Construction
    enforces the structural shape (labels increase along edges); the
    branching-height and slot rules are checked by :func:`is_historic`.
    """

    m: int
    parent: tuple[int, ...]
    slot: tuple[str, ...]

    def __post_init__(self):
        _check_arrays(self, min_vertices=1)

    @property
    def n(self) -> int:
        return len(self.parent)

    def is_branching_height(self, h: int) -> bool:
        return h >= 2 * self.m and (h - 2 * self.m) % (self.m + 1) == 0


@dataclass(frozen=True)
class ReducedHistoricTree:
    """Historic tree with its top m stem vertices removed; may be empty."""

    m: int
    parent: tuple[int, ...]
    slot: tuple[str, ...]

    def __post_init__(self):
        _check_arrays(self, min_vertices=0)

    @property
    def n(self) -> int:
        return len(self.parent)

    def is_branching_height(self, h: int) -> bool:
        return (h - self.m) % (self.m + 1) == 0


@dataclass(frozen=True)
class ExternalSlot:
    parent: int
    slot: str
    left_to_right_rank: int


def _check_arrays(t, min_vertices: int):
    if t.m < 1:
        raise ValueError("order parameter m must be >= 1")
    if len(t.parent) != len(t.slot):
        raise ValueError("parent and slot arrays differ in length")
    if len(t.parent) < min_vertices:
        raise ValueError(f"tree needs at least {min_vertices} vertices")
    for i, (p, s) in enumerate(zip(t.parent, t.slot)):
        v = i + 1
        if s not in _SLOTS:
            raise ValueError(f"vertex {v}: unknown slot {s!r}")
        if v == 1:
            if p != 0:
                raise ValueError("vertex 1 must be the root (parent 0)")
        elif not 1 <= p < v:
            raise ValueError(f"vertex {v}: parent {p} must be a smaller label")


def heights(t) -> tuple[int, ...]:
    h = [0] * (t.n + 1)
    for v in range(2, t.n + 1):
        h[v] = h[t.parent[v - 1]] + 1
    return tuple(h[1:])


def children_by_slot(t) -> list[dict[str, int]]:
    """Index v-1 -> {slot: child label}; duplicate slots raise."""
    kids: list[dict[str, int]] = [dict() for _ in range(t.n)]
    for v in range(2, t.n + 1):
        p, s = t.parent[v - 1], t.slot[v - 1]
        if s in kids[p - 1]:
            raise ValueError(f"vertices {kids[p - 1][s]} and {v} share slot {s} of {p}")
        kids[p - 1][s] = v
    return kids


def is_historic(t) -> tuple[bool, str | None]:
    """Whether all branching-height and slot rules hold; first violation if not."""
    try:
        kids = children_by_slot(t)
    except ValueError as e:
        return False, str(e)
    hs = heights(t)
    for v in range(1, t.n + 1):
        mine = kids[v - 1]
        if t.is_branching_height(hs[v - 1]):
            if "only" in mine:
                return False, (
                    f"vertex {v} is at a branching height; its child must take "
                    "an explicit left or right slot"
                )
        else:
            if len(mine) > 1:
                return False, f"vertex {v} at height {hs[v - 1]} has two children"
            if mine and "only" not in mine:
                return False, (
                    f"vertex {v} is not at a branching height; its child must "
                    "use the 'only' slot"
                )
    return True, None


def external_slots(t) -> list[ExternalSlot]:
    """All attachment positions, in left-to-right plane order."""
    if t.n == 0:
        return [ExternalSlot(0, "only", 1)]
    kids = children_by_slot(t)
    out: list[ExternalSlot] = []

    def visit(v: int, h: int):
        mine = kids[v - 1]
        if t.is_branching_height(h):
            for side in ("left", "right"):
                c = mine.get(side)
                if c is None:
                    out.append(ExternalSlot(v, side, len(out) + 1))
                else:
                    visit(c, h + 1)
        else:
            c = mine.get("only")
            if c is None:
                out.append(ExternalSlot(v, "only", len(out) + 1))
            else:
                visit(c, h + 1)

    visit(1, 0)
    return out


def branchings(t) -> list[int]:
    """Labels of all vertices at branching heights, ascending."""
    hs = heights(t)
    return [v for v in range(1, t.n + 1) if t.is_branching_height(hs[v - 1])]


def s_values(t) -> list[int]:
    """Per external slot: internal vertices strictly between it and the
    closest branching above, aligned with :func:`external_slots` order."""
    if not branchings(t):
        raise ValueError("tree has no branching; s-values are undefined")
    hs = heights(t)
    out = []
    for slot in external_slots(t):
        count = 0
        v = slot.parent
        while not t.is_branching_height(hs[v - 1]):
            count += 1
            v = t.parent[v - 1]
        out.append(count)
    return out


def is_right_of(t, j: int, i: int) -> bool:
    """Plane order: is vertex j positioned to the right of vertex i?

    Assumes j is not an ancestor of i (labels increase downward, so this
    holds whenever j > i).
    """
    anc_i = _ancestor_path(t, i)
    anc_j = _ancestor_path(t, j)
    if i in anc_j:
        side = t.slot[anc_j[anc_j.index(i) - 1] - 1]
        return side == "right"
    shared = set(anc_i)
    k = 0
    while anc_j[k] not in shared:
        k += 1
    lca = anc_j[k]
    child_j = anc_j[k - 1]
    child_i = anc_i[anc_i.index(lca) - 1]
    si, sj = t.slot[child_i - 1], t.slot[child_j - 1]
    if {si, sj} != {"left", "right"}:
        raise ValueError(f"vertices {i} and {j} are not plane-comparable")
    return sj == "right"


def _ancestor_path(t, v: int) -> list[int]:
    path = [v]
    while t.parent[path[-1] - 1] != 0:
        path.append(t.parent[path[-1] - 1])
    return path


# ---------------------------------------------------------------------------
# the bijection with histories


def history_to_historic(h: History) -> HistoricTree:
    """Attach vertex t+1 at external slot l_{t+1}, step by step."""
    parents, slots = [0], ["only"]
    for t in range(2, h.n + 1):
        tree = HistoricTree(h.m, tuple(parents), tuple(slots))
        ext = external_slots(tree)
        choice = h.leaf_choices[t - 2]
        if not 1 <= choice <= len(ext):
            raise ValueError(
                f"step {t}: leaf choice {choice} out of range 1..{len(ext)}"
            )
        parents.append(ext[choice - 1].parent)
        slots.append(ext[choice - 1].slot)
    return HistoricTree(h.m, tuple(parents), tuple(slots))


def historic_to_history(t: HistoricTree) -> History:
    """Inverse of :func:`history_to_historic`; exact round trip."""
    ok, why = is_historic(t)
    if not ok:
        raise ValueError(f"not a historic tree: {why}")
    choices = []
    for k in range(1, t.n):
        prefix = HistoricTree(t.m, t.parent[:k], t.slot[:k])
        target = (t.parent[k], t.slot[k])
        rank = None
        for e in external_slots(prefix):
            if (e.parent, e.slot) == target:
                rank = e.left_to_right_rank
                break
        if rank is None:  # cannot happen for historic input
            raise ValueError(f"vertex {k + 1} does not occupy an external slot")
        choices.append(rank)
    return History(t.m, t.n, tuple(choices))


def reduce_tree(t: HistoricTree) -> ReducedHistoricTree:
    """Drop the m forced topmost vertices and shift labels down by m."""
    m = t.m
    if t.n < m:
        raise ValueError(f"need at least m={m} vertices to reduce")
    ok, why = is_historic(t)
    if not ok:
        raise ValueError(f"not a historic tree: {why}")
    parents, slots = [], []
    for v in range(m + 1, t.n + 1):
        p = t.parent[v - 1]
        if p > m:
            parents.append(p - m)
            slots.append(t.slot[v - 1])
        else:
            parents.append(0)
            slots.append("only")
    return ReducedHistoricTree(m, tuple(parents), tuple(slots))


def unreduce_tree(r: ReducedHistoricTree) -> HistoricTree:
    """Put the m-vertex stem back on top; inverse of :func:`reduce_tree`."""
    m = r.m
    parents = [0] + list(range(1, m))
    slots = ["only"] * m
    for v in range(1, r.n + 1):
        p = r.parent[v - 1]
        parents.append(p + m if p else m)
        slots.append(r.slot[v - 1] if p else "only")
    return HistoricTree(m, tuple(parents), tuple(slots))


def check_correspondence(t: HistoricTree) -> list[str]:
    """Replay the encoded history and test slot/leaf, branching/key and
    slot-size/leaf-size agreement; empty report iff all hold."""
    hist = historic_to_history(t)
    final = replay_history(hist)[-1]
    problems: list[str] = []
    ext = external_slots(t)
    if len(ext) != leaf_count(final):
        problems.append(
            f"{len(ext)} external slots vs {leaf_count(final)} B-tree leaves"
        )
    sizes = leaf_sizes(final)
    nonleaf = t.n - sum(sizes)
    nbranch = len(branchings(t))
    if nbranch != nonleaf:
        problems.append(f"{nbranch} branchings vs {nonleaf} non-leaf keys")
    if t.n >= 2 * t.m + 1:
        for i, (s, size) in enumerate(zip(s_values(t), sizes), start=1):
            if t.m + s != size:
                problems.append(
                    f"slot {i}: m+s = {t.m + s} but leaf holds {size} keys"
                )
    return problems


# ---------------------------------------------------------------------------
# exhaustive generation (oracles for the counting recurrences)


def iter_historic_trees(m: int, n: int) -> Iterator[HistoricTree]:
    """Grow every historic tree on n vertices by slot attachment.

    Each tree is produced exactly once: removing the largest label is
    the unique inverse of an attachment step.
    """
    parents, slots = [0], ["only"]

    def rec() -> Iterator[HistoricTree]:
        if len(parents) == n:
            yield HistoricTree(m, tuple(parents), tuple(slots))
            return
        tree = HistoricTree(m, tuple(parents), tuple(slots))
        for e in external_slots(tree):
            parents.append(e.parent)
            slots.append(e.slot)
            yield from rec()
            parents.pop()
            slots.pop()

    if n >= 1:
        yield from rec()


def iter_reduced_trees(m: int, n: int) -> Iterator[ReducedHistoricTree]:
    """Same growth process, with the reduced branching heights."""
    parents: list[int] = []
    slots: list[str] = []

    def rec() -> Iterator[ReducedHistoricTree]:
        if len(parents) == n:
            yield ReducedHistoricTree(m, tuple(parents), tuple(slots))
            return
        tree = ReducedHistoricTree(m, tuple(parents), tuple(slots))
        for e in external_slots(tree):
            parents.append(e.parent)
            slots.append(e.slot)
            yield from rec()
            parents.pop()
            slots.pop()

    yield from rec()


# ---------------------------------------------------------------------------
# serialization


def historic_to_dict(t: HistoricTree | ReducedHistoricTree) -> dict:
    d = {
        "m": t.m,
        "labels": t.n,
        "parent": list(t.parent),
        "slot": list(t.slot),
    }
    if isinstance(t, ReducedHistoricTree):
        d["reduced"] = True
    return d


def historic_from_dict(d: dict) -> HistoricTree | ReducedHistoricTree:
    m = int(d["m"])
    parent = tuple(int(p) for p in d["parent"])
    slot = tuple(str(s) for s in d["slot"])
    if "labels" in d and int(d["labels"]) != len(parent):
        raise ValueError("label count does not match parent array length")
    cls = ReducedHistoricTree if d.get("reduced") else HistoricTree
    return cls(m, parent, slot)


def historic_dot(t, show_external: bool = True) -> str:
    """Graphviz rendering: internal vertices solid, external slots hollow."""
    lines = [
        "digraph historic {",
        "  node [shape=circle];",
    ]
    for v in range(1, t.n + 1):
        lines.append(f'  v{v} [label="{v}"];')
    for v in range(2, t.n + 1):
        lines.append(f"  v{t.parent[v - 1]} -> v{v};")
    if show_external:
        for e in external_slots(t):
            name = f"x{e.left_to_right_rank}"
            lines.append(f'  {name} [label="", style=dashed];')
            if e.parent:
                lines.append(f"  v{e.parent} -> {name} [style=dotted];")
    lines.append("}")
    return "\n".join(lines)
