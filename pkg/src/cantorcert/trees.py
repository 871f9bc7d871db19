"""Canonically labelled finite rooted trees.

A vertex label is a tuple of nonnegative ints.  The root is ``(0,)`` and the
i-th child (from the left) of ``v`` is ``v + (i,)``.  Labels print as digit
strings (``"001"``) when every letter is a single digit and dot-separated
otherwise (``"0.10.2"``).

Edge coordinates of a distance vector follow the order :func:`kb_order`
produces: shallower vertices first, then lexicographic among equal depth,
which gives ``0, 00, 01, 000, 001, 010, 011`` on the binary tree of depth 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import DuplicatePoint, MalformedSpec, UnknownVertex

ROOT = (0,)


def parse_label(label) -> tuple:
    if isinstance(label, tuple):
        out = label
    elif isinstance(label, list):
        out = tuple(label)
    else:
        text = str(label).strip()
        if not text:
            raise MalformedSpec("empty vertex label")
        parts = text.split(".") if "." in text else list(text)
        try:
            out = tuple(int(p) for p in parts)
        except ValueError as exc:
            raise MalformedSpec(f"bad vertex label {label!r}") from exc
    if not out or out[0] != 0 or any((not isinstance(i, int)) or i < 0 for i in out):
        raise MalformedSpec(f"bad vertex label {label!r}: must start with 0")
    return out


def format_label(label: tuple) -> str:
    if all(i < 10 for i in label):
        return "".join(map(str, label))
    return ".".join(map(str, label))


def kb_key(label: tuple):
    return (len(label), label)


@dataclass(frozen=True)
class EdgeOrder:
    edges: tuple  # ((parent, child), ...)

    @property
    def children(self) -> tuple:
        return tuple(c for _, c in self.edges)

    def __len__(self):
        return len(self.edges)

    def __iter__(self):
        return iter(self.edges)


class LabeledTree:
    """Immutable prefix-closed set of labels with gap-free sibling indices."""

    __slots__ = ("vertices", "_children")

    def __init__(self, labels: Iterable):
        verts = frozenset(parse_label(v) for v in labels)
        if ROOT not in verts:
            raise MalformedSpec("the root 0 is missing")
        children: dict = {v: [] for v in verts}
        for v in verts:
            if v == ROOT:
                continue
            parent = v[:-1]
            if parent not in verts:
                raise MalformedSpec(f"vertex {format_label(v)} has no parent in the tree")
            children[parent].append(v)
        for v, kids in children.items():
            kids.sort()
            if [k[-1] for k in kids] != list(range(len(kids))):
                raise MalformedSpec(f"children of {format_label(v)} skip an index")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "_children", {v: tuple(k) for v, k in children.items()})

    def __setattr__(self, name, value):
        raise AttributeError("LabeledTree is immutable")

    @classmethod
    def chain(cls, n: int) -> "LabeledTree":
        """Path with ``n`` edges."""
        return cls((0,) * k for k in range(1, n + 2))

    @classmethod
    def star(cls, k: int) -> "LabeledTree":
        return build_tree({ROOT: k})

    @classmethod
    def complete(cls, arity: int, depth: int) -> "LabeledTree":
        labels = [ROOT]
        frontier = [ROOT]
        for _ in range(depth):
            frontier = [v + (i,) for v in frontier for i in range(arity)]
            labels.extend(frontier)
        return cls(labels)

    def children(self, v) -> tuple:
        v = self._check(v)
        return self._children[v]

    def parent(self, v):
        v = self._check(v)
        return None if v == ROOT else v[:-1]

    def _check(self, v) -> tuple:
        v = parse_label(v) if not isinstance(v, tuple) else v
        if v not in self.vertices:
            raise UnknownVertex(f"no vertex {format_label(v) if v else v!r}")
        return v

    @property
    def depth(self) -> int:
        return max(len(v) for v in self.vertices) - 1

    @property
    def edge_count(self) -> int:
        return len(self.vertices) - 1

    def vertex_order(self) -> list:
        return sorted(self.vertices, key=kb_key)

    def leaves(self) -> list:
        return [v for v in self.vertex_order() if not self._children[v]]

    def is_chain(self) -> bool:
        return all(len(k) <= 1 for k in self._children.values())

    def child_counts(self) -> dict:
        return {v: len(k) for v, k in self._children.items() if k}

    def to_json(self) -> list:
        """``[[label, child_count], ...]`` in vertex order, leaves omitted."""
        return [[format_label(v), len(self._children[v])]
                for v in self.vertex_order() if self._children[v]]

    def __eq__(self, other):
        return isinstance(other, LabeledTree) and self.vertices == other.vertices

    def __hash__(self):
        return hash(self.vertices)

    def __len__(self):
        return len(self.vertices)

    def __contains__(self, v):
        try:
            self._check(v)
        except (UnknownVertex, MalformedSpec):
            return False
        return True

    def __repr__(self):
        return "LabeledTree(" + ", ".join(format_label(v) for v in self.vertex_order()) + ")"


def build_tree(child_counts: Mapping) -> LabeledTree:
    """Canonical tree from ``{label: number of children}``; absent labels are leaves."""
    counts = {}
    for k, c in dict(child_counts).items():
        lab = parse_label(k)
        if not isinstance(c, int) or c < 0:
            raise MalformedSpec(f"child count for {format_label(lab)} must be a nonnegative int")
        if lab in counts:
            raise MalformedSpec(f"label {format_label(lab)} listed twice")
        counts[lab] = c
    labels = []
    stack = [ROOT]
    while stack:
        v = stack.pop()
        labels.append(v)
        stack.extend(v + (i,) for i in range(counts.get(v, 0)))
    unreachable = set(counts) - set(labels)
    if unreachable:
        bad = ", ".join(sorted(format_label(v) for v in unreachable))
        raise MalformedSpec(f"labels not reachable from the root: {bad}")
    return LabeledTree(labels)


def parse_tree_spec(spec) -> LabeledTree:
    """Read ``"label count"`` lines, a list of pairs, or a mapping."""
    if isinstance(spec, LabeledTree):
        return spec
    if isinstance(spec, Mapping):
        return build_tree(spec)
    if isinstance(spec, str):
        pairs = []
        for line in spec.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            if len(fields) != 2:
                raise MalformedSpec(f"expected 'label count', got {line!r}")
            pairs.append((fields[0], fields[1]))
    else:
        pairs = list(spec)
    counts = {}
    for lab, c in pairs:
        try:
            c = int(c)
        except (TypeError, ValueError) as exc:
            raise MalformedSpec(f"bad child count {c!r}") from exc
        key = parse_label(lab)
        if key in counts:
            raise MalformedSpec(f"label {lab} listed twice")
        counts[key] = c
    return build_tree(counts)


def kb_order(t: LabeledTree) -> EdgeOrder:
    return EdgeOrder(tuple((v[:-1], v) for v in t.vertex_order() if v != ROOT))


def subtree(t: LabeledTree, sigma) -> LabeledTree:
    """The subtree below ``sigma``, relabelled so that ``sigma`` becomes the root."""
    sigma = t._check(sigma)
    n = len(sigma)
    return LabeledTree(ROOT + v[n:] for v in t.vertices if v[:n] == sigma)


def assemble_vector(t: LabeledTree, points: Mapping, phi=None) -> tuple:
    """phi-values along the edges of ``t`` in :func:`kb_order` order.

    ``points`` maps every vertex to a point; the default phi is Euclidean.
    For an edge (parent, child) the value is ``phi(points[parent], points[child])``.
    """
    if phi is None:
        from .phi import Euclidean
        phi = Euclidean()
    pts = {}
    for k, p in dict(points).items():
        pts[parse_label(k)] = tuple(p)
    missing = t.vertices - set(pts)
    if missing:
        raise UnknownVertex("no point for vertices " +
                            ", ".join(sorted(format_label(v) for v in missing)))
    seen = {}
    for v in t.vertex_order():
        p = pts[v]
        if p in seen:
            raise DuplicatePoint(
                f"vertices {format_label(seen[p])} and {format_label(v)} share the point {p}")
        seen[p] = v
    return tuple(phi.value(pts[a], pts[b]) for a, b in kb_order(t))
