import math

import pytest
from hypothesis import given, strategies as st

from cantorcert.errors import DuplicatePoint, MalformedSpec, UnknownVertex
from cantorcert.phi import PNorm
from cantorcert.trees import (ROOT, LabeledTree, assemble_vector, build_tree, format_label,
                              kb_order, parse_label, parse_tree_spec, subtree)

BINARY = ["0", "00", "01", "000", "001", "010", "011"]


def labels(seq):
    return [format_label(v) for v in seq]


def test_binary_tree_from_counts():
    t = build_tree({"0": 2, "00": 2, "01": 2})
    assert labels(t.vertex_order()) == BINARY
    assert t == LabeledTree.complete(2, 2)
    assert t.edge_count == 6 and t.depth == 2


def test_chain_and_single_vertex():
    t = build_tree({"0": 1, "00": 1, "000": 1})
    assert t == LabeledTree.chain(3) and t.is_chain()
    single = build_tree({})
    assert len(single) == 1 and single.edge_count == 0
    assert len(kb_order(single)) == 0


def test_kb_order_binary():
    order = kb_order(LabeledTree.complete(2, 2))
    assert labels(order.children) == BINARY[1:]
    assert [(format_label(p), format_label(c)) for p, c in order] == [
        ("0", "00"), ("0", "01"), ("00", "000"), ("00", "001"), ("01", "010"), ("01", "011")]


def test_kb_order_chain_is_path_order():
    order = kb_order(LabeledTree.chain(4))
    assert [len(c) for c in order.children] == [2, 3, 4, 5]


def test_wide_labels_are_unambiguous():
    t = LabeledTree.star(12)
    assert format_label((0, 11)) == "0.11"
    assert parse_label("0.11") == (0, 11)
    assert (0, 11) in t and (0, 1, 1) not in t
    assert labels(kb_order(t).children)[-3:] == ["09", "0.10", "0.11"]


def test_malformed_specs():
    with pytest.raises(MalformedSpec):
        build_tree({"0": 1, "01": 1})  # unreachable
    with pytest.raises(MalformedSpec):
        LabeledTree(["0", "01"])  # sibling gap
    with pytest.raises(MalformedSpec):
        LabeledTree(["0", "000"])  # missing parent
    with pytest.raises(MalformedSpec):
        parse_label("1")
    with pytest.raises(MalformedSpec):
        parse_tree_spec("0 2\n00")
    with pytest.raises(MalformedSpec):
        build_tree({"0": -1})


def test_parse_tree_spec_forms():
    text = "# binary\n0 2\n00 2\n01 2\n"
    t = parse_tree_spec(text)
    assert t == parse_tree_spec([("0", 2), ("00", 2), ("01", 2)])
    assert t == parse_tree_spec(t.to_json())
    assert t.to_json() == [["0", 2], ["00", 2], ["01", 2]]


def test_subtree():
    t = LabeledTree.complete(2, 2)
    assert subtree(t, "00") == LabeledTree.star(2)
    assert subtree(t, "0") == t
    assert len(subtree(t, "011")) == 1
    with pytest.raises(UnknownVertex):
        subtree(t, "0000")


def test_assemble_vector():
    chain = LabeledTree.chain(2)
    pts = {"0": (0, 0), "00": (1, 0), "000": (2, 0)}
    assert assemble_vector(chain, pts) == (1.0, 1.0)
    t = LabeledTree.complete(2, 2)
    pts = {"0": (0, 0), "00": (3, 4), "01": (-1, 0), "000": (3, 5),
           "001": (6, 8), "010": (-1, -2), "011": (0, 1)}
    # hand computed: 5, 1, 1, 5, 2, sqrt 2
    got = assemble_vector(t, pts)
    assert got == pytest.approx((5, 1, 1, 5, 2, math.sqrt(2)))
    assert assemble_vector(t, pts, PNorm(1)) == pytest.approx((7, 1, 1, 7, 2, 2))
    pts["011"] = (3, 4)
    with pytest.raises(DuplicatePoint):
        assemble_vector(t, pts)
    with pytest.raises(UnknownVertex):
        assemble_vector(t, {"0": (0, 0)})


def test_parent_children():
    t = LabeledTree.complete(2, 2)
    assert t.parent(ROOT) is None and t.parent("010") == (0, 1)
    assert t.children("01") == ((0, 1, 0), (0, 1, 1))
    assert labels(t.leaves()) == BINARY[3:]
    with pytest.raises(UnknownVertex):
        t.children("02")
    with pytest.raises(AttributeError):
        t.vertices = frozenset()


@st.composite
def trees(draw):
    counts = {}
    frontier = [ROOT]
    budget = draw(st.integers(0, 14))
    while frontier and budget > 0:
        v = frontier.pop(0)
        k = draw(st.integers(0, min(3, budget)))
        if k:
            counts[v] = k
            budget -= k
            frontier.extend(v + (i,) for i in range(k))
    return build_tree(counts)


@given(trees())
def test_kb_order_properties(t):
    order = kb_order(t)
    assert len(order) == len(t) - 1
    assert sorted(order.children) == sorted(v for v in t.vertices if v != ROOT)
    verts = t.vertex_order()
    assert verts[0] == ROOT
    for a, b in zip(verts, verts[1:]):
        assert (len(a), a) < (len(b), b)
    for p, c in order:
        assert c[:-1] == p


@given(trees())
def test_root_removal_partitions(t):
    parts = [set(subtree(t, c).vertices) for c in t.children(ROOT)]
    assert sum(len(p) for p in parts) == len(t) - 1


@given(trees(), st.randoms())
def test_assemble_vector_ignores_map_order(t, rnd):
    pts = {format_label(v): (i, i * i) for i, v in enumerate(t.vertex_order())}
    items = list(pts.items())
    rnd.shuffle(items)
    assert assemble_vector(t, dict(items)) == assemble_vector(t, pts)
