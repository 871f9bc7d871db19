"""Certified inclusion of an interval in a pinned distance set.

Given phi, a pin box U, Cantor sets K1, K2 and an interval J, the search builds
a finite tree of tasks ``(a, b, target)``: ``a`` and ``b`` are cell addresses
of K1 and K2, and ``target`` lies inside the robust image of the box
``cell(a) x cell(b)`` (admissibility).  Children targets tile their parent's
target exactly.  Each leaf is closed by a persistence rule:

``R1`` (rigorous).  Both leaf cells are self-similar pieces (IFS or gap
schedule) and the partials of phi over ``U x box`` have definite signs.  For
a fixed pin, phi then maps every sub-box onto the interval between its two
extreme corners, and the rule checks that for every pair of cells at every
relative depth the images of the children pairs overlap in a chain from the
lowest corner to the highest.  Depths ``0..K-1`` are checked one shape pair
at a time, and depths ``>= K`` follow from geometric envelopes of the two
schedules.  A nested-cell argument then shows that every value in the leaf
box image is attained on ``K1 x K2`` for every pin in U.

``R2`` (heuristic).  The union of robust images of all descendant pairs
covers the target for a fixed number of extra generations with nondecreasing
margins.  Certificates that use it are marked ``rigorous: false``.
"""

from __future__ import annotations

import json
import random
import time
import warnings
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .cantor import AffineIFS, CantorSet, GapSchedule, set_from_json
from .errors import AdmissibilityFailure, BudgetExhausted, InvalidAddress, MalformedSpec
from .interval import FAST, Box2, ExactArith, Interval, IntervalUnion
from .phi import PhiFunction, parse_phi

FORMAT = "cantorcert/coverage"
VERSION = 1
CERT_PRECISION = 64
R1_MAX_DEPTH = 40
R2_DEPTH = 8
MAX_RETRIES = 3


@dataclass
class SearchBudget:
    max_depth: int = 20
    max_tasks: int = 10 ** 6
    max_seconds: Optional[float] = None


# ---------------------------------------------------------------- leaf rules

@dataclass(frozen=True)
class R1Result:
    explicit_depth: int
    regime: str
    dx: Interval
    dy: Interval


def _rooted(s: CantorSet) -> bool:
    if isinstance(s, GapSchedule):
        return True
    if isinstance(s, AffineIFS):
        kids = s.normalized_children
        return kids[0][0] == 0 and kids[-1][1] == 1
    return False


def _mag(iv: Interval):
    """(min |v|, max |v|) for an interval of constant sign."""
    lo, hi = abs(iv.lo), abs(iv.hi)
    return (min(lo, hi), max(lo, hi))


def _lb(dx: Interval, dy: Interval, ddx, ddy):
    """Certified lower bound of f(P) - f(Q) given P - Q = (ddx, ddy)."""
    return min(dx.lo * ddx, dx.hi * ddx) + min(dy.lo * ddy, dy.hi * ddy)


def _children_cover(sa, sb, dx, dy) -> bool:
    """Do the children images of one shape pair chain from the low to the high corner?"""
    sx, sy = dx.lo > 0, dy.lo > 0
    boxes = [(a, b) for a in sa.children for b in sb.children]

    def low(box):
        (a, b) = box
        return (a[0] if sx else a[1], b[0] if sy else b[1])

    def high(box):
        (a, b) = box
        return (a[1] if sx else a[0], b[1] if sy else b[0])

    ia = 0 if sx else len(sa.children) - 1
    ib = 0 if sy else len(sb.children) - 1
    start = ia * len(sb.children) + ib
    goal = (len(sa.children) - 1 - ia) * len(sb.children) + (len(sb.children) - 1 - ib)
    lows = [low(b) for b in boxes]
    highs = [high(b) for b in boxes]

    def overlap(i, j):
        return (_lb(dx, dy, highs[i][0] - lows[j][0], highs[i][1] - lows[j][1]) >= 0 and
                _lb(dx, dy, highs[j][0] - lows[i][0], highs[j][1] - lows[i][1]) >= 0)

    seen = {start}
    queue = deque([start])
    while queue:
        i = queue.popleft()
        if i == goal:
            return True
        for j in range(len(boxes)):
            if j not in seen and overlap(i, j):
                seen.add(j)
                queue.append(j)
    return False


def _tail_ok(ea, eb, alpha, beta) -> Optional[str]:
    """Sufficient condition for all depths >= K; returns the ordering used."""
    al, ah = alpha
    bl, bh = beta
    # rows of A-children for each B-child in turn
    if (bl * eb.min_child[0] >= ah * ea.max_width[0] and eb.min_child[1] >= ea.max_width[1]
            and al * ea.min_width[0] >= bh * eb.max_gap[0] and ea.min_width[1] >= eb.max_gap[1]):
        return "b-major"
    if (al * ea.min_child[0] >= bh * eb.max_width[0] and ea.min_child[1] >= eb.max_width[1]
            and bl * eb.min_width[0] >= ah * ea.max_gap[0] and eb.min_width[1] >= ea.max_gap[1]):
        return "a-major"
    return None


def check_r1(phi: PhiFunction, U: Box2, A: CantorSet, B: CantorSet,
             precision: int = CERT_PRECISION, max_depth: int = R1_MAX_DEPTH) -> Optional[R1Result]:
    """Try to close the pair ``(A, B)`` by the rigorous persistence rule."""
    if not (_rooted(A) and _rooted(B)):
        return None
    arith = ExactArith(precision)
    dx, dy = phi.partials(U, Box2(A.hull, B.hull), arith)
    if dx is None or dy is None:
        return None
    if dx.lo <= 0 <= dx.hi or dy.lo <= 0 <= dy.hi:
        return None
    alpha, beta = _mag(dx), _mag(dy)
    for k in range(max_depth + 1):
        regime = _tail_ok(A.tail_envelope(k), B.tail_envelope(k), alpha, beta)
        if regime is not None:
            return R1Result(k, regime, dx, dy)
        for sa in A.level_shapes(k):
            for sb in B.level_shapes(k):
                if not _children_cover(sa, sb, dx, dy):
                    return None
    return None


def check_r2(phi, U, K1, K2, a, b, target: Interval, depth: int = R2_DEPTH,
             precision: int = CERT_PRECISION) -> bool:
    """Heuristic rule: descendant robust images keep covering ``target``.

    The margin is measured inside the window ``target`` padded by the parent's
    own margin, so pruning pairs far from the target cannot shrink it; the
    rule asks that the margin never drops below its starting value.
    """
    arith = ExactArith(precision)
    img = phi.robust_image(U, Box2(K1.cell(a), K2.cell(b)), arith)
    if img is None or not img.contains(target):
        return False
    m0 = min(target.lo - img.lo, img.hi - target.hi)
    if m0 <= 0:
        return False
    window = Interval(target.lo - m0, target.hi + m0)
    pairs = [(a, b)]
    for _ in range(depth):
        nxt = []
        for pa, pb in pairs:
            for ca in K1.children(pa):
                for cb in K2.children(pb):
                    box = Box2(K1.cell(ca), K2.cell(cb))
                    if phi.enclose(U, box, arith).intersects(window):
                        nxt.append((ca, cb))
        pairs = nxt
        imgs = [phi.robust_image(U, Box2(K1.cell(x), K2.cell(y)), arith) for x, y in pairs]
        comp = IntervalUnion([i for i in imgs if i is not None]).component_containing(target)
        if comp is None:
            return False
        margin = min(target.lo - max(comp.lo, window.lo), min(comp.hi, window.hi) - target.hi)
        if margin < m0:
            return False
    return True


# ---------------------------------------------------------------- certificate

@dataclass
class Node:
    id: int
    a: tuple
    b: tuple
    target: Interval
    image: Interval
    children: list = field(default_factory=list)
    leaf: Optional[dict] = None

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "a": list(self.a),
            "b": list(self.b),
            "target": self.target.to_json(),
            "image": self.image.to_json(),
            "children": list(self.children),
            "leaf": self.leaf,
        }

    @classmethod
    def from_json(cls, obj) -> "Node":
        return cls(int(obj["id"]), tuple(int(i) for i in obj["a"]), tuple(int(i) for i in obj["b"]),
                   Interval.parse(obj["target"]), Interval.parse(obj["image"]),
                   [int(c) for c in obj["children"]], obj.get("leaf"))


@dataclass
class CoverageCertificate:
    phi: PhiFunction
    U: Box2
    K1: CantorSet
    K2: CantorSet
    J: Interval
    nodes: list
    mode: str = "exact"
    precision: int = CERT_PRECISION
    rigorous: bool = True

    @property
    def root(self) -> Node:
        return self.nodes[0]

    @property
    def leaf_count(self) -> int:
        return sum(1 for n in self.nodes if n.leaf is not None)

    @property
    def depth(self) -> int:
        return max(max(len(n.a), len(n.b)) for n in self.nodes)

    def to_json(self) -> dict:
        return {
            "format": FORMAT,
            "version": VERSION,
            "mode": self.mode,
            "precision": self.precision,
            "rigorous": self.rigorous,
            "phi": self.phi.to_json(),
            "pin_box": self.U.to_json(),
            "K1": self.K1.to_json(),
            "K2": self.K2.to_json(),
            "J": self.J.to_json(),
            "nodes": [n.to_json() for n in self.nodes],
        }

    @classmethod
    def from_json(cls, obj) -> "CoverageCertificate":
        try:
            if obj.get("format") != FORMAT:
                raise MalformedSpec(f"not a coverage certificate: format {obj.get('format')!r}")
            if obj.get("version") != VERSION:
                raise MalformedSpec(f"unsupported certificate version {obj.get('version')!r}")
            return cls(
                phi=parse_phi(obj["phi"]),
                U=Box2.parse(obj["pin_box"]),
                K1=set_from_json(obj["K1"]),
                K2=set_from_json(obj["K2"]),
                J=Interval.parse(obj["J"]),
                nodes=[Node.from_json(n) for n in obj["nodes"]],
                mode=obj.get("mode", "exact"),
                precision=int(obj.get("precision", CERT_PRECISION)),
                rigorous=bool(obj.get("rigorous", True)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedSpec(f"malformed certificate: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1)

    @classmethod
    def loads(cls, text: str) -> "CoverageCertificate":
        return cls.from_json(json.loads(text))

    def with_pin_box(self, U: Box2) -> "CoverageCertificate":
        return CoverageCertificate(self.phi, U, self.K1, self.K2, self.J, self.nodes,
                                   self.mode, self.precision, self.rigorous)


# ---------------------------------------------------------------- search

def _overlaps_cells(U: Box2, K1: CantorSet, K2: CantorSet) -> bool:
    return U.x.intersects(K1.hull) and U.y.intersects(K2.hull)


class _Search:
    def __init__(self, phi, U, K1, K2, budget, mode, precision, rules, seed):
        self.phi, self.U, self.K1, self.K2 = phi, U, K1, K2
        self.budget = budget
        self.mode = mode
        self.precision = precision
        self.rules = rules
        self.exact = ExactArith(precision)
        self.fast = mode == "fast"
        self.tasks = 0
        self.used_r2 = False
        self.r2_depth = R2_DEPTH
        self.t0 = time.monotonic()
        self._img: dict = {}
        self._r1: dict = {}
        self._failed: dict = {}
        self._slack = Fraction(1, 2 ** max(precision - 8, 8))
        # the seed only perturbs tie order among candidates, and only in fast mode
        self.rng = random.Random(seed) if (self.fast and seed is not None) else None

    def box(self, a, b) -> Box2:
        return Box2(self.K1.cell(a), self.K2.cell(b))

    def image(self, a, b) -> Optional[Interval]:
        """Robust image used by the search (shrunk in fast mode)."""
        key = (a, b)
        if key not in self._img:
            if self.fast:
                im = self.phi.robust_image(self.U, self.box(a, b), FAST)
                if im is not None:
                    lo = Fraction(im.lo) + self._slack * (1 + abs(Fraction(im.lo)))
                    hi = Fraction(im.hi) - self._slack * (1 + abs(Fraction(im.hi)))
                    im = Interval(lo, hi) if lo <= hi else None
            else:
                im = self.phi.robust_image(self.U, self.box(a, b), self.exact)
            self._img[key] = im
        return self._img[key]

    def cert_image(self, a, b) -> Interval:
        if not self.fast:
            return self._img[(a, b)]
        return self.phi.robust_image(self.U, self.box(a, b), self.exact)

    def r1(self, a, b) -> Optional[R1Result]:
        key = (a, b)
        if key not in self._r1:
            self._r1[key] = check_r1(self.phi, self.U, self.K1.cell_set(a),
                                     self.K2.cell_set(b), self.precision)
        return self._r1[key]

    def tick(self):
        self.tasks += 1
        if self.tasks > self.budget.max_tasks:
            raise BudgetExhausted(f"task budget {self.budget.max_tasks} exhausted")
        if (self.budget.max_seconds is not None
                and time.monotonic() - self.t0 > self.budget.max_seconds):
            raise BudgetExhausted(f"time budget {self.budget.max_seconds}s exhausted")

    def child_pairs(self, a, b) -> list:
        """Refinements of ``(a, b)``: split both cells, or only one of them."""
        ca, cb = self.K1.children(a), self.K2.children(b)
        pairs = [(x, y) for x in ca for y in cb]
        pairs += [(x, b) for x in ca] + [(a, y) for y in cb]
        return pairs

    @staticmethod
    def greedy_cover(target: Interval, cands: list) -> Optional[list]:
        """Pick candidates left to right; returns [(pair, subtarget), ...] tiling ``target``."""
        chosen = []
        cur = target.lo
        while True:
            best = None
            for pair, im in cands:
                if im.lo <= cur <= im.hi:
                    if (best is None or im.hi > best[1].hi
                            or (im.hi == best[1].hi and im.width > best[1].width)):
                        best = (pair, im)
            if best is None or (chosen and best[1].hi <= cur):
                return None
            chosen.append(best)
            if best[1].hi >= target.hi:
                break
            cur = best[1].hi
        # cut in the middle of each overlap so subtargets keep a margin
        out = []
        start = target.lo
        for i, (pair, im) in enumerate(chosen):
            if i + 1 == len(chosen):
                end = target.hi
            else:
                nxt = chosen[i + 1][1]
                end = (max(nxt.lo, start) + im.hi) / 2
            out.append((pair, Interval(start, end)))
            start = end
        return out

    def solve(self, a, b, target: Interval, depth: int) -> Optional[dict]:
        # a pair that failed on T with d levels left fails on any T' >= T with fewer
        for d, t in self._failed.get((a, b), ()):
            if depth >= d and target.contains(t):
                return None
        node = self._solve(a, b, target, depth)
        if node is None:
            self._failed.setdefault((a, b), []).append((depth, target))
        return node

    def _solve(self, a, b, target: Interval, depth: int) -> Optional[dict]:
        self.tick()
        if "R1" in self.rules:
            res = self.r1(a, b)
            if res is not None:
                return {"a": a, "b": b, "target": target, "children": [],
                        "leaf": {"rule": "R1", "explicit_depth": res.explicit_depth,
                                 "regime": res.regime, "dx": res.dx.to_json(),
                                 "dy": res.dy.to_json()}}
        if depth >= self.budget.max_depth:
            if "R2" in self.rules and check_r2(self.phi, self.U, self.K1, self.K2, a, b,
                                               target, self.r2_depth, self.precision):
                self.used_r2 = True
                return {"a": a, "b": b, "target": target, "children": [],
                        "leaf": {"rule": "R2", "depth": self.r2_depth}}
            return None
        cands = []
        for pair in self.child_pairs(a, b):
            im = self.image(*pair)
            if im is not None and im.intersects(target):
                cands.append((pair, im))
        if self.rng is not None:
            self.rng.shuffle(cands)
            cands.sort(key=lambda c: (c[1].lo, -c[1].width))
        else:
            cands.sort(key=lambda c: (c[1].lo, -c[1].width, c[0]))
        excluded: set = set()
        for _ in range(MAX_RETRIES + 1):
            plan = self.greedy_cover(target, [c for c in cands if c[0] not in excluded])
            if plan is None:
                return None
            kids = []
            failed = None
            for pair, sub in plan:
                node = self.solve(pair[0], pair[1], sub, depth + 1)
                if node is None:
                    failed = pair
                    break
                kids.append(node)
            if failed is None:
                return {"a": a, "b": b, "target": target, "children": kids, "leaf": None}
            excluded.add(failed)
        return None


def _flatten(search: _Search, tree: dict) -> list:
    nodes: list = []

    def visit(t):
        node = Node(len(nodes), t["a"], t["b"], t["target"],
                    search.cert_image(t["a"], t["b"]), [], t["leaf"])
        nodes.append(node)
        for c in t["children"]:
            node.children.append(visit(c))
        return node.id

    visit(tree)
    return nodes


def certify_cover(phi, U: Box2, K1: CantorSet, K2: CantorSet, J: Interval,
                  budget: SearchBudget | None = None, *, mode: str = "exact",
                  precision: int = CERT_PRECISION, allow_heuristic: bool = False,
                  seed: int | None = None, r2_depth: int = R2_DEPTH) -> CoverageCertificate:
    """Search for a certificate that ``J`` lies in the phi-image of ``K1 x K2`` for every pin in ``U``.

    Raises :class:`AdmissibilityFailure` when ``J`` is not inside the robust
    image of the hull box, and :class:`BudgetExhausted` when no certificate
    is found within ``budget`` (which says nothing about non-coverage).
    """
    phi = parse_phi(phi)
    budget = budget or SearchBudget()
    if mode not in ("exact", "fast"):
        raise MalformedSpec(f"unknown mode {mode!r}")
    if _overlaps_cells(U, K1, K2):
        warnings.warn("pin box overlaps the product of the hulls; robust images may collapse",
                      stacklevel=2)
    exact = ExactArith(precision)
    root_img = phi.robust_image(U, Box2(K1.hull, K2.hull), exact)
    if root_img is None or not root_img.contains(J):
        raise AdmissibilityFailure(f"J={J} is not inside the robust image {root_img} of the hulls")
    rules = ("R1", "R2") if allow_heuristic else ("R1",)
    search = _Search(phi, U, K1, K2, budget, mode, precision, rules, seed)
    search.r2_depth = r2_depth
    if not search.fast:
        search._img[((), ())] = root_img
    tree = search.solve((), (), J, 0)
    if tree is None:
        raise BudgetExhausted(f"no certificate within depth {budget.max_depth} "
                              f"({search.tasks} tasks)")
    nodes = _flatten(search, tree)
    return CoverageCertificate(phi, U, K1, K2, J, nodes, mode, precision,
                               rigorous=not search.used_r2)


# ---------------------------------------------------------------- verification

@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    node: Optional[int] = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def _refines(parent: tuple, child: tuple) -> bool:
    return child == parent or (len(child) == len(parent) + 1 and child[:-1] == parent)


def _check_node(cert: CoverageCertificate, nodes: dict, n: Node) -> Optional[str]:
    arith = ExactArith(cert.precision)
    try:
        cert.K1.check_address(n.a)
        cert.K2.check_address(n.b)
    except InvalidAddress as exc:
        return f"invalid address: {exc}"
    box = Box2(cert.K1.cell(n.a), cert.K2.cell(n.b))
    im = cert.phi.robust_image(cert.U, box, arith)
    if im is None or not im.contains(n.image):
        return f"recorded image {n.image} not inside recomputed robust image {im}"
    if not n.image.contains(n.target):
        return f"target {n.target} not inside image {n.image}"
    if n.children:
        if n.leaf is not None:
            return "internal node carries a leaf record"
        kids = []
        for cid in n.children:
            if cid not in nodes or cid <= n.id:
                return f"bad child id {cid}"
            kids.append(nodes[cid])
        for c in kids:
            if not (_refines(n.a, c.a) and _refines(n.b, c.b)):
                return f"child {c.id} does not refine the cell pair"
            if c.a == n.a and c.b == n.b:
                return f"child {c.id} repeats the cell pair"
        if kids[0].target.lo != n.target.lo or kids[-1].target.hi != n.target.hi:
            return "children targets do not span the target"
        for x, y in zip(kids, kids[1:]):
            if x.target.hi != y.target.lo:
                return f"children {x.id} and {y.id} do not tile the target"
        return None
    leaf = n.leaf
    if not isinstance(leaf, dict):
        return "leaf without a closure record"
    rule = leaf.get("rule")
    if rule == "R1":
        res = check_r1(cert.phi, cert.U, cert.K1.cell_set(n.a), cert.K2.cell_set(n.b),
                       cert.precision)
        if res is None:
            return "R1 closure fails on recomputation"
        try:
            rdx, rdy = Interval.parse(leaf["dx"]), Interval.parse(leaf["dy"])
        except (KeyError, TypeError, ValueError):
            return "R1 leaf record incomplete"
        if not (rdx.contains(res.dx) and rdy.contains(res.dy)):
            return "recorded partial enclosures do not contain the recomputed ones"
        return None
    if rule == "R2":
        if cert.rigorous:
            return "heuristic leaf in a certificate marked rigorous"
        depth = leaf.get("depth", R2_DEPTH)
        if not isinstance(depth, int) or depth < 1:
            return "R2 depth must be a positive integer"
        if not check_r2(cert.phi, cert.U, cert.K1, cert.K2, n.a, n.b, n.target, depth,
                        cert.precision):
            return "R2 closure fails on recomputation"
        return None
    return f"unknown leaf rule {rule!r}"


def verify_certificate(cert, threads: int = 1) -> VerifyResult:
    """Re-check every node of ``cert`` in exact arithmetic."""
    if isinstance(cert, (str, bytes)):
        cert = CoverageCertificate.loads(cert)
    elif isinstance(cert, dict):
        try:
            cert = CoverageCertificate.from_json(cert)
        except MalformedSpec as exc:
            return VerifyResult(False, None, str(exc))
    if not cert.nodes:
        return VerifyResult(False, None, "no nodes")
    ids = [n.id for n in cert.nodes]
    if ids != list(range(len(ids))):
        return VerifyResult(False, None, "node ids are not 0..n-1 in order")
    root = cert.root
    if root.a != () or root.b != ():
        return VerifyResult(False, 0, "root is not the hull pair")
    if root.target != cert.J:
        return VerifyResult(False, 0, f"root target {root.target} differs from J={cert.J}")
    nodes = {n.id: n for n in cert.nodes}
    referenced = [c for n in cert.nodes for c in n.children]
    if sorted(referenced) != list(range(1, len(ids))):
        return VerifyResult(False, None, "nodes do not form a tree")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            errors = list(pool.map(lambda n: _check_node(cert, nodes, n), cert.nodes))
    else:
        errors = [_check_node(cert, nodes, n) for n in cert.nodes]
    for n, err in zip(cert.nodes, errors):
        if err is not None:
            return VerifyResult(False, n.id, err)
    return VerifyResult(True)
