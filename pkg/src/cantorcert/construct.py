"""Partner sets, chains and trees built on a given Cantor set K.

:func:`construct_partner` takes K, an interval I and a pin v and returns a
positive-measure Cantor set K~ inside I together with a pin box around v, an
interval J and a coverage certificate for ``J`` inside the distance set from
every pin of the box to ``K1 x K~``, where K1 is a piece of K inside I.

:func:`build_tree` places distinct skeleton points on the diagonal, one per
vertex, and runs the partner construction from the leaves up: the pin box of
each vertex is the intersection of the pin boxes its children's certificates
were made for.  :func:`build_chain` is the path case.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .cantor import CantorSet, FiniteUnion, GapSchedule, restrict, restrict_cells, set_from_json
from .certify import (CERT_PRECISION, CoverageCertificate, SearchBudget, VerifyResult,
                      certify_cover, verify_certificate)
from .errors import (AdmissibilityFailure, BudgetExhausted, DegeneratePin, EmptyRestriction,
                     MalformedSpec, NotEnoughCells, SkeletonConflict)
from .interval import Box2, ExactArith, Interval, format_rational, parse_rational
from .phi import Euclidean, PhiFunction, SignReport, check_derivative_condition, parse_phi
from .trees import LabeledTree, format_label, kb_order, parse_label, parse_tree_spec

TREE_FORMAT = "cantorcert/tree"
GAP_FRACTIONS = (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8))
DECAYS = (Fraction(1, 2), Fraction(1, 4))
RESOLUTION = Fraction(1, 2 ** 30)
ATTEMPT_TASKS = 2000
PROBE_TASKS = 50


@dataclass
class PartnerResult:
    K_tilde: GapSchedule
    K1: CantorSet
    K1_address: tuple
    U: Box2
    J: Interval
    cert: CoverageCertificate
    Q: Interval
    Lambda2: Optional[Interval]
    signs: SignReport

    @property
    def pin_radius(self):
        return self.U.x.width / 2

    def verify(self, K: CantorSet | None = None, I: Interval | None = None, v=None,
               open: bool = True) -> VerifyResult:
        res = verify_certificate(self.cert)
        if not res:
            return res
        c = self.cert
        if c.K1 != self.K1 or c.K2 != self.K_tilde or c.U != self.U or c.J != self.J:
            return VerifyResult(False, None, "certificate does not match the partner record")
        if not self.K_tilde.measure_lower_bound() > self.K1.measure_upper_bound():
            return VerifyResult(False, None, "partner measure does not exceed the piece of K")
        if not self.Q.contains(self.K1.hull):
            return VerifyResult(False, None, "K1 leaves Q")
        if self.Lambda2 is not None and self.Lambda2.intersects(self.Q):
            return VerifyResult(False, None, "Q and Lambda2 intersect")
        if K is not None and K.cell_set(self.K1_address) != self.K1:
            return VerifyResult(False, None, "K1 is not a cell of K")
        if I is not None:
            inside = I.interior_contains if open else I.contains
            if not inside(self.K_tilde.hull):
                return VerifyResult(False, None, "partner hull leaves I")
        if v is not None:
            if not self.U.contains(v):
                return VerifyResult(False, None, "pin box misses v")
            if self.Lambda2 is not None and not self.Lambda2.interior_contains(v[1]):
                return VerifyResult(False, None, "Lambda2 misses v2")
        return VerifyResult(True)

    def to_json(self) -> dict:
        return {
            "K_tilde": self.K_tilde.to_json(),
            "K1": self.K1.to_json(),
            "K1_address": list(self.K1_address),
            "pin_box": self.U.to_json(),
            "J": self.J.to_json(),
            "Q": self.Q.to_json(),
            "Lambda2": None if self.Lambda2 is None else self.Lambda2.to_json(),
            "signs": [s.value for s in self.signs.signs],
            "certificate": self.cert.to_json(),
        }


def _split_claim(K: CantorSet, I: Interval, v2, open: bool):
    """Pick a cell of K inside I away from v2: returns (address, Q, Lambda2)."""
    inside = I.interior_contains if open else I.contains
    addrs = restrict_cells(K, I, open=open)
    if not addrs:
        raise EmptyRestriction(f"no cell of K lies in {I}")
    if not inside(v2):
        best = max(addrs, key=lambda a: (K.cell(a).width, -K.cell(a).lo))
        return best, I, None
    # cells inside I are disjoint, so at most one contains v2; look below it too
    frontier = list(addrs)
    for _ in range(24):
        away = [a for a in frontier if not K.cell(a).contains(v2)]
        if away:
            best = max(away, key=lambda a: (K.cell(a).width, -K.cell(a).lo))
            c = K.cell(best)
            d = c.separation(Interval.point(v2))
            lam = Interval(v2 - d / 2, v2 + d / 2)
            # shrink Q to the cell padded by a quarter of the separation, kept inside I
            q = Interval(max(c.lo - d / 4, I.lo), min(c.hi + d / 4, I.hi))
            if q.intersects(lam):
                q = c
            return best, q, lam
        frontier = [ch for a in frontier for ch in K.children(a)]
    raise DegeneratePin(f"cannot separate v2={v2} from the cells of K in {I}")


def construct_partner(K: CantorSet, I: Interval, v, budget: SearchBudget | None = None, *,
                      phi: PhiFunction | str | None = None, open: bool = True,
                      pin_radius=None, halvings: int = 6, mode: str = "exact",
                      precision: int = CERT_PRECISION,
                      attempt_tasks: int = ATTEMPT_TASKS) -> PartnerResult:
    """Build a fat Cantor set in ``I`` whose pinned distance set near ``v`` contains an interval.

    ``I`` is treated as open unless ``open=False``.  The partner family is
    ``GapSchedule(hull(K1), c*W*(1-rho), rho)`` with ``c`` in {1/2, 1/4, 1/8}
    and ``rho`` in {1/2, 1/4}; the pin box is a square around ``v`` whose
    radius starts at ``pin_radius`` (default ``W/4``, capped at ``W/2``) and is halved until a
    certificate is found.  All radii are first tried with a small task cap,
    then again with at most ``attempt_tasks`` search tasks each.
    """
    phi = Euclidean() if phi is None else parse_phi(phi)
    budget = budget or SearchBudget()
    attempt = SearchBudget(budget.max_depth, min(budget.max_tasks, attempt_tasks),
                           budget.max_seconds)
    v = (parse_rational(v[0]), parse_rational(v[1]))
    addr, Q, lam = _split_claim(K, I, v[1], open)
    K1 = K.cell_set(addr)
    W = K1.hull.width
    r0 = W / 4 if pin_radius is None else min(Fraction(pin_radius), W / 2)
    arith = ExactArith(precision)
    last_error: Exception | None = None
    # a cheap sweep over every radius first: most instances close at the root
    for tasks in sorted({min(PROBE_TASKS, attempt.max_tasks), attempt.max_tasks}):
        step = SearchBudget(attempt.max_depth, tasks, attempt.max_seconds)
        r = r0
        for _ in range(halvings + 1):
            U = Box2.square(v, r)
            r /= 2
            if U.x.intersects(K1.hull) and U.y.intersects(K1.hull):
                continue
            box = Box2(K1.hull, K1.hull)
            signs = check_derivative_condition(phi, U, box, arith)
            if not signs.satisfied:
                continue
            for c in GAP_FRACTIONS:
                for rho in DECAYS:
                    K2 = GapSchedule(K1.hull, c * W * (1 - rho), rho)
                    R = phi.robust_image(U, Box2(K1.hull, K2.hull), arith)
                    if R is None or R.width <= 0:
                        continue
                    J = Interval(R.lo + R.width / 3, R.hi - R.width / 3)
                    try:
                        cert = certify_cover(phi, U, K1, K2, J, step, mode=mode,
                                             precision=precision)
                    except (BudgetExhausted, AdmissibilityFailure) as exc:
                        last_error = exc
                        continue
                    return PartnerResult(K2, K1, addr, U, J, cert, Q, lam, signs)
    raise BudgetExhausted(f"no partner found for I={I}, v={v}"
                          + (f" (last: {last_error})" if last_error else ""))


# ---------------------------------------------------------------- skeleton

def _skeleton_cells(K: CantorSet, n: int, depth: int) -> list:
    cands = [(K.member_point(a), a) for a in K.addresses(depth)]
    cands.sort()
    if n < 1:
        raise NotEnoughCells("need at least one skeleton point")
    if len(cands) < n:
        raise NotEnoughCells(f"{len(cands)} cells at depth {depth}, need {n}")
    chosen = [cands[0]]
    rest = cands[1:]
    while len(chosen) < n:
        best = max(rest, key=lambda c: (min(abs(c[0] - p) for p, _ in chosen), -c[0]))
        chosen.append(best)
        rest.remove(best)
    return sorted(chosen)


def select_skeleton(K: CantorSet, n: int, depth: int) -> list:
    """``n`` diagonal points ``(p, p)`` from distinct depth-``depth`` cells, spread out."""
    return [(p, p) for p, _ in _skeleton_cells(K, n, depth)]


# ---------------------------------------------------------------- chains and trees

@dataclass
class VertexRecord:
    label: tuple
    point: Fraction
    address: tuple
    box: Box2
    partner: Optional[PartnerResult] = None


@dataclass
class TreeCertificate:
    kind: str
    tree: LabeledTree
    K: CantorSet
    phi: PhiFunction
    records: dict
    K0: CantorSet
    K_tilde: FiniteUnion

    @property
    def root_box(self) -> Box2:
        return self.records[(0,)].box

    @property
    def box(self) -> tuple:
        """Certified intervals, one per edge, in :func:`kb_order` coordinate order."""
        return tuple(self.records[c].partner.J for _, c in kb_order(self.tree))

    @property
    def skeleton(self) -> dict:
        return {lab: (rec.point, rec.point) for lab, rec in self.records.items()}

    def clouds(self) -> dict:
        return {lab: (rec.partner.K1, rec.partner.K_tilde)
                for lab, rec in self.records.items() if rec.partner is not None}

    def to_json(self) -> dict:
        verts = []
        for lab in self.tree.vertex_order():
            rec = self.records[lab]
            verts.append({
                "label": format_label(lab),
                "point": format_rational(rec.point),
                "address": list(rec.address),
                "box": rec.box.to_json(),
                "partner": None if rec.partner is None else rec.partner.to_json(),
            })
        return {
            "format": TREE_FORMAT,
            "version": 1,
            "kind": self.kind,
            "tree": self.tree.to_json(),
            "K": self.K.to_json(),
            "phi": self.phi.to_json(),
            "K0": self.K0.to_json(),
            "K_tilde": self.K_tilde.to_json(),
            "vertices": verts,
            "box": [j.to_json() for j in self.box],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, obj) -> "TreeCertificate":
        try:
            if obj.get("format") != TREE_FORMAT:
                raise MalformedSpec(f"not a tree certificate: {obj.get('format')!r}")
            records = {}
            for vobj in obj["vertices"]:
                lab = parse_label(vobj["label"])
                p = vobj["partner"]
                partner = None
                if p is not None:
                    cert = CoverageCertificate.from_json(p["certificate"])
                    partner = PartnerResult(
                        set_from_json(p["K_tilde"]), set_from_json(p["K1"]),
                        tuple(p["K1_address"]), Box2.parse(p["pin_box"]),
                        Interval.parse(p["J"]), cert, Interval.parse(p["Q"]),
                        None if p["Lambda2"] is None else Interval.parse(p["Lambda2"]),
                        check_derivative_condition(cert.phi, cert.U,
                                                   Box2(cert.K1.hull, cert.K1.hull)))
                records[lab] = VertexRecord(lab, parse_rational(vobj["point"]),
                                            tuple(vobj["address"]), Box2.parse(vobj["box"]),
                                            partner)
            return cls(obj["kind"], parse_tree_spec(obj["tree"] or {}), set_from_json(obj["K"]),
                       parse_phi(obj["phi"]), records, set_from_json(obj["K0"]),
                       set_from_json(obj["K_tilde"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedSpec(f"malformed tree certificate: {exc}") from exc

    @classmethod
    def loads(cls, text: str) -> "TreeCertificate":
        return cls.from_json(json.loads(text))

    def verify(self, threads: int = 1) -> VerifyResult:
        return verify_tree_certificate(self, threads)


ChainCertificate = TreeCertificate


def _parts(s: CantorSet) -> list:
    return list(s.parts) if isinstance(s, FiniteUnion) else [s]


def _side(box: Box2) -> Interval:
    return box.x


def verify_tree_certificate(tc: TreeCertificate, threads: int = 1) -> VerifyResult:
    """Check every structural claim of a chain/tree certificate, then each coverage certificate."""
    t, K = tc.tree, tc.K
    if set(tc.records) != set(t.vertices):
        return VerifyResult(False, None, "records do not match the tree vertices")
    pts = {}
    for lab, rec in tc.records.items():
        where = format_label(lab)
        if K.member_point(rec.address) != rec.point:
            return VerifyResult(False, None, f"vertex {where}: point is not the member point")
        if rec.point in pts:
            return VerifyResult(False, None, f"vertex {where}: skeleton point repeated")
        pts[rec.point] = lab
        if rec.box.x != rec.box.y or not rec.box.contains((rec.point, rec.point)):
            return VerifyResult(False, None, f"vertex {where}: box is not a diagonal square "
                                "around its point")
        if (lab == (0,)) != (rec.partner is None):
            return VerifyResult(False, None, f"vertex {where}: partner record misplaced")
    labs = t.vertex_order()
    for i, x in enumerate(labs):
        for y in labs[i + 1:]:
            if tc.records[x].box.intersects(tc.records[y].box):
                return VerifyResult(False, None, f"boxes of {format_label(x)} and "
                                    f"{format_label(y)} intersect")
    for lab in labs[1:]:
        rec = tc.records[lab]
        where = format_label(lab)
        p = rec.partner
        parent_box = tc.records[lab[:-1]].box
        if p.cert.phi != tc.phi:
            return VerifyResult(False, None, f"vertex {where}: certificate uses another phi")
        if not p.cert.U.contains(parent_box):
            return VerifyResult(False, None, f"vertex {where}: pin box does not contain the "
                                "parent's box")
        if not rec.box.contains(Box2(p.K1.hull, p.K_tilde.hull)):
            return VerifyResult(False, None, f"vertex {where}: K x K~ leaves the box")
        res = p.verify(K)
        if not res:
            return VerifyResult(False, res.node, f"vertex {where}: {res.reason}")
    try:
        K0 = restrict(K, _side(tc.root_box), open=True)
    except EmptyRestriction:
        return VerifyResult(False, None, "root box holds no cell of K")
    if K0 != tc.K0:
        return VerifyResult(False, None, "K0 is not the restriction of K to the root box")
    x0 = tc.records[(0,)].point
    if not any(part.hull.contains(x0) for part in _parts(K0)):
        return VerifyResult(False, None, "root skeleton point is not in K0")
    expected = FiniteUnion(_parts(K0) + [tc.records[lab].partner.K_tilde for lab in labs[1:]])
    if expected != tc.K_tilde:
        return VerifyResult(False, None, "K~ is not the union of K0 and the partner sets")
    if not tc.K_tilde.measure_lower_bound() > K.measure_upper_bound():
        return VerifyResult(False, None, "measure of K~ does not exceed that of K")
    return VerifyResult(True)


def _default_depth(K: CantorSet, n: int) -> int:
    d = 0
    while sum(1 for _ in K.addresses(d)) < n:
        d += 1
        if d > 16:
            raise NotEnoughCells(f"fewer than {n} cells up to depth 16")
    return d


def build_tree(K: CantorSet, T, budget: SearchBudget | None = None, *,
               phi: PhiFunction | str | None = None, depth: int | None = None,
               mode: str = "exact", precision: int = CERT_PRECISION,
               kind: str = "tree") -> TreeCertificate:
    """Certified box inside the pinned tree distance set of ``K x K~`` for a built K~."""
    T = parse_tree_spec(T) if not isinstance(T, LabeledTree) else T
    phi = Euclidean() if phi is None else parse_phi(phi)
    order = T.vertex_order()
    n = len(order)
    depth = _default_depth(K, n) if depth is None else depth
    cells = _skeleton_cells(K, n, depth)
    assign = {lab: cells[i] for i, lab in enumerate(order)}
    pts = sorted(p for p, _ in cells)
    sep = min((b - a for a, b in zip(pts, pts[1:])), default=K.hull.width)
    base = sep / 4
    if base < RESOLUTION * K.hull.width:
        raise SkeletonConflict("skeleton points too close to carve disjoint boxes")
    radius: dict = {}
    partners: dict = {}
    for lab in reversed(order):
        r = base
        for ch in T.children(lab):
            r = min(r, partners[ch].pin_radius)
        if r < RESOLUTION * K.hull.width:
            raise SkeletonConflict(f"box of vertex {format_label(lab)} fell below resolution")
        radius[lab] = r
        if lab == (0,):
            break
        p = assign[lab][0]
        parent_p = assign[lab[:-1]][0]
        I = Interval(p - r, p + r)
        partners[lab] = construct_partner(K, I, (parent_p, parent_p), budget, phi=phi,
                                          open=True, pin_radius=base, mode=mode,
                                          precision=precision)
    records = {}
    for lab in order:
        p, addr = assign[lab]
        records[lab] = VertexRecord(lab, p, addr, Box2.square((p, p), radius[lab]),
                                    partners.get(lab))
    K0 = restrict(K, records[(0,)].box.x, open=True)
    K_tilde = FiniteUnion(_parts(K0) + [partners[lab].K_tilde for lab in order[1:]])
    return TreeCertificate(kind, T, K, phi, records, K0, K_tilde)


def build_chain(K: CantorSet, n: int, budget: SearchBudget | None = None, **kw) -> TreeCertificate:
    """Chain with ``n`` links: skeleton points ``x^0 .. x^n`` and an n-dimensional box."""
    if n < 1:
        raise MalformedSpec("a chain needs at least one link")
    return build_tree(K, LabeledTree.chain(n), budget, kind="chain", **kw)
