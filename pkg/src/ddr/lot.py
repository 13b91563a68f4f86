"""Labeled oriented trees: parsing, presentations, sub-LOT lattice,
collapse/insert, reorientation search, and the collapse-transfer certificate.

A LOT is a tree with oriented edges labeled by vertices.  Each edge
(source u1, target u2, label u3) contributes the relator u1 u3 u2^-1 u3^-1,
so every relator has length four and exponent sum zero.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Optional

from .certificates import CERTIFIED_DR_AWAY_FROM, UNKNOWN, Certificate
from .core import Letter, Presentation, presentation_digest, word_stats
from .smallcancel import SmallCancellationError, certify_s44
from .weights import WeightError, search_weights
from .whitehead import (NEGATIVE, POSITIVE, GraphView, build_whitehead, is_forest,
                        min_weight_reduced_cycle)

_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


class LotError(ValueError):
    def __init__(self, message: str, *, code: str = "INVALID", line: int | None = None):
        super().__init__(message + (f" (line {line})" if line is not None else ""))
        self.code = code
        self.line = line


@dataclass(frozen=True, slots=True)
class LotEdge:
    source: str
    target: str
    label: str


@dataclass(frozen=True)
class LOT:
    vertices: tuple[str, ...]
    edges: tuple[LotEdge, ...]

    def __post_init__(self):
        seen = set()
        for v in self.vertices:
            if not _NAME_RE.match(v):
                raise LotError(f"invalid vertex name {v!r}", code="BAD_NAME")
            if v in seen:
                raise LotError(f"duplicate vertex {v!r}", code="DUPLICATE_VERTEX")
            seen.add(v)
        for e in self.edges:
            for v in (e.source, e.target):
                if v not in seen:
                    raise LotError(f"edge endpoint {v!r} is not a vertex", code="NOT_A_TREE")
            if e.label not in seen:
                raise LotError(f"edge label {e.label!r} is not a vertex",
                               code="LABEL_NOT_A_VERTEX")
            if e.source == e.target:
                raise LotError("self-loop edge", code="NOT_A_TREE")
        if len(self.edges) != len(self.vertices) - 1 or not self._connected():
            raise LotError("underlying graph is not a tree", code="NOT_A_TREE")

    def _connected(self) -> bool:
        if not self.vertices:
            return False
        adj: dict[str, list[str]] = {v: [] for v in self.vertices}
        for e in self.edges:
            adj[e.source].append(e.target)
            adj[e.target].append(e.source)
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return len(seen) == len(self.vertices)

    @property
    def vertex_set(self) -> frozenset[str]:
        return frozenset(self.vertices)


@dataclass(frozen=True)
class SubLot:
    """A connected, label-closed subtree with at least one edge, identified
    by its vertex set (the edges are the induced ones)."""

    parent: LOT
    vertex_subset: frozenset[str]
    edge_indices: frozenset[int]


def make_sublot(lot: LOT, vertices) -> SubLot:
    vs = frozenset(vertices)
    unknown = vs - lot.vertex_set
    if unknown:
        raise LotError(f"sub-LOT vertices {sorted(unknown)} not in the LOT", code="BAD_SUBLOT")
    edge_idx = frozenset(i for i, e in enumerate(lot.edges)
                         if e.source in vs and e.target in vs)
    _validate_sublot(lot, vs, edge_idx)
    return SubLot(lot, vs, edge_idx)


def _validate_sublot(lot: LOT, vs: frozenset[str], edge_idx: frozenset[int]) -> None:
    if not edge_idx:
        raise LotError("a sub-LOT needs at least one edge", code="BAD_SUBLOT")
    used = set()
    for i in edge_idx:
        used.add(lot.edges[i].source)
        used.add(lot.edges[i].target)
    if used != vs:
        raise LotError("sub-LOT vertex set does not match its edges (disconnected vertex?)",
                       code="BAD_SUBLOT")
    adj: dict[str, list[str]] = {v: [] for v in vs}
    for i in edge_idx:
        e = lot.edges[i]
        adj[e.source].append(e.target)
        adj[e.target].append(e.source)
    first = next(iter(sorted(vs)))
    seen = {first}
    stack = [first]
    while stack:
        for nxt in adj[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    if seen != vs:
        raise LotError("sub-LOT is not connected", code="BAD_SUBLOT")
    for i in edge_idx:
        if lot.edges[i].label not in vs:
            raise LotError(f"sub-LOT is not label-closed: label {lot.edges[i].label!r} outside",
                           code="BAD_SUBLOT")


@dataclass(frozen=True)
class SubLotInfo:
    sublot: SubLot
    proper: bool
    maximal_proper: bool


def sub_lots(lot: LOT) -> tuple[SubLotInfo, ...]:
    """Every sub-LOT (connected, >= 1 edge, label-closed), with the maximal
    proper ones flagged.  Exhaustive over edge subsets; fine at tree scale."""
    n = len(lot.edges)
    found: list[frozenset[int]] = []
    for mask in range(1, 1 << n):
        edge_idx = frozenset(i for i in range(n) if mask >> i & 1)
        vs = frozenset()
        for i in edge_idx:
            vs |= {lot.edges[i].source, lot.edges[i].target}
        try:
            _validate_sublot(lot, vs, edge_idx)
        except LotError:
            continue
        found.append(edge_idx)
    found.sort(key=lambda s: (len(s), sorted(s)))
    infos = []
    all_edges = frozenset(range(n))
    proper_sets = [s for s in found if s != all_edges]
    for edge_idx in found:
        proper = edge_idx != all_edges
        maximal = proper and not any(edge_idx < other for other in proper_sets)
        vs = frozenset()
        for i in edge_idx:
            vs |= {lot.edges[i].source, lot.edges[i].target}
        infos.append(SubLotInfo(SubLot(lot, vs, edge_idx), proper, maximal))
    return tuple(infos)


def parse_lot(text: str) -> LOT:
    return parse_lot_document(text).lot


@dataclass(frozen=True)
class LotDocument:
    lot: LOT
    sublots: Mapping[str, SubLot]


def parse_lot_document(text: str) -> LotDocument:
    """LOT text format: optional `vertices:` line; `edge <source> <target>
    <label>` lines; optional `sublot: <name> <v1> <v2> ...` lines naming
    vertex subsets for certification requests."""
    declared: list[str] = []
    edges: list[LotEdge] = []
    sublot_specs: list[tuple[str, list[str], int]] = []
    saw_vertices = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head = tokens[0]
        if head == "vertices:":
            if saw_vertices:
                raise LotError("second vertices: line", code="SYNTAX", line=lineno)
            saw_vertices = True
            declared.extend(tokens[1:])
        elif head == "edge":
            if len(tokens) != 4:
                raise LotError("expected: edge <source> <target> <label>",
                               code="SYNTAX", line=lineno)
            edges.append(LotEdge(tokens[1], tokens[2], tokens[3]))
        elif head == "sublot:":
            if len(tokens) < 3:
                raise LotError("expected: sublot: <name> <v1> <v2> ...",
                               code="SYNTAX", line=lineno)
            sublot_specs.append((tokens[1], tokens[2:], lineno))
        else:
            raise LotError(f"unrecognized directive {head!r}", code="SYNTAX", line=lineno)
    vertices = list(declared)
    for e in edges:
        for v in (e.source, e.target):
            if v not in vertices:
                vertices.append(v)
    lot = LOT(tuple(vertices), tuple(edges))
    sublots = {}
    for name, vs, lineno in sublot_specs:
        if name in sublots:
            raise LotError(f"duplicate sublot name {name!r}", code="SYNTAX", line=lineno)
        try:
            sublots[name] = make_sublot(lot, vs)
        except LotError as exc:
            raise LotError(f"sublot {name!r}: {exc}", code=exc.code, line=lineno) from exc
    return LotDocument(lot, sublots)


def serialize_lot(lot: LOT) -> str:
    lines = ["vertices: " + " ".join(lot.vertices)]
    for e in lot.edges:
        lines.append(f"edge {e.source} {e.target} {e.label}")
    return "\n".join(lines) + "\n"


def lot_presentation(lot: LOT) -> Presentation:
    relators = []
    for e in lot.edges:
        relators.append((Letter(e.source, 1), Letter(e.label, 1),
                         Letter(e.target, -1), Letter(e.label, -1)))
    return Presentation(lot.vertices, tuple(relators))


@dataclass(frozen=True)
class LotProperties:
    compressed: bool  # each edge: source, target, label pairwise distinct
    injective: bool   # edge labels pairwise distinct


def lot_properties(lot: LOT) -> LotProperties:
    compressed = all(len({e.source, e.target, e.label}) == 3 for e in lot.edges)
    labels = [e.label for e in lot.edges]
    return LotProperties(compressed, len(set(labels)) == len(labels))


def collapse(lot: LOT, t: SubLot, y: str) -> LOT:
    """Collapse the sub-LOT to a single vertex y: its edges disappear and
    every occurrence of its vertices (endpoint or label) becomes y."""
    if t.parent != lot:
        raise LotError("sub-LOT does not belong to this LOT", code="BAD_SUBLOT")
    _validate_sublot(lot, t.vertex_subset, t.edge_indices)
    if y in lot.vertex_set - t.vertex_subset:
        raise LotError(f"collapse vertex {y!r} collides with a remaining vertex",
                       code="NAME_COLLISION")
    vertices: list[str] = []
    placed = False
    for v in lot.vertices:
        if v in t.vertex_subset:
            if not placed:
                vertices.append(y)
                placed = True
        else:
            vertices.append(v)
    sub = t.vertex_subset

    def image(v: str) -> str:
        return y if v in sub else v

    edges = tuple(LotEdge(image(e.source), image(e.target), image(e.label))
                  for i, e in enumerate(lot.edges) if i not in t.edge_indices)
    return LOT(tuple(vertices), edges)


def insert(lbar: LOT, y: str, t: LOT,
           endpoint_attachment: Mapping[int, str],
           label_attachment: Mapping[int, str]) -> LOT:
    """Reverse a collapse: remove y and splice in the tree t.

    The attachments say, per lbar edge index, which t-vertex replaces y as
    an endpoint and which replaces y as a label; both maps must cover
    exactly the edges that mention y in that role.
    """
    if y not in lbar.vertex_set:
        raise LotError(f"{y!r} is not a vertex", code="BAD_VERTEX")
    collision = (lbar.vertex_set - {y}) & t.vertex_set
    if collision:
        raise LotError(f"vertex names {sorted(collision)} collide with the inserted tree",
                       code="NAME_COLLISION")
    need_endpoint = {i for i, e in enumerate(lbar.edges) if y in (e.source, e.target)}
    need_label = {i for i, e in enumerate(lbar.edges) if e.label == y}
    if set(endpoint_attachment) != need_endpoint or set(label_attachment) != need_label:
        raise LotError("attachment underspecified or mentions edges without y",
                       code="ATTACHMENT_UNDERSPECIFIED")
    for v in list(endpoint_attachment.values()) + list(label_attachment.values()):
        if v not in t.vertex_set:
            raise LotError(f"attachment vertex {v!r} is not in the inserted tree",
                           code="ATTACHMENT_UNDERSPECIFIED")
    vertices: list[str] = []
    for v in lbar.vertices:
        if v == y:
            vertices.extend(t.vertices)
        else:
            vertices.append(v)
    edges = []
    for i, e in enumerate(lbar.edges):
        source = endpoint_attachment[i] if e.source == y else e.source
        target = endpoint_attachment[i] if e.target == y else e.target
        label = label_attachment[i] if e.label == y else e.label
        edges.append(LotEdge(source, target, label))
    edges.extend(t.edges)
    return LOT(tuple(vertices), tuple(edges))


def reorient_positive_tree(lot: LOT, max_candidates: int = 1 << 22) -> LOT:
    """Find a reorientation whose presentation has a positive Whitehead
    graph that is a forest.

    Flipping an edge swaps its endpoints and keeps the label.  Each oriented
    edge contributes the positive-graph edge {label+, source+}, or a loop
    when label == source, so the search is a backtracking orientation
    assignment with a union-find cycle/loop prune.  The final candidate is
    double-checked on the genuine Whitehead graph of its presentation.
    """
    if len(lot.edges) == 0:
        return lot
    if 1 << len(lot.edges) > max_candidates:
        raise LotError("reorientation search space exceeds the configured limit",
                       code="SEARCH_EXHAUSTED")
    order = list(range(len(lot.edges)))
    chosen: list[bool] = []  # True = flipped

    def positive_edge(e: LotEdge, flipped: bool) -> tuple[str, str] | None:
        source = e.target if flipped else e.source
        if e.label == source:
            return None  # loop in the positive graph
        return (e.label, source)

    def find(parent_map: dict[str, str], v: str) -> str:
        # no path compression: unions must be undoable on backtrack
        while parent_map[v] != v:
            v = parent_map[v]
        return v

    def backtrack(k: int, parent_map: dict[str, str]) -> bool:
        if k == len(order):
            return True
        e = lot.edges[order[k]]
        for flipped in (False, True):
            pe = positive_edge(e, flipped)
            if pe is None:
                continue
            u, v = pe
            ru, rv = find(parent_map, u), find(parent_map, v)
            if ru == rv:
                continue  # would close a cycle
            parent_map[ru] = rv
            chosen.append(flipped)
            if backtrack(k + 1, parent_map):
                return True
            chosen.pop()
            parent_map[ru] = ru
        return False

    parents = {v: v for v in lot.vertices}
    if not backtrack(0, parents):
        raise LotError("no reorientation with a forest positive graph was found",
                       code="SEARCH_EXHAUSTED")
    edges = []
    for i, e in enumerate(lot.edges):
        if chosen[i]:
            edges.append(LotEdge(e.target, e.source, e.label))
        else:
            edges.append(e)
    candidate = LOT(lot.vertices, tuple(edges))
    graph = build_whitehead(lot_presentation(candidate))
    if not is_forest(GraphView(graph, POSITIVE)).forest:
        raise LotError("reorientation search accepted a non-forest candidate",
                       code="SEARCH_EXHAUSTED")
    return candidate


def _fresh_vertex(lot: LOT) -> str:
    if "y" not in lot.vertex_set:
        return "y"
    k = 0
    while f"y{k}" in lot.vertex_set:
        k += 1
    return f"y{k}"


def _presentation_dr_empty(p: Presentation) -> Optional[dict]:
    """Try to certify that a presentation is diagrammatically reducible
    (directed away from the empty set): forest test, then the
    small-cancellation certificate, then the weight search."""
    if not p.relators:
        return {"method": "no_relators",
                "detail": "no 2-cells, reducibility is vacuous"}
    graph = build_whitehead(p)
    if all(word_stats(r).total_exponent_sum == 0 for r in p.relators):
        for mode in (POSITIVE, NEGATIVE):
            if is_forest(GraphView(graph, mode)).forest:
                return {"method": "forest", "side": mode}
    try:
        cert = certify_s44(p, frozenset())
        if cert.positive:
            return {"method": "s44", "case": cert.evidence.get("case")}
    except SmallCancellationError:
        pass
    try:
        assignment = search_weights(p, frozenset())
    except WeightError:
        assignment = None
    if assignment is not None:
        return {"method": "weight",
                "weights": {str(k): str(v) for k, v in sorted(assignment.weights.items())}}
    return None


def certify_lot(lot: LOT, t: SubLot) -> Certificate:
    """Collapse-transfer certificate: collapse the maximal proper sub-LOT to
    a vertex y, certify the collapsed LOT directed away from {y} (forest
    test on the positive or negative graph, or reduced girth >= 4), and
    transfer the conclusion back: the full presentation is directed away
    from the sub-LOT's vertex set.

    When the sub-LOT's own presentation is diagrammatically reducible the
    certificate also records that the full complex is aspherical.
    """
    p = lot_presentation(lot)
    digest = presentation_digest(p)
    s = tuple(sorted(t.vertex_subset))

    def failure(reason: str, **extra) -> Certificate:
        evidence = {"failed_hypothesis": reason}
        evidence.update(extra)
        return Certificate(digest, s, UNKNOWN, "lot_collapse", evidence=evidence)

    if t.parent != lot:
        raise LotError("sub-LOT does not belong to this LOT", code="BAD_SUBLOT")
    _validate_sublot(lot, t.vertex_subset, t.edge_indices)
    if not lot_properties(lot).compressed:
        return failure("the LOT is not compressed")
    infos = sub_lots(lot)
    info = next((i for i in infos if i.sublot.edge_indices == t.edge_indices), None)
    if info is None or not info.proper:
        return failure("the sub-LOT is not proper")
    if not info.maximal_proper:
        enclosing = [sorted(i.sublot.vertex_subset) for i in infos
                     if i.maximal_proper and t.edge_indices < i.sublot.edge_indices]
        return failure("the sub-LOT is not maximal among proper sub-LOTs",
                       enclosing_maximal=enclosing)

    y = _fresh_vertex(lot)
    collapsed = collapse(lot, t, y)
    if not lot_properties(collapsed).compressed:
        return failure("the collapsed LOT is not compressed",
                       collapsed=serialize_lot(collapsed))
    pbar = lot_presentation(collapsed)
    exp_sums = [word_stats(r).total_exponent_sum for r in pbar.relators]
    if any(e != 0 for e in exp_sums):
        return failure("collapsed relators do not all have exponent sum zero")

    graph = build_whitehead(pbar)
    forest_pos = is_forest(GraphView(graph, POSITIVE))
    forest_neg = is_forest(GraphView(graph, NEGATIVE))
    girth_report = min_weight_reduced_cycle(graph)
    girth = None if girth_report.weight is None else int(girth_report.weight)
    evidence = {
        "collapsed": serialize_lot(collapsed),
        "collapse_vertex": y,
        "positive_graph_forest": forest_pos.forest,
        "negative_graph_forest": forest_neg.forest,
        "reduced_girth": girth,
    }
    if forest_pos.forest or forest_neg.forest:
        evidence["test"] = "forest"
        evidence["side"] = POSITIVE if forest_pos.forest else NEGATIVE
    elif girth is None or girth >= 4:
        evidence["test"] = "girth"
    else:
        return failure("collapsed LOT fails both the forest test and the girth bound",
                       **evidence)

    sub_presentation = lot_presentation(_sublot_as_lot(t))
    dr_sub = _presentation_dr_empty(sub_presentation)
    certificate = Certificate(digest, s, CERTIFIED_DR_AWAY_FROM, "lot_collapse",
                              evidence=evidence)
    certificate.notes = ("transfer: collapsing the sub-LOT to a single vertex induces a "
                         "homomorphism of presentations; reducibility directed away from "
                         "the collapse vertex pulls back to the sub-LOT's vertex set.",)
    if dr_sub is not None:
        certificate.evidence["sublot_presentation_dr"] = dr_sub
        certificate.consequences.append({
            "kind": "aspherical",
            "statement": "the presentation complex is aspherical (the sub-LOT's own "
                         "presentation is diagrammatically reducible)",
        })
    return certificate


def _sublot_as_lot(t: SubLot) -> LOT:
    lot = t.parent
    vertices = tuple(v for v in lot.vertices if v in t.vertex_subset)
    edges = tuple(lot.edges[i] for i in sorted(t.edge_indices))
    return LOT(vertices, edges)
