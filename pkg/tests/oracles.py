"""Brute-force oracles, kept independent of the code paths they check."""

from fractions import Fraction
from itertools import product

from ddr.core import Word, inverse_word
from ddr.diagram import SurfaceDiagram
from ddr.whitehead import WhiteheadGraph


def brute_min_reduced_cycle(graph: WhiteheadGraph, weights=None):
    """Minimum weight over all dart-simple reduced closed walks, by
    exhaustive DFS; returns (weight, cycle darts) or (None, None).

    With unit weights a longer path can never beat the best cycle found so
    far, which keeps the search tractable on loop-dense multigraphs.
    """
    unit = weights is None
    if unit:
        wt = {e.id: Fraction(1) for e in graph.edges}
    else:
        wt = {eid: Fraction(w) for eid, w in weights.items()}
    best = [None, None]

    def rec(path, used):
        last = path[-1]
        head = graph.head(last)
        if head == graph.tail(path[0]) and path[0] != graph.reverse(last):
            total = sum(wt[d // 2] for d in path)
            if best[0] is None or total < best[0]:
                best[0], best[1] = total, tuple(path)
        if unit and best[0] is not None and len(path) >= best[0]:
            return
        for nxt in graph.darts_from[head]:
            if nxt in used or nxt == graph.reverse(last):
                continue
            path.append(nxt)
            used.add(nxt)
            rec(path, used)
            path.pop()
            used.remove(nxt)

    for start in range(graph.dart_count):
        rec([start], {start})
    return best[0], best[1]


def brute_reduced_cycles_of_length(graph: WhiteheadGraph, length: int):
    """All reduced closed dart walks of exactly the given length (repeats
    allowed), by raw enumeration."""
    out = []
    for walk in product(range(graph.dart_count), repeat=length):
        ok = True
        for i in range(length):
            cur, nxt = walk[i], walk[(i + 1) % length]
            if graph.head(cur) != graph.tail(nxt) or nxt == graph.reverse(cur):
                ok = False
                break
        if ok:
            out.append(walk)
    return out


def brute_component_count(graph: WhiteheadGraph, vertex_set, edge_ids):
    adj = {v: set() for v in vertex_set}
    for eid in edge_ids:
        e = graph.edges[eid]
        adj[e.a].add(e.b)
        adj[e.b].add(e.a)
    seen = set()
    components = 0
    for v in vertex_set:
        if v in seen:
            continue
        components += 1
        stack = [v]
        seen.add(v)
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
    return components


# --- pieces ----------------------------------------------------------------

def brute_occurrences(p):
    """(provenance, word) pairs for all rotations of relators and inverses."""
    out = []
    for idx, rel in enumerate(p.relators):
        for inverted in (False, True):
            base = inverse_word(rel) if inverted else rel
            for rot in range(len(rel)):
                out.append(((idx, inverted, rot), base[rot:] + base[:rot]))
    return out


def brute_is_piece(u: Word, occurrences) -> bool:
    hits = 0
    for _, word in occurrences:
        if word[:len(u)] == u:
            hits += 1
            if hits >= 2:
                return True
    return False


def brute_min_pieces(word: Word, occurrences):
    """Minimum piece count over every decomposition, by memoized recursion;
    None when the word is no product of pieces."""
    memo = {}

    def rec(start):
        if start == len(word):
            return 0
        if start in memo:
            return memo[start]
        best = None
        for end in range(start + 1, len(word) + 1):
            if brute_is_piece(word[start:end], occurrences):
                rest = rec(end)
                if rest is not None and (best is None or rest + 1 < best):
                    best = rest + 1
            else:
                break  # prefixes of pieces are pieces: no longer piece starts here
        memo[start] = best
        return best

    return rec(0)


# --- diagrams ---------------------------------------------------------------

def brute_folding_edges(d: SurfaceDiagram, p):
    """Folding detection by simulating the fold walk around the whole
    boundary: same relator cell, and for every k the two walks cross the
    same letter occurrence with mirrored letters."""
    sides = {}
    for f_idx, face in enumerate(d.faces):
        for pos, step in enumerate(face.boundary):
            sides.setdefault(step.edge, []).append((f_idx, pos))
    out = []
    for eid in sorted(sides):
        lst = sides[eid]
        if len(lst) != 2:
            continue
        (f1, p1), (f2, p2) = lst
        face1, face2 = d.faces[f1], d.faces[f2]
        if face1.relator_index != face2.relator_index:
            continue
        n1, n2 = len(face1.boundary), len(face2.boundary)
        if n1 != n2:
            continue
        w1 = [d.step_letter(s) for s in face1.boundary]
        w2 = [d.step_letter(s) for s in face2.boundary]

        def occ(face, q, n):
            return q % n if face.sign > 0 else (n - 1 - q % n) % n

        d1 = face1.boundary[p1].direction
        d2 = face2.boundary[p2].direction
        if d1 == d2:
            ok = all(w1[(p1 + k) % n1] == w2[(p2 + k) % n2]
                     and occ(face1, p1 + k, n1) == occ(face2, p2 + k, n2)
                     for k in range(n1))
        else:
            ok = all(w1[(p1 + k) % n1] == w2[(p2 - k) % n2].inverse()
                     and occ(face1, p1 + k, n1) == occ(face2, p2 - k, n2)
                     for k in range(n1))
        if ok:
            out.append(eid)
    return out


def vertex_count_from_links(d: SurfaceDiagram) -> int:
    """Recount the vertices of a closed surface diagram from the corner
    structure alone: corner (f, p) sits between boundary steps p and p+1;
    gluing an edge's two sides identifies the flanking corners at each of
    its ends.  The number of corner classes is the number of link circles,
    which equals the vertex count exactly when no vertex is pinched."""
    sides = {}
    for f_idx, face in enumerate(d.faces):
        for pos, step in enumerate(face.boundary):
            sides.setdefault(step.edge, []).append((f_idx, pos))

    parent = {}

    def find(c):
        parent.setdefault(c, c)
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    def union(c1, c2):
        r1, r2 = find(c1), find(c2)
        if r1 != r2:
            parent[r2] = r1

    for eid in sorted(sides):
        (f, q), (g, r) = sides[eid]
        nf, ng = len(d.faces[f].boundary), len(d.faces[g].boundary)
        same = d.faces[f].boundary[q].direction == d.faces[g].boundary[r].direction
        if same:
            union((f, (q - 1) % nf), (g, (r - 1) % ng))
            union((f, q), (g, r))
        else:
            union((f, (q - 1) % nf), (g, r))
            union((f, q), (g, (r - 1) % ng))

    corners = [(f, p) for f, face in enumerate(d.faces)
               for p in range(len(face.boundary))]
    return len({find(c) for c in corners})
