"""Bounded coset enumeration, Cayley complexes, and the greedy directed
collapse that decides directed reducibility for finite groups.

The collapse removes a 2-cell together with a free edge (an edge lying on
exactly one remaining 2-cell side, multiplicity counted) whose generator is
outside the directed-away subset; 2-cells over relators of the carried
sub-presentation are never collapsed.  Removing a cell across its own free
edge cannot destroy any other cell's free edge, so the candidate set only
grows as cells disappear: the greedy residual is order-independent, STUCK on
the full complex certifies non-collapsibility over every order, and a
collapsed full complex collapses all of its subcomplexes (replay the log
filtered to the subcomplex; multiplicities only shrink).  That upgrades the
finite-subcomplex characterization to a decision procedure when the group
is finite.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Optional, Sequence

from .core import Letter, Presentation, Word, word_support

COLLAPSED = "COLLAPSED"
STUCK = "STUCK"

DECIDED_DR = "DECIDED_DR"
DECIDED_NOT_DR = "DECIDED_NOT_DR"
UNKNOWN = "UNKNOWN"


class CayleyError(ValueError):
    def __init__(self, message: str, *, code: str = "INVALID"):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class GroupTable:
    """Right action of the generators on the group elements; element 0 is
    the identity."""

    generators: tuple[str, ...]
    forward: Mapping[str, tuple[int, ...]]

    @property
    def element_count(self) -> int:
        return len(next(iter(self.forward.values()))) if self.forward else 1

    @cached_property
    def backward(self) -> Mapping[str, tuple[int, ...]]:
        out = {}
        for g, images in self.forward.items():
            inv = [0] * len(images)
            for src, dst in enumerate(images):
                inv[dst] = src
            out[g] = tuple(inv)
        return out

    def apply(self, element: int, letter: Letter) -> int:
        table = self.forward if letter.sign > 0 else self.backward
        return table[letter.gen][element]

    def apply_word(self, element: int, word: Word) -> int:
        for letter in word:
            element = self.apply(element, letter)
        return element

    def validate(self, p: Presentation) -> None:
        n = self.element_count
        for g in p.generators:
            images = self.forward[g]
            if sorted(images) != list(range(n)):
                raise CayleyError(f"action of {g!r} is not a permutation", code="BAD_TABLE")
        for idx, rel in enumerate(p.relators):
            for e in range(n):
                if self.apply_word(e, rel) != e:
                    raise CayleyError(f"relator {idx} does not act trivially from {e}",
                                      code="BAD_TABLE")


def coset_enumeration(p: Presentation, limit: int) -> Optional[GroupTable]:
    """Deterministic coset enumeration over the trivial subgroup (relator
    scan with fill, then row completion, with coincidence processing).
    Returns None when more than `limit` cosets would ever be defined; None
    says nothing about the group being infinite."""
    if limit < 1:
        raise CayleyError("limit must be at least 1", code="BAD_LIMIT")
    ncols = 2 * len(p.generators)
    col = {}
    for i, g in enumerate(p.generators):
        col[(g, 1)] = 2 * i
        col[(g, -1)] = 2 * i + 1

    def inv_col(c: int) -> int:
        return c ^ 1

    rel_cols = [[col[(l.gen, l.sign)] for l in rel] for rel in p.relators]

    table: list[list[Optional[int]]] = [[None] * ncols]
    rep: list[int] = [0]

    def find(a: int) -> int:
        while rep[a] != a:
            rep[a] = rep[rep[a]]
            a = rep[a]
        return a

    def define(a: int, c: int) -> Optional[int]:
        if len(table) >= limit:
            return None
        b = len(table)
        table.append([None] * ncols)
        rep.append(b)
        table[a][c] = b
        table[b][inv_col(c)] = a
        return b

    merge_queue: list[int] = []

    def merge(a: int, b: int) -> None:
        a, b = find(a), find(b)
        if a == b:
            return
        lo, hi = min(a, b), max(a, b)
        rep[hi] = lo
        merge_queue.append(hi)

    def process_coincidences() -> None:
        while merge_queue:
            dead = merge_queue.pop()
            for c in range(ncols):
                dst = table[dead][c]
                if dst is None:
                    continue
                table[dead][c] = None
                if table[dst][inv_col(c)] == dead:
                    table[dst][inv_col(c)] = None
                a, b = find(dead), find(dst)
                existing = table[a][c]
                if existing is not None:
                    merge(existing, b)
                elif table[b][inv_col(c)] is not None:
                    merge(a, table[b][inv_col(c)])
                else:
                    table[a][c] = b
                    table[b][inv_col(c)] = a

    def scan_and_fill(alpha: int, word_cols: list[int]) -> bool:
        # returns False when the coset limit was hit
        while True:
            f, i = alpha, 0
            n = len(word_cols)
            while i < n:
                nxt = table[f][word_cols[i]]
                if nxt is None:
                    break
                f, i = nxt, i + 1
            if i == n:
                if f != alpha:
                    merge(f, alpha)
                    process_coincidences()
                return True
            b, j = alpha, n - 1
            while j >= i:
                prv = table[b][inv_col(word_cols[j])]
                if prv is None:
                    break
                b, j = prv, j - 1
            if j < i:
                merge(f, b)
                process_coincidences()
                return True
            if j == i:
                table[f][word_cols[i]] = b
                table[b][inv_col(word_cols[i])] = f
                continue
            if define(f, word_cols[i]) is None:
                return False

    alpha = 0
    while alpha < len(table):
        if find(alpha) != alpha:
            alpha += 1
            continue
        for word_cols in rel_cols:
            if not scan_and_fill(alpha, word_cols):
                return None
            if find(alpha) != alpha:
                break
        if find(alpha) != alpha:
            alpha += 1
            continue
        for c in range(ncols):
            if table[alpha][c] is None:
                if define(alpha, c) is None:
                    return None
        alpha += 1

    live = [a for a in range(len(table)) if find(a) == a]
    index = {a: i for i, a in enumerate(live)}
    forward = {}
    for g in p.generators:
        c = col[(g, 1)]
        images = []
        for a in live:
            dst = table[a][c]
            if dst is None:
                raise CayleyError("incomplete table after enumeration", code="BAD_TABLE")
            images.append(index[find(dst)])
        forward[g] = tuple(images)
    result = GroupTable(tuple(p.generators), forward)
    result.validate(p)
    return result


# --- complexes and collapsing ----------------------------------------------

CayleyEdge = tuple[int, str]  # (element, generator)


@dataclass(frozen=True)
class CayleyCell:
    element: int
    relator_index: int
    boundary: tuple[tuple[CayleyEdge, int], ...]  # (edge, direction)


def _trace_boundary(table: GroupTable, element: int, rel: Word) -> tuple[tuple[CayleyEdge, int], ...]:
    steps = []
    cur = element
    for letter in rel:
        if letter.sign > 0:
            steps.append(((cur, letter.gen), 1))
            cur = table.apply(cur, letter)
        else:
            cur = table.apply(cur, letter)
            steps.append(((cur, letter.gen), -1))
    if cur != element:
        raise CayleyError("relator lift does not close", code="BAD_TABLE")
    return tuple(steps)


@dataclass(frozen=True)
class CayleyComplex:
    table: GroupTable
    presentation: Presentation
    cells: tuple[CayleyCell, ...]

    @property
    def vertex_count(self) -> int:
        return self.table.element_count

    @property
    def edge_count(self) -> int:
        return self.table.element_count * len(self.presentation.generators)

    @property
    def two_cell_count(self) -> int:
        return len(self.cells)


def build_cayley_complex(table: GroupTable, p: Presentation) -> CayleyComplex:
    cells = []
    for element in range(table.element_count):
        for r_idx, rel in enumerate(p.relators):
            cells.append(CayleyCell(element, r_idx, _trace_boundary(table, element, rel)))
    return CayleyComplex(table, p, tuple(cells))


@dataclass(frozen=True)
class CollapseStep:
    cell: tuple[int, int]  # (element, relator index)
    edge: CayleyEdge


@dataclass(frozen=True)
class CollapseLog:
    steps: tuple[CollapseStep, ...]
    residual: tuple[tuple[int, int], ...]
    verdict: str  # COLLAPSED or STUCK

    def to_json_dict(self) -> dict:
        return {
            "steps": [{"cell": list(s.cell), "edge": [s.edge[0], s.edge[1]]}
                      for s in self.steps],
            "residual": [list(c) for c in self.residual],
            "verdict": self.verdict,
        }


def directed_collapse(cells: Sequence[CayleyCell], p: Presentation, subset,
                      rng: random.Random | None = None) -> CollapseLog:
    """Greedily collapse 2-cells not carried by the subset across free edges
    whose generator is outside the subset; COLLAPSED when only carried cells
    remain."""
    s = frozenset(subset)
    carried = {j for j, r in enumerate(p.relators) if word_support(r) <= s}
    remaining = list(range(len(cells)))
    multiplicity: Counter = Counter()
    for ci in remaining:
        for edge, _ in cells[ci].boundary:
            multiplicity[edge] += 1
    steps: list[CollapseStep] = []
    while True:
        candidates: list[tuple[int, CayleyEdge]] = []
        for ci in remaining:
            cell = cells[ci]
            if cell.relator_index in carried:
                continue
            for edge, _ in cell.boundary:
                if edge[1] in s:
                    continue
                if multiplicity[edge] == 1:
                    candidates.append((ci, edge))
                    break  # one free edge suffices for this cell
        if not candidates:
            break
        ci, edge = candidates[0] if rng is None else rng.choice(candidates)
        remaining.remove(ci)
        for other_edge, _ in cells[ci].boundary:
            multiplicity[other_edge] -= 1
        steps.append(CollapseStep((cells[ci].element, cells[ci].relator_index), edge))
    residual = tuple((cells[ci].element, cells[ci].relator_index) for ci in remaining)
    verdict = COLLAPSED if all(cells[ci].relator_index in carried for ci in remaining) else STUCK
    return CollapseLog(tuple(steps), residual, verdict)


def replay_collapse(cells: Sequence[CayleyCell], subset,
                    steps: Sequence[CollapseStep]) -> bool:
    """Re-execute a collapse log from scratch, checking each step's edge is
    free at its time and its generator outside the subset."""
    s = frozenset(subset)
    by_key = {(c.element, c.relator_index): i for i, c in enumerate(cells)}
    multiplicity: Counter = Counter()
    alive = set(range(len(cells)))
    for ci in alive:
        for edge, _ in cells[ci].boundary:
            multiplicity[edge] += 1
    for step in steps:
        ci = by_key.get(step.cell)
        if ci is None or ci not in alive:
            return False
        if step.edge[1] in s or multiplicity[step.edge] != 1:
            return False
        if all(edge != step.edge for edge, _ in cells[ci].boundary):
            return False
        alive.remove(ci)
        for edge, _ in cells[ci].boundary:
            multiplicity[edge] -= 1
    return True


@dataclass(frozen=True)
class FiniteDecision:
    verdict: str  # DECIDED_DR, DECIDED_NOT_DR, UNKNOWN
    table: Optional[GroupTable]
    log: Optional[CollapseLog]


def decide_finite(p: Presentation, subset, limit: int) -> FiniteDecision:
    """Decide directed reducibility when the group is small enough to
    enumerate: collapse the full finite universal-cover complex.  The greedy
    collapse is order-independent, so COLLAPSED and STUCK are both
    conclusive; an enumeration overflow is honest UNKNOWN."""
    s = frozenset(subset)
    if s == p.generator_set:
        raise CayleyError("subset must be proper", code="S_NOT_PROPER")
    table = coset_enumeration(p, limit)
    if table is None:
        return FiniteDecision(UNKNOWN, None, None)
    complex_ = build_cayley_complex(table, p)
    log = directed_collapse(complex_.cells, p, s)
    verdict = DECIDED_DR if log.verdict == COLLAPSED else DECIDED_NOT_DR
    return FiniteDecision(verdict, table, log)


# --- user-supplied subcomplexes --------------------------------------------

def parse_subcomplex(text: str, p: Presentation) -> tuple[CayleyCell, ...]:
    """Subcomplex file: `table <element> <generator> <image>` lines giving a
    partial action, then `cell <element> <relator-index>` lines.  Every
    cell's relator lift must be traceable through the partial table and
    close up."""
    action: dict[tuple[int, str], int] = {}
    inverse: dict[tuple[int, str], int] = {}
    cell_specs: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "table" and len(parts) == 4:
            try:
                src, gen, dst = int(parts[1]), parts[2], int(parts[3])
            except ValueError as exc:
                raise CayleyError(f"line {lineno}: {exc}", code="SYNTAX") from exc
            if gen not in p.generator_set:
                raise CayleyError(f"line {lineno}: unknown generator {gen!r}",
                                  code="X_INCONSISTENT")
            if (src, gen) in action or (dst, gen) in inverse:
                raise CayleyError(f"line {lineno}: conflicting table entry", code="SYNTAX")
            action[(src, gen)] = dst
            inverse[(dst, gen)] = src
        elif parts[0] == "cell" and len(parts) == 3:
            try:
                cell_specs.append((int(parts[1]), int(parts[2])))
            except ValueError as exc:
                raise CayleyError(f"line {lineno}: {exc}", code="SYNTAX") from exc
        else:
            raise CayleyError(f"line {lineno}: expected 'table ...' or 'cell ...'",
                              code="SYNTAX")
    cells = []
    for element, r_idx in cell_specs:
        if not (0 <= r_idx < len(p.relators)):
            raise CayleyError(f"cell ({element},{r_idx}): relator index out of range",
                              code="X_INCONSISTENT")
        steps = []
        cur = element
        for letter in p.relators[r_idx]:
            if letter.sign > 0:
                if (cur, letter.gen) not in action:
                    raise CayleyError(
                        f"cell ({element},{r_idx}): action of {letter.gen!r} undefined at {cur}",
                        code="X_INCONSISTENT")
                steps.append(((cur, letter.gen), 1))
                cur = action[(cur, letter.gen)]
            else:
                if (cur, letter.gen) not in inverse:
                    raise CayleyError(
                        f"cell ({element},{r_idx}): inverse action of {letter.gen!r} "
                        f"undefined at {cur}", code="X_INCONSISTENT")
                cur = inverse[(cur, letter.gen)]
                steps.append(((cur, letter.gen), -1))
        if cur != element:
            raise CayleyError(f"cell ({element},{r_idx}): boundary does not close",
                              code="X_INCONSISTENT")
        cells.append(CayleyCell(element, r_idx, tuple(steps)))
    return tuple(cells)


def refute_with_subcomplex(cells: Sequence[CayleyCell], p: Presentation,
                           subset) -> Optional[CollapseLog]:
    """A stuck finite subcomplex refutes directedness away from the subset;
    returns the stuck log as the witness, or None when the subcomplex
    collapses."""
    log = directed_collapse(cells, p, subset)
    return log if log.verdict == STUCK else None
