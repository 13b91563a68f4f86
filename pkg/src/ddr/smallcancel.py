"""Piece computation, C(p)/T(q) checks, and the small-cancellation certificate.

Pieces are longest common prefixes between distinct symmetrized occurrences.
Distinctness is by provenance (source relator, inverted flag, rotation), not
by word value: duplicate relators and rotations of a proper power count as
distinct occurrences, so a proper power is its own piece.

T(q) is operationalized on the star graph (the corner multigraph): no
reduced cycle of length L with 3 <= L < q.  Length-2 cycles through parallel
corners are deliberately excluded; they are priced separately by the weight
construction, which cross-checks the whole certificate against the exact
weight-test verifier, so a wrong operationalization fails loudly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .certificates import CERTIFIED_DR_AWAY_FROM, UNKNOWN, Certificate
from .core import (Presentation, Word, inverse_word, is_cyclically_reduced,
                   presentation_digest, rotate_word)
from .weights import WeightAssignment, verify_weight_test
from .whitehead import build_whitehead, shortest_reduced_cycle_in_range

T_Q_CONVENTION = ("T(q) checked on the star graph as: no reduced cycle of length L "
                  "with 3 <= L < q; length-2 cycles through parallel corners are "
                  "handled by the weight construction instead.")


class SmallCancellationError(ValueError):
    def __init__(self, message: str, *, code: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class SymmetrizedRelator:
    source_index: int
    rotation: int
    inverted: bool
    word: Word

    @property
    def provenance(self) -> tuple[int, bool, int]:
        return (self.source_index, self.inverted, self.rotation)


def _require_cyclically_reduced(p: Presentation) -> None:
    bad = [i for i, r in enumerate(p.relators) if not is_cyclically_reduced(r)]
    if bad:
        raise SmallCancellationError(f"relators {bad} are not cyclically reduced",
                                     code="NOT_CYCLICALLY_REDUCED")


def symmetrized_closure(p: Presentation) -> tuple[SymmetrizedRelator, ...]:
    """All rotations of all relators and their inverses, with provenance;
    2|r| entries per relator."""
    _require_cyclically_reduced(p)
    out = []
    for idx, rel in enumerate(p.relators):
        for inverted in (False, True):
            base = inverse_word(rel) if inverted else rel
            for rot in range(len(rel)):
                out.append(SymmetrizedRelator(idx, rot, inverted, rotate_word(base, rot)))
    return tuple(out)


def _common_prefix_length(u: Word, v: Word) -> int:
    n = 0
    for a, b in zip(u, v):
        if a != b:
            break
        n += 1
    return n


@dataclass(frozen=True)
class PieceTable:
    """max_piece[provenance] = longest common prefix of that occurrence with
    any occurrence of different provenance."""

    lengths: dict[tuple[int, bool, int], int]
    word_lengths: dict[int, int]  # relator index -> |r|

    def max_piece_length(self, element: SymmetrizedRelator, start: int) -> int:
        n = self.word_lengths[element.source_index]
        prov = (element.source_index, element.inverted, (element.rotation + start) % n)
        return self.lengths[prov]


def piece_table(p: Presentation) -> PieceTable:
    closure = symmetrized_closure(p)
    lengths = {e.provenance: 0 for e in closure}
    for i, e in enumerate(closure):
        for j in range(i + 1, len(closure)):
            f = closure[j]
            lcp = _common_prefix_length(e.word, f.word)
            if lcp > lengths[e.provenance]:
                lengths[e.provenance] = lcp
            if lcp > lengths[f.provenance]:
                lengths[f.provenance] = lcp
    return PieceTable(lengths, {i: len(r) for i, r in enumerate(p.relators)})


def min_piece_decomposition(element: SymmetrizedRelator,
                            table: PieceTable) -> tuple[Optional[int], tuple[int, ...]]:
    """Minimum number of pieces whose product is the element's word, plus the
    cut positions; (None, ()) when the word is not a product of pieces at
    all.  Dynamic program over start positions; greedy is not assumed
    optimal."""
    n = len(element.word)
    INF = n + 1
    dp = [INF] * (n + 1)
    back = [-1] * (n + 1)
    dp[0] = 0
    for j in range(n):
        if dp[j] >= INF:
            continue
        max_len = min(table.max_piece_length(element, j), n - j)
        for length in range(1, max_len + 1):
            if dp[j] + 1 < dp[j + length]:
                dp[j + length] = dp[j] + 1
                back[j + length] = j
    if dp[n] >= INF:
        return None, ()
    cuts = []
    pos = n
    while pos > 0:
        cuts.append(back[pos])
        pos = back[pos]
    return dp[n], tuple(reversed(cuts))


@dataclass(frozen=True)
class SmallCancellationReport:
    p: int
    q: int
    c_holds: bool
    t_holds: bool
    c_witness: Optional[tuple[tuple[int, bool, int], int, tuple[int, ...]]]
    t_witness: Optional[tuple[int, ...]]

    @property
    def holds(self) -> bool:
        return self.c_holds and self.t_holds


def check_small_cancellation(p: Presentation, p_val: int, q_val: int) -> SmallCancellationReport:
    """C(p): no symmetrized occurrence is a product of fewer than p pieces.
    T(q): no reduced star-graph cycle of length L with 3 <= L < q."""
    if p_val < 2 or q_val < 3:
        raise SmallCancellationError("need p >= 2 and q >= 3", code="BAD_PARAMETERS")
    _require_cyclically_reduced(p)
    table = piece_table(p)
    c_witness = None
    for element in symmetrized_closure(p):
        count, cuts = min_piece_decomposition(element, table)
        if count is not None and count < p_val:
            c_witness = (element.provenance, count, cuts)
            break
    graph = build_whitehead(p)
    t_witness = shortest_reduced_cycle_in_range(graph, 3, q_val)
    return SmallCancellationReport(p_val, q_val, c_witness is None, t_witness is None,
                                   c_witness, t_witness)


def _consecutive_subset_letters(p: Presentation, s: frozenset[str]):
    # first cyclically adjacent letter pair with both generators in s
    for idx, rel in enumerate(p.relators):
        n = len(rel)
        for pos in range(n):
            if rel[pos].gen in s and rel[(pos + 1) % n].gen in s:
                return (idx, pos)
    return None


def certify_s44(p: Presentation, subset) -> Certificate:
    """Small-cancellation certificate for DR directed away from a subset.

    Succeeds when [C(4) and T(4)] or [C(6) and T(3)] holds and no two
    cyclically consecutive relator letters come from the subset.  On success
    the explicit weights (1 on edges lying in a length-2 cycle, otherwise
    1/2 or 2/3 depending on the case) are built and re-verified with the
    exact weight-test checker; the verified weight certificate is embedded.
    """
    s = frozenset(subset)
    unknown = s - p.generator_set
    if unknown:
        raise SmallCancellationError(f"subset contains undeclared generators {sorted(unknown)}",
                                     code="S_NOT_PROPER")
    if s == p.generator_set:
        raise SmallCancellationError("subset must be proper", code="S_NOT_PROPER")
    _require_cyclically_reduced(p)

    digest = presentation_digest(p)
    report44 = check_small_cancellation(p, 4, 4)
    case = None
    if report44.holds:
        case = "c4t4"
        report = report44
    else:
        report63 = check_small_cancellation(p, 6, 3)
        if report63.holds:
            case = "c6t3"
            report = report63
    if case is None:
        return Certificate(
            digest, tuple(sorted(s)), UNKNOWN, "s44",
            evidence={
                "failed_hypothesis": "small cancellation: neither C(4),T(4) nor C(6),T(3)",
                "c4_witness": _json_c_witness(report44.c_witness),
                "t4_witness": list(report44.t_witness) if report44.t_witness else None,
            },
            notes=(T_Q_CONVENTION,))

    adjacent = _consecutive_subset_letters(p, s)
    if adjacent is not None:
        return Certificate(
            digest, tuple(sorted(s)), UNKNOWN, "s44",
            evidence={
                "failed_hypothesis": "consecutive letters from the subset in a relator",
                "witness": {"relator": adjacent[0], "position": adjacent[1]},
                "case": case,
            },
            notes=(T_Q_CONVENTION,))

    graph = build_whitehead(p)
    by_endpoints: dict[frozenset, list[int]] = {}
    for e in graph.edges:
        by_endpoints.setdefault(frozenset((e.a, e.b)), []).append(e.id)
    light = Fraction(1, 2) if case == "c4t4" else Fraction(2, 3)
    weights = {}
    for e in graph.edges:
        parallel = len(by_endpoints[frozenset((e.a, e.b))]) > 1
        weights[e.id] = Fraction(1) if parallel else light
    assignment = WeightAssignment(weights)
    cert = verify_weight_test(p, s, assignment, graph)
    if not cert.passed:
        raise SmallCancellationError(
            "constructed weights failed the exact weight-test verifier; "
            "the T(q) operationalization and this input disagree",
            code="WEIGHT_CROSS_CHECK_FAILED")
    return Certificate(
        digest, tuple(sorted(s)), CERTIFIED_DR_AWAY_FROM, "s44",
        evidence={
            "case": case,
            "weights": cert.to_json_dict(),
        },
        notes=(T_Q_CONVENTION,))


def _json_c_witness(witness):
    if witness is None:
        return None
    provenance, count, cuts = witness
    src, inverted, rotation = provenance
    return {"relator": src, "inverted": inverted, "rotation": rotation,
            "pieces": count, "cuts": list(cuts)}
