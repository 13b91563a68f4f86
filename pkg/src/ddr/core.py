"""Words, presentations, and the line-oriented text format shared by the toolkit.

A word is a tuple of letters; a letter pairs a generator name with a sign
(+1 or -1).  Relators are stored exactly as written: reduction, rotation and
inversion are explicit operations, never side effects, because downstream
tests index relators by position and care about the literal word.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

FREE = "free"
CYCLIC = "cyclic"

_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")
_TOKEN_RE = re.compile(r"([A-Za-z][A-Za-z0-9_]*)(\^(-?\d+))?\Z")


class PresentationError(ValueError):
    """Malformed presentation text or inconsistent presentation data."""

    def __init__(self, message: str, *, code: str = "INVALID",
                 line: int | None = None, column: int | None = None):
        location = ""
        if line is not None:
            location = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + location)
        self.code = code
        self.line = line
        self.column = column


@dataclass(frozen=True, slots=True)
class Letter:
    """A single signed generator occurrence."""

    gen: str
    sign: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise PresentationError(f"letter sign must be +1 or -1, got {self.sign}",
                                    code="BAD_SIGN")

    def inverse(self) -> "Letter":
        return Letter(self.gen, -self.sign)

    def __str__(self) -> str:
        return self.gen if self.sign > 0 else f"{self.gen}^-1"


# A word is an immutable sequence of letters; it may be empty.
Word = tuple[Letter, ...]


def letters(*items: tuple[str, int]) -> Word:
    return tuple(Letter(g, s) for g, s in items)


def inverse_word(w: Word) -> Word:
    return tuple(l.inverse() for l in reversed(w))


def rotate_word(w: Word, k: int) -> Word:
    """Cyclic rotation: rotate_word(w, k) starts at position k of w."""
    if not w:
        return w
    k %= len(w)
    return w[k:] + w[:k]


def normalize_word(w: Word, mode: str = FREE) -> Word:
    """Freely reduce w; with mode=CYCLIC also cancel across the wrap-around.

    The result is the unique (cyclically) reduced form reachable by
    cancelling adjacent inverse pairs.
    """
    if mode not in (FREE, CYCLIC):
        raise PresentationError(f"unknown normalization mode {mode!r}", code="BAD_MODE")
    stack: list[Letter] = []
    for letter in w:
        if stack and stack[-1] == letter.inverse():
            stack.pop()
        else:
            stack.append(letter)
    if mode == CYCLIC:
        lo, hi = 0, len(stack)
        while hi - lo >= 2 and stack[lo] == stack[hi - 1].inverse():
            lo += 1
            hi -= 1
        stack = stack[lo:hi]
    return tuple(stack)


def is_cyclically_reduced(w: Word) -> bool:
    return normalize_word(w, CYCLIC) == w


def word_support(w: Word) -> frozenset[str]:
    return frozenset(l.gen for l in w)


@dataclass(frozen=True)
class Presentation:
    """A finite presentation: ordered generators and an ordered relator list.

    Relators form a list, not a set: duplicates are legitimate and every
    downstream object refers to relators by their position.
    """

    generators: tuple[str, ...]
    relators: tuple[Word, ...]

    def __post_init__(self):
        seen = set()
        for name in self.generators:
            if not _NAME_RE.match(name):
                raise PresentationError(f"invalid generator name {name!r}", code="BAD_NAME")
            if name in seen:
                raise PresentationError(f"duplicate generator {name!r}", code="DUPLICATE_GENERATOR")
            seen.add(name)
        for idx, rel in enumerate(self.relators):
            for letter in rel:
                if letter.gen not in seen:
                    raise PresentationError(
                        f"relator {idx} uses undeclared generator {letter.gen!r}",
                        code="UNDECLARED_GENERATOR")

    @property
    def generator_set(self) -> frozenset[str]:
        return frozenset(self.generators)


@dataclass(frozen=True)
class WordStats:
    exponent_sum: Mapping[str, int]
    total_exponent_sum: int
    proper_power_period: Optional[int]
    support: frozenset[str]
    occurrence_count: Mapping[str, int]


def word_stats(w: Word) -> WordStats:
    """Exponent sums, occurrence counts, support and proper-power period.

    The period is the smallest d < |w| with w equal to its rotation by d
    (equivalently w = u^(|w|/d) for the length-d prefix u); it is None when
    w is not a proper power.  Only meaningful for cyclically reduced words.
    """
    exponent: dict[str, int] = {}
    occurrence: dict[str, int] = {}
    for letter in w:
        exponent[letter.gen] = exponent.get(letter.gen, 0) + letter.sign
        occurrence[letter.gen] = occurrence.get(letter.gen, 0) + 1
    period = None
    n = len(w)
    for d in range(1, n):
        if n % d == 0 and rotate_word(w, d) == w:
            period = d
            break
    return WordStats(
        exponent_sum=exponent,
        total_exponent_sum=sum(l.sign for l in w),
        proper_power_period=period,
        support=word_support(w),
        occurrence_count=occurrence,
    )


def subpresentation(p: Presentation, subset: Iterable[str]) -> Presentation:
    """The sub-presentation carried by a generator subset.

    Keeps exactly the relators whose support lies inside the subset, in
    their original order; generator order is inherited from p.
    """
    s = frozenset(subset)
    unknown = s - p.generator_set
    if unknown:
        raise PresentationError(f"subset contains undeclared generators {sorted(unknown)}",
                                code="UNDECLARED_GENERATOR")
    gens = tuple(g for g in p.generators if g in s)
    rels = tuple(r for r in p.relators if word_support(r) <= s)
    return Presentation(gens, rels)


def free_edge_generators(p: Presentation) -> frozenset[str]:
    """Generators that occur exactly once in total across all relators."""
    counts: dict[str, int] = {g: 0 for g in p.generators}
    for rel in p.relators:
        for letter in rel:
            counts[letter.gen] += 1
    return frozenset(g for g, c in counts.items() if c == 1)


@dataclass(frozen=True)
class RelativePresentationData:
    """A relative presentation, flattened: a base presentation for the
    coefficient group plus relator templates alternating new-generator
    letters with words over the base generators."""

    base_presentation: Presentation
    new_generators: tuple[str, ...]
    relator_templates: tuple[tuple[tuple[Letter, Word], ...], ...]

    def __post_init__(self):
        new = frozenset(self.new_generators)
        base = self.base_presentation.generator_set
        for name in self.new_generators:
            if not _NAME_RE.match(name):
                raise PresentationError(f"invalid generator name {name!r}", code="BAD_NAME")
        for t_idx, template in enumerate(self.relator_templates):
            for letter, coeff_word in template:
                if letter.gen not in new:
                    raise PresentationError(
                        f"template {t_idx}: letter {letter} is not over the new generators",
                        code="BAD_TEMPLATE")
                for cl in coeff_word:
                    if cl.gen not in base:
                        raise PresentationError(
                            f"template {t_idx}: coefficient word uses {cl.gen!r}, "
                            "not a base generator", code="BAD_TEMPLATE")


def inflate_relative(data: RelativePresentationData) -> Presentation:
    """Turn a relative presentation into an ordinary one.

    The base relators come first, then one relator per template with every
    coefficient replaced by its chosen representative word.
    """
    base = data.base_presentation
    collision = set(base.generators) & set(data.new_generators)
    if collision:
        raise PresentationError(
            f"generator names {sorted(collision)} collide between base and new generators",
            code="GENERATOR_COLLISION")
    gens = base.generators + data.new_generators
    rels = list(base.relators)
    for template in data.relator_templates:
        word: list[Letter] = []
        for letter, coeff_word in template:
            word.append(letter)
            word.extend(coeff_word)
        rels.append(tuple(word))
    return Presentation(gens, tuple(rels))


def _parse_letter_tokens(tokens: Sequence[tuple[str, int, int]]) -> Word:
    # tokens: (text, line, column); exponent shorthand g^k expands to |k| letters
    out: list[Letter] = []
    for text, line, col in tokens:
        m = _TOKEN_RE.match(text)
        if not m:
            raise PresentationError(f"cannot parse token {text!r}", code="SYNTAX",
                                    line=line, column=col)
        name, _, exp = m.groups()
        if exp is None:
            out.append(Letter(name, 1))
            continue
        k = int(exp)
        if k == 0:
            raise PresentationError(f"zero exponent in token {text!r}", code="SYNTAX",
                                    line=line, column=col)
        out.extend(Letter(name, 1 if k > 0 else -1) for _ in range(abs(k)))
    return tuple(out)


def parse_word(text: str) -> Word:
    """Parse a standalone word like "a b^-1 c^2" (no generator checking)."""
    tokens = [(m.group(0), 1, m.start() + 1) for m in re.finditer(r"\S+", text)]
    return _parse_letter_tokens(tokens)


def _significant_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = [(m.group(0), lineno, m.start() + 1) for m in re.finditer(r"\S+", line)]
        if tokens:
            yield lineno, tokens


def parse_presentation(text: str) -> Presentation:
    """Parse the presentation text format.

    Grammar: `#` starts a comment; exactly one `gens:` line listing the
    generators; one or more `rel:` lines, each a nonempty relator given as
    whitespace-separated tokens `g`, `g^-1` or `g^k` (k a nonzero integer,
    expanded letter by letter).
    """
    generators: tuple[str, ...] | None = None
    relators: list[Word] = []
    for lineno, tokens in _significant_lines(text):
        head, line_, col = tokens[0]
        if head == "gens:":
            if generators is not None:
                raise PresentationError("second gens: line", code="SYNTAX", line=lineno, column=col)
            names = []
            for name, _, ncol in tokens[1:]:
                if not _NAME_RE.match(name):
                    raise PresentationError(f"invalid generator name {name!r}", code="BAD_NAME",
                                            line=lineno, column=ncol)
                names.append(name)
            generators = tuple(names)
        elif head == "rel:":
            if generators is None:
                raise PresentationError("rel: line before gens: line", code="SYNTAX",
                                        line=lineno, column=col)
            if len(tokens) == 1:
                raise PresentationError("empty relator", code="EMPTY_RELATOR",
                                        line=lineno, column=col)
            word = _parse_letter_tokens(tokens[1:])
            for letter, (tok, _, tcol) in zip(word, _expand_token_positions(tokens[1:])):
                if letter.gen not in generators:
                    raise PresentationError(f"undeclared generator {letter.gen!r}",
                                            code="UNDECLARED_GENERATOR", line=lineno, column=tcol)
            relators.append(word)
        else:
            raise PresentationError(f"unrecognized directive {head!r}", code="SYNTAX",
                                    line=lineno, column=col)
    if generators is None:
        raise PresentationError("missing gens: line", code="SYNTAX")
    return Presentation(generators, tuple(relators))


def _expand_token_positions(tokens):
    # mirror the letter expansion so error positions line up with letters
    for text, line, col in tokens:
        m = _TOKEN_RE.match(text)
        if not m:
            yield (text, line, col)
            continue
        _, _, exp = m.groups()
        count = 1 if exp is None else max(abs(int(exp)), 1)
        for _ in range(count):
            yield (text, line, col)


def serialize_presentation(p: Presentation) -> str:
    """Serialize to the same grammar, one relator per line, letter by letter."""
    lines = ["gens: " + " ".join(p.generators)]
    for rel in p.relators:
        lines.append("rel: " + " ".join(str(l) for l in rel))
    return "\n".join(lines) + "\n"


def presentation_digest(p: Presentation) -> str:
    return hashlib.sha256(serialize_presentation(p).encode("utf-8")).hexdigest()
