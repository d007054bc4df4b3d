"""Question templates, surface realization and the inverse parser.

Every template family has a small set of rigid skeletons; the only free
choices during rendering are the skeleton variant and the synonym used for
each token. The parser accepts exactly the union of those skeletons and
returns the canonical program, so ``parse(render(p)) == canonicalize(p)``.

Skeletons (``NP`` singular noun phrase, ``NPs`` plural, ``R`` relation)::

    Count   How many|What number of NPs are there|are in the image ?
            How many|What number of NPs are R the NP (that is R the NP)* ?
    Exist   Is there a NP [in the image] ?       Are there any NPs ?
            Is there a NP that is R the NP (that is R the NP)* ?
            Are there any NPs that are R the NP (that is R the NP)* ?
    Equal   Does the NP have the same ATTR as the NP [in the image] ?
            Is the NP the same ATTR as the NP ?

A noun phrase is ``[size] [color] [material] (shape | object)``.
"""

from dataclasses import dataclass, field

from .errors import ParseError, VocabularyError
from .program import chain_program, compare_program
from .seeds import as_rng
from .vocab import (
    ATTR_TYPES,
    ATTRIBUTE_VALUES,
    CANONICAL_ATTR_ORDER,
    EQUAL_FAMILIES,
    EQUAL_OPS,
    FAMILY_TO_ROOT_OP,
    FILTER_OPS,
    ROOT_OP_TO_FAMILY,
)

NOUN = "object"
ADJECTIVE_FIELDS = ("size", "color", "material")
RELATION_PHRASES = {
    "left": ("left", "of"),
    "right": ("right", "of"),
    "front": ("in", "front", "of"),
    "behind": ("behind",),
}
ATTR_WORDS = {field: field for field in ATTRIBUTE_VALUES}

DEFAULT_SYNONYMS = {
    **{c: (c,) for c in ATTRIBUTE_VALUES["color"]},
    "large": ("large", "big"),
    "small": ("small", "tiny"),
    "rubber": ("rubber", "matte"),
    "metal": ("metal", "shiny"),
    "cube": ("cube", "block"),
    "sphere": ("sphere", "ball"),
    "cylinder": ("cylinder",),
    NOUN: ("object", "thing"),
}


@dataclass(frozen=True)
class SynonymTable:
    forms: dict = field(default_factory=lambda: dict(DEFAULT_SYNONYMS))

    def __post_init__(self):
        reverse = {}
        for canonical, surfaces in self.forms.items():
            if not surfaces:
                raise VocabularyError(f"no surface form for {canonical!r}")
            for s in surfaces:
                if s in reverse and reverse[s] != canonical:
                    raise VocabularyError(f"surface {s!r} maps to both {reverse[s]!r} and {canonical!r}")
                reverse[s] = canonical
        object.__setattr__(self, "_reverse", reverse)

    def surface(self, token, rng):
        surfaces = self.forms.get(token)
        if not surfaces:
            raise VocabularyError(f"no surface form for {token!r}")
        return surfaces[0] if len(surfaces) == 1 else rng.choice(surfaces)

    def canonical(self, surface):
        return self._reverse.get(surface)


DEFAULT_SYNONYM_TABLE = SynonymTable()

_CANONICAL_FIELD_ORDER = tuple(ATTR_TYPES[t] for t in CANONICAL_ATTR_ORDER)


def canonical_group(group):
    return tuple(sorted(group, key=lambda fv: (_CANONICAL_FIELD_ORDER.index(fv[0]), fv[1])))


@dataclass(frozen=True)
class Template:
    """A question family at a fixed hop count with a fixed number of
    attribute filters on each object group (subject first)."""

    family: str
    hop: int
    attr_slots_per_object: tuple

    def __post_init__(self):
        object.__setattr__(self, "attr_slots_per_object", tuple(self.attr_slots_per_object))
        groups = 2 if self.family in EQUAL_FAMILIES else self.hop + 1
        if len(self.attr_slots_per_object) != groups:
            raise ValueError(f"{self.family} at hop {self.hop} needs {groups} slot entries")
        if self.family in EQUAL_FAMILIES and self.hop != 0:
            raise ValueError("comparison templates have no relations")

    @property
    def n_variants(self):
        if self.family == "Count":
            return 4 if self.hop == 0 else 2
        if self.family == "Exist":
            return 3 if self.hop == 0 else 2
        return 3

    def matches(self, structure):
        if structure.family != self.family or len(structure.relations) != self.hop:
            return False
        return tuple(len(g) for g in structure.groups) == self.attr_slots_per_object

    def __str__(self):
        return f"{self.family}/{self.hop}hop/{'-'.join(map(str, self.attr_slots_per_object))}"


@dataclass(frozen=True)
class Structure:
    """A program in template terms: object groups, relations and family."""

    family: str
    groups: tuple
    relations: tuple

    def to_program(self):
        groups = tuple(canonical_group(g) for g in self.groups)
        if self.family in EQUAL_FAMILIES:
            return compare_program(groups[0], groups[1], ATTR_TYPES[EQUAL_FAMILIES[self.family]])
        return chain_program(groups, self.relations, FAMILY_TO_ROOT_OP[self.family])


def decompose(p):
    """Recover the template structure of a chain or comparison program."""
    nodes = p.nodes
    root = nodes[-1]
    family = ROOT_OP_TO_FAMILY.get(root.op)
    if family is None:
        raise VocabularyError(f"root op {root.op!r} has no template")

    def walk_segment(k):
        # Walk filters back from node k to the segment start; returns
        # (filters in program order, index of the segment start node).
        group = []
        while nodes[k].op in FILTER_OPS:
            group.append((FILTER_OPS[nodes[k].op], nodes[k].arg))
            (k,) = nodes[k].inputs
        return tuple(reversed(group)), k

    if root.op in EQUAL_OPS:
        groups = []
        for q in root.inputs:
            (u,) = nodes[q].inputs
            if nodes[u].op != "unique":
                raise VocabularyError("comparison branch does not end in unique")
            group, start = walk_segment(nodes[u].inputs[0])
            if nodes[start].op != "scene":
                raise VocabularyError("comparison branch does not start at scene")
            groups.append(group)
        return Structure(family, tuple(groups), ())
    groups, relations = [], []
    (k,) = root.inputs
    while True:
        group, start = walk_segment(k)
        groups.append(group)
        if nodes[start].op == "scene":
            break
        if nodes[start].op != "relate":
            raise VocabularyError(f"unexpected {nodes[start].op!r} in chain")
        relations.append(nodes[start].arg)
        (u,) = nodes[start].inputs
        if nodes[u].op != "unique":
            raise VocabularyError("relate input is not a unique node")
        (k,) = nodes[u].inputs
    return Structure(family, tuple(groups), tuple(relations))


def _np(group, syn, rng, plural=False):
    by_field = {}
    for f, v in group:
        by_field.setdefault(f, []).append(v)
    words = []
    for f in ("size", "color", "material"):
        words.extend(syn.surface(v, rng) for v in by_field.get(f, ()))
    shapes = by_field.get("shape", [])
    nouns = [syn.surface(v, rng) for v in shapes] or [syn.surface(NOUN, rng)]
    words.extend(nouns[:-1])
    words.append(nouns[-1] + ("s" if plural else ""))
    return " ".join(words)


def _article(phrase):
    return "an" if phrase[0] in "aeiou" else "a"


def _rel(r):
    return " ".join(RELATION_PHRASES[r])


def render_text(bound, t, syn=DEFAULT_SYNONYM_TABLE, seed=0):
    structure = decompose(bound)
    if not t.matches(structure):
        raise VocabularyError(f"program does not fit template {t}")
    rng = as_rng(seed)
    variant = rng.randrange(t.n_variants)
    groups, rels = structure.groups, structure.relations
    if t.family in EQUAL_FAMILIES:
        a, b = _np(groups[0], syn, rng), _np(groups[1], syn, rng)
        attr = ATTR_WORDS[ATTR_TYPES[EQUAL_FAMILIES[t.family]]]
        if variant == 2:
            return f"Is the {a} the same {attr} as the {b}?"
        tail = " in the image" if variant == 1 else ""
        return f"Does the {a} have the same {attr} as the {b}{tail}?"
    chain = "".join(
        f" that is {_rel(rels[k])} the {_np(groups[k + 1], syn, rng)}" for k in range(1, len(rels))
    )
    first = f"{_rel(rels[0])} the {_np(groups[1], syn, rng)}" if rels else ""
    if t.family == "Count":
        head = ("How many", "What number of")[variant % 2]
        subject = _np(groups[0], syn, rng, plural=True)
        if not rels:
            return f"{head} {subject} {('are there', 'are in the image')[variant // 2]}?"
        return f"{head} {subject} are {first}{chain}?"
    if variant == (2 if not rels else 1):
        subject = _np(groups[0], syn, rng, plural=True)
        return f"Are there any {subject}" + (f" that are {first}{chain}?" if rels else "?")
    subject = _np(groups[0], syn, rng)
    if not rels:
        tail = " in the image" if variant == 1 else ""
        return f"Is there {_article(subject)} {subject}{tail}?"
    return f"Is there {_article(subject)} {subject} that is {first}{chain}?"


class _Parser:
    def __init__(self, text, syn):
        stripped = text.strip()
        mark = ["?"] if stripped.endswith("?") else []
        self.tokens = stripped.rstrip("?").lower().split() + mark
        self.pos = 0
        self.syn = syn

    def peek(self, offset=0):
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def fail(self, message):
        raise ParseError(message, self.pos)

    def expect(self, *words):
        for w in words:
            if self.peek() != w:
                self.fail(f"expected {w!r}, found {self.peek()!r}")
            self.pos += 1

    def accept(self, *words):
        if tuple(self.tokens[self.pos:self.pos + len(words)]) == words:
            self.pos += len(words)
            return True
        return False

    def at_end(self):
        return self.peek() in (None, "?")

    def end(self):
        if self.peek() != "?":
            self.fail(f"expected '?', found {self.peek()!r}")
        self.pos += 1
        if self.pos != len(self.tokens):
            self.fail(f"unexpected trailing token {self.peek()!r}")

    def noun_phrase(self, plural=False):
        group = []
        while True:
            tok = self.peek()
            if tok is None:
                self.fail("noun phrase ended without a noun")
            canonical = self.syn.canonical(tok)
            if canonical is not None and canonical != NOUN and canonical not in ATTRIBUTE_VALUES["shape"]:
                group.append((_field_of(canonical), canonical))
                self.pos += 1
                continue
            noun = tok
            if plural:
                if not tok.endswith("s"):
                    self.fail(f"expected a plural noun, found {tok!r}")
                noun = tok[:-1]
            canonical = self.syn.canonical(noun)
            if canonical is None or not (canonical == NOUN or canonical in ATTRIBUTE_VALUES["shape"]):
                self.fail(f"unrecognized word {tok!r}")
            if canonical != NOUN:
                group.append(("shape", canonical))
            self.pos += 1
            return tuple(group)

    def relation(self):
        for r, phrase in RELATION_PHRASES.items():
            if self.accept(*phrase):
                return r
        self.fail(f"expected a relation, found {self.peek()!r}")

    def chain_tail(self, first_linker):
        groups, rels = [], []
        linker = first_linker
        while True:
            rels.append(self.relation())
            self.expect("the")
            groups.append(self.noun_phrase())
            if self.at_end():
                self.end()
                return groups, rels
            self.expect(*linker)
            linker = ("that", "is")

    def attr_word(self):
        tok = self.peek()
        for f, word in ATTR_WORDS.items():
            if tok == word:
                self.pos += 1
                return f
        self.fail(f"expected an attribute name, found {tok!r}")

    def question(self):
        if self.accept("how", "many") or self.accept("what", "number", "of"):
            subject = self.noun_phrase(plural=True)
            self.expect("are")
            if self.accept("there") or self.accept("in", "the", "image"):
                self.end()
                return Structure("Count", (subject,), ())
            groups, rels = self.chain_tail(("that", "is"))
            return Structure("Count", (subject, *groups), tuple(rels))
        if self.accept("is", "there"):
            if not (self.accept("a") or self.accept("an")):
                self.fail("expected an article")
            subject = self.noun_phrase()
            if self.at_end() or self.accept("in", "the", "image"):
                self.end()
                return Structure("Exist", (subject,), ())
            self.expect("that", "is")
            groups, rels = self.chain_tail(("that", "is"))
            return Structure("Exist", (subject, *groups), tuple(rels))
        if self.accept("are", "there", "any"):
            subject = self.noun_phrase(plural=True)
            if self.at_end():
                self.end()
                return Structure("Exist", (subject,), ())
            self.expect("that", "are")
            groups, rels = self.chain_tail(("that", "is"))
            return Structure("Exist", (subject, *groups), tuple(rels))
        if self.accept("does", "the"):
            a = self.noun_phrase()
            self.expect("have", "the", "same")
            f = self.attr_word()
            self.expect("as", "the")
            b = self.noun_phrase()
            self.accept("in", "the", "image")
            self.end()
            return Structure(_equal_family(f), (a, b), ())
        if self.accept("is", "the"):
            a = self.noun_phrase()
            self.expect("the", "same")
            f = self.attr_word()
            self.expect("as", "the")
            b = self.noun_phrase()
            self.end()
            return Structure(_equal_family(f), (a, b), ())
        self.fail("unrecognized question form")


def _field_of(value):
    for f, values in ATTRIBUTE_VALUES.items():
        if value in values:
            return f
    raise VocabularyError(f"{value!r} is not an attribute value")


def _equal_family(field):
    for family, attr_type in EQUAL_FAMILIES.items():
        if ATTR_TYPES[attr_type] == field:
            return family
    raise VocabularyError(field)


def parse_question(text, syn=DEFAULT_SYNONYM_TABLE):
    return _Parser(text, syn).question().to_program()
