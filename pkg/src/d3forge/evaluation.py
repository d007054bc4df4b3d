"""Scoring external predictions and tabulating datasets.

Every tally is an exact integer count; rates are :class:`Fraction` values
until they are formatted for output.
"""

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DataError, SchemaError, VocabularyError
from .vocab import (
    ANSWER_VOCAB,
    ATTR_TYPES,
    ATTRIBUTE_VALUES,
    FAMILIES,
    FIELD_TO_TYPE,
    FILTER_OPS,
    answer_to_str,
)


@dataclass(frozen=True)
class PredictionRecord:
    question_id: str
    answer: str

    def __post_init__(self):
        if not isinstance(self.question_id, str):
            raise SchemaError(f"question_id must be a string, got {self.question_id!r}")
        if self.answer not in ANSWER_VOCAB:
            raise VocabularyError(f"prediction for {self.question_id}: answer {self.answer!r} not in vocabulary")

    def to_json(self):
        return {"question_id": self.question_id, "answer": self.answer}

    @classmethod
    def from_json(cls, data):
        if not isinstance(data, dict) or set(data) != {"question_id", "answer"}:
            raise SchemaError(f"prediction must have exactly question_id and answer: {data!r}")
        return cls(data["question_id"], data["answer"])


@dataclass
class Tally:
    correct: int = 0
    n: int = 0

    @property
    def accuracy(self):
        return Fraction(self.correct, self.n) if self.n else None

    def add(self, ok):
        self.correct += int(ok)
        self.n += 1

    def to_json(self):
        acc = self.accuracy
        return {"n": self.n, "correct": self.correct, "accuracy": None if acc is None else float(acc)}


@dataclass
class EvalReport:
    set_name: str
    n: int
    correct: int
    missing: int
    per_family: dict = field(default_factory=dict)
    per_hop: dict = field(default_factory=dict)

    @property
    def accuracy(self):
        if self.n == 0:
            raise DataError(f"{self.set_name}: accuracy over zero scored records")
        return Fraction(self.correct, self.n)

    def to_json(self):
        return {
            "set_name": self.set_name,
            "n": self.n,
            "correct": self.correct,
            "accuracy": float(self.accuracy),
            "missing_predictions": self.missing,
            "per_family": {k: v.to_json() for k, v in self.per_family.items()},
            "per_hop": {str(k): v.to_json() for k, v in self.per_hop.items()},
        }


def index_predictions(preds, gold_ids=None):
    """``{question_id: answer}``; duplicate or unknown ids are input errors."""
    out = {}
    for p in preds:
        if p.question_id in out:
            raise DataError(f"duplicate prediction for question {p.question_id!r}")
        if gold_ids is not None and p.question_id not in gold_ids:
            raise DataError(f"prediction for unknown question {p.question_id!r}")
        out[p.question_id] = p.answer
    return out


def score(preds, gold, set_name=None, strict=True):
    """Exact-match accuracy of ``preds`` on ``gold``.

    In strict mode a gold record without a prediction counts as wrong; with
    ``strict=False`` it is left out of every denominator. ``missing`` is
    reported either way.
    """
    gold = list(gold)
    if not gold:
        raise DataError("cannot score against an empty gold set")
    if set_name is None:
        set_name = gold[0].source_set
    answers = index_predictions(preds, {r.id for r in gold})
    report = EvalReport(set_name, 0, 0, 0)
    per_family = defaultdict(Tally)
    per_hop = defaultdict(Tally)
    for r in gold:
        got = answers.get(r.id)
        if got is None:
            report.missing += 1
            if not strict:
                continue
        ok = got == answer_to_str(r.answer)
        report.n += 1
        report.correct += ok
        per_family[r.family].add(ok)
        per_hop[r.hop].add(ok)
    if report.n == 0:
        raise DataError(f"{set_name}: no gold record has a prediction")
    report.per_family = {f: per_family[f] for f in FAMILIES if f in per_family}
    report.per_hop = dict(sorted(per_hop.items()))
    return report


@dataclass
class Heatmap:
    rows: list
    cols: list
    cells: list

    def to_csv_rows(self):
        """Header of test-set names, then one row per D3 set in percentage points."""
        out = [["d3_set", *self.cols]]
        for name, row in zip(self.rows, self.cells):
            out.append([name, *(f"{float(c * 100):+.2f}" for c in row)])
        return out


def delta_heatmap(base, variants):
    """Accuracy change of each variant over ``base``, one row per variant.

    ``base`` is a list of reports, one per test set; every variant must
    list the same test sets in the same order. Cells are exact fractions.
    """
    cols = [r.set_name for r in base]
    if len(set(cols)) != len(cols):
        raise DataError("base reports repeat a test set")
    rows, cells = [], []
    for name, reports in variants.items():
        names = [r.set_name for r in reports]
        if names != cols:
            raise DataError(f"{name}: test sets {names} do not align with base {cols}")
        rows.append(name)
        cells.append([v.accuracy - b.accuracy for v, b in zip(reports, base)])
    return Heatmap(rows, cols, cells)


def single_filter(record):
    """The ``(attribute type, value)`` of a record's only filter."""
    filters = [n for n in record.program.nodes if n.op in FILTER_OPS]
    if len(filters) != 1:
        raise DataError(f"record {record.id} has {len(filters)} filter nodes; expected exactly one")
    node = filters[0]
    return FIELD_TO_TYPE[FILTER_OPS[node.op]], node.arg


def attribute_breakdown(preds, gold):
    """Accuracy per (attribute type, value) on a single-attribute dataset.

    Missing predictions count as wrong. Groups are returned in vocabulary
    order and only for values that occur.
    """
    gold = list(gold)
    keys = [single_filter(r) for r in gold]
    answers = index_predictions(preds, {r.id for r in gold})
    table = defaultdict(Tally)
    for r, key in zip(gold, keys):
        table[key].add(answers.get(r.id) == answer_to_str(r.answer))
    order = [(t, v) for t, f in ATTR_TYPES.items() for v in ATTRIBUTE_VALUES[f]]
    return {k: table[k] for k in order if k in table}


@dataclass
class DiversityStats:
    """``cooccurrence[family][attr_type]`` counts records of the family that
    filter on the attribute type; ``no_attribute[family]`` counts those
    that filter on nothing."""

    cooccurrence: dict
    no_attribute: dict
    hop_histogram: dict
    signature_coverage: list
    family_counts: dict

    def to_json(self):
        return {
            "cooccurrence": self.cooccurrence,
            "no_attribute": self.no_attribute,
            "hop_histogram": {str(k): v for k, v in self.hop_histogram.items()},
            "signature_coverage": [s.to_json() for s in self.signature_coverage],
            "family_counts": self.family_counts,
        }


def diversity_stats(ds):
    co = {f: Counter() for f in FAMILIES}
    none = Counter()
    hops = Counter()
    families = Counter()
    signatures = set()
    for r in ds:
        families[r.family] += 1
        hops[r.hop] += 1
        signatures.add(r.signature)
        types = set(r.signature.attrs)
        if not types:
            none[r.family] += 1
        for t in types:
            co[r.family][t] += 1
    present = [f for f in FAMILIES if families[f]]
    return DiversityStats(
        cooccurrence={f: {t: co[f][t] for t in ATTR_TYPES} for f in present},
        no_attribute={f: none[f] for f in present},
        hop_histogram=dict(sorted(hops.items())),
        signature_coverage=sorted(signatures),
        family_counts={f: families[f] for f in present},
    )
